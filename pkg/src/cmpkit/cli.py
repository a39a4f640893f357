"""Command-line front end.

Subcommands: ``spectrum`` (S-quantity traces), ``sweep`` (parameter
sweeps or bundled presets), ``ep`` (exceptional-point location),
``cpa-check`` (balance residuals, required feed, regime), ``fit``
(parameter extraction from a spectrum CSV).

Report paths are extension-less bases: ``--out out/run`` writes
``out/run.csv``, ``out/run.json`` and ``out/run.svg`` side by side.
Exit codes: 0 success, 2 configuration or input errors, 3 numerical
failures (bad bracket, non-convergent fit).  With ``--json-errors`` the
error is also emitted as one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ._version import __version__
from .config import RunConfig, build_probe_freqs, build_sweep_spec, load_config, resolve_feed
from .dataio import (
    export_csv,
    export_csv_set,
    export_fit_json,
    export_json,
    export_minima_csv,
    load_spectrum_csv,
    _dump_json,
)
from .errors import ConfigError, IdentifiabilityError, NumericsError
from .fitting import coupled_model, fit_coupled, fit_lorentzian, lorentzian
from .model import classify_regime, cpa_eigenfrequencies, pt_residuals
from .plots import render_fit, render_minima, render_sweep, render_sweep_set
from .presets import PRESETS, run_preset
from .scattering import cpa_feed_conditions
from .sweeps import (
    SweepSpec,
    find_exceptional_point,
    linear_grid,
    sweep_displacement,
    sweep_field,
    sweep_phase,
    sweep_ratio,
)

__all__ = ["main"]

_SWEEP_RUNNERS = {
    "omega_m": sweep_field,
    "x": sweep_displacement,
    "delta_phi": sweep_phase,
    "q": sweep_ratio,
}


def _freq_range(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected LO:HI:STEP in GHz")
    try:
        lo, hi, step = (float(part) for part in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric frequency range {text!r}") from None
    return lo, hi, step


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmpkit",
        description="coupled cavity-magnon scattering toolkit",
    )
    parser.add_argument("--version", action="version", version=f"cmpkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, out_help: str) -> None:
        p.add_argument("--config", help="INI config file (defaults apply when omitted)")
        p.add_argument("--out", help=out_help)
        p.add_argument("--seed", type=int, help="seed recorded with the outputs")
        p.add_argument("--threads", type=int, help="concurrent sweep columns (default 1)")
        p.add_argument(
            "--json-errors",
            action="store_true",
            help="emit failures as one JSON object on stderr",
        )

    p = sub.add_parser("spectrum", help="S-quantity traces at fixed parameters")
    common(p, "output base path (writes <base>_<quantity>.csv, <base>.json, <base>.svg)")
    p.add_argument(
        "--freq-range",
        type=_freq_range,
        metavar="LO:HI:STEP",
        help="probe grid in GHz, overriding the [probe] section",
    )
    p.set_defaults(func=cmd_spectrum)

    preset_lines = "; ".join(f"{pid}: {text}" for pid, text in sorted(PRESETS.items()))
    p = sub.add_parser(
        "sweep",
        help="run a configured sweep or a bundled preset",
        description=f"Presets: {preset_lines}",
    )
    common(p, "output base path (writes <base>.csv, <base>.json, <base>.svg)")
    p.add_argument("--figure", choices=sorted(PRESETS), help="bundled preset id")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ep", help="locate the exceptional point along the rod axis")
    common(p, "optional JSON report path")
    p.set_defaults(func=cmd_ep)

    p = sub.add_parser(
        "cpa-check", help="balance residuals, required feed and coupling regime"
    )
    common(p, "optional JSON report path")
    p.set_defaults(func=cmd_cpa_check)

    p = sub.add_parser("fit", help="fit a model to a spectrum CSV")
    p.add_argument("data", help="CSV file: freq_GHz,re,im or freq_GHz,power_dB")
    common(p, "output base path (writes <base>.json and <base>.svg)")
    p.set_defaults(func=cmd_fit)

    return parser


def _strip_ext(path: str) -> str:
    for ext in (".csv", ".json", ".svg"):
        if path.endswith(ext):
            return path[: -len(ext)]
    return path


def _out_base(args, cfg: RunConfig) -> str:
    out = args.out or cfg.out
    if not out:
        raise ConfigError("no output path: pass --out or set out in [run]")
    return _strip_ext(out)


def _effective(args, cfg: RunConfig):
    threads = args.threads if args.threads is not None else cfg.threads
    if threads < 1:
        raise ConfigError("--threads must be >= 1")
    seed = args.seed if args.seed is not None else cfg.seed
    return threads, seed


def _stamp(results, seed) -> None:
    for result in results:
        result.metadata["seed"] = seed


def cmd_spectrum(args) -> int:
    cfg = load_config(args.config)
    threads, seed = _effective(args, cfg)
    base = _out_base(args, cfg)
    if args.freq_range is not None:
        lo, hi, step = args.freq_range
        freqs = linear_grid(lo * 1e3, hi * 1e3, step * 1e3)
    else:
        freqs = build_probe_freqs(cfg)
    members = []
    for quantity in cfg.quantities:
        spec = SweepSpec(
            parameter="omega_m",
            values=np.array([cfg.params.omega_m]),
            freqs=freqs,
            params=cfg.params,
            quantity=quantity,
            feed=resolve_feed(cfg) if quantity == "total" else None,
        )
        result = sweep_field(spec, threads)
        result.metadata["label"] = quantity
        members.append(result)
    _stamp(members, seed)
    written = []
    for result in members:
        path = f"{base}_{result.quantity}.csv"
        export_csv(result, path)
        written.append(path)
    export_json(members, f"{base}.json")
    render_sweep_set(members, f"{base}.svg")
    written += [f"{base}.json", f"{base}.svg"]
    for path in written:
        print(f"wrote {path}")
    return 0


def _write_preset(output, base: str) -> list:
    written = []
    if output.kind == "sweep":
        result = output.sweeps[0]
        export_csv(result, f"{base}.csv")
        export_json(result, f"{base}.json")
        render_sweep(result, f"{base}.svg")
        written = [f"{base}.csv", f"{base}.json", f"{base}.svg"]
    elif output.kind == "sweep_set":
        export_csv_set(output.sweeps, f"{base}.csv")
        export_json(list(output.sweeps), f"{base}.json")
        render_sweep_set(output.sweeps, f"{base}.svg")
        written = [f"{base}.csv", f"{base}.json", f"{base}.svg"]
    elif output.kind == "minima":
        export_minima_csv(output.minima, f"{base}.csv")
        export_json(output.minima, f"{base}.json")
        render_minima(output.minima, f"{base}.svg")
        written = [f"{base}.csv", f"{base}.json", f"{base}.svg"]
    elif output.kind == "fit":
        export_csv(output.sweeps[0], f"{base}.csv")
        export_fit_json(output.fit, f"{base}.json")
        render_fit(output.dataset, output.model_values, f"{base}.svg")
        written = [f"{base}.csv", f"{base}.json", f"{base}.svg"]
    return written


def cmd_sweep(args) -> int:
    if args.figure and args.config:
        raise ConfigError("--figure presets are self-contained; drop --config")
    cfg = load_config(args.config)
    threads, seed = _effective(args, cfg)
    base = _out_base(args, cfg)
    if args.figure:
        output = run_preset(args.figure, threads)
        _stamp(output.sweeps, seed)
        written = _write_preset(output, base)
    else:
        if cfg.sweep is None:
            raise ConfigError("config has no [sweep] section and no --figure given")
        spec = build_sweep_spec(cfg)
        result = _SWEEP_RUNNERS[spec.parameter](spec, threads)
        _stamp((result,), seed)
        export_csv(result, f"{base}.csv")
        export_json(result, f"{base}.json")
        render_sweep(result, f"{base}.svg")
        written = [f"{base}.csv", f"{base}.json", f"{base}.svg"]
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_ep(args) -> int:
    cfg = load_config(args.config)
    point = find_exceptional_point(cfg.params, cfg.coupling, cfg.ep_bracket)
    print(f"exceptional point: x = {point.x_mm:.4f} mm")
    print(f"coupling at the exceptional point: g = {point.g_m:.4f} MHz")
    if args.out:
        _dump_json(
            {
                "schema": "cmpkit.ep/1",
                "version": __version__,
                "x_mm": point.x_mm,
                "g_m_MHz": point.g_m,
                "bracket_mm": list(cfg.ep_bracket),
                "gamma_m_MHz": cfg.params.gamma_m,
            },
            args.out,
        )
        print(f"wrote {args.out}")
    return 0


def cmd_cpa_check(args) -> int:
    cfg = load_config(args.config)
    p = cfg.params
    detuning, mismatch = pt_residuals(p)
    feed = cpa_feed_conditions(p)
    regime = classify_regime(p.g_m, p.kappa_c, p.gamma_m)
    print(f"detuning omega_c - omega_m = {detuning:.6g} MHz")
    print(
        "rate mismatch (kappa_1 + kappa_2 - kappa_int) - gamma_m ="
        f" {mismatch:.2f} MHz"
    )
    print(f"required feed: delta_phi = 0.0 rad, q = kappa_1/kappa_2 = {feed.q:.4f}")
    print(
        f"regime: {regime.label} (g = {p.g_m:g} MHz, kappa_c = {p.kappa_c:g} MHz,"
        f" gamma_m = {p.gamma_m:g} MHz)"
    )
    pair = None
    omega_0 = 0.5 * (p.omega_c + p.omega_m)
    if p.g_m >= p.gamma_m:
        hi, lo = cpa_eigenfrequencies(omega_0, p.g_m, p.gamma_m)
        pair = (lo.re, hi.re)
        print(
            f"absorption pair at {lo.re:.4f} and {hi.re:.4f} MHz"
            f" (separation {hi.re - lo.re:.4f} MHz)"
        )
    else:
        print(
            "note: coupling below the magnon damping; no real absorption pair"
            " (broken-symmetry side)"
        )
    if args.out:
        _dump_json(
            {
                "schema": "cmpkit.cpa/1",
                "version": __version__,
                "detuning_MHz": detuning,
                "rate_mismatch_MHz": mismatch,
                "delta_phi": 0.0,
                "q": feed.q,
                "regime": regime.value,
                "absorption_pair_MHz": list(pair) if pair else None,
            },
            args.out,
        )
        print(f"wrote {args.out}")
    return 0


def cmd_fit(args) -> int:
    cfg = load_config(args.config)
    base = _out_base(args, cfg)
    dataset = load_spectrum_csv(args.data)
    if cfg.fit.model == "lorentzian":
        result = fit_lorentzian(dataset)
        model_values = lorentzian(dataset.freqs, **result.estimates)
    else:
        result = fit_coupled(
            dataset, fixed=cfg.fit.fixed, guess=cfg.params, free=cfg.fit.free
        )
        model_values = coupled_model(dataset.freqs, dataset.kind, result.estimates)
    export_fit_json(result, f"{base}.json")
    render_fit(dataset, model_values, f"{base}.svg")
    print(f"model: {result.model} ({len(result.estimates)} parameters,"
          f" {len(result.fixed)} fixed)")
    for name, value in result.estimates.items():
        err = result.stderr[name]
        err_text = "fixed" if name in result.fixed else f"+/- {err:.3g}"
        print(f"  {name} = {value:.6f} {err_text}")
    print(f"residual sum of squares: {result.rss:.6g}")
    print(f"wrote {base}.json")
    print(f"wrote {base}.svg")
    if not result.converged:
        raise NumericsError(
            f"fit did not converge; estimates in {base}.json are flagged"
            " non-authoritative"
        )
    return 0


def _fail(args, exc: BaseException, code: int) -> int:
    if getattr(args, "json_errors", False):
        doc = {
            "error": {
                "type": type(exc).__name__,
                "message": str(exc),
                "exit_code": code,
            }
        }
        print(json.dumps(doc), file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(args, exc, 2)
    except IdentifiabilityError as exc:
        return _fail(args, exc, 2)
    except NumericsError as exc:
        return _fail(args, exc, 3)
    except (ValueError, OSError) as exc:
        return _fail(args, exc, 2)


if __name__ == "__main__":
    sys.exit(main())
