"""Deterministic CSV and JSON serialization.

Every float is written with ``repr``, the shortest form that round-trips
to the same double, so re-importing an exported file reproduces the
arrays bit for bit.  CSV files begin with ``#`` comment lines that state
the schema, the quantity and the dB normalization.  JSON documents carry
a ``schema`` tag: ``cmpkit.sweep/1``, ``cmpkit.sweep-set/1``,
``cmpkit.minima/1`` or ``cmpkit.fit/1``.

Spectrum datasets for fitting are exchanged as CSV with either columns
``freq_GHz,re,im`` (complex wave amplitude) or ``freq_GHz,power_dB``
(power, which must state its 0 dB reference in a ``# db_reference``
comment line).
"""
from __future__ import annotations

import csv
import json
import math
import os
from typing import Sequence

import numpy as np

from ._version import __version__
from .sweeps import DB_FLOOR, MinimaTrace, Overlay, SweepResult

__all__ = [
    "bundled_dataset",
    "export_csv",
    "export_minima_csv",
    "export_json",
    "import_json",
    "sweep_to_dict",
    "sweep_from_dict",
    "minima_to_dict",
    "fit_to_dict",
    "export_fit_json",
    "load_spectrum_csv",
    "save_spectrum_csv",
]

SWEEP_CSV_COLUMNS = ("sweep_param", "sweep_value", "freq_MHz", "power", "power_dB")


def bundled_dataset(name: str = "synthetic_reflection.csv") -> str:
    """Filesystem path of a dataset shipped with the package."""
    from importlib.resources import files

    path = files("cmpkit").joinpath("data", name)
    if not path.is_file():
        raise FileNotFoundError(f"no bundled dataset named {name!r}")
    return str(path)


def _fmt(x) -> str:
    return repr(float(x))


def _db_comment(input_power) -> list[str]:
    lines = [
        f"# power_dB = 10*log10(power / input_power), floored at {DB_FLOOR:g} dB;"
        " 0 dB returns all injected power",
    ]
    if np.ndim(input_power) == 0:
        lines.append(f"# input_power = {_fmt(input_power)}")
    else:
        lines.append("# input_power = 1 + q, per sweep row")
    return lines


def _write_text(path, text: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def export_csv(result: SweepResult, path) -> None:
    """Write a sweep grid as long-form CSV.

    Columns are exactly ``sweep_param,sweep_value,freq_MHz,power,power_dB``
    with one row per (sweep value, probe frequency) pair, sweep-major.
    """
    db = result.power_db
    lines = [f"# cmpkit.sweep/1 v{__version__}", f"# quantity = {result.quantity}"]
    lines += _db_comment(result.input_power)
    lines.append(",".join(SWEEP_CSV_COLUMNS))
    name = result.sweep_param
    for i, sv in enumerate(result.sweep_values):
        sv_s = _fmt(sv)
        row_p = result.power[i]
        row_db = db[i]
        for j, f in enumerate(result.freqs):
            lines.append(
                f"{name},{sv_s},{_fmt(f)},{_fmt(row_p[j])},{_fmt(row_db[j])}"
            )
    _write_text(path, "\n".join(lines) + "\n")


def export_csv_set(results, path) -> None:
    """Write several sweeps of the same quantity into one long-form CSV.

    Members are distinguished by their rows' sweep/frequency values (for
    example phase sweeps at different probe stations).  Mixed quantities
    must go to separate files.
    """
    results = list(results)
    if not results:
        raise ValueError("empty sweep set")
    quantities = {r.quantity for r in results}
    if len(quantities) > 1:
        raise ValueError(
            "export_csv_set needs a uniform quantity; write separate files for"
            f" {sorted(quantities)}"
        )
    lines = [
        f"# cmpkit.sweep-set/1 v{__version__}",
        f"# quantity = {results[0].quantity}",
        f"# members = {len(results)}",
    ]
    scalar_inputs = {
        float(r.input_power) for r in results if np.ndim(r.input_power) == 0
    }
    if len(scalar_inputs) == 1 and all(np.ndim(r.input_power) == 0 for r in results):
        lines += _db_comment(scalar_inputs.pop())
    else:
        lines.append(
            f"# power_dB = 10*log10(power / input_power), floored at {DB_FLOOR:g} dB"
        )
        for k, r in enumerate(results):
            ip = r.input_power
            desc = _fmt(ip) if np.ndim(ip) == 0 else "1 + q, per sweep row"
            label = r.metadata.get("label", f"member {k}")
            lines.append(f"# input_power ({label}) = {desc}")
    lines.append(",".join(SWEEP_CSV_COLUMNS))
    for r in results:
        db = r.power_db
        for i, sv in enumerate(r.sweep_values):
            sv_s = _fmt(sv)
            for j, f in enumerate(r.freqs):
                lines.append(
                    f"{r.sweep_param},{sv_s},{_fmt(f)},{_fmt(r.power[i, j])},{_fmt(db[i, j])}"
                )
    _write_text(path, "\n".join(lines) + "\n")


def export_minima_csv(trace: MinimaTrace, path) -> None:
    """Write a minima trace as CSV (sweep columns plus a branch flag)."""
    lines = [f"# cmpkit.minima/1 v{__version__}"]
    lines += _db_comment(trace.input_power)
    lines.append(
        "# branch_averaged = 1 where the value is the mean of two absorption dips"
    )
    lines.append(",".join(SWEEP_CSV_COLUMNS + ("branch_averaged",)))
    for i, sv in enumerate(trace.sweep_values):
        lines.append(
            f"{trace.sweep_param},{_fmt(sv)},{_fmt(trace.freq_MHz[i])},"
            f"{_fmt(trace.power[i])},{_fmt(trace.power_db[i])},"
            f"{int(trace.branch_averaged[i])}"
        )
    _write_text(path, "\n".join(lines) + "\n")


def sweep_to_dict(result: SweepResult) -> dict:
    ip = result.input_power
    return {
        "schema": "cmpkit.sweep/1",
        "version": __version__,
        "quantity": result.quantity,
        "sweep_param": result.sweep_param,
        "sweep_values": result.sweep_values.tolist(),
        "freqs_MHz": result.freqs.tolist(),
        "power": result.power.tolist(),
        "input_power": float(ip) if np.ndim(ip) == 0 else np.asarray(ip).tolist(),
        "db_convention": (
            f"power_dB = 10*log10(power / input_power), floored at {DB_FLOOR:g} dB"
        ),
        "overlays": [
            {
                "name": ov.name,
                "sweep_values": ov.sweep_values.tolist(),
                "freqs_MHz": ov.freqs.tolist(),
            }
            for ov in result.overlays
        ],
        "metadata": result.metadata,
    }


def sweep_from_dict(doc: dict) -> SweepResult:
    if doc.get("schema") != "cmpkit.sweep/1":
        raise ValueError(f"expected schema cmpkit.sweep/1, got {doc.get('schema')!r}")
    ip = doc["input_power"]
    return SweepResult(
        quantity=doc["quantity"],
        sweep_param=doc["sweep_param"],
        sweep_values=np.asarray(doc["sweep_values"], dtype=float),
        freqs=np.asarray(doc["freqs_MHz"], dtype=float),
        power=np.asarray(doc["power"], dtype=float),
        input_power=float(ip) if np.ndim(ip) == 0 else np.asarray(ip, dtype=float),
        overlays=tuple(
            Overlay(
                name=ov["name"],
                sweep_values=np.asarray(ov["sweep_values"], dtype=float),
                freqs=np.asarray(ov["freqs_MHz"], dtype=float),
            )
            for ov in doc.get("overlays", ())
        ),
        metadata=doc.get("metadata", {}),
    )


def minima_to_dict(trace: MinimaTrace) -> dict:
    return {
        "schema": "cmpkit.minima/1",
        "version": __version__,
        "sweep_param": trace.sweep_param,
        "sweep_values": trace.sweep_values.tolist(),
        "freq_MHz": trace.freq_MHz.tolist(),
        "power": trace.power.tolist(),
        "power_dB": trace.power_db.tolist(),
        "branch_averaged": [bool(b) for b in trace.branch_averaged],
        "input_power": float(trace.input_power),
        "db_convention": (
            f"power_dB = 10*log10(power / input_power), floored at {DB_FLOOR:g} dB"
        ),
    }


def fit_to_dict(fit) -> dict:
    """Serialize a FitResult (duck-typed to avoid an import cycle)."""
    # failed fits report infinite stderr; JSON stays strict, so null it
    return {
        "schema": "cmpkit.fit/1",
        "version": __version__,
        "model": fit.model,
        "estimates": {k: float(v) for k, v in fit.estimates.items()},
        "stderr": {
            k: float(v) if math.isfinite(v) else None for k, v in fit.stderr.items()
        },
        "fixed": list(fit.fixed),
        "rss": float(fit.rss),
        "iterations": int(fit.iterations),
        "converged": bool(fit.converged),
    }


def _dump_json(doc: dict, path) -> None:
    _write_text(path, json.dumps(doc, indent=2, allow_nan=False) + "\n")


def export_json(result, path) -> None:
    """Write one sweep (or a sequence of sweeps) as a JSON document."""
    if isinstance(result, SweepResult):
        _dump_json(sweep_to_dict(result), path)
    elif isinstance(result, MinimaTrace):
        _dump_json(minima_to_dict(result), path)
    elif isinstance(result, Sequence) and not isinstance(result, (str, bytes)):
        doc = {
            "schema": "cmpkit.sweep-set/1",
            "version": __version__,
            "members": [sweep_to_dict(r) for r in result],
        }
        _dump_json(doc, path)
    else:
        raise TypeError(f"cannot export {type(result).__name__} as JSON")


def export_fit_json(fit, path) -> None:
    _dump_json(fit_to_dict(fit), path)


def import_json(path):
    """Read back a cmpkit JSON document.

    Returns a SweepResult for cmpkit.sweep/1, a list of SweepResult for
    cmpkit.sweep-set/1, and the raw dict for other cmpkit schemas.
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    schema = doc.get("schema")
    if schema == "cmpkit.sweep/1":
        return sweep_from_dict(doc)
    if schema == "cmpkit.sweep-set/1":
        return [sweep_from_dict(m) for m in doc["members"]]
    if isinstance(schema, str) and schema.startswith("cmpkit."):
        return doc
    raise ValueError(f"not a cmpkit JSON document: schema {schema!r}")


def _parse_comments(lines: list[str]) -> dict[str, str]:
    meta: dict[str, str] = {}
    for line in lines:
        body = line.lstrip("#").strip()
        if "=" in body:
            key, _, value = body.partition("=")
            meta[key.strip()] = value.strip()
    return meta


def load_spectrum_csv(path):
    """Read a spectrum dataset for fitting.

    Accepts ``freq_GHz,re,im`` (complex wave) or ``freq_GHz,power_dB``
    (power; the file must state its reference in a ``# db_reference``
    comment line, the injected power that corresponds to 0 dB).  An
    optional ``# quantity`` comment names the measured S-quantity
    (default s11 for complex files, s11_power for power files).
    Frequencies are converted from GHz to the internal MHz unit.
    """
    from .fitting import SpectrumDataset

    comments: list[str] = []
    rows: list[list[str]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line)
            else:
                rows.append(next(csv.reader([line])))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    header = [c.strip() for c in rows[0]]
    meta = _parse_comments(comments)
    data = rows[1:]
    try:
        table = np.array([[float(c) for c in row] for row in data], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric data row ({exc})") from None
    if header == ["freq_GHz", "re", "im"]:
        if table.shape[1] != 3:
            raise ValueError(f"{path}: expected 3 columns, got {table.shape[1]}")
        kind = meta.get("quantity", "s11")
        if kind not in ("s11", "s21"):
            raise ValueError(f"{path}: complex data must be quantity s11 or s21")
        values = table[:, 1] + 1j * table[:, 2]
    elif header == ["freq_GHz", "power_dB"]:
        if "db_reference" not in meta:
            raise ValueError(
                f"{path}: power data must state its 0 dB reference in a"
                " '# db_reference = <power>' comment line"
            )
        ref = float(meta["db_reference"])
        if not (math.isfinite(ref) and ref > 0.0):
            raise ValueError(f"{path}: db_reference must be positive, got {ref!r}")
        kind = meta.get("quantity", "s11_power")
        if kind not in ("s11_power", "s21_power"):
            raise ValueError(f"{path}: unsupported power quantity {kind!r}")
        values = ref * 10.0 ** (table[:, 1] / 10.0)
    else:
        raise ValueError(
            f"{path}: header must be freq_GHz,re,im or freq_GHz,power_dB,"
            f" got {','.join(header)!r}"
        )
    return SpectrumDataset(freqs=table[:, 0] * 1e3, values=values, kind=kind)


def save_spectrum_csv(dataset, path, db_reference: float = 1.0) -> None:
    """Write a spectrum dataset in the CSV dialect ``load_spectrum_csv`` reads."""
    lines = [f"# cmpkit.spectrum/1 v{__version__}", f"# quantity = {dataset.kind}"]
    if np.iscomplexobj(dataset.values):
        lines.append("freq_GHz,re,im")
        for f, v in zip(dataset.freqs, dataset.values):
            lines.append(f"{_fmt(f / 1e3)},{_fmt(v.real)},{_fmt(v.imag)}")
    else:
        if not (math.isfinite(db_reference) and db_reference > 0.0):
            raise ValueError("db_reference must be positive and finite")
        lines.insert(1, f"# db_reference = {_fmt(db_reference)}")
        lines.append("freq_GHz,power_dB")
        floor = 10.0 ** (DB_FLOOR / 10.0)
        for f, v in zip(dataset.freqs, dataset.values):
            db = 10.0 * math.log10(max(v / db_reference, floor))
            lines.append(f"{_fmt(f / 1e3)},{_fmt(db)}")
    _write_text(path, "\n".join(lines) + "\n")
