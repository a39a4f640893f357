"""INI run configuration.

The CLI reads a single INI file whose sections mirror the domain
objects.  Surface units follow reporting conventions: frequencies in
GHz, rates in MHz, displacements in mm, phases in degrees; everything is
converted to the internal MHz/mm/radian units while building domain
objects.  Unknown sections or keys are rejected with the file line in
the message, as are values that fail to parse.

Every key has a default drawn from the bundled reference parameter set,
so a config file only states what differs from it.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .params import (
    DEFAULT_PERTURBATION,
    CouplingMap,
    FeedConfig,
    MagnonFieldMap,
    PerturbationTable,
    SystemParams,
)
from .scattering import cpa_feed_conditions
from .sweeps import SweepSpec, frequency_grid, linear_grid

__all__ = ["RunConfig", "SweepSection", "FitSection", "ProbeSection", "load_config",
           "build_probe_freqs", "build_sweep_spec", "resolve_feed"]

_DEFAULT_SYSTEM = {
    "omega_c_GHz": 10.0236,
    "omega_m_GHz": 10.0236,
    "g_m_MHz": 3.9,
    "kappa_1_MHz": 1.72,
    "kappa_2_MHz": 1.39,
    "kappa_int_MHz": 1.55,
    "gamma_m_MHz": 1.5,
}

_KNOWN_KEYS = {
    "system": set(_DEFAULT_SYSTEM),
    "feed": {"delta_phi_deg", "q"},
    "coupling": {"slope_MHz_per_mm", "valid_range_mm"},
    "field_map": {"gamma_e_MHz_per_mT", "offset_MHz"},
    "overrides": {"x_mm", "omega_c_GHz", "kappa_int_MHz"},
    "probe": {"center_GHz", "span_MHz", "step_MHz", "freqs_GHz"},
    "sweep": {
        "parameter",
        "start",
        "stop",
        "step",
        "quantity",
        "track_resonance",
        "use_default_overrides",
    },
    "spectrum": {"quantities"},
    "fit": {"model", "free", "fixed"},
    "ep": {"bracket_mm"},
    "run": {"seed", "threads", "out"},
}


@dataclass(frozen=True)
class ProbeSection:
    center_MHz: float | None  # None = midway between omega_c and omega_m
    span_MHz: float
    step_MHz: float
    freqs_MHz: tuple | None  # explicit probe stations, overrides the grid


@dataclass(frozen=True)
class SweepSection:
    parameter: str
    start: float
    stop: float
    step: float
    quantity: str
    track_resonance: bool
    use_default_overrides: bool


@dataclass(frozen=True)
class FitSection:
    model: str
    free: tuple | None
    fixed: tuple


@dataclass(frozen=True)
class RunConfig:
    """Parsed and defaulted configuration, still in domain-object form."""

    params: SystemParams
    delta_phi: float
    q: float | None  # None = balance the feed to kappa_1/kappa_2
    coupling: CouplingMap
    field_map: MagnonFieldMap
    overrides: PerturbationTable | None
    probe: ProbeSection
    sweep: SweepSection | None
    quantities: tuple
    fit: FitSection
    ep_bracket: tuple
    seed: int | None
    threads: int
    out: str | None


class _IniFile:
    """configparser plus a (section, key) -> line-number map."""

    def __init__(self, path: str):
        self.path = path
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror or exc}") from None
        self.lines: dict = {}
        section = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith(("#", ";")):
                continue
            m = re.match(r"\[(.+)\]\s*$", line)
            if m:
                section = m.group(1).strip()
                self.lines[(section, None)] = lineno
                continue
            m = re.match(r"([^=:\s][^=:]*?)\s*[=:]", line)
            if m and section is not None:
                self.lines[(section, m.group(1).strip())] = lineno
        cp = configparser.ConfigParser(
            interpolation=None, inline_comment_prefixes=("#", ";"), strict=True
        )
        cp.optionxform = str
        try:
            cp.read_string(text, source=path)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        self.cp = cp

    def where(self, section: str, key=None) -> str:
        lineno = self.lines.get((section, key)) or self.lines.get((section, None))
        return f"{self.path}:{lineno}" if lineno else self.path

    def check_known(self) -> None:
        for section in self.cp.sections():
            if section not in _KNOWN_KEYS:
                raise ConfigError(
                    f"{self.where(section)}: unknown section [{section}]"
                    f" (known: {', '.join(sorted(_KNOWN_KEYS))})"
                )
            for key in self.cp[section]:
                if key not in _KNOWN_KEYS[section]:
                    raise ConfigError(
                        f"{self.where(section, key)}: unknown key {key!r} in"
                        f" [{section}] (known: {', '.join(sorted(_KNOWN_KEYS[section]))})"
                    )

    def has(self, section: str, key: str) -> bool:
        return self.cp.has_option(section, key)

    def raw(self, section: str, key: str) -> str:
        return self.cp.get(section, key).strip()

    def get_float(self, section: str, key: str, default: float) -> float:
        if not self.has(section, key):
            return default
        raw = self.raw(section, key)
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(
                f"{self.where(section, key)}: {key} must be a number, got {raw!r}"
            ) from None
        if not math.isfinite(value):
            raise ConfigError(f"{self.where(section, key)}: {key} must be finite")
        return value

    def get_int(self, section: str, key: str, default):
        if not self.has(section, key):
            return default
        raw = self.raw(section, key)
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(
                f"{self.where(section, key)}: {key} must be an integer, got {raw!r}"
            ) from None

    def get_bool(self, section: str, key: str, default: bool) -> bool:
        if not self.has(section, key):
            return default
        raw = self.raw(section, key).lower()
        if raw in ("true", "yes", "on", "1"):
            return True
        if raw in ("false", "no", "off", "0"):
            return False
        raise ConfigError(
            f"{self.where(section, key)}: {key} must be true or false, got {raw!r}"
        )

    def get_choice(self, section: str, key: str, choices, default: str) -> str:
        if not self.has(section, key):
            return default
        raw = self.raw(section, key)
        if raw not in choices:
            raise ConfigError(
                f"{self.where(section, key)}: {key} must be one of"
                f" {', '.join(choices)}; got {raw!r}"
            )
        return raw

    def get_float_list(self, section: str, key: str):
        raw = self.raw(section, key)
        out = []
        for piece in raw.split(","):
            piece = piece.strip()
            try:
                out.append(float(piece))
            except ValueError:
                raise ConfigError(
                    f"{self.where(section, key)}: {key} must be a comma-separated"
                    f" list of numbers, got {piece!r}"
                ) from None
        return out

    def get_name_list(self, section: str, key: str):
        return tuple(
            piece.strip()
            for piece in self.raw(section, key).split(",")
            if piece.strip()
        )


def _build_system(ini: _IniFile) -> SystemParams:
    get = lambda key: ini.get_float("system", key, _DEFAULT_SYSTEM[key])
    try:
        return SystemParams(
            omega_c=get("omega_c_GHz") * 1e3,
            omega_m=get("omega_m_GHz") * 1e3,
            g_m=get("g_m_MHz"),
            kappa_1=get("kappa_1_MHz"),
            kappa_2=get("kappa_2_MHz"),
            kappa_int=get("kappa_int_MHz"),
            gamma_m=get("gamma_m_MHz"),
        )
    except ValueError as exc:
        raise ConfigError(f"{ini.where('system')}: {exc}") from None


def _build_overrides(ini: _IniFile) -> PerturbationTable | None:
    if not ini.cp.has_section("overrides"):
        return None
    for key in ("x_mm", "omega_c_GHz", "kappa_int_MHz"):
        if not ini.has("overrides", key):
            raise ConfigError(
                f"{ini.where('overrides')}: [overrides] needs x_mm, omega_c_GHz"
                f" and kappa_int_MHz together"
            )
    try:
        return PerturbationTable(
            x_mm=tuple(ini.get_float_list("overrides", "x_mm")),
            omega_c=tuple(v * 1e3 for v in ini.get_float_list("overrides", "omega_c_GHz")),
            kappa_int=tuple(ini.get_float_list("overrides", "kappa_int_MHz")),
        )
    except ValueError as exc:
        raise ConfigError(f"{ini.where('overrides')}: {exc}") from None


def default_config() -> RunConfig:
    """The all-defaults configuration (bundled reference parameter set)."""
    coupling = CouplingMap()
    return RunConfig(
        params=SystemParams(
            omega_c=_DEFAULT_SYSTEM["omega_c_GHz"] * 1e3,
            omega_m=_DEFAULT_SYSTEM["omega_m_GHz"] * 1e3,
            g_m=_DEFAULT_SYSTEM["g_m_MHz"],
            kappa_1=_DEFAULT_SYSTEM["kappa_1_MHz"],
            kappa_2=_DEFAULT_SYSTEM["kappa_2_MHz"],
            kappa_int=_DEFAULT_SYSTEM["kappa_int_MHz"],
            gamma_m=_DEFAULT_SYSTEM["gamma_m_MHz"],
        ),
        delta_phi=0.0,
        q=None,
        coupling=coupling,
        field_map=MagnonFieldMap(),
        overrides=None,
        probe=ProbeSection(center_MHz=None, span_MHz=30.0, step_MHz=0.02, freqs_MHz=None),
        sweep=None,
        quantities=("s11", "s21", "total"),
        fit=FitSection(model="coupled", free=None, fixed=()),
        ep_bracket=(0.0, coupling.valid_range_mm),
        seed=None,
        threads=1,
        out=None,
    )


def load_config(path: str | None) -> RunConfig:
    """Parse an INI file (or return the all-defaults config for None)."""
    if path is None:
        return default_config()
    ini = _IniFile(path)
    ini.check_known()

    params = _build_system(ini)

    delta_phi = math.radians(ini.get_float("feed", "delta_phi_deg", 0.0))
    q: float | None
    if ini.has("feed", "q"):
        raw = ini.raw("feed", "q")
        if raw == "auto":
            q = None
        else:
            q = ini.get_float("feed", "q", 0.0)
            if q <= 0.0:
                raise ConfigError(
                    f"{ini.where('feed', 'q')}: q must be positive or 'auto'"
                )
    else:
        q = None

    try:
        coupling = CouplingMap(
            slope=ini.get_float("coupling", "slope_MHz_per_mm", 1.3),
            valid_range_mm=ini.get_float("coupling", "valid_range_mm", 4.0),
        )
        field_map = MagnonFieldMap(
            gamma_e=ini.get_float("field_map", "gamma_e_MHz_per_mT", 28.0),
            offset=ini.get_float("field_map", "offset_MHz", 0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"{path or '<defaults>'}: {exc}") from None

    overrides = _build_overrides(ini)

    center = None
    if ini.has("probe", "center_GHz"):
        raw = ini.raw("probe", "center_GHz")
        center = None if raw == "auto" else ini.get_float("probe", "center_GHz", 0.0) * 1e3
    freqs = None
    if ini.has("probe", "freqs_GHz"):
        freqs = tuple(v * 1e3 for v in ini.get_float_list("probe", "freqs_GHz"))
        if not freqs:
            raise ConfigError(f"{ini.where('probe', 'freqs_GHz')}: empty probe list")
    probe = ProbeSection(
        center_MHz=center,
        span_MHz=ini.get_float("probe", "span_MHz", 30.0),
        step_MHz=ini.get_float("probe", "step_MHz", 0.02),
        freqs_MHz=freqs,
    )
    if probe.span_MHz <= 0.0 or probe.step_MHz <= 0.0:
        raise ConfigError(f"{ini.where('probe')}: span and step must be positive")

    sweep = None
    if ini.cp.has_section("sweep"):
        parameter = ini.get_choice(
            "sweep", "parameter", ("omega_m", "x", "delta_phi", "q"), None
        )
        if parameter is None:
            raise ConfigError(f"{ini.where('sweep')}: [sweep] needs a parameter")
        for key in ("start", "stop", "step"):
            if not ini.has("sweep", key):
                raise ConfigError(
                    f"{ini.where('sweep')}: [sweep] needs start, stop and step"
                )
        sweep = SweepSection(
            parameter=parameter,
            start=ini.get_float("sweep", "start", 0.0),
            stop=ini.get_float("sweep", "stop", 0.0),
            step=ini.get_float("sweep", "step", 0.0),
            quantity=ini.get_choice("sweep", "quantity", ("total", "s11", "s21"), "total"),
            track_resonance=ini.get_bool("sweep", "track_resonance", True),
            use_default_overrides=ini.get_bool("sweep", "use_default_overrides", False),
        )

    quantities = ("s11", "s21", "total")
    if ini.has("spectrum", "quantities"):
        quantities = ini.get_name_list("spectrum", "quantities")
        bad = [qty for qty in quantities if qty not in ("s11", "s21", "total")]
        if bad or not quantities:
            raise ConfigError(
                f"{ini.where('spectrum', 'quantities')}: quantities must be a"
                f" nonempty list drawn from s11, s21, total"
            )

    fit = FitSection(
        model=ini.get_choice("fit", "model", ("coupled", "lorentzian"), "coupled"),
        free=ini.get_name_list("fit", "free") if ini.has("fit", "free") else None,
        fixed=ini.get_name_list("fit", "fixed") if ini.has("fit", "fixed") else (),
    )
    if fit.free is not None and fit.fixed:
        raise ConfigError(f"{ini.where('fit')}: give either free or fixed, not both")

    if ini.has("ep", "bracket_mm"):
        values = ini.get_float_list("ep", "bracket_mm")
        if len(values) != 2:
            raise ConfigError(
                f"{ini.where('ep', 'bracket_mm')}: bracket_mm needs exactly two values"
            )
        ep_bracket = (values[0], values[1])
    else:
        ep_bracket = (0.0, coupling.valid_range_mm)

    threads = ini.get_int("run", "threads", 1)
    if threads < 1:
        raise ConfigError(f"{ini.where('run', 'threads')}: threads must be >= 1")
    out = ini.raw("run", "out") if ini.has("run", "out") else None

    return RunConfig(
        params=params,
        delta_phi=delta_phi,
        q=q,
        coupling=coupling,
        field_map=field_map,
        overrides=overrides,
        probe=probe,
        sweep=sweep,
        quantities=quantities,
        fit=fit,
        ep_bracket=ep_bracket,
        seed=ini.get_int("run", "seed", None),
        threads=threads,
        out=out,
    )


def resolve_feed(cfg: RunConfig, params: SystemParams | None = None) -> FeedConfig:
    """Concrete FeedConfig; q=None balances to kappa_1/kappa_2."""
    p = params if params is not None else cfg.params
    if cfg.q is None:
        balanced = cpa_feed_conditions(p)
        return FeedConfig(delta_phi=cfg.delta_phi, q=balanced.q)
    return FeedConfig(delta_phi=cfg.delta_phi, q=cfg.q)


def build_probe_freqs(cfg: RunConfig) -> np.ndarray:
    """Probe grid (or explicit stations) from the [probe] section."""
    if cfg.probe.freqs_MHz is not None:
        freqs = np.asarray(cfg.probe.freqs_MHz, dtype=float)
        return freqs
    center = cfg.probe.center_MHz
    if center is None:
        center = 0.5 * (cfg.params.omega_c + cfg.params.omega_m)
    return frequency_grid(center, cfg.probe.span_MHz, cfg.probe.step_MHz)


def _sweep_values(section: SweepSection) -> np.ndarray:
    scale = 1e3 if section.parameter == "omega_m" else 1.0
    try:
        values = linear_grid(
            section.start * scale, section.stop * scale, section.step * scale
        )
    except ValueError as exc:
        raise ConfigError(f"[sweep]: {exc}") from None
    if section.parameter == "delta_phi":
        values = np.radians(values)
    return values


def build_sweep_spec(cfg: RunConfig) -> SweepSpec:
    """Translate the [sweep] section into an executable SweepSpec."""
    if cfg.sweep is None:
        raise ConfigError("config has no [sweep] section")
    section = cfg.sweep
    overrides = cfg.overrides
    if overrides is None and section.use_default_overrides:
        overrides = DEFAULT_PERTURBATION
    feed = None
    if section.quantity == "total":
        feed = resolve_feed(cfg)
    try:
        return SweepSpec(
            parameter=section.parameter,
            values=_sweep_values(section),
            freqs=build_probe_freqs(cfg),
            params=cfg.params,
            quantity=section.quantity,
            feed=feed,
            coupling=cfg.coupling if section.parameter == "x" else None,
            overrides=overrides if section.parameter == "x" else None,
            track_resonance=section.track_resonance,
        )
    except ValueError as exc:
        raise ConfigError(f"[sweep]: {exc}") from None
