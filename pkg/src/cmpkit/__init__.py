"""Coupled cavity-magnon scattering toolkit.

Simulates a two-port microwave cavity coupled to a magnon mode:
S-parameters, two-feed interference and coherent perfect absorption,
non-Hermitian eigenfrequencies and the gain-loss symmetry transition,
parameter sweeps with deterministic CSV/JSON/SVG export, and
least-squares parameter extraction from measured or synthetic spectra.

Internal units: frequencies and rates in MHz (field decay convention),
lengths in mm, phases in radians.  Time dependence exp(-i 2 pi nu t).
"""
from ._version import __version__
from .errors import (
    BracketError,
    ConfigError,
    IdentifiabilityError,
    NumericsError,
    SingularModelError,
)
from .params import (
    CavityGeometry,
    ComplexFrequency,
    CouplingMap,
    DEFAULT_PERTURBATION,
    FeedConfig,
    MagnonFieldMap,
    PerturbationTable,
    SystemParams,
)
from .geometry import (
    cavity_mode_frequency,
    coupling_from_displacement,
    magnon_frequency,
    mode_field_profile,
)
from .model import (
    EigenDecomposition,
    Regime,
    classify_regime,
    cpa_eigenfrequencies,
    effective_hamiltonian,
    hamiltonian_eigen,
    pt_residuals,
)
from .scattering import (
    CPA_DIP_THRESHOLD,
    SParams,
    TwoFeedOutput,
    Dip,
    cpa_feed_conditions,
    find_cpa_dips,
    reduced_output,
    s_matrix,
    two_feed_output,
)
from .sweeps import (
    DB_FLOOR,
    ExceptionalPoint,
    MinimaTrace,
    Overlay,
    SweepResult,
    SweepSpec,
    find_exceptional_point,
    frequency_grid,
    linear_grid,
    minima_trace,
    minimum_branch_separation,
    sweep_displacement,
    sweep_field,
    sweep_phase,
    sweep_ratio,
)
from .dataio import (
    bundled_dataset,
    export_csv,
    export_csv_set,
    export_fit_json,
    export_json,
    export_minima_csv,
    import_json,
    load_spectrum_csv,
    save_spectrum_csv,
)
from .fitting import (
    COMPLEX_KINDS,
    FitResult,
    LORENTZIAN_PARAMS,
    NoiseModel,
    POWER_KINDS,
    REFLECTION_PARAMS,
    SpectrumDataset,
    TRANSMISSION_PARAMS,
    coupled_model,
    coupled_param_names,
    estimate_coupled_guess,
    fit_coupled,
    fit_lorentzian,
    lorentzian,
    synth_spectrum,
)
from .presets import PRESETS, PresetOutput, run_preset

__all__ = [
    "__version__",
    "BracketError",
    "ConfigError",
    "IdentifiabilityError",
    "NumericsError",
    "SingularModelError",
    "CavityGeometry",
    "ComplexFrequency",
    "CouplingMap",
    "DEFAULT_PERTURBATION",
    "FeedConfig",
    "MagnonFieldMap",
    "PerturbationTable",
    "SystemParams",
    "cavity_mode_frequency",
    "coupling_from_displacement",
    "magnon_frequency",
    "mode_field_profile",
    "EigenDecomposition",
    "Regime",
    "classify_regime",
    "cpa_eigenfrequencies",
    "effective_hamiltonian",
    "hamiltonian_eigen",
    "pt_residuals",
    "CPA_DIP_THRESHOLD",
    "SParams",
    "TwoFeedOutput",
    "Dip",
    "cpa_feed_conditions",
    "find_cpa_dips",
    "reduced_output",
    "s_matrix",
    "two_feed_output",
    "DB_FLOOR",
    "ExceptionalPoint",
    "MinimaTrace",
    "Overlay",
    "SweepResult",
    "SweepSpec",
    "find_exceptional_point",
    "frequency_grid",
    "linear_grid",
    "minima_trace",
    "minimum_branch_separation",
    "sweep_displacement",
    "sweep_field",
    "sweep_phase",
    "sweep_ratio",
    "bundled_dataset",
    "export_csv",
    "export_csv_set",
    "export_fit_json",
    "export_json",
    "export_minima_csv",
    "import_json",
    "load_spectrum_csv",
    "save_spectrum_csv",
    "COMPLEX_KINDS",
    "POWER_KINDS",
    "LORENTZIAN_PARAMS",
    "REFLECTION_PARAMS",
    "TRANSMISSION_PARAMS",
    "FitResult",
    "NoiseModel",
    "SpectrumDataset",
    "coupled_model",
    "coupled_param_names",
    "estimate_coupled_guess",
    "fit_coupled",
    "fit_lorentzian",
    "lorentzian",
    "synth_spectrum",
    "PRESETS",
    "PresetOutput",
    "run_preset",
]
