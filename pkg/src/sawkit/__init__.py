"""Analysis toolkit for surface-acoustic-wave phonon cavities.

Covers network ingestion (Touchstone and CSV sweeps), frequency-domain
cavity characterization, time-domain echo-train loss extraction,
spin-strain coupling estimates for color-center emitters, and two-level
drive dynamics. A click CLI (`sawkit`) wraps the main workflows.
"""

from .errors import (
    ArgumentError,
    FitError,
    FormatError,
    GridError,
    InconsistencyError,
    NonphysicalGrowthError,
    ResolutionError,
    ToolkitError,
)
from .numerics import (
    FitResult,
    SHIPPED_MODELS,
    Series,
    bessel_j,
    db_convert,
    dft,
    grid_step,
    least_squares,
)
from .ingest import (
    NetworkSweep,
    SweepMeta,
    parse_csv_sweep,
    parse_touchstone,
    write_csv,
    write_touchstone,
)
from .specanalysis import (
    CavityGeometry,
    CavityReport,
    LorentzianPeak,
    cavity_report,
    combine_q,
    estimate_fsr,
    find_peaks,
    finesse,
    fit_double_lorentzian,
    fit_lorentzian,
    k_squared,
    mirror_reflectivity,
    penetration_depth,
    phase_velocity,
    q_internal_from_reflection,
    q_mirror,
    q_propagation,
    report_csv,
    report_summary,
)
from .timedomain import (
    EchoPeak,
    EchoTrain,
    ImpulseResponse,
    LossModel,
    detect_echoes,
    echo_train_csv,
    fit_echo_decay,
    impulse_response,
    loss_model_summary,
    synthesize_echo_network,
    time_gate,
)
from .spinphonon import (
    GaussianBeam,
    PhononBudget,
    SIV_DEFAULTS,
    STRAIN_G30,
    STRAIN_G70,
    SivParams,
    StrainTensor,
    beam_profile,
    budget_summary,
    coupling_rate,
    phonon_budget,
    phonon_number,
    rabi_chain,
    rabi_from_phonons,
    resonance_axial_field,
    single_phonon_power,
    transverse_field,
)
from .qdyn import (
    PowerScalingFit,
    PulseSequence,
    RabiFit,
    TwoLevelDrive,
    fit_power_scaling,
    fit_rabi,
    odar_spectrum,
    rabi_population,
    sideband_spectrum,
    simulate_rabi_trace,
    series_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "FitError",
    "FormatError",
    "GridError",
    "InconsistencyError",
    "NonphysicalGrowthError",
    "ResolutionError",
    "ToolkitError",
    "FitResult",
    "SHIPPED_MODELS",
    "Series",
    "bessel_j",
    "db_convert",
    "dft",
    "grid_step",
    "least_squares",
    "NetworkSweep",
    "SweepMeta",
    "parse_csv_sweep",
    "parse_touchstone",
    "write_csv",
    "write_touchstone",
    "CavityGeometry",
    "CavityReport",
    "LorentzianPeak",
    "cavity_report",
    "combine_q",
    "estimate_fsr",
    "find_peaks",
    "finesse",
    "fit_double_lorentzian",
    "fit_lorentzian",
    "k_squared",
    "mirror_reflectivity",
    "penetration_depth",
    "phase_velocity",
    "q_internal_from_reflection",
    "q_mirror",
    "q_propagation",
    "report_csv",
    "report_summary",
    "EchoPeak",
    "EchoTrain",
    "ImpulseResponse",
    "LossModel",
    "detect_echoes",
    "echo_train_csv",
    "fit_echo_decay",
    "impulse_response",
    "loss_model_summary",
    "synthesize_echo_network",
    "time_gate",
    "GaussianBeam",
    "PhononBudget",
    "SIV_DEFAULTS",
    "STRAIN_G30",
    "STRAIN_G70",
    "SivParams",
    "StrainTensor",
    "beam_profile",
    "budget_summary",
    "coupling_rate",
    "phonon_budget",
    "phonon_number",
    "rabi_chain",
    "rabi_from_phonons",
    "resonance_axial_field",
    "single_phonon_power",
    "transverse_field",
    "PowerScalingFit",
    "PulseSequence",
    "RabiFit",
    "TwoLevelDrive",
    "fit_power_scaling",
    "fit_rabi",
    "odar_spectrum",
    "rabi_population",
    "sideband_spectrum",
    "simulate_rabi_trace",
    "series_csv",
    "__version__",
]
