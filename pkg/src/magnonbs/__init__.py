"""Desk-scale simulator of an atomic memory run as a photon/magnon splitter."""

from .core import (
    ConfigError,
    ControlSegment,
    ControlTimeline,
    CorrelationResult,
    FieldState,
    MediumParams,
    NormSplit,
    PhysicsViolation,
    PulseEnvelope,
    SplitterMatrix,
    make_grid,
    norm_decomposition,
)
from .fock_oracle import (
    FockInput,
    ModeNetwork,
    cascade_three,
    classical_routing_distribution,
    dilate,
    g2_from_distribution,
    g3_from_distribution,
    network_from_splitter,
    output_distribution,
    permanent,
    three_photon_input,
    two_photon_input,
)
from .mbloch import (
    SimulationConfig,
    StorageResult,
    Trajectory,
    dsp_project,
    evolve,
    overlap,
    storage_efficiency,
    store_magnon,
    v_group,
)
from .splitter import (
    ExtractionResult,
    HermiticityReport,
    calibrate_balance,
    effective_overlap,
    extract_matrix,
    fold_phase,
    hermiticity_report,
    phi_rt_analytic,
    phi_rt_of_matrix,
    splitter_from_outputs,
    tau_from_fwhm,
)
from .stats import (
    ClassicalBounds,
    EnvelopeFit,
    OverlapEnvelope,
    classical_bounds,
    fit_envelope,
    g2_formula,
    g3_formula,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ControlSegment",
    "ControlTimeline",
    "CorrelationResult",
    "FieldState",
    "MediumParams",
    "NormSplit",
    "PhysicsViolation",
    "PulseEnvelope",
    "SplitterMatrix",
    "make_grid",
    "norm_decomposition",
    "FockInput",
    "ModeNetwork",
    "cascade_three",
    "classical_routing_distribution",
    "dilate",
    "g2_from_distribution",
    "g3_from_distribution",
    "network_from_splitter",
    "output_distribution",
    "permanent",
    "three_photon_input",
    "two_photon_input",
    "SimulationConfig",
    "StorageResult",
    "Trajectory",
    "dsp_project",
    "evolve",
    "overlap",
    "storage_efficiency",
    "store_magnon",
    "v_group",
    "ExtractionResult",
    "HermiticityReport",
    "calibrate_balance",
    "effective_overlap",
    "extract_matrix",
    "fold_phase",
    "hermiticity_report",
    "phi_rt_analytic",
    "phi_rt_of_matrix",
    "splitter_from_outputs",
    "tau_from_fwhm",
    "ClassicalBounds",
    "EnvelopeFit",
    "OverlapEnvelope",
    "classical_bounds",
    "fit_envelope",
    "g2_formula",
    "g3_formula",
]
