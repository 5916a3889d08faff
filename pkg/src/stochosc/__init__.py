"""stochosc: trajectory-ensemble simulator for a harmonic oscillator whose
frequency switches stochastically between two values.

Between switches a Gaussian packet evolves exactly through its five
moments; switches follow either a constant rate or a rate weighted by
the overlap with the destination level's ground state.  Ensembles of
trajectories are reduced deterministically into averaged observables,
jump statistics, Wigner functions and number-basis density matrices.
"""

from .config import (
    FORMAT_VERSION,
    RunManifest,
    RunSpec,
    apply_overrides,
    format_run_config,
    parse_config,
    preset,
    preset_description,
    preset_names,
)
from .ensemble import (
    EnsembleAccumulator,
    ObservableSeries,
    SimulationConfig,
    StateSnapshot,
    Trajectory,
    ensemble_observables,
    jump_histogram,
    merge_accumulators,
    run_ensemble,
    simulate_trajectories,
    simulate_trajectory,
)
from .errors import ParameterError, ParseError, ResolutionError, StepSizeError
from .gaussian import (
    GaussianState,
    OscillatorParams,
    classical_turning_point,
    energy,
    propagate,
    uncertainty_invariant,
    wavefunction,
)
from .jumps import (
    CONSTANT,
    GROUND_OVERLAP,
    JumpEvent,
    JumpModel,
    ground_overlap,
    ground_state,
    jump_rate,
    sample_jump,
)
from .output import write_outputs
from .phasespace import (
    FockMatrix,
    WignerGrid,
    coherence_x,
    default_axis,
    ensemble_wigner,
    fock_density_matrix,
    hermite_function,
    hermite_table,
    position_density_matrix,
    wigner_of_state,
)
from .runner import RunResult, run_manifest

__version__ = "0.1.0"

__all__ = [
    "FORMAT_VERSION",
    "RunManifest",
    "RunSpec",
    "apply_overrides",
    "format_run_config",
    "parse_config",
    "preset",
    "preset_description",
    "preset_names",
    "EnsembleAccumulator",
    "ObservableSeries",
    "SimulationConfig",
    "StateSnapshot",
    "Trajectory",
    "ensemble_observables",
    "jump_histogram",
    "merge_accumulators",
    "run_ensemble",
    "simulate_trajectories",
    "simulate_trajectory",
    "ParameterError",
    "ParseError",
    "ResolutionError",
    "StepSizeError",
    "GaussianState",
    "OscillatorParams",
    "classical_turning_point",
    "energy",
    "propagate",
    "uncertainty_invariant",
    "wavefunction",
    "CONSTANT",
    "GROUND_OVERLAP",
    "JumpEvent",
    "JumpModel",
    "ground_overlap",
    "ground_state",
    "jump_rate",
    "sample_jump",
    "write_outputs",
    "FockMatrix",
    "WignerGrid",
    "coherence_x",
    "default_axis",
    "ensemble_wigner",
    "fock_density_matrix",
    "hermite_function",
    "hermite_table",
    "position_density_matrix",
    "wigner_of_state",
    "RunResult",
    "run_manifest",
    "__version__",
]
