"""Pilot-wave trajectory ensembles for particles in a hard-wall box.

The package computes multi-time correlations of coarse position
measurements in two independent ways: exactly, from Heisenberg-picture
matrix elements over a finite set of box modes, and statistically, from
de Broglie-Bohm trajectories whose initial conditions are drawn from
|psi|^2.  An effective-collapse variant replaces the state at the first
measurement and re-runs the remaining dynamics.
"""

__version__ = "0.1.0"

from .collapse import (
    CollapseResult,
    CollapseWeightError,
    CollapsedTwoTimeResult,
    collapse_state,
    collapsed_two_time_ensemble,
)
from .experiments import (
    EXPERIMENTS,
    ExperimentConfig,
    RunResult,
    RunRow,
    run_experiment,
)
from .guiding import (
    ExcessiveFailureError,
    IntegratorConfig,
    NodeError,
    Trajectory,
    ensemble_correlator,
    ensemble_products,
    integrate_trajectory,
    velocity,
)
from .observables import (
    CorrelatorQuery,
    axis_marginal_masses,
    half_projector,
    heisenberg_sign_element,
    multitime_correlator,
    octant_masses,
    quarter_phase_time,
    sign_matrix,
    sign_overlap,
)
from .output import emit_csv, emit_svg, read_config, read_run_csv, write_manifest
from .sampling import (
    EnvelopeError,
    SampleBatch,
    SamplingStallError,
    density_bound,
    sample_initial,
)
from .spectral import (
    HALF_WIDTH,
    BoxState,
    fr_state,
    gauss_legendre,
    ghz_state,
    mode_energy,
    mode_eval,
    mode_grad,
    mode_parity,
    psi_eval,
    psi_grad,
)

__all__ = [
    "__version__",
    "HALF_WIDTH",
    "BoxState",
    "CollapseResult",
    "CollapseWeightError",
    "CollapsedTwoTimeResult",
    "CorrelatorQuery",
    "EXPERIMENTS",
    "EnvelopeError",
    "ExcessiveFailureError",
    "ExperimentConfig",
    "IntegratorConfig",
    "NodeError",
    "RunResult",
    "RunRow",
    "SampleBatch",
    "SamplingStallError",
    "Trajectory",
    "axis_marginal_masses",
    "collapse_state",
    "collapsed_two_time_ensemble",
    "density_bound",
    "emit_csv",
    "emit_svg",
    "ensemble_correlator",
    "ensemble_products",
    "fr_state",
    "gauss_legendre",
    "ghz_state",
    "half_projector",
    "heisenberg_sign_element",
    "integrate_trajectory",
    "mode_energy",
    "mode_eval",
    "mode_grad",
    "mode_parity",
    "multitime_correlator",
    "octant_masses",
    "psi_eval",
    "psi_grad",
    "quarter_phase_time",
    "read_config",
    "read_run_csv",
    "run_experiment",
    "sample_initial",
    "sign_matrix",
    "sign_overlap",
    "velocity",
    "write_manifest",
]
