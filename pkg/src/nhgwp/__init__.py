"""Thawed Gaussian wavepacket dynamics for a continuum Hatano-Nelson Hamiltonian.

    H = sum_j (P_j + i b_j(X_j))^2 / (2 m_j) + V(X),  b_j(x) = k_j x + c_j.
"""

from .engine import DEFAULT_DT, StateDerivative, Trajectory, eom1_residual, propagate, rhs, step_rk4
from .errors import (
    BoundaryContamination,
    ExponentOverflow,
    NHGWPError,
    NonNormalizable,
    NumericalError,
    ParseError,
    PreconditionViolation,
    SingularTransform,
    SpectralInstability,
    ValidationError,
    ZeroNorm,
)
from .grid import (
    Grid1D,
    GridField,
    crank_nicolson_linear_b,
    density_observables,
    evaluate_wavepacket,
    gwd_heatmap,
    heatmap_normalized,
    log_norm_squared,
    norm_squared,
    split_step_constant_b,
)
from .model import (
    LinearVectorPotential,
    ModelSpec,
    PolynomialPotential,
    WavepacketState,
    eval_b,
    gaussian_state,
    potential_lha,
    require_normalizable,
    unit_norm_gamma,
)
from .scenario import GridConfig, Scenario, format_scenario, load_scenario, parse_scenario
from .transforms import (
    RealPhasePoint,
    compute_real_center_constant,
    guiding_ic,
    guiding_ic_constant,
    guiding_ic_linear,
    invariants,
    real_trajectory,
    shift_representation,
    to_real_phase_space,
)

__version__ = "0.1.0"
