"""Exact lattice-ball counting, averaging-operator multipliers on Z^d, and
desk-scale verification sweeps for their dimension-free bounds."""

__version__ = "0.1.0"

from .budget import (
    DEFAULT_ENUM_CAP,
    DEFAULT_WORK_CAP,
    EnumerationCapError,
    WorkBudgetError,
)
from .krawtchouk import (
    KrawtchoukTable,
    calibrate_uniform_bound,
    kraw_exact,
    property_checks,
    verify_uniform_bound,
)
from .lattice import (
    BallSpec,
    MarkedClass,
    ball_count,
    ball_count_table,
    ball_spectrum,
    concentration_masses,
    enumerate_ball,
    lemma4_check,
    lemma4_verdict,
    profile_spectrum,
    shifted_ball_count,
    sphere_count,
    symdiff_count,
)
from .maxop import (
    EllipsoidSpec,
    GridFunction,
    WraparoundError,
    apply_avg,
    apply_avg_direct,
    dyadic_maximal,
    ellipsoid_points,
    ellipsoid_probe,
    load_grid,
    operator_norm_probe,
    save_grid,
    semigroup_apply,
    square_function_apply,
    square_function_norm_spectral,
)
from .multiplier import (
    QuadratureError,
    alternating_mass,
    continuous_ball_multiplier,
    m_N,
    m_batch,
    m_lower,
    m_lower_prefix_batch,
    multiplier_table,
    semigroup_multiplier,
)
from .verifier import (
    DEFAULT_SEED,
    Lemma7Input,
    SweepGrid,
    VerificationReport,
    canonical_json,
    check_intermediate_continuous,
    check_lemma4,
    check_lemma6,
    check_lemma7,
    check_lemma9,
    check_prop0,
    check_prop2,
    check_prop4,
    check_prop5,
    run_suite,
    sample_frequencies,
    square_sum,
)

__all__ = [name for name in dir() if not name.startswith("_")]
