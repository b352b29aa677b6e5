"""Dual quaternion kinematics of 2R dyads, Bennett and Goldberg 5R linkage synthesis."""

from .context import Context
from .dq import (
    EPS,
    I,
    J,
    K,
    ONE,
    DualNumber,
    DualQuaternion,
    PlueckerLine,
    Pose,
    Quaternion,
    act_on_point,
    axis_of,
    dq_conj,
    dq_mul,
    dq_norm,
    half_turn_from_line,
    pose_from_rot_trans,
    study_residual,
)
from .errors import InputError, NumericalFailure, StructuralError, StudyLinkError
from .motion import (
    Factorization,
    MotionPoly,
    div_rem_quadratic,
    factorize,
    factorize_cubic,
    mobius_reparam,
    mp_eval,
    mp_mul,
    norm_poly,
    quadratic_factors,
    right_factor,
)
from .projective import (
    EXCEPTIONAL,
    NullQuadrilateral,
    Subspace,
    find_null_quadrilateral,
    is_null_line,
    lemma4_cycle,
    lemma5_lift,
    meets_exceptional,
    proj_distance,
    restrict_study,
)
from .synthesis import (
    Linkage,
    RuledChart,
    TwoRSpace,
    bennett_conic,
    bennett_from_poses,
    classify_cubic,
    dyad_constraint,
    interpolate_cubic,
    is_2r_space,
    normalize_poses,
    orientation_obstruction,
    ruled_chart,
    synthesize_5r,
    two_r_spaces,
)
from .verify import (
    VerificationReport,
    check_closure,
    joint_angles,
    sample_motion,
    verify_linkage,
    visits_poses,
)

__version__ = "0.1.0"
