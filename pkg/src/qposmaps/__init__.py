"""q-positive maps, conditionally negative generators, corners and boundary weight doubles."""

from ._backend import BACKEND
from .errors import *  # noqa: F401,F403
from .superop import (
    ChoiMatrix,
    CPVerdict,
    KrausSet,
    SuperOp,
    block_corner_map,
    choi,
    choi_min_eig,
    conjugate_by_unitary,
    diagonal_blocks,
    from_choi,
    from_kraus,
    functional_map,
    identity,
    is_completely_positive,
    is_unitary,
    kraus_from_choi,
    left_multiply,
    right_multiply,
    sandwich,
    schur_map,
    schur_multipliers,
    state_map,
    transpose_map,
    zero,
)
from .qorder import (
    PositivityCert,
    default_grid,
    eps_deform,
    fixed_point_of_limit,
    has_negative_eigenvalue,
    is_q_positive,
    limit_map,
    q_dominates,
    resolvent_subordinate,
)
from .cneg import (
    CnegForm,
    CnegVerdict,
    extract_canonical_form,
    inverse_of_unital_cneg,
    invertible_subordinate_test,
    is_conditionally_negative,
    lindblad_form,
    quadratic_form_witness,
    semigroup,
)
from .qpure import (
    Indeterminate,
    InvertibleSchur,
    NotQPure,
    RankOneFaithful,
    classify_q_pure,
    is_invertible_unital_q_pure,
    is_rank_one_q_pure,
    make_invertible_qpure,
)
from .corner import (
    CornerSpec,
    HyperMaxVerdict,
    corner_from_contraction,
    flow_corner_to_identity,
    is_hypermaximal_over_resolvent_family,
    is_q_corner,
    max_corner_norm_rank_one,
    unitary_conjugation_corner,
    verify_corner,
)
from .bwsim import (
    BoundaryWeightSpec,
    GBROperand,
    Indicator,
    gbr_norm_bound,
    normal_spine_decay,
    truncated_values,
)
from .jsonio import load_map, map_from_json, map_to_json

__version__ = "0.1.0"
