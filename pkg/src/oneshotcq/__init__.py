"""Exact hypothesis-testing relative entropy and one-shot bounds for classical-quantum channels."""

from ._backend import BACKEND
from .asymptotics import CapacityRow, SteinRow, capacity_rows, product_channel, stein_table, tensor_power
from .coding import (
    CodeEvaluation,
    Codebook,
    DecodingPOVM,
    HNCheck,
    check_hayashi_nagaoka,
    conditional_operators,
    confusion_matrix,
    ensemble_average_error,
    evaluate_code,
    expurgate_to_max_error,
    random_coding_experiment,
    square_root_decoder,
)
from .cq_channel import (
    CQChannel,
    InputSearchConfig,
    JointState,
    OneShotBounds,
    achievable_rate,
    converse_bound,
    dh_cq,
    holevo_information,
    joint_state,
    one_shot_bounds,
    optimize_achievability,
)
from .errors import (
    CapExceededError,
    CertificationError,
    DimensionError,
    NumericalError,
    OneShotError,
    ValidationError,
)
from .hypothesis_testing import (
    HypothesisTestResult,
    Tolerances,
    dh,
    dh_dual_oracle,
    optimal_test,
    relative_entropy,
    renyi0,
    type_two_error,
)
from .operators import KrausChannel, apply_channel, eig_hermitian, partial_trace, tensor
from .settings import log_units, set_log_units

__version__ = "0.1.0"
