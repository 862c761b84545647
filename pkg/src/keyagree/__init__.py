"""Secret-key agreement and entanglement diagnostics for small classical and quantum scenarios."""

from .catalog import CATALOG, Scenario, build
from .dist import (
    BipartiteDistribution,
    Channel,
    DistributionError,
    JointDistribution,
    apply_channel,
    ck_lower_bound,
    conditional_mutual_information,
    marginalize,
    mutual_information,
    shannon_entropy,
)
from .intrinsic import IntrinsicEstimate, intrinsic_upper_bound, verify_zero_certificate
from .mu import MuEstimate, mu_estimate, pure_state_entanglement_entropy, werner_mu_closed_form
from .qstate import DensityMatrix, PureState, StateError, partial_transpose, ppt_min_eigenvalue

__version__ = "0.1.0"

__all__ = [
    "CATALOG", "Scenario", "build",
    "BipartiteDistribution", "Channel", "DistributionError", "JointDistribution",
    "apply_channel", "ck_lower_bound", "conditional_mutual_information", "marginalize",
    "mutual_information", "shannon_entropy",
    "IntrinsicEstimate", "intrinsic_upper_bound", "verify_zero_certificate",
    "MuEstimate", "mu_estimate", "pure_state_entanglement_entropy", "werner_mu_closed_form",
    "DensityMatrix", "PureState", "StateError", "partial_transpose", "ppt_min_eigenvalue",
]
