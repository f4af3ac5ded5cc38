"""Margin-based halfspace learning under malicious noise, with band certificates."""

from .certify import BandCertificate, abl_certify, certified_mass
from .hinge import HingeResult, hinge_minimize
from .learner import AblResult, abl_learn, angle, gaussian_error
from .outlier import OutlierRemovalInfeasible, OutlierWeights, soft_outlier_removal
from .schedule import AblSchedule, load_profile

__all__ = [
    "AblResult",
    "AblSchedule",
    "BandCertificate",
    "HingeResult",
    "OutlierRemovalInfeasible",
    "OutlierWeights",
    "abl_certify",
    "abl_learn",
    "angle",
    "certified_mass",
    "gaussian_error",
    "hinge_minimize",
    "load_profile",
    "soft_outlier_removal",
]
