"""Constant-mean-curvature hypersurfaces in semi-Riemannian space forms."""
from .curvature_verify import VerificationReport, verify_instance
from .immersion_families import DESCRIPTORS, ImmersionInstance, cylinder, instantiate
from .moduli_classify import ClassificationRecord, classify
from .profile_ode import Family, ProfilePolynomial, positive_roots, solve_periodic, solve_unbounded

__all__ = [
    "ClassificationRecord",
    "DESCRIPTORS",
    "Family",
    "ImmersionInstance",
    "ProfilePolynomial",
    "VerificationReport",
    "classify",
    "cylinder",
    "instantiate",
    "positive_roots",
    "solve_periodic",
    "solve_unbounded",
    "verify_instance",
]
