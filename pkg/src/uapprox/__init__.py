"""Constructive universal approximation with shallow networks."""

from .errors import (CertificateViolation, ConstructionError, HypothesisViolation, InputError,
                     NumericalError, PreconditionError, RankDeficiencyError, UapproxError)
from .netcore import (Activation, GriddedFunction, ShallowNet, Term, eval_net, lp_error,
                      sup_error)

__version__ = "0.1.0"

__all__ = [
    "Activation", "GriddedFunction", "ShallowNet", "Term", "eval_net", "lp_error", "sup_error",
    "UapproxError", "InputError", "PreconditionError", "RankDeficiencyError", "HypothesisViolation",
    "ConstructionError", "NumericalError", "CertificateViolation",
]
