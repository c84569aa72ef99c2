"""Logistic growth under harvesting: dynamics, stability, optimal harvesting and discrete maps."""
from .dynamics import (
    ConstantEffort,
    ConstantQuota,
    ModelParams,
    Scheduled,
    Unexploited,
    closed_form,
    per_capita_growth,
    vector_field,
)
from .errors import DomainError, NumericalError, SingularDenominator, UsageError

__version__ = "0.1.0"
