"""Evaluate and audit models of choice over time lotteries."""

from .core import (
    Counts,
    Domain,
    Lottery,
    Outcome,
    Status,
    Tolerances,
    Verdict,
    Witness,
    degenerate,
    expected_time,
    half_half,
    is_time_lottery,
    make_lottery,
    mix,
)
from .models import (
    GLBU,
    Disappointment,
    MultiplicativeEU,
    apply_representation_transform,
    check_representation_conditions,
    convert_representation,
    edu,
    eval_lottery,
    eval_outcome,
    example_model,
    model_from_dict,
)

__all__ = [
    "Counts", "Domain", "Lottery", "Outcome", "Status", "Tolerances", "Verdict", "Witness",
    "degenerate", "expected_time", "half_half", "is_time_lottery", "make_lottery", "mix",
    "GLBU", "Disappointment", "MultiplicativeEU", "apply_representation_transform",
    "check_representation_conditions", "convert_representation", "edu", "eval_lottery", "eval_outcome",
    "example_model", "model_from_dict",
]

__version__ = "0.1.0"
