"""Minimal dense-tensor engine with reverse-mode automatic differentiation."""

from .tensor import (
    Function,
    ShapeError,
    Tensor,
    apply_function,
    backward,
    concat,
    finite_checks,
    grad_enabled,
    matmul,
    no_grad,
    set_finite_checks,
)
from .gradcheck import grad_check
from .params import ParameterSet, load_params, save_params

__all__ = [
    "Tensor",
    "Function",
    "ShapeError",
    "apply_function",
    "backward",
    "concat",
    "matmul",
    "no_grad",
    "grad_enabled",
    "finite_checks",
    "set_finite_checks",
    "grad_check",
    "ParameterSet",
    "save_params",
    "load_params",
]
