# Minimal dense-tensor arithmetic with reverse-mode differentiation

from .tensor import Function, Tape, Tensor, backward
from . import ops

__all__ = [
    'Function',
    'Tape',
    'Tensor',
    'backward',
    'ops'
]
