"""Minimal dense-tensor computation graph with reverse-mode gradients."""

from . import ops
from .checkpoint import load_tensors, save_tensors
from .gradcheck import GradCheckReport, finite_diff_check
from .optim import Adam, GradientDescent, glorot_uniform, zero_grads, zeros
from .tensor import Graph, Tensor, active_graph, backward

__all__ = [
    "Adam",
    "GradCheckReport",
    "GradientDescent",
    "Graph",
    "Tensor",
    "active_graph",
    "backward",
    "finite_diff_check",
    "glorot_uniform",
    "load_tensors",
    "ops",
    "save_tensors",
    "zero_grads",
    "zeros",
]
