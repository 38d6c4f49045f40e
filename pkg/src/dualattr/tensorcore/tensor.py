"""Dense float64 tensors and the taped computation graph.

Everything is 64-bit: gradient checks at 1e-4 relative tolerance are not
reliable in single precision. A ``Graph`` is a tape: primitives append
nodes in execution order (which is a topological order by construction)
and ``backward`` replays the tape in exact reverse, so gradient
accumulation across fan-out is deterministic.

A graph is only recorded while one is active (``with Graph() as g:``).
Outside of a graph, primitives run forward-only, which keeps inference
cheap. Graphs are single-threaded; distinct threads may each run their
own graph.
"""

from __future__ import annotations

import threading

import numpy as np

from ..errors import ContractError

_local = threading.local()


def _graph_stack() -> list:
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = []
        _local.stack = stack
    return stack


def active_graph():
    """The innermost active Graph on this thread, or None."""
    stack = _graph_stack()
    return stack[-1] if stack else None


class Tensor:
    """A dense float64 array with an optional gradient buffer.

    ``grad`` is filled (additively) by ``Graph.backward`` for every
    tensor with ``requires_grad`` reachable from the loss; it stays
    there until an optimizer step or ``zero_grad`` clears it.
    """

    __slots__ = ("values", "grad", "requires_grad")

    def __init__(self, values, requires_grad: bool = False):
        self.values = np.array(values, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = None

    @classmethod
    def _wrap(cls, values: np.ndarray, requires_grad: bool) -> "Tensor":
        # Internal: adopt a freshly computed array without copying.
        out = cls.__new__(cls)
        out.values = values
        out.requires_grad = requires_grad
        out.grad = None
        return out

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def size(self) -> int:
        return self.values.size

    def item(self) -> float:
        if self.values.size != 1:
            raise ContractError(f"item() needs a 1-element tensor, got shape {self.shape}")
        return float(self.values.reshape(-1)[0])

    def zero_grad(self):
        self.grad = None

    def __add__(self, other):
        from . import ops

        return ops.add(self, other)

    def __mul__(self, other):
        from . import ops

        return ops.mul(self, other)

    def __matmul__(self, other):
        from . import ops

        return ops.matmul(self, other)

    def __sub__(self, other):
        from . import ops

        return ops.add(self, ops.affine(other, -1.0, 0.0))

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


class Node:
    """One recorded primitive application: inputs, output, local backward."""

    __slots__ = ("kind", "inputs", "output", "grad_fn")

    def __init__(self, kind, inputs, output, grad_fn):
        self.kind = kind
        self.inputs = inputs
        self.output = output
        self.grad_fn = grad_fn


class Graph:
    """Tape of primitive applications, usable as a context manager."""

    def __init__(self):
        self.nodes: list[Node] = []
        self._output_ids: set[int] = set()

    def __enter__(self) -> "Graph":
        _graph_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        _graph_stack().pop()
        return False

    def _append(self, node: Node):
        self.nodes.append(node)
        self._output_ids.add(id(node.output))

    def backward(self, loss: Tensor):
        """Accumulate d(loss)/d(tensor) into every reachable grad tensor.

        The tape is traversed in exact reverse order of recording, so
        fan-out contributions always sum in the same order.
        """
        if not isinstance(loss, Tensor) or loss.values.size != 1:
            shape = getattr(loss, "shape", None)
            raise ContractError(f"backward expects a 1-element tensor, got shape {shape}")
        if id(loss) not in self._output_ids:
            raise ContractError("backward called on a tensor not produced on this graph")
        loss.grad = np.ones_like(loss.values)
        for node in reversed(self.nodes):
            out_grad = node.output.grad
            if out_grad is None:
                continue
            for tensor, grad in zip(node.inputs, node.grad_fn(out_grad)):
                if grad is None or not isinstance(tensor, Tensor) or not tensor.requires_grad:
                    continue
                if tensor.grad is None:
                    tensor.grad = grad
                else:
                    tensor.grad = tensor.grad + grad


def backward(loss: Tensor):
    """Backward on the innermost active graph."""
    graph = active_graph()
    if graph is None:
        raise ContractError("backward requires an active Graph")
    graph.backward(loss)
