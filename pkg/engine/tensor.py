from contextlib import contextmanager
from typing import Callable, Optional, Sequence, Tuple
import numpy as np
from core.errors import ShapeError


_grad_enabled = True


class Node:
    """Backward record: the inputs of an op and how to push a gradient into them."""
    __slots__ = ("parents", "backward_fn")

    # Number of records ever created; inference paths must leave it untouched.
    created = 0

    def __init__(self, parents: Sequence["Tensor"],
                 backward_fn: Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]):
        self.parents = tuple(parents)
        self.backward_fn = backward_fn
        Node.created += 1


class Tensor:
    """Dense float64 array with an optional gradient and backward record."""
    __slots__ = ("data", "grad", "requires_grad", "node")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.node: Optional[Node] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def zero_grad(self):
        self.grad = None

    def item(self) -> float:
        return float(self.data)

    def backward(self):
        backward(self)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


@contextmanager
def no_grad():
    """Ops inside this block record no backward graph."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def make_result(data: np.ndarray, parents: Sequence[Tensor],
                backward_fn: Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]) -> Tensor:
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out.node = Node(parents, backward_fn)
    return out


def _topological_order(root: Tensor):
    order, visited = [], set()
    stack = [(root, False)]
    while stack:
        tensor, expanded = stack.pop()
        if expanded:
            order.append(tensor)
            continue
        if id(tensor) in visited:
            continue
        visited.add(id(tensor))
        stack.append((tensor, True))
        if tensor.node is not None:
            for parent in tensor.node.parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
    return order


def backward(loss: Tensor):
    """
    Reverse-mode sweep from a scalar. Leaf tensors with requires_grad
    accumulate into .grad, so repeated calls add up until zero_grad.
    """
    if loss.data.shape != ():
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")

    grads = {id(loss): np.ones_like(loss.data)}
    for tensor in reversed(_topological_order(loss)):
        g = grads.pop(id(tensor), None)
        if g is None:
            continue
        if tensor.node is None:
            if tensor.requires_grad:
                tensor.grad = g.copy() if tensor.grad is None else tensor.grad + g
            continue
        for parent, pg in zip(tensor.node.parents, tensor.node.backward_fn(g)):
            if pg is None or not parent.requires_grad:
                continue
            key = id(parent)
            grads[key] = grads[key] + pg if key in grads else pg
