"""
Differentiable ops of the 1D ResNets. Layouts follow (batch, channels, length)
for sequences and (batch, features) for the head.
"""
from typing import Optional
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from core.errors import ShapeError, UninitializedStatsError
from engine.tensor import Tensor, make_result


def _require_same_shape(a: Tensor, b: Tensor, op: str):
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} differ")


def conv1d(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None,
           stride: int = 1, padding: int = 0) -> Tensor:
    """
    Zero padded cross-correlation.
    x (B, C_in, L), weight (C_out, C_in, K) -> (B, C_out, (L + 2p - K) // stride + 1)
    """
    if x.ndim != 3 or weight.ndim != 3:
        raise ShapeError(f"conv1d expects 3D input and weight, got {x.shape} and {weight.shape}")
    batch, c_in, length = x.shape
    c_out, w_in, k = weight.shape
    if c_in != w_in:
        raise ShapeError(f"conv1d: input has {c_in} channels, weight expects {w_in}")
    if stride < 1 or padding < 0:
        raise ShapeError("conv1d: stride must be >= 1 and padding >= 0")
    if length + 2 * padding < k:
        raise ShapeError(f"conv1d: padded length {length + 2 * padding} shorter than kernel {k}")
    if bias is not None and bias.shape != (c_out,):
        raise ShapeError(f"conv1d: bias shape {bias.shape} != ({c_out},)")

    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding))) if padding else x.data
    cols = sliding_window_view(xp, k, axis=2)[:, :, ::stride, :]   # (B, C_in, L_out, K)
    l_out = cols.shape[2]
    out = np.tensordot(cols, weight.data, axes=([1, 3], [1, 2])).transpose(0, 2, 1)
    if bias is not None:
        out = out + bias.data[None, :, None]
    out = np.ascontiguousarray(out)

    def backward_fn(g):
        grad_x = grad_w = grad_b = None
        if x.requires_grad:
            dcols = np.tensordot(g, weight.data, axes=([1], [0]))   # (B, L_out, C_in, K)
            dxp = np.zeros_like(xp)
            span = stride * (l_out - 1) + 1
            for tap in range(k):
                dxp[:, :, tap:tap + span:stride] += dcols[:, :, :, tap].transpose(0, 2, 1)
            grad_x = dxp[:, :, padding:padding + length] if padding else dxp
        if weight.requires_grad:
            grad_w = np.tensordot(g, cols, axes=([0, 2], [0, 2]))
        if bias is not None and bias.requires_grad:
            grad_b = g.sum(axis=(0, 2))
        return grad_x, grad_w, grad_b

    parents = (x, weight) if bias is None else (x, weight, bias)
    return make_result(out, parents, backward_fn)


def batchnorm1d(x: Tensor, gamma: Tensor, beta: Tensor,
                running_mean: np.ndarray, running_var: np.ndarray,
                training: bool, initialized: bool = True,
                momentum: float = 0.1, eps: float = 1e-5) -> Tensor:
    """
    Per-channel normalization over (batch, length).
    Training mode uses batch statistics and updates the running arrays in
    place (running var uses the unbiased estimate); eval mode uses them.
    """
    if x.ndim != 3 or gamma.shape != (x.shape[1],) or beta.shape != (x.shape[1],):
        raise ShapeError(f"batchnorm1d: input {x.shape}, gamma {gamma.shape}, beta {beta.shape}")
    axes = (0, 2)
    shape = (1, -1, 1)

    if training:
        if x.shape[0] < 2:
            raise ShapeError("batchnorm1d needs a batch of at least 2 in training mode")
        n = x.shape[0] * x.shape[2]
        mean = x.data.mean(axis=axes)
        var = x.data.var(axis=axes)
        running_mean *= 1.0 - momentum
        running_mean += momentum * mean
        running_var *= 1.0 - momentum
        running_var += momentum * var * n / max(n - 1, 1)
    else:
        if not initialized:
            raise UninitializedStatsError("batchnorm1d evaluated before any training update")
        mean, var = running_mean, running_var

    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = (x.data - mean.reshape(shape)) * inv_std.reshape(shape)
    out = gamma.data.reshape(shape) * x_hat + beta.data.reshape(shape)

    def backward_fn(g):
        grad_gamma = (g * x_hat).sum(axis=axes)
        grad_beta = g.sum(axis=axes)
        dx_hat = g * gamma.data.reshape(shape)
        if training:
            m = x.shape[0] * x.shape[2]
            grad_x = (inv_std.reshape(shape) / m) * (
                m * dx_hat
                - dx_hat.sum(axis=axes).reshape(shape)
                - x_hat * (dx_hat * x_hat).sum(axis=axes).reshape(shape)
            )
        else:
            grad_x = dx_hat * inv_std.reshape(shape)
        return grad_x, grad_gamma, grad_beta

    return make_result(out, (x, gamma, beta), backward_fn)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0

    def backward_fn(g):
        return (g * mask,)

    return make_result(np.where(mask, x.data, 0.0), (x,), backward_fn)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Residual sum of two equally shaped tensors (no broadcasting)."""
    _require_same_shape(a, b, "add")

    def backward_fn(g):
        return g, g

    return make_result(a.data + b.data, (a, b), backward_fn)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape(a, b, "mul")

    def backward_fn(g):
        return g * b.data, g * a.data

    return make_result(a.data * b.data, (a, b), backward_fn)


def sum_all(x: Tensor) -> Tensor:
    def backward_fn(g):
        return (np.broadcast_to(g, x.shape).copy(),)

    return make_result(np.asarray(x.data.sum()), (x,), backward_fn)


def global_avg_pool(x: Tensor) -> Tensor:
    """(B, C, L) -> (B, C), mean over length."""
    if x.ndim != 3:
        raise ShapeError(f"global_avg_pool expects (B, C, L), got {x.shape}")
    length = x.shape[2]

    def backward_fn(g):
        return (np.repeat(g[:, :, None] / length, length, axis=2),)

    return make_result(x.data.mean(axis=2), (x,), backward_fn)


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """(B, F) @ (O, F)^T + b -> (B, O)"""
    if x.ndim != 2 or weight.ndim != 2 or x.shape[1] != weight.shape[1]:
        raise ShapeError(f"linear: input {x.shape} does not match weight {weight.shape}")
    if bias is not None and bias.shape != (weight.shape[0],):
        raise ShapeError(f"linear: bias shape {bias.shape} != ({weight.shape[0]},)")
    out = x.data @ weight.data.T
    if bias is not None:
        out = out + bias.data

    def backward_fn(g):
        grad_b = g.sum(axis=0) if bias is not None else None
        return g @ weight.data, g.T @ x.data, grad_b

    parents = (x, weight) if bias is None else (x, weight, bias)
    return make_result(out, parents, backward_fn)


def mse_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean of squared differences over all elements."""
    _require_same_shape(pred, target, "mse_loss")
    diff = pred.data - target.data
    n = diff.size

    def backward_fn(g):
        grad = 2.0 * diff / n * g
        return grad, -grad

    return make_result(np.asarray(np.mean(diff * diff)), (pred, target), backward_fn)
