from collections import OrderedDict
from typing import Dict, Iterator, Tuple
import numpy as np
from core.errors import ConfigurationError, ShapeError
from engine import ops
from engine.tensor import Tensor


class Parameter(Tensor):
    """Trainable tensor; `name` is filled in with its dotted path on registration walk."""
    __slots__ = ("name",)

    def __init__(self, data, name: str = ""):
        super().__init__(data, requires_grad=True)
        self.name = name


def he_normal(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)


class Module:
    """Container that registers Parameters, sub-Modules and buffers set as attributes."""

    def __init__(self):
        object.__setattr__(self, "_parameters", OrderedDict())
        object.__setattr__(self, "_modules", OrderedDict())
        object.__setattr__(self, "_buffers", OrderedDict())
        object.__setattr__(self, "training", True)

    def __setattr__(self, name, value):
        if isinstance(value, Parameter):
            self._parameters[name] = value
        elif isinstance(value, Module):
            self._modules[name] = value
        object.__setattr__(self, name, value)

    def register_buffer(self, name: str, value: np.ndarray):
        self._buffers[name] = np.asarray(value, dtype=np.float64)

    def buffer(self, name: str) -> np.ndarray:
        return self._buffers[name]

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Parameter]]:
        seen = set()
        for name, param in self._walk(prefix, "_parameters"):
            if id(param) in seen:
                raise ConfigurationError(f"parameter '{name}' registered more than once")
            seen.add(id(param))
            param.name = name
            yield name, param

    def named_buffers(self, prefix: str = "") -> Iterator[Tuple[str, np.ndarray]]:
        yield from self._walk(prefix, "_buffers")

    def _walk(self, prefix: str, kind: str):
        for name, value in getattr(self, kind).items():
            yield prefix + name, value
        for name, module in self._modules.items():
            yield from module._walk(f"{prefix}{name}.", kind)

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def modules(self) -> Iterator["Module"]:
        yield self
        for module in self._modules.values():
            yield from module.modules()

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def train(self, mode: bool = True) -> "Module":
        for module in self.modules():
            object.__setattr__(module, "training", mode)
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def state_dict(self) -> Dict[str, np.ndarray]:
        state = OrderedDict((name, p.data.copy()) for name, p in self.named_parameters())
        for name, buf in self.named_buffers():
            state[name] = buf.copy()
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]):
        targets = dict(self.named_parameters())
        buffers = dict(self.named_buffers())
        expected = set(targets) | set(buffers)
        missing = expected - set(state)
        if missing:
            raise ShapeError(f"state is missing {sorted(missing)}")
        for name, value in state.items():
            value = np.asarray(value, dtype=np.float64)
            if name in targets:
                dest = targets[name].data
            elif name in buffers:
                dest = buffers[name]
            else:
                continue
            if dest.shape != value.shape:
                raise ShapeError(f"'{name}': expected shape {dest.shape}, got {value.shape}")
            dest[...] = value

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError


class Conv1d(Module):
    def __init__(self, c_in: int, c_out: int, kernel_size: int, rng: np.random.Generator,
                 stride: int = 1, padding: int = 0, bias: bool = False):
        super().__init__()
        self.stride = stride
        self.padding = padding
        self.weight = Parameter(he_normal(rng, (c_out, c_in, kernel_size), c_in * kernel_size))
        self.bias = Parameter(np.zeros(c_out)) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        return ops.conv1d(x, self.weight, self.bias, self.stride, self.padding)


class BatchNorm1d(Module):
    def __init__(self, channels: int, momentum: float = 0.1, eps: float = 1e-5):
        super().__init__()
        self.momentum = momentum
        self.eps = eps
        self.gamma = Parameter(np.ones(channels))
        self.beta = Parameter(np.zeros(channels))
        self.register_buffer("running_mean", np.zeros(channels))
        self.register_buffer("running_var", np.ones(channels))
        self.register_buffer("num_batches_tracked", np.zeros(1))

    def forward(self, x: Tensor) -> Tensor:
        tracked = self.buffer("num_batches_tracked")
        out = ops.batchnorm1d(
            x, self.gamma, self.beta,
            self.buffer("running_mean"), self.buffer("running_var"),
            training=self.training, initialized=tracked[0] > 0,
            momentum=self.momentum, eps=self.eps,
        )
        if self.training:
            tracked += 1
        return out


class Linear(Module):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        super().__init__()
        self.weight = Parameter(he_normal(rng, (out_features, in_features), in_features))
        self.bias = Parameter(np.zeros(out_features))

    def forward(self, x: Tensor) -> Tensor:
        return ops.linear(x, self.weight, self.bias)
