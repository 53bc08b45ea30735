from typing import List
import numpy as np
from core.errors import ConfigurationError, ShapeError
from engine.layers import BatchNorm1d, Conv1d, Linear, Module
from engine.ops import add, global_avg_pool, relu
from engine.tensor import Tensor
from models.training import ArchSpec


class BasicBlock(Module):
    """Two K=3 convs with batch norm; 1x1 strided conv shortcut when the shape changes."""

    def __init__(self, c_in: int, c_out: int, stride: int, rng: np.random.Generator):
        super().__init__()
        self.conv1 = Conv1d(c_in, c_out, 3, rng, stride=stride, padding=1)
        self.bn1 = BatchNorm1d(c_out)
        self.conv2 = Conv1d(c_out, c_out, 3, rng, stride=1, padding=1)
        self.bn2 = BatchNorm1d(c_out)
        if stride != 1 or c_in != c_out:
            self.shortcut_conv = Conv1d(c_in, c_out, 1, rng, stride=stride)
            self.shortcut_bn = BatchNorm1d(c_out)
        else:
            self.shortcut_conv = None
            self.shortcut_bn = None

    def forward(self, x: Tensor) -> Tensor:
        out = relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        shortcut = x if self.shortcut_conv is None else self.shortcut_bn(self.shortcut_conv(x))
        return relu(add(out, shortcut))


class ResNet1D(Module):
    """
    stem conv (K=7, stride 2) -> strided K=3 conv in place of max-pool ->
    residual stages -> global average pool -> linear(., 1)
    With spec.trailing_conv the strided conv is replaced by a K=3 conv
    after the last stage.
    """

    def __init__(self, spec: ArchSpec, rng: np.random.Generator):
        super().__init__()
        self.spec = spec
        channels = spec.stage_channels
        c0 = spec.stem_channels
        self.stem = Conv1d(1, c0, 7, rng, stride=2, padding=3)
        self.stem_bn = BatchNorm1d(c0)
        if spec.trailing_conv:
            self.pool = self.pool_bn = None
        else:
            self.pool = Conv1d(c0, c0, 3, rng, stride=2, padding=1)
            self.pool_bn = BatchNorm1d(c0)

        self.blocks: List[BasicBlock] = []
        c_in = c0
        for stage, (c_out, count) in enumerate(zip(channels, spec.block_counts)):
            for index in range(count):
                stride = 2 if stage > 0 and index == 0 else 1
                block = BasicBlock(c_in, c_out, stride, rng)
                setattr(self, f"stage{stage + 1}_block{index + 1}", block)
                self.blocks.append(block)
                c_in = c_out
        if spec.trailing_conv:
            self.tail = Conv1d(c_in, c_in, 3, rng, stride=1, padding=1)
            self.tail_bn = BatchNorm1d(c_in)
        else:
            self.tail = self.tail_bn = None
        self.head = Linear(c_in, 1, rng)

    def forward(self, x: Tensor) -> Tensor:
        if x.ndim != 3 or x.shape[1] != 1 or x.shape[2] != self.spec.input_len:
            raise ShapeError(f"{self.spec.variant} expects (B, 1, {self.spec.input_len}), got {x.shape}")
        out = relu(self.stem_bn(self.stem(x)))
        if self.pool is not None:
            out = relu(self.pool_bn(self.pool(out)))
        for block in self.blocks:
            out = block(out)
        if self.tail is not None:
            out = relu(self.tail_bn(self.tail(out)))
        return self.head(global_avg_pool(out))


def build_model(spec: ArchSpec, rng: np.random.Generator) -> ResNet1D:
    if spec.variant not in ("ResNet6", "ResNet18", "ResNet34"):
        raise ConfigurationError(f"Unknown variant '{spec.variant}'")
    return ResNet1D(spec, rng)


def conv_layer_count(model: ResNet1D, include_shortcuts: bool = False) -> int:
    convs = [m for m in model.modules() if isinstance(m, Conv1d)]
    if include_shortcuts:
        return len(convs)
    shortcuts = {id(b.shortcut_conv) for b in model.blocks if b.shortcut_conv is not None}
    return sum(1 for c in convs if id(c) not in shortcuts)


def residual_block_count(model: ResNet1D) -> int:
    return len(model.blocks)


def parameter_count(model: Module) -> int:
    return sum(p.data.size for p in model.parameters())
