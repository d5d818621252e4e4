"""Layer vocabulary shared by the DOA tracker and the post-filter network."""

from .layers import (
    EVAL,
    BatchNorm2d,
    Conv2d,
    GLUConv2d,
    Linear,
    Mode,
    TransGLUConv2d,
    conv_out_size,
    dropout,
    elu,
    softmax,
)
from .lstm import Lstm
from .attention import CausalSelfAttention
from .arn import ArnBlock

__all__ = [
    "Mode",
    "EVAL",
    "Linear",
    "Conv2d",
    "GLUConv2d",
    "TransGLUConv2d",
    "BatchNorm2d",
    "Lstm",
    "CausalSelfAttention",
    "ArnBlock",
    "conv_out_size",
    "dropout",
    "elu",
    "softmax",
]
