"""Dense tensors and define-by-run reverse-mode differentiation."""

from .gradcheck import gradient_agreement, numerical_gradient
from .ops import (
    add,
    conv2d,
    matmul,
    maxpool2d,
    mul,
    relu,
    reshape,
    softmax_cross_entropy,
    tensor_sum,
)
from .tape import ComputationTape, active_tape, backward, record
from .tensor import Tensor, parameter, storage_dtype, use_precision

__all__ = [
    "Tensor",
    "parameter",
    "storage_dtype",
    "use_precision",
    "ComputationTape",
    "active_tape",
    "backward",
    "record",
    "add",
    "conv2d",
    "matmul",
    "maxpool2d",
    "mul",
    "relu",
    "reshape",
    "softmax_cross_entropy",
    "tensor_sum",
    "numerical_gradient",
    "gradient_agreement",
]
