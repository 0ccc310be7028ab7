"""Dense-tensor numeric core with reverse-mode gradients."""

from .autodiff import (
    Tensor,
    concat,
    exp,
    gather_last,
    grad_check,
    log,
    log_softmax,
    pad_front_rows,
    pad_rows_to,
    sigmoid,
    softmax,
    stack,
    take_rows,
)
from .layers import (
    AttentionOutput,
    GateParams,
    attention_seq,
    check_spans,
    conv1d_causal,
    gated_attention,
    gated_self_attention,
    glu,
    hier_attention,
    hier_attention_seq,
    self_attention_seq,
)

__all__ = [
    "AttentionOutput",
    "GateParams",
    "Tensor",
    "attention_seq",
    "check_spans",
    "concat",
    "conv1d_causal",
    "exp",
    "gather_last",
    "gated_attention",
    "gated_self_attention",
    "glu",
    "grad_check",
    "hier_attention",
    "hier_attention_seq",
    "log",
    "log_softmax",
    "pad_front_rows",
    "pad_rows_to",
    "self_attention_seq",
    "sigmoid",
    "softmax",
    "stack",
    "take_rows",
]
