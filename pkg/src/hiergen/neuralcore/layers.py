"""Network layers: GLU, causal convolution, and gated attention variants.

All attention forms share one gating rule: the raw context c for a query h
is scaled elementwise by g = sigmoid(h Wg + c Ug + bg). Hierarchical
attention factors the word weights into a sentence-level softmax (over
sentence vectors built by summing word encodings) times a word-level
softmax; by default the word softmax is normalized within each sentence,
which makes the product a proper distribution without renormalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ShapeError
from . import autodiff as ad
from .autodiff import Tensor

Span = tuple[int, int]


@dataclass
class AttentionOutput:
    """Context plus the attention distribution(s) and gate that produced it."""

    context: Tensor
    word_weights: Tensor
    sentence_weights: Tensor | None
    gate: Tensor


@dataclass
class GateParams:
    """Parameters of the multiplicative context gate."""

    wg: Tensor
    ug: Tensor
    bg: Tensor

    @classmethod
    def init(cls, dim: int, rng: np.random.Generator, dtype=np.float64) -> "GateParams":
        scale = 1.0 / np.sqrt(dim)
        return cls(
            wg=Tensor(rng.normal(0.0, scale, (dim, dim)).astype(dtype), requires_grad=True),
            ug=Tensor(rng.normal(0.0, scale, (dim, dim)).astype(dtype), requires_grad=True),
            bg=Tensor(np.zeros(dim, dtype=dtype), requires_grad=True),
        )

    def tensors(self) -> list[Tensor]:
        return [self.wg, self.ug, self.bg]


def glu(x: Tensor) -> Tensor:
    """Gated linear unit over the last dimension: first half * sigmoid(second)."""
    d = x.shape[-1]
    if d % 2 != 0:
        raise ShapeError(f"glu needs an even last dimension, got {d}")
    half = d // 2
    return x[..., :half] * ad.sigmoid(x[..., half:])


def conv1d_causal(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """1-D convolution where output t sees only inputs <= t.

    x is (seq, d_in), w is (width, d_in, d_out), b is (d_out,). The input is
    left-padded with width-1 zero frames.
    """
    if x.shape[-1] != w.shape[1]:
        raise ShapeError(f"conv input dim {x.shape[-1]} != kernel dim {w.shape[1]}")
    width = w.shape[0]
    seq = x.shape[0]
    if seq < 1:
        raise ShapeError("conv1d_causal needs at least one input frame")
    padded = ad.pad_front_rows(x, width - 1)
    out = padded[0:seq] @ w[0]
    for i in range(1, width):
        out = out + padded[i : i + seq] @ w[i]
    return out + b


def _gate(h: Tensor, context: Tensor, params: GateParams) -> Tensor:
    return ad.sigmoid(h @ params.wg + context @ params.ug + params.bg)


def gated_attention(h: Tensor, encodings: Tensor, params: GateParams) -> AttentionOutput:
    """Dot-product attention of one query over n encodings, with gated context."""
    if encodings.shape[0] < 1:
        raise ShapeError("attention needs at least one encoding")
    weights = ad.softmax(encodings @ h)
    raw = weights @ encodings
    gate = _gate(h, raw, params)
    return AttentionOutput(
        context=gate * raw, word_weights=weights, sentence_weights=None, gate=gate
    )


def gated_self_attention(h: Tensor, prior: Tensor, params: GateParams) -> AttentionOutput:
    """Attention of a decoder state over strictly earlier decoder states.

    With no prior states the context is exactly zero and the weight vector is
    empty.
    """
    if prior.shape[0] == 0:
        zero = Tensor(np.zeros_like(h.data))
        gate = _gate(h, zero, params)
        return AttentionOutput(
            context=gate * zero,
            word_weights=Tensor(np.zeros(0, dtype=h.data.dtype)),
            sentence_weights=None,
            gate=gate,
        )
    return gated_attention(h, prior, params)


def check_spans(spans: Sequence[Span], n: int) -> None:
    if not spans:
        raise ShapeError("at least one sentence span is required")
    pos = 0
    for start, end in spans:
        if start != pos or end <= start:
            raise ShapeError(f"spans must partition 0..{n} with non-empty pieces")
        pos = end
    if pos != n:
        raise ShapeError(f"spans cover 0..{pos} but there are {n} encodings")


def hier_attention(
    h: Tensor,
    encodings: Tensor,
    spans: Sequence[Span],
    params: GateParams,
    norm: str = "sentence",
) -> AttentionOutput:
    """Two-level attention: sentence softmax times word softmax.

    Sentence vectors are sums of the word encodings in each span. The final
    weight of word i is beta[sentence(i)] * alpha[i]. With norm="sentence",
    alpha is a softmax within each span; with norm="global", alpha is a
    softmax over all words and the products are renormalized.
    """
    n = encodings.shape[0]
    check_spans(spans, n)
    if norm not in ("sentence", "global"):
        raise ValueError(f"unknown hierarchical normalization {norm!r}")

    sent_vecs = ad.stack([encodings[a:b].sum(axis=0) for a, b in spans])
    beta = ad.softmax(sent_vecs @ h)
    word_scores = encodings @ h

    if norm == "sentence":
        pieces = [beta[j] * ad.softmax(word_scores[a:b]) for j, (a, b) in enumerate(spans)]
        weights = ad.concat(pieces)
    else:
        alpha = ad.softmax(word_scores)
        raw_w = ad.concat([beta[j] * alpha[a:b] for j, (a, b) in enumerate(spans)])
        weights = raw_w / raw_w.sum()

    raw = weights @ encodings
    gate = _gate(h, raw, params)
    return AttentionOutput(
        context=gate * raw, word_weights=weights, sentence_weights=beta, gate=gate
    )


# ---------------------------------------------------------------------------
# Whole-sequence forms used inside the decoder. Row t of the result equals
# the single-query op applied at position t; tests cross-check this.
# ---------------------------------------------------------------------------

def attention_seq(states: Tensor, encodings: Tensor, params: GateParams) -> Tensor:
    """Gated attention of every decoder state over the encodings; (T, d)."""
    weights = ad.softmax(states @ encodings.T, axis=-1)
    raw = weights @ encodings
    gate = ad.sigmoid(states @ params.wg + raw @ params.ug + params.bg)
    return gate * raw


def self_attention_seq(states: Tensor, params: GateParams) -> Tensor:
    """Causally masked gated self-attention for all positions at once.

    Position t attends to positions < t; position 0 gets a zero context.
    """
    t = states.shape[0]
    dtype = states.data.dtype
    scores = states @ states.T
    mask = np.full((t, t), -1e9, dtype=dtype)
    mask[np.tril_indices(t, k=-1)] = 0.0
    weights = ad.softmax(scores + Tensor(mask), axis=-1)
    # Row 0 has no prefix: its softmax row is garbage over the mask floor,
    # so it is zeroed outright.
    row_keep = np.ones((t, 1), dtype=dtype)
    row_keep[0, 0] = 0.0
    weights = weights * Tensor(row_keep)
    raw = weights @ states
    gate = ad.sigmoid(states @ params.wg + raw @ params.ug + params.bg)
    return gate * raw


def hier_attention_seq(
    states: Tensor,
    encodings: Tensor,
    spans: Sequence[Span],
    params: GateParams,
    norm: str = "sentence",
) -> Tensor:
    """Gated hierarchical attention of every decoder state; (T, d)."""
    n = encodings.shape[0]
    check_spans(spans, n)
    sent_vecs = ad.stack([encodings[a:b].sum(axis=0) for a, b in spans])
    beta = ad.softmax(states @ sent_vecs.T, axis=-1)
    word_scores = states @ encodings.T

    if norm == "sentence":
        pieces = [
            beta[:, j : j + 1] * ad.softmax(word_scores[:, a:b], axis=-1)
            for j, (a, b) in enumerate(spans)
        ]
        weights = ad.concat(pieces, axis=1)
    else:
        alpha = ad.softmax(word_scores, axis=-1)
        raw_w = ad.concat(
            [beta[:, j : j + 1] * alpha[:, a:b] for j, (a, b) in enumerate(spans)],
            axis=1,
        )
        weights = raw_w / raw_w.sum(axis=-1, keepdims=True)

    raw = weights @ encodings
    gate = ad.sigmoid(states @ params.wg + raw @ params.ug + params.bg)
    return gate * raw
