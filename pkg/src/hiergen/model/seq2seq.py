"""Convolutional sequence-to-sequence model with gated attention.

One architecture serves all three tasks (prompt to outline, outline to
article, prompt to article): token plus position embeddings feed a stack of
causal GLU convolution blocks; each decoder block optionally applies gated
self-attention over earlier decoder states, then gated attention over the
encoder outputs, either flat or hierarchical over sentence spans.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Sequence

import numpy as np

from ..corpus import EOS_ID
from ..errors import EmptyBatch, InvalidId, ShapeError
from ..neuralcore import autodiff as ad
from ..neuralcore.autodiff import Tensor
from ..neuralcore.layers import (
    GateParams,
    Span,
    attention_seq,
    conv1d_causal,
    glu,
    hier_attention_seq,
    self_attention_seq,
)
from .batching import Batch

ATTENTION_KINDS = ("flat", "hierarchical")
HIER_NORMS = ("sentence", "global")


@dataclass
class ModelConfig:
    src_vocab: int
    tgt_vocab: int
    embed_dim: int = 32
    hidden_dim: int = 32
    enc_blocks: int = 1
    dec_blocks: int = 1
    kernel_width: int = 3
    attention: str = "flat"
    self_attention: bool = True
    max_positions: int = 512
    seed: int = 0
    hier_norm: str = "sentence"

    def validate(self) -> None:
        numeric = (
            self.src_vocab, self.tgt_vocab, self.embed_dim, self.hidden_dim,
            self.enc_blocks, self.dec_blocks, self.kernel_width, self.max_positions,
        )
        if any(v < 1 for v in numeric):
            raise ValueError("all dimensions must be >= 1")
        if self.attention not in ATTENTION_KINDS:
            raise ValueError(f"attention must be one of {ATTENTION_KINDS}")
        if self.hier_norm not in HIER_NORMS:
            raise ValueError(f"hier_norm must be one of {HIER_NORMS}")

    def to_dict(self) -> dict[str, str]:
        return {f.name: str(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict[str, str]) -> "ModelConfig":
        kwargs = {}
        for f in fields(cls):
            if f.name not in d:
                continue
            raw = d[f.name]
            if f.type == "bool":
                kwargs[f.name] = raw.lower() in ("1", "true", "yes")
            elif f.type == "int":
                kwargs[f.name] = int(raw)
            else:
                kwargs[f.name] = raw
        config = cls(**kwargs)
        config.validate()
        return config


@dataclass
class Linear:
    w: Tensor
    b: Tensor

    @classmethod
    def init(cls, d_in: int, d_out: int, rng: np.random.Generator, dtype) -> "Linear":
        scale = 1.0 / np.sqrt(d_in)
        return cls(
            w=Tensor(rng.normal(0.0, scale, (d_in, d_out)).astype(dtype), requires_grad=True),
            b=Tensor(np.zeros(d_out, dtype=dtype), requires_grad=True),
        )

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.w + self.b


@dataclass
class ConvBlock:
    w: Tensor
    b: Tensor

    @classmethod
    def init(cls, width: int, dim: int, rng: np.random.Generator, dtype) -> "ConvBlock":
        scale = 1.0 / np.sqrt(width * dim)
        return cls(
            w=Tensor(rng.normal(0.0, scale, (width, dim, 2 * dim)).astype(dtype), requires_grad=True),
            b=Tensor(np.zeros(2 * dim, dtype=dtype), requires_grad=True),
        )

    def __call__(self, x: Tensor) -> Tensor:
        return glu(conv1d_causal(x, self.w, self.b))


class Seq2SeqModel:
    """Parameter store plus the forward computations."""

    def __init__(self, config: ModelConfig, dtype=np.float32):
        config.validate()
        self.config = config
        self.dtype = np.dtype(dtype)
        self.step = 0
        self.meta: dict[str, str] = {}
        rng = np.random.default_rng(config.seed)
        d = config.hidden_dim

        def embedding(rows: int, cols: int) -> Tensor:
            return Tensor(rng.normal(0.0, 0.1, (rows, cols)).astype(self.dtype),
                          requires_grad=True)

        self.src_embed = embedding(config.src_vocab, config.embed_dim)
        self.src_pos = embedding(config.max_positions, config.embed_dim)
        self.tgt_embed = embedding(config.tgt_vocab, config.embed_dim)
        self.tgt_pos = embedding(config.max_positions, config.embed_dim)
        self.enc_in = Linear.init(config.embed_dim, d, rng, self.dtype)
        self.enc_convs = [ConvBlock.init(config.kernel_width, d, rng, self.dtype)
                          for _ in range(config.enc_blocks)]
        self.dec_in = Linear.init(config.embed_dim, d, rng, self.dtype)
        self.dec_convs = [ConvBlock.init(config.kernel_width, d, rng, self.dtype)
                          for _ in range(config.dec_blocks)]
        self.self_gates = [GateParams.init(d, rng, self.dtype)
                           for _ in range(config.dec_blocks)]
        self.enc_gates = [GateParams.init(d, rng, self.dtype)
                          for _ in range(config.dec_blocks)]
        self.out = Linear.init(d, config.tgt_vocab, rng, self.dtype)

    # -- parameters ----------------------------------------------------------

    def named_parameters(self) -> dict[str, Tensor]:
        params: dict[str, Tensor] = {
            "src_embed": self.src_embed,
            "src_pos": self.src_pos,
            "tgt_embed": self.tgt_embed,
            "tgt_pos": self.tgt_pos,
            "enc_in.w": self.enc_in.w,
            "enc_in.b": self.enc_in.b,
            "dec_in.w": self.dec_in.w,
            "dec_in.b": self.dec_in.b,
        }
        for i, block in enumerate(self.enc_convs):
            params[f"enc.{i}.conv.w"] = block.w
            params[f"enc.{i}.conv.b"] = block.b
        for i, block in enumerate(self.dec_convs):
            params[f"dec.{i}.conv.w"] = block.w
            params[f"dec.{i}.conv.b"] = block.b
        for i, gate in enumerate(self.self_gates):
            params[f"dec.{i}.self_gate.wg"] = gate.wg
            params[f"dec.{i}.self_gate.ug"] = gate.ug
            params[f"dec.{i}.self_gate.bg"] = gate.bg
        for i, gate in enumerate(self.enc_gates):
            params[f"dec.{i}.enc_gate.wg"] = gate.wg
            params[f"dec.{i}.enc_gate.ug"] = gate.ug
            params[f"dec.{i}.enc_gate.bg"] = gate.bg
        params["out.w"] = self.out.w
        params["out.b"] = self.out.b
        return params

    def zero_grad(self) -> None:
        for p in self.named_parameters().values():
            p.zero_grad()

    # -- forward -------------------------------------------------------------

    def _positions(self, n: int) -> np.ndarray:
        return np.minimum(np.arange(n), self.config.max_positions - 1)

    def encode_source(self, src_ids: np.ndarray) -> Tensor:
        src_ids = np.asarray(src_ids)
        if src_ids.size == 0:
            raise ShapeError("source must contain at least one token")
        if src_ids.min() < 0 or src_ids.max() >= self.config.src_vocab:
            raise InvalidId("source id outside the source vocabulary")
        x = ad.take_rows(self.src_embed, src_ids) + ad.take_rows(
            self.src_pos, self._positions(len(src_ids)))
        x = self.enc_in(x)
        for block in self.enc_convs:
            x = x + block(x)
        return x

    def decoder_states(self, dec_in_ids: np.ndarray, encodings: Tensor,
                       spans: Sequence[Span]) -> Tensor:
        dec_in_ids = np.asarray(dec_in_ids)
        if dec_in_ids.min() < 0 or dec_in_ids.max() >= self.config.tgt_vocab:
            raise InvalidId("target id outside the target vocabulary")
        y = ad.take_rows(self.tgt_embed, dec_in_ids) + ad.take_rows(
            self.tgt_pos, self._positions(len(dec_in_ids)))
        y = self.dec_in(y)
        for block, self_gate, enc_gate in zip(
                self.dec_convs, self.self_gates, self.enc_gates):
            y = y + block(y)
            if self.config.self_attention:
                y = y + self_attention_seq(y, self_gate)
            if self.config.attention == "hierarchical":
                y = y + hier_attention_seq(y, encodings, spans, enc_gate,
                                           norm=self.config.hier_norm)
            else:
                y = y + attention_seq(y, encodings, enc_gate)
        return y

    def logits_for(self, src_ids: np.ndarray, dec_in_ids: np.ndarray,
                   spans: Sequence[Span] | None = None) -> Tensor:
        from .batching import sentence_spans

        if spans is None:
            spans = sentence_spans(list(np.asarray(src_ids)))
        encodings = self.encode_source(src_ids)
        states = self.decoder_states(dec_in_ids, encodings, spans)
        return self.out(states)

    def forward(self, batch: Batch) -> Tensor:
        """Teacher-forced logits, (B, T, tgt_vocab).

        The decoder input is the target shifted right with a leading eos, so
        logits at position t depend only on the source and targets before t.
        Rows shorter than T carry zero logits at their padded positions.
        """
        t_max = batch.target.shape[1]
        rows = []
        for b in range(batch.size):
            src = batch.source_row(b)
            tgt = batch.target_row(b)
            if tgt.size == 0:
                raise EmptyBatch(f"batch row {b} has no target tokens")
            dec_in = np.concatenate([[EOS_ID], tgt[:-1]])
            logits = self.logits_for(src, dec_in, batch.spans[b])
            rows.append(ad.pad_rows_to(logits, t_max))
        return ad.stack(rows)


def forward(model, batch: Batch) -> Tensor:
    return model.forward(batch)
