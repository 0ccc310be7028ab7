"""Perplexity and sequence/document log probabilities.

Perplexity is 2 to the negative mean log2 probability per token. Losses are
kept in nats internally; conversion to bits happens only here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..corpus import EOS_ID
from ..errors import EmptyBatch
from ..neuralcore.autodiff import log_softmax
from .batching import Example, iter_batches

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class EvalResult:
    token_count: int
    log2_sum: float
    perplexity: float

    @classmethod
    def from_sums(cls, token_count: int, log2_sum: float) -> "EvalResult":
        if token_count <= 0:
            raise EmptyBatch("perplexity needs at least one token")
        return cls(token_count=token_count, log2_sum=log2_sum,
                   perplexity=2.0 ** (-log2_sum / token_count))

    def merge(self, other: "EvalResult") -> "EvalResult":
        return EvalResult.from_sums(
            self.token_count + other.token_count, self.log2_sum + other.log2_sum
        )


def perplexity(model, examples: Sequence[Example], batch_size: int = 16) -> EvalResult:
    """Evaluate the model over all non-pad target tokens of the dataset.

    Per-batch (count, log2 sum) pairs merge associatively, so sharding the
    batches would give the same result.
    """
    if not examples:
        raise EmptyBatch("empty dataset")
    total_tokens = 0
    total_log2 = 0.0
    max_pos = getattr(getattr(model, "config", None), "max_positions", None)
    for batch in iter_batches(examples, batch_size, max_positions=max_pos):
        logits = model.forward(batch)
        logp = log_softmax(logits, axis=-1).data.astype(np.float64)
        picked = np.take_along_axis(logp, batch.target[..., None], axis=-1)[..., 0]
        total_log2 += float(picked[batch.target_mask].sum()) / _LN2
        total_tokens += int(batch.target_mask.sum())
    return EvalResult.from_sums(total_tokens, total_log2)


def sequence_logprob(model, source: Sequence[int], target: Sequence[int]) -> float:
    """log2 probability of the target given the source, teacher forced."""
    source = np.asarray(source, dtype=np.int64)
    target = np.asarray(target, dtype=np.int64)
    if target.size == 0:
        raise EmptyBatch("target must contain at least one token")
    dec_in = np.concatenate([[EOS_ID], target[:-1]])
    logits = model.logits_for(source, dec_in)
    logp = log_softmax(logits, axis=-1).data.astype(np.float64)
    return float(logp[np.arange(target.size), target].sum()) / _LN2


def doc_loglik_lower_bound(
    outline_model,
    article_model,
    prompt: Sequence[int],
    article: Sequence[int],
    n_samples: int = 1,
    seed: int = 0,
    decode_config=None,
) -> float:
    """Lower bound on log2 p(article | prompt) via sampled outlines.

    Sample 0 is the greedy outline; samples 1..n-1 are top-k draws. The
    bound is the best joint score log2 p(outline | prompt) +
    log2 p(article | outline). Sample sets are nested across n for a fixed
    seed, so the bound is monotone non-decreasing in n.
    """
    from ..pipeline import DecodeConfig, decode

    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    base = decode_config or DecodeConfig(seed=seed)

    best = -math.inf
    seen: set[tuple[int, ...]] = set()
    for i in range(n_samples):
        if i == 0:
            cfg = DecodeConfig(top_k=1, temperature=base.temperature,
                               max_len=base.max_len, seed=seed)
        else:
            cfg = DecodeConfig(top_k=base.top_k, temperature=base.temperature,
                               max_len=base.max_len, seed=seed + i)
        outline = decode(outline_model, prompt, cfg)
        key = tuple(outline)
        if key in seen:
            continue
        seen.add(key)
        score = sequence_logprob(outline_model, prompt, outline) + sequence_logprob(
            article_model, outline, article
        )
        best = max(best, score)
    return best
