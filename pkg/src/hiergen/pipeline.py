"""Decoding and the two-phase generation chain: prompt -> outline -> article.

Decoding is top-k sampling; the generated outline is fed verbatim as the
article model's source. Degenerate outlines (nothing but eos, or only
unknown tokens) are passed through and flagged, not retried.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import EOS_ID, PAD_ID, UNK_ID, Vocabulary, decode as decode_ids
from .errors import NumericalError, VocabMismatch
from .model.seq2seq import Seq2SeqModel


@dataclass
class DecodeConfig:
    top_k: int = 10
    temperature: float = 1.0
    max_len: int = 400
    seed: int = 0

    def validate(self) -> None:
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")


def topk_sample(logits: np.ndarray, config: DecodeConfig,
                rng: np.random.Generator) -> int:
    """Sample one token id from the k most likely entries.

    All but the k largest logits are discarded; the survivors are divided by
    the temperature, renormalized with a stable softmax, and sampled.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if not np.isfinite(logits).all():
        raise NumericalError("non-finite logits")
    k = min(config.top_k, logits.size)
    if k == 1:
        return int(np.argmax(logits))
    kept = np.argpartition(logits, -k)[-k:]
    scaled = logits[kept] / config.temperature
    scaled -= scaled.max()
    probs = np.exp(scaled)
    probs /= probs.sum()
    return int(rng.choice(kept, p=probs))


def decode(model: Seq2SeqModel, source: Sequence[int], config: DecodeConfig,
           rng: np.random.Generator | None = None) -> list[int]:
    """Autoregressive sampling until eos, at most max_len tokens.

    The result is always eos-terminated (the final slot is forced to eos if
    sampling never produced one) and never contains pad.
    """
    config.validate()
    if rng is None:
        rng = np.random.default_rng(config.seed)
    source = np.asarray(source, dtype=np.int64)
    encodings = model.encode_source(source)
    from .model.batching import sentence_spans

    spans = sentence_spans(list(source))
    out: list[int] = []
    while len(out) < config.max_len:
        dec_in = np.array([EOS_ID] + out, dtype=np.int64)
        states = model.decoder_states(dec_in, encodings, spans)
        logits = (states[states.shape[0] - 1] @ model.out.w + model.out.b).data
        logits = logits.astype(np.float64)
        logits[PAD_ID] = -1e30
        token = topk_sample(logits, config, rng)
        if len(out) == config.max_len - 1:
            token = EOS_ID
        out.append(token)
        if token == EOS_ID:
            break
    return out


@dataclass
class GenerationRecord:
    """One chained generation with its decode metadata."""

    prompt: list[int]
    generated_outline: list[int]
    generated_article: list[int]
    seed: int
    top_k: int
    degenerate: bool
    outline_model_id: str = ""
    article_model_id: str = ""


def is_degenerate(outline: Sequence[int]) -> bool:
    content = [t for t in outline if t != EOS_ID]
    return not content or all(t == UNK_ID for t in content)


def two_phase_generate(
    outline_model: Seq2SeqModel,
    article_model: Seq2SeqModel,
    prompt: Sequence[int],
    config: DecodeConfig,
    article_max_len: int | None = None,
    outline_model_id: str = "",
    article_model_id: str = "",
) -> GenerationRecord:
    """Run prompt -> outline -> article with one seeded random stream.

    The article model consumes the generated outline verbatim as its source;
    for a hierarchical article model the sentence spans come from the
    generated outline's newline/eos positions.
    """
    if outline_model.config.tgt_vocab != article_model.config.src_vocab:
        raise VocabMismatch(
            f"outline target vocab {outline_model.config.tgt_vocab} != "
            f"article source vocab {article_model.config.src_vocab}"
        )
    rng = np.random.default_rng(config.seed)
    outline = decode(outline_model, prompt, config, rng)
    article_config = DecodeConfig(
        top_k=config.top_k,
        temperature=config.temperature,
        max_len=article_max_len or config.max_len,
        seed=config.seed,
    )
    article = decode(article_model, outline, article_config, rng)
    return GenerationRecord(
        prompt=list(prompt),
        generated_outline=outline,
        generated_article=article,
        seed=config.seed,
        top_k=config.top_k,
        degenerate=is_degenerate(outline),
        outline_model_id=outline_model_id,
        article_model_id=article_model_id,
    )


def generate_records(
    outline_model: Seq2SeqModel,
    article_model: Seq2SeqModel,
    prompts: Sequence[Sequence[int]],
    config: DecodeConfig,
    article_max_len: int | None = None,
    outline_model_id: str = "",
    article_model_id: str = "",
) -> list[GenerationRecord]:
    """Generate one record per prompt with per-record seeds (base + index)."""
    records = []
    for i, prompt in enumerate(prompts):
        per_record = DecodeConfig(
            top_k=config.top_k,
            temperature=config.temperature,
            max_len=config.max_len,
            seed=config.seed + i,
        )
        records.append(
            two_phase_generate(
                outline_model, article_model, prompt, per_record,
                article_max_len=article_max_len,
                outline_model_id=outline_model_id,
                article_model_id=article_model_id,
            )
        )
    return records


def _tokens_line(ids: Sequence[int], vocab: Vocabulary) -> str:
    content = [t for t in ids if t != EOS_ID]
    return " ".join(decode_ids(content, vocab))


def write_generation(records: Sequence[GenerationRecord], vocab: Vocabulary,
                     out_dir: str) -> None:
    """Write line-aligned gen.outline / gen.article / gen.meta files."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "gen.outline"), "w", encoding="utf-8") as f:
        for r in records:
            f.write(_tokens_line(r.generated_outline, vocab) + "\n")
    with open(os.path.join(out_dir, "gen.article"), "w", encoding="utf-8") as f:
        for r in records:
            f.write(_tokens_line(r.generated_article, vocab) + "\n")
    with open(os.path.join(out_dir, "gen.meta"), "w", encoding="utf-8") as f:
        for r in records:
            f.write(f"{r.seed}\t{r.top_k}\t{int(r.degenerate)}\n")
