"""Aligned prompt/outline/article datasets and their on-disk layout.

Each example is a triple of token sequences: the prompt is the article's
first sentence, the outline's sentences are joined by the "newline" token,
and the article's paragraphs likewise. Splits are written as three
line-aligned files per split: {split}.prompt, {split}.outline,
{split}.article.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..corpus import NEWLINE, Article
from ..errors import AlignmentError
from .sumbasic import Outline

SPLITS = ("train", "valid", "test")
FIELDS = ("prompt", "outline", "article")


@dataclass
class DatasetTriple:
    """One aligned example; eos is appended at encode time, not here."""

    prompt: list[str]
    outline: list[str]
    article: list[str]


def serialize_outline(outline: Outline) -> list[str]:
    tokens: list[str] = []
    for i, sentence in enumerate(outline.sentences):
        if i:
            tokens.append(NEWLINE)
        tokens.extend(sentence)
    return tokens


def serialize_body(article: Article, drop_first_sentence: bool = False) -> list[str]:
    tokens: list[str] = []
    for p, paragraph in enumerate(article.paragraphs):
        for s, sentence in enumerate(paragraph):
            if p == 0 and s == 0 and drop_first_sentence:
                continue
            tokens.extend(sentence)
        if p < len(article.paragraphs) - 1:
            tokens.append(NEWLINE)
    return tokens


def make_triple(
    article: Article, outline: Outline, drop_first_sentence: bool = False
) -> DatasetTriple:
    return DatasetTriple(
        prompt=list(article.paragraphs[0][0]),
        outline=serialize_outline(outline),
        article=serialize_body(article, drop_first_sentence),
    )


def split_sizes(n: int, ratios: Sequence[float]) -> list[int]:
    """Floor each share, then hand out the remainder by largest fraction.

    Ties in the fractional parts are broken toward earlier splits.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("split ratios must sum to 1")
    exact = [n * r for r in ratios]
    sizes = [int(e) for e in exact]
    remainder = n - sum(sizes)
    by_fraction = sorted(
        range(len(ratios)), key=lambda i: (-(exact[i] - sizes[i]), i)
    )
    for i in by_fraction[:remainder]:
        sizes[i] += 1
    return sizes


def build_dataset(
    articles: Sequence[Article],
    outlines: Sequence[Outline],
    split_ratios: Sequence[float] = (0.8, 0.1, 0.1),
    seed: int = 0,
    drop_first_sentence: bool = False,
) -> dict[str, list[DatasetTriple]]:
    """Assemble aligned triples and partition them with a seeded shuffle."""
    if len(articles) != len(outlines):
        raise AlignmentError(
            f"{len(articles)} articles but {len(outlines)} outlines"
        )
    triples = [
        make_triple(a, o, drop_first_sentence)
        for a, o in zip(articles, outlines)
    ]
    order = np.random.default_rng(seed).permutation(len(triples))
    sizes = split_sizes(len(triples), split_ratios)
    out: dict[str, list[DatasetTriple]] = {}
    start = 0
    for split, size in zip(SPLITS, sizes):
        out[split] = [triples[i] for i in order[start : start + size]]
        start += size
    return out


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def write_outlines(outlines: Sequence[Outline], path: str) -> None:
    """One outline per line, aligned with the cleaned-corpus file."""
    with open(path, "w", encoding="utf-8") as f:
        for outline in outlines:
            f.write(" ".join(serialize_outline(outline)) + "\n")


def read_token_lines(path: str) -> list[list[str]]:
    with open(path, encoding="utf-8") as f:
        return [line.split() for line in f]


def write_splits(splits: dict[str, list[DatasetTriple]], out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for split, triples in splits.items():
        for fieldname in FIELDS:
            path = os.path.join(out_dir, f"{split}.{fieldname}")
            with open(path, "w", encoding="utf-8") as f:
                for triple in triples:
                    f.write(" ".join(getattr(triple, fieldname)) + "\n")


def read_split(data_dir: str, split: str) -> list[DatasetTriple]:
    columns = []
    for fieldname in FIELDS:
        columns.append(read_token_lines(os.path.join(data_dir, f"{split}.{fieldname}")))
    if len({len(c) for c in columns}) != 1:
        raise AlignmentError(f"{split} files in {data_dir} are not line-aligned")
    return [DatasetTriple(p, o, a) for p, o, a in zip(*columns)]
