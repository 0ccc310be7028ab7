"""Outline extraction: frequency-based topic-sentence selection per meta-paragraph.

Short paragraphs are merged into meta-paragraphs of at least k sentences.
Word weights are initialized once per article (plain frequency or TF-IDF,
normalized to sum to 1), each meta-paragraph contributes the sentence with
the highest mean content-word weight, and the chosen sentence's word weights
are squared to penalize re-selecting the same material.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

from ..corpus import NUM, Article
from ..errors import NoContent
from .porter import porter_stem


def _load_stopwords() -> frozenset[str]:
    text = resources.files("hiergen.outline").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(text.split())


STOPWORDS = _load_stopwords()


def preprocess_sentence(sentence: Sequence[str]) -> list[str]:
    """Reduce a cleaned sentence to its stemmed content words.

    Drops stop words, the number token, and pure-punctuation tokens; stems
    alphabetic survivors. Order is preserved; result may be empty.
    """
    out = []
    for token in sentence:
        if token in STOPWORDS or token == NUM:
            continue
        if not any(c.isalnum() for c in token):
            continue
        out.append(porter_stem(token) if token.isalpha() else token)
    return out


@dataclass
class MetaParagraph:
    """Contiguous run of paragraphs holding at least k sentences (except the last)."""

    sentence_refs: list[tuple[int, int]]

    def __len__(self) -> int:
        return len(self.sentence_refs)


def aggregate_meta_paragraphs(article: Article, k: int) -> list[MetaParagraph]:
    """Merge consecutive paragraphs until each group reaches k sentences.

    Scans left to right, accumulating paragraphs until the accumulated
    sentence count reaches k, then emits the group. A trailing group with
    fewer than k sentences is emitted as the final meta-paragraph.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    metas: list[MetaParagraph] = []
    refs: list[tuple[int, int]] = []
    for p, paragraph in enumerate(article.paragraphs):
        refs.extend((p, s) for s in range(len(paragraph)))
        if len(refs) >= k:
            metas.append(MetaParagraph(refs))
            refs = []
    if refs:
        metas.append(MetaParagraph(refs))
    return metas


@dataclass
class DfTable:
    """Document frequencies of content words over a collection."""

    df: dict[str, int]
    total_docs: int

    def idf(self, word: str) -> float:
        # Unseen words are floored at df = 1, capping idf at ln(total_docs).
        d = max(self.df.get(word, 1), 1)
        return -math.log(d / self.total_docs)


def build_df_table(articles: Sequence[Article]) -> DfTable:
    """Count, for each content word, the number of articles containing it."""
    df: Counter[str] = Counter()
    for article in articles:
        words = set()
        for _, _, sentence in article.sentences():
            words.update(preprocess_sentence(sentence))
        df.update(words)
    return DfTable(df=dict(df), total_docs=len(articles))


@dataclass
class WeightTable:
    """Per-article content-word weights; sums to 1 at initialization."""

    weight: dict[str, float]
    mode: str

    def score_sentence(self, content_words: Sequence[str]) -> float:
        """Mean weight of the sentence's content words; 0 when there are none."""
        if not content_words:
            return 0.0
        return sum(self.weight.get(w, 0.0) for w in content_words) / len(content_words)

    def square_selected(self, content_words: Sequence[str]) -> None:
        """Square the weight of each distinct content word once."""
        for w in set(content_words):
            if w in self.weight:
                self.weight[w] = self.weight[w] ** 2


def init_weights(article: Article, mode: str = "freq", df: DfTable | None = None) -> WeightTable:
    """Initialize word weights for one article.

    freq mode: weight(w) = count(w) / N over the article's content words.
    tfidf mode: count(w)/N * idf(w), renormalized to sum to 1 (so the
    squaring update can only decrease weights). If every idf is zero the
    table falls back to plain frequencies.
    """
    if mode not in ("freq", "tfidf"):
        raise ValueError(f"unknown weighting mode {mode!r}")
    if mode == "tfidf" and df is None:
        raise ValueError("tfidf mode requires a document-frequency table")

    counts: Counter[str] = Counter()
    for _, _, sentence in article.sentences():
        counts.update(preprocess_sentence(sentence))
    total = sum(counts.values())
    if total == 0:
        raise NoContent("article has no content words")

    weight = {w: c / total for w, c in counts.items()}
    if mode == "tfidf":
        raw = {w: tf * df.idf(w) for w, tf in weight.items()}
        z = sum(raw.values())
        if z > 0:
            weight = {w: r / z for w, r in raw.items()}
    return WeightTable(weight=weight, mode=mode)


@dataclass
class Outline:
    """Selected topic sentences in document order, with provenance."""

    sentences: list[list[str]]
    provenance: list[tuple[int, int, int]]


def extract_outline(
    article: Article,
    k: int = 3,
    mode: str = "freq",
    df: DfTable | None = None,
) -> Outline:
    """Select one topic sentence per meta-paragraph.

    Weights are initialized once for the whole article and carried across
    meta-paragraphs: after each selection the chosen sentence's word weights
    are squared, penalizing redundancy in later selections. Ties break
    toward the earliest sentence. Articles with no content words fall back
    to each meta-paragraph's first sentence.
    """
    metas = aggregate_meta_paragraphs(article, k)
    try:
        weights = init_weights(article, mode=mode, df=df)
    except NoContent:
        weights = None

    content = {
        (p, s): preprocess_sentence(sentence)
        for p, s, sentence in article.sentences()
    }

    selected: list[list[str]] = []
    provenance: list[tuple[int, int, int]] = []
    for m, meta in enumerate(metas):
        if weights is None:
            p, s = meta.sentence_refs[0]
        else:
            best_score = -1.0
            p, s = meta.sentence_refs[0]
            for ref in meta.sentence_refs:
                score = weights.score_sentence(content[ref])
                if score > best_score:
                    best_score = score
                    p, s = ref
            weights.square_selected(content[(p, s)])
        selected.append(list(article.paragraphs[p][s]))
        provenance.append((m, p, s))
    return Outline(sentences=selected, provenance=provenance)
