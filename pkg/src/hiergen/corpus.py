"""Corpus ingestion: heading-delimited parsing, cleaning, and vocabulary.

The raw input is pre-tokenized text (tokens separated by whitespace) with
wiki-style heading lines. Cleaning lowercases, canonicalizes numbers to the
token "num", drops table-like lines, and segments the body into paragraphs
and sentences. The token "newline" is reserved: it never appears inside a
sentence and is re-inserted only when an article is serialized to one line.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyArticle, InvalidId

# Reserved special tokens, in fixed id order.
UNK, NUM, NEWLINE, EOS, PAD = "unk", "num", "newline", "eos", "pad"
SPECIALS = (UNK, NUM, NEWLINE, EOS, PAD)
UNK_ID, NUM_ID, NEWLINE_ID, EOS_ID, PAD_ID = range(5)

_TOP_HEADING = re.compile(r"^=([^=].*[^=]|[^=])=$")
_ANY_HEADING = re.compile(r"^=+[^=].*?=+$|^=+$")
_NUMERIC = re.compile(r"^[0-9,./:-]*[0-9][0-9,./:-]*$")
_SENTENCE_ENDERS = frozenset({".", "!", "?"})


@dataclass
class RawArticle:
    """One article as parsed from the raw stream: title line plus body text."""

    title: str
    body: str


@dataclass
class Article:
    """Cleaned article: lowercase tokens grouped into sentences and paragraphs."""

    title: list[str]
    paragraphs: list[list[list[str]]]

    def sentences(self) -> Iterable[tuple[int, int, list[str]]]:
        """Yield (paragraph index, sentence index, tokens) in document order."""
        for p, paragraph in enumerate(self.paragraphs):
            for s, sentence in enumerate(paragraph):
                yield p, s, sentence

    def body_tokens(self) -> list[str]:
        """All body tokens in order, without paragraph separators."""
        return [t for _, _, sent in self.sentences() for t in sent]


@dataclass
class CleanConfig:
    """Heuristics for cleaning: table detection and number canonicalization.

    A line is table-like when at least ``table_pipe_ratio`` of its tokens are
    "|" or when any token contains "||". A token is numeric when it contains
    a digit and consists only of digits and the characters ",./:-"; any other
    digit-bearing token is also canonicalized so that no cleaned token ever
    contains an ASCII digit.
    """

    table_pipe_ratio: float = 0.25
    number_pattern: re.Pattern = _NUMERIC
    remap_unk: bool = True


def parse_corpus(raw_text: str) -> list[RawArticle]:
    """Split a heading-delimited stream into raw articles.

    Article boundaries are lines of the form ``= title =`` (exactly one
    leading and trailing ``=``). Deeper headings (``== ... ==``) belong to
    the current article but are dropped from its body. Text before the first
    top-level heading is ignored.
    """
    articles: list[RawArticle] = []
    title: str | None = None
    body_lines: list[str] = []

    def flush() -> None:
        if title is not None:
            articles.append(RawArticle(title=title, body="\n".join(body_lines)))

    for line in raw_text.splitlines():
        stripped = line.strip()
        m = _TOP_HEADING.match(stripped)
        inner = m.group(1).strip() if m else ""
        if inner and not inner.startswith("=") and not inner.endswith("="):
            flush()
            title = inner
            body_lines = []
        elif _ANY_HEADING.match(stripped):
            # Deeper headings (including "= = x = =" forms) are dropped.
            continue
        elif title is not None:
            body_lines.append(line)
    flush()
    return articles


def _is_table_line(tokens: Sequence[str], ratio: float) -> bool:
    if not tokens:
        return False
    if any("||" in t for t in tokens):
        return True
    return sum(t == "|" for t in tokens) / len(tokens) >= ratio


def _clean_token(token: str, config: CleanConfig) -> str:
    token = token.lower()
    if config.remap_unk and token == "<unk>":
        return UNK
    if any(c.isdigit() for c in token):
        # Strict numeric tokens and mixed digit-bearing tokens both collapse
        # to "num": cleaned text must be digit-free.
        return NUM
    return token


def _split_sentences(tokens: list[str]) -> list[list[str]]:
    sentences: list[list[str]] = []
    current: list[str] = []
    for token in tokens:
        current.append(token)
        if token in _SENTENCE_ENDERS:
            sentences.append(current)
            current = []
    if current:
        sentences.append(current)
    return sentences


def clean_article(raw: RawArticle, config: CleanConfig | None = None) -> Article:
    """Clean one raw article into its token structure.

    Table-like lines are dropped, tokens are lowercased, digit-bearing tokens
    become "num", paragraphs split on blank lines (a literal "newline" token
    also acts as a paragraph break, so serialized articles re-clean to
    themselves), and sentences split after ".", "!" or "?".

    Raises EmptyArticle when nothing remains in the body.
    """
    config = config or CleanConfig()
    title = [_clean_token(t, config) for t in raw.title.split()]

    paragraphs: list[list[list[str]]] = []
    current: list[str] = []

    def flush_paragraph() -> None:
        nonlocal current
        if current:
            paragraphs.append(_split_sentences(current))
            current = []

    for line in raw.body.splitlines():
        tokens = line.split()
        if not tokens:
            flush_paragraph()
            continue
        if _is_table_line(tokens, config.table_pipe_ratio):
            continue
        for token in tokens:
            if token == NEWLINE:
                flush_paragraph()
            else:
                current.append(_clean_token(token, config))
    flush_paragraph()

    if not paragraphs:
        raise EmptyArticle(f"article {raw.title!r} has no body after cleaning")
    return Article(title=title, paragraphs=paragraphs)


@dataclass
class Vocabulary:
    """Token/id map with reserved specials at ids 0..4."""

    token_to_id: dict[str, int]
    id_to_token: list[str]
    frequencies: dict[str, int]
    min_freq: int = 1

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id


def build_vocab(articles: Sequence[Article], min_freq: int = 3) -> Vocabulary:
    """Build the vocabulary from training articles.

    Non-special tokens with frequency below ``min_freq`` are excluded. Ids
    are dense: specials first, then tokens by descending frequency, ties
    broken lexicographically. Counting merges per-article counts, so the
    result does not depend on article order.
    """
    if min_freq < 1:
        raise ValueError("min_freq must be >= 1")
    counts: Counter[str] = Counter()
    for article in articles:
        counts.update(article.title)
        counts.update(article.body_tokens())
    for special in SPECIALS:
        counts.pop(special, None)

    kept = sorted(
        (t for t, c in counts.items() if c >= min_freq),
        key=lambda t: (-counts[t], t),
    )
    id_to_token = list(SPECIALS) + kept
    token_to_id = {t: i for i, t in enumerate(id_to_token)}
    return Vocabulary(
        token_to_id=token_to_id,
        id_to_token=id_to_token,
        frequencies={t: counts[t] for t in kept},
        min_freq=min_freq,
    )


def encode(tokens: Sequence[str], vocab: Vocabulary) -> list[int]:
    """Map tokens to ids; out-of-vocabulary tokens map to unk."""
    return [vocab.token_to_id.get(t, UNK_ID) for t in tokens]


def decode(ids: Sequence[int], vocab: Vocabulary) -> list[str]:
    """Map ids back to tokens. Raises InvalidId for ids outside the table."""
    out = []
    for i in ids:
        if not 0 <= i < len(vocab.id_to_token):
            raise InvalidId(f"id {i} outside vocabulary of size {len(vocab)}")
        out.append(vocab.id_to_token[i])
    return out


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def serialize_article(article: Article) -> str:
    """One-line form: title TAB body, paragraphs joined by the newline token."""
    body = f" {NEWLINE} ".join(
        " ".join(t for sent in paragraph for t in sent)
        for paragraph in article.paragraphs
    )
    return " ".join(article.title) + "\t" + body


def deserialize_article(line: str) -> Article:
    """Invert serialize_article (sentence boundaries are recomputed)."""
    title_part, _, body_part = line.rstrip("\n").partition("\t")
    paragraphs = []
    for chunk in body_part.split(f" {NEWLINE} "):
        tokens = [t for t in chunk.split() if t != NEWLINE]
        if tokens:
            paragraphs.append(_split_sentences(tokens))
    if not paragraphs:
        raise EmptyArticle("serialized article has an empty body")
    return Article(title=title_part.split(), paragraphs=paragraphs)


def write_clean_corpus(articles: Iterable[Article], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for article in articles:
            f.write(serialize_article(article) + "\n")


def read_clean_corpus(path: str) -> list[Article]:
    with open(path, encoding="utf-8") as f:
        return [deserialize_article(line) for line in f if line.strip()]


def write_vocab(vocab: Vocabulary, path: str) -> None:
    """One "token TAB frequency" line per non-special token, in id order."""
    with open(path, "w", encoding="utf-8") as f:
        for token in vocab.id_to_token[len(SPECIALS):]:
            f.write(f"{token}\t{vocab.frequencies[token]}\n")


def read_vocab(path: str) -> Vocabulary:
    """Load a vocabulary file; id = line number offset by the 5 specials."""
    id_to_token = list(SPECIALS)
    frequencies: dict[str, int] = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            token, _, freq = line.rstrip("\n").partition("\t")
            id_to_token.append(token)
            frequencies[token] = int(freq)
    token_to_id = {t: i for i, t in enumerate(id_to_token)}
    min_freq = min(frequencies.values()) if frequencies else 1
    return Vocabulary(
        token_to_id=token_to_id,
        id_to_token=id_to_token,
        frequencies=frequencies,
        min_freq=min_freq,
    )
