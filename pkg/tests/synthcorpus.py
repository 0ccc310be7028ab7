"""Seeded grammar for synthetic articles used across the test suite.

Each article has one global topic word (in every sentence) and one
secondary word per later paragraph (in every sentence of that paragraph).
The first sentence (the prompt) reveals only the topic, while the outline
carries one sentence per paragraph and therefore every secondary word, so
conditioning on outlines carries real information about the body.
"""

from __future__ import annotations

import numpy as np

TOPICS = [
    "falcon", "glacier", "harbor", "meadow", "turbine", "lantern",
    "orchard", "canyon", "beacon", "marble", "willow", "thunder",
    "compass", "saddle", "anchor", "violin", "ember", "prairie",
]
SECONDARY = [
    "miller", "sailor", "weaver", "hunter", "mason", "piper",
    "ranger", "scribe", "smith", "tanner", "archer", "drover",
    "fowler", "glover", "herder", "joiner",
]
PLACES = ["river", "village", "market", "garden", "tower", "bridge"]
TIMES = ["spring", "winter", "morning", "evening"]

_OPEN_TEMPLATES = [
    "the {t} stands near the {place} .",
    "the {t} appears beside the {place} at {time} .",
    "many visitors admire the {t} every {time} .",
    "the {t} was built in {year} .",
]
_BODY_TEMPLATES = [
    "the {s} guards the {t} near the {place} .",
    "each {time} the {s} visits the {t} .",
    "the {s} of the {place} praises the {t} .",
    "in {year} the {s} restored the {t} .",
]


def _fill(rng: np.random.Generator, template: str, **words) -> str:
    return template.format(
        place=PLACES[rng.integers(len(PLACES))],
        time=TIMES[rng.integers(len(TIMES))],
        year=str(1800 + int(rng.integers(0, 200))),
        **words,
    )


def article_text(rng: np.random.Generator, index: int,
                 paragraphs: int = 4, sentences: int = 3) -> str:
    topic = TOPICS[rng.integers(len(TOPICS))]
    secondary = rng.choice(len(SECONDARY), size=paragraphs - 1, replace=False)
    lines = [f"= record {index} ="]
    for p in range(paragraphs):
        parts = []
        for _ in range(sentences):
            if p == 0:
                template = _OPEN_TEMPLATES[rng.integers(len(_OPEN_TEMPLATES))]
                parts.append(_fill(rng, template, t=topic))
            else:
                template = _BODY_TEMPLATES[rng.integers(len(_BODY_TEMPLATES))]
                parts.append(_fill(rng, template, t=topic,
                                   s=SECONDARY[secondary[p - 1]]))
        lines.append(" ".join(parts))
        lines.append("")
    return "\n".join(lines)


def generate_corpus(n_articles: int = 200, seed: int = 0) -> str:
    """Raw heading-delimited text for n seeded articles."""
    rng = np.random.default_rng(seed)
    return "\n".join(article_text(rng, i) for i in range(n_articles))
