"""Outline extraction and dataset assembly."""

from .dataset import (
    DatasetTriple,
    build_dataset,
    make_triple,
    read_split,
    read_token_lines,
    serialize_body,
    serialize_outline,
    split_sizes,
    write_outlines,
    write_splits,
)
from .porter import porter_stem
from .sumbasic import (
    STOPWORDS,
    DfTable,
    MetaParagraph,
    Outline,
    WeightTable,
    aggregate_meta_paragraphs,
    build_df_table,
    extract_outline,
    init_weights,
    preprocess_sentence,
)

__all__ = [
    "DatasetTriple",
    "DfTable",
    "MetaParagraph",
    "Outline",
    "STOPWORDS",
    "WeightTable",
    "aggregate_meta_paragraphs",
    "build_dataset",
    "build_df_table",
    "extract_outline",
    "init_weights",
    "make_triple",
    "porter_stem",
    "preprocess_sentence",
    "read_split",
    "read_token_lines",
    "serialize_body",
    "serialize_outline",
    "split_sizes",
    "write_outlines",
    "write_splits",
]
