"""Subcommand front end wiring the whole pipeline.

Exit status: 0 on success, 1 on usage errors, 2 on runtime errors. Every
run prints its resolved configuration before doing any work, and all
randomness is derived from the --seed flags, so identical invocations on
identical inputs produce identical outputs.
"""

from __future__ import annotations

import argparse
import functools
import multiprocessing
import os
import sys
from typing import Callable, Sequence

import numpy as np

from . import corpus as corpus_mod
from .corpus import CleanConfig, clean_article, parse_corpus
from .errors import EmptyArticle, HiergenError, UsageError
from .neuralcore.checks import TOLERANCE, run_battery
from .outline import (
    Outline,
    build_df_table,
    build_dataset,
    extract_outline,
    read_token_lines,
    write_outlines,
    write_splits,
)
from .model import (
    ModelConfig,
    Seq2SeqModel,
    TASKS,
    TrainConfig,
    load_checkpoint,
    perplexity,
    save_checkpoint,
    task_examples,
    train,
)
from .model.batching import read_task_data
from .pipeline import DecodeConfig, decode, generate_records, write_generation


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract is exit 1
        raise UsageError(message)


def _pmap(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with multiprocessing.Pool(jobs) as pool:
        return pool.map(fn, items, chunksize=max(1, len(items) // (jobs * 4)))


def _clean_or_none(raw) -> corpus_mod.Article | None:
    try:
        return clean_article(raw, CleanConfig())
    except EmptyArticle:
        return None


def _print_config(args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    for key, value in resolved.items():
        print(f"config {key}={value}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_prep(args) -> int:
    with open(args.input, encoding="utf-8") as f:
        raws = parse_corpus(f.read())
    cleaned = _pmap(_clean_or_none, raws, args.jobs)
    articles = [a for a in cleaned if a is not None]
    skipped = len(cleaned) - len(articles)
    os.makedirs(args.out, exist_ok=True)
    corpus_mod.write_clean_corpus(articles, os.path.join(args.out, "corpus.txt"))
    vocab = corpus_mod.build_vocab(articles, min_freq=args.min_freq)
    corpus_mod.write_vocab(vocab, os.path.join(args.out, "vocab.txt"))
    print(f"articles={len(articles)} skipped_empty={skipped} vocab={len(vocab)}")
    return 0


def cmd_outline(args) -> int:
    articles = corpus_mod.read_clean_corpus(args.corpus)
    df = build_df_table(articles) if args.weighting == "tfidf" else None
    worker = functools.partial(extract_outline, k=args.k, mode=args.weighting, df=df)
    outlines = _pmap(worker, articles, args.jobs)
    write_outlines(outlines, args.out)
    print(f"outlines={len(outlines)} weighting={args.weighting} k={args.k}")
    return 0


def cmd_dataset(args) -> int:
    articles = corpus_mod.read_clean_corpus(args.corpus)
    outlines = [
        _outline_from_tokens(tokens) for tokens in read_token_lines(args.outlines)
    ]
    ratios = tuple(float(r) for r in args.splits.split(","))
    splits = build_dataset(
        articles, outlines, split_ratios=ratios, seed=args.seed,
        drop_first_sentence=args.drop_first_sentence,
    )
    write_splits(splits, args.out)
    if args.vocab_out:
        train_articles = _train_split_articles(articles, ratios, args.seed)
        vocab = corpus_mod.build_vocab(train_articles, min_freq=args.min_freq)
        corpus_mod.write_vocab(vocab, args.vocab_out)
        print(f"vocab={len(vocab)} (train split only)")
    sizes = " ".join(f"{k}={len(v)}" for k, v in splits.items())
    print(f"splits: {sizes}")
    return 0


def _outline_from_tokens(tokens: list[str]) -> Outline:
    sentences: list[list[str]] = []
    current: list[str] = []
    for token in tokens:
        if token == corpus_mod.NEWLINE:
            if current:
                sentences.append(current)
            current = []
        else:
            current.append(token)
    if current:
        sentences.append(current)
    return Outline(sentences=sentences, provenance=[])


def _train_split_articles(articles, ratios, seed):
    # Recover the train-split articles by replaying the dataset shuffle.
    from .outline.dataset import split_sizes

    order = np.random.default_rng(seed).permutation(len(articles))
    n_train = split_sizes(len(articles), ratios)[0]
    return [articles[i] for i in order[:n_train]]


def _model_config_from(args, vocab_size: int) -> ModelConfig:
    overrides: dict[str, str] = {}
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line and not line.startswith("#"):
                    key, _, value = line.partition("=")
                    overrides[key.strip()] = value.strip()
    base = ModelConfig(src_vocab=vocab_size, tgt_vocab=vocab_size, seed=args.seed)
    merged = base.to_dict()
    merged.update(overrides)
    merged["src_vocab"] = str(vocab_size)
    merged["tgt_vocab"] = str(vocab_size)
    config = ModelConfig.from_dict(merged)
    if args.hier_attn:
        config.attention = "hierarchical"
    if args.hier_norm:
        config.hier_norm = args.hier_norm
    return config


def cmd_train(args) -> int:
    vocab = corpus_mod.read_vocab(args.vocab)
    train_ex, valid_ex = read_task_data(args.data, args.task, vocab)
    config = _model_config_from(args, len(vocab))
    dtype = np.float64 if args.precision == "f64" else np.float32
    model = Seq2SeqModel(config, dtype=dtype)
    model.meta["task"] = args.task
    train_config = TrainConfig(
        epochs=args.epochs, batch_size=args.batch_size, learning_rate=args.lr,
        optimizer=args.optimizer, clip_norm=args.clip_norm, seed=args.seed,
    )
    log = train(model, train_ex, valid_ex, train_config)
    for line in log.lines():
        print(line)
    save_checkpoint(model, args.out)
    with open(args.out + ".log", "w", encoding="utf-8") as f:
        f.write("\n".join(log.lines()) + "\n")
    print(f"saved {args.out} (best epoch {log.best_epoch})")
    return 0


def cmd_perplexity(args) -> int:
    vocab = corpus_mod.read_vocab(args.vocab)
    model = load_checkpoint(args.model)
    task = model.meta.get("task", args.task)
    if task is None:
        raise UsageError("checkpoint has no task; pass --task explicitly")
    examples = _examples_from_prefix(args.data, task, vocab)
    result = perplexity(model, examples, batch_size=args.batch_size)
    bits = -result.log2_sum / result.token_count
    print(f"tokens={result.token_count} bits_per_token={bits:.6f} "
          f"perplexity={result.perplexity:.6f}")
    return 0


def _examples_from_prefix(prefix: str, task: str, vocab):
    from .model.batching import encode_pair

    if task not in TASKS:
        raise UsageError(f"unknown task {task!r}")
    src_field, tgt_field = TASKS[task]
    src_lines = read_token_lines(f"{prefix}.{src_field}")
    tgt_lines = read_token_lines(f"{prefix}.{tgt_field}")
    return [encode_pair(s, t, vocab) for s, t in zip(src_lines, tgt_lines)]


def cmd_generate(args) -> int:
    vocab = corpus_mod.read_vocab(args.vocab)
    model = load_checkpoint(args.model)
    lines = read_token_lines(args.input)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for i, tokens in enumerate(lines):
            source = corpus_mod.encode(tokens, vocab) + [corpus_mod.EOS_ID]
            config = DecodeConfig(top_k=args.topk, temperature=args.temperature,
                                  max_len=args.max_len, seed=args.seed + i)
            ids = decode(model, source, config)
            content = [t for t in ids if t != corpus_mod.EOS_ID]
            out.write(" ".join(corpus_mod.decode(content, vocab)) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def cmd_pipeline(args) -> int:
    vocab = corpus_mod.read_vocab(args.vocab)
    outline_model = load_checkpoint(args.outline_model)
    article_model = load_checkpoint(args.article_model)
    prompts = [
        corpus_mod.encode(tokens, vocab) + [corpus_mod.EOS_ID]
        for tokens in read_token_lines(args.prompts)
    ]
    config = DecodeConfig(top_k=args.topk, temperature=args.temperature,
                          max_len=args.max_len_outline, seed=args.seed)
    records = generate_records(
        outline_model, article_model, prompts, config,
        article_max_len=args.max_len_article,
        outline_model_id=args.outline_model, article_model_id=args.article_model,
    )
    write_generation(records, vocab, args.out_dir)
    degenerate = sum(r.degenerate for r in records)
    print(f"records={len(records)} degenerate={degenerate} out={args.out_dir}")
    return 0


def cmd_gradcheck(args) -> int:
    results = run_battery(seed=args.seed, trials=args.trials)
    failed = False
    for name, err in results.items():
        status = "ok" if err < TOLERANCE else "FAIL"
        print(f"{name}: max_rel_err={err:.3e} {status}")
        failed = failed or err >= TOLERANCE
    return 2 if failed else 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="hiergen",
                     description="Two-phase outline-then-article generation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", help="parse and clean a raw corpus, build the vocabulary")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-freq", type=int, default=3)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("outline", help="extract outlines from a cleaned corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--weighting", choices=("freq", "tfidf"), default="freq")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_outline)

    p = sub.add_parser("dataset", help="build aligned prompt/outline/article splits")
    p.add_argument("--corpus", required=True)
    p.add_argument("--outlines", required=True)
    p.add_argument("--splits", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--drop-first-sentence", action="store_true")
    p.add_argument("--vocab-out", default=None,
                   help="also build the vocabulary from the train split")
    p.add_argument("--min-freq", type=int, default=3)
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("train", help="train one component model")
    p.add_argument("--task", required=True, choices=sorted(TASKS))
    p.add_argument("--hier-attn", action="store_true")
    p.add_argument("--hier-norm", choices=("sentence", "global"), default=None)
    p.add_argument("--config", default=None, help="key=value model config file")
    p.add_argument("--data", required=True, help="directory with {split}.{field} files")
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p.add_argument("--clip-norm", type=float, default=1.0)
    p.add_argument("--precision", choices=("f32", "f64"), default="f32")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("perplexity", help="evaluate a checkpoint on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="file prefix, e.g. data/valid")
    p.add_argument("--vocab", required=True)
    p.add_argument("--task", default=None)
    p.add_argument("--batch-size", type=int, default=16)
    p.set_defaults(func=cmd_perplexity)

    p = sub.add_parser("generate", help="decode from one model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="source token lines")
    p.add_argument("--vocab", required=True)
    p.add_argument("--topk", type=int, default=10)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--max-len", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("pipeline", help="prompt -> outline -> article generation")
    p.add_argument("--outline-model", required=True)
    p.add_argument("--article-model", required=True)
    p.add_argument("--prompts", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--topk", type=int, default=10)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--max-len-outline", type=int, default=400)
    p.add_argument("--max-len-article", type=int, default=1500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="gen")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("gradcheck", help="finite-difference checks for every layer")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=4)
    p.set_defaults(func=cmd_gradcheck)

    return parser


def run(argv: Sequence[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return 0 if (e.code or 0) == 0 else 1
    try:
        _print_config(args)
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except (HiergenError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
