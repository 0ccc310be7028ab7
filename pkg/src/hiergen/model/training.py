"""Training loop: negative log likelihood with seeded shuffling.

Each component model is trained on its own source/target pairs. The loop
records per-epoch training loss and validation perplexity and keeps the
parameters of the best validation epoch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from ..errors import DivergedError, EmptyBatch
from ..neuralcore.autodiff import Tensor, gather_last, log_softmax
from .batching import Example, make_batch
from .evaluation import perplexity
from .seq2seq import Seq2SeqModel


def nll_loss(logits: Tensor, targets: np.ndarray, mask: np.ndarray) -> Tensor:
    """Mean, over non-pad positions, of the negative log softmax at the target."""
    mask = np.asarray(mask)
    count = int(mask.sum())
    if count == 0:
        raise EmptyBatch("no unmasked target positions")
    picked = gather_last(log_softmax(logits, axis=-1), np.asarray(targets))
    keep = Tensor(mask.astype(logits.data.dtype))
    return -(picked * keep).sum() / count


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 16
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    clip_norm: float | None = 1.0
    seed: int = 0

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError("optimizer must be 'adam' or 'sgd'")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be >= 1")


class Sgd:
    def __init__(self, params: dict[str, Tensor], lr: float, momentum: float):
        self.params = params
        self.lr = lr
        self.momentum = momentum
        self.velocity = {k: np.zeros_like(p.data) for k, p in params.items()}

    def step(self) -> None:
        for name, p in self.params.items():
            if p.grad is None:
                continue
            v = self.velocity[name]
            v *= self.momentum
            v += p.grad
            p.data -= (self.lr * v).astype(p.data.dtype, copy=False)


class Adam:
    def __init__(self, params: dict[str, Tensor], lr: float,
                 beta1: float, beta2: float, eps: float):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        correction = np.sqrt(1.0 - b2**self.t) / (1.0 - b1**self.t)
        for name, p in self.params.items():
            if p.grad is None:
                continue
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1.0 - b1) * p.grad
            v *= b2
            v += (1.0 - b2) * p.grad**2
            update = self.lr * correction * m / (np.sqrt(v) + self.eps)
            p.data -= update.astype(p.data.dtype, copy=False)


def clip_gradients(params: dict[str, Tensor], max_norm: float) -> None:
    total = 0.0
    for p in params.values():
        if p.grad is not None:
            total += float((p.grad.astype(np.float64) ** 2).sum())
    norm = math.sqrt(total)
    if norm > max_norm > 0:
        scale = max_norm / norm
        for p in params.values():
            if p.grad is not None:
                p.grad = p.grad * scale


@dataclass
class EpochStats:
    epoch: int
    loss: float
    val_ppl: float

    def line(self) -> str:
        return f"{self.epoch}\t{self.loss:.6f}\t{self.val_ppl:.6f}"


@dataclass
class TrainingLog:
    epochs: list[EpochStats] = dataclass_field(default_factory=list)
    best_epoch: int = 0

    def lines(self) -> list[str]:
        return [e.line() for e in self.epochs]


def train(model: Seq2SeqModel, train_examples: list[Example],
          valid_examples: list[Example], config: TrainConfig) -> TrainingLog:
    """Optimize the model; on return it holds its best-validation parameters."""
    config.validate()
    params = model.named_parameters()
    if config.optimizer == "adam":
        opt = Adam(params, config.learning_rate, config.beta1, config.beta2,
                   config.adam_eps)
    else:
        opt = Sgd(params, config.learning_rate, config.momentum)

    rng = np.random.default_rng(config.seed)
    log = TrainingLog()
    best_ppl = math.inf
    best_params: dict[str, np.ndarray] | None = None
    max_pos = model.config.max_positions

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_examples))
        nats = 0.0
        tokens = 0
        for start in range(0, len(order), config.batch_size):
            chosen = [train_examples[i] for i in order[start : start + config.batch_size]]
            batch = make_batch(chosen, max_positions=max_pos)
            logits = model.forward(batch)
            loss = nll_loss(logits, batch.target, batch.target_mask)
            if not np.isfinite(loss.data):
                raise DivergedError(f"non-finite loss at epoch {epoch}")
            model.zero_grad()
            loss.backward()
            if config.clip_norm is not None:
                clip_gradients(params, config.clip_norm)
            opt.step()
            model.step += 1
            n = int(batch.target_mask.sum())
            nats += loss.item() * n
            tokens += n
        val = perplexity(model, valid_examples, batch_size=config.batch_size)
        stats = EpochStats(epoch=epoch, loss=nats / tokens, val_ppl=val.perplexity)
        log.epochs.append(stats)
        if stats.val_ppl < best_ppl:
            best_ppl = stats.val_ppl
            log.best_epoch = epoch
            best_params = {k: p.data.copy() for k, p in params.items()}

    if best_params is not None:
        for k, p in params.items():
            p.data = best_params[k]
    return log
