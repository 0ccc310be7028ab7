"""Finite-difference verification battery for every differentiable layer.

Each entry builds random small configurations, reduces the layer output to a
scalar through a fixed random projection, and compares reverse-mode
gradients against central differences at 64-bit precision.
"""

from __future__ import annotations

import numpy as np

from ..corpus import EOS_ID
from . import layers
from .autodiff import Tensor, grad_check

TOLERANCE = 1e-4


def _t(rng: np.random.Generator, *shape: int) -> Tensor:
    return Tensor(rng.normal(0.0, 1.0, shape), requires_grad=True)


def _proj(rng: np.random.Generator, shape: tuple[int, ...]) -> Tensor:
    return Tensor(rng.normal(0.0, 1.0, shape))


def _random_spans(rng: np.random.Generator, n: int) -> list[tuple[int, int]]:
    cuts = sorted(rng.choice(np.arange(1, n), size=rng.integers(0, n - 1),
                             replace=False).tolist()) if n > 1 else []
    bounds = [0] + cuts + [n]
    return list(zip(bounds[:-1], bounds[1:]))


def check_glu(rng: np.random.Generator) -> float:
    t, d = int(rng.integers(1, 5)), int(rng.integers(1, 4))
    x = _t(rng, t, 2 * d)
    c = _proj(rng, (t, d))
    return grad_check(lambda x_: (c * layers.glu(x_)).sum(), [x])


def check_conv1d_causal(rng: np.random.Generator) -> float:
    t = int(rng.integers(1, 6))
    width = int(rng.integers(1, 4))
    d_in, d_out = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    x, w, b = _t(rng, t, d_in), _t(rng, width, d_in, d_out), _t(rng, d_out)
    c = _proj(rng, (t, d_out))
    return grad_check(
        lambda x_, w_, b_: (c * layers.conv1d_causal(x_, w_, b_)).sum(), [x, w, b]
    )


def _gate_inputs(rng: np.random.Generator, d: int) -> list[Tensor]:
    return [_t(rng, d, d), _t(rng, d, d), _t(rng, d)]


def check_gated_attention(rng: np.random.Generator) -> float:
    n, d = int(rng.integers(1, 6)), int(rng.integers(2, 5))
    h, e = _t(rng, d), _t(rng, n, d)
    wg, ug, bg = _gate_inputs(rng, d)
    c = _proj(rng, (d,))

    def f(h_, e_, wg_, ug_, bg_):
        out = layers.gated_attention(h_, e_, layers.GateParams(wg_, ug_, bg_))
        return (c * out.context).sum()

    return grad_check(f, [h, e, wg, ug, bg])


def check_gated_self_attention(rng: np.random.Generator) -> float:
    t, d = int(rng.integers(2, 6)), int(rng.integers(2, 5))
    states = _t(rng, t, d)
    wg, ug, bg = _gate_inputs(rng, d)
    c = _proj(rng, (t, d))

    def f(states_, wg_, ug_, bg_):
        out = layers.self_attention_seq(states_, layers.GateParams(wg_, ug_, bg_))
        return (c * out).sum()

    return grad_check(f, [states, wg, ug, bg])


def check_hier_attention(rng: np.random.Generator, norm: str = "sentence") -> float:
    n, d = int(rng.integers(2, 7)), int(rng.integers(2, 5))
    spans = _random_spans(rng, n)
    h, e = _t(rng, d), _t(rng, n, d)
    wg, ug, bg = _gate_inputs(rng, d)
    c = _proj(rng, (d,))

    def f(h_, e_, wg_, ug_, bg_):
        out = layers.hier_attention(h_, e_, spans, layers.GateParams(wg_, ug_, bg_),
                                    norm=norm)
        return (c * out.context).sum()

    return grad_check(f, [h, e, wg, ug, bg])


def check_full_model(rng: np.random.Generator, attention: str) -> float:
    from ..model.batching import make_batch
    from ..model.seq2seq import ModelConfig, Seq2SeqModel
    from ..model.training import nll_loss

    config = ModelConfig(
        src_vocab=7, tgt_vocab=7, embed_dim=3, hidden_dim=4,
        enc_blocks=1, dec_blocks=1, kernel_width=2, attention=attention,
        self_attention=True, max_positions=8, seed=int(rng.integers(0, 1 << 31)),
    )
    model = Seq2SeqModel(config, dtype=np.float64)
    src = [5, 6, 2, 5, EOS_ID]
    tgt = [6, 5, 6, EOS_ID]
    batch = make_batch([(src, tgt)])

    def f(*_params):
        return nll_loss(model.forward(batch), batch.target, batch.target_mask)

    # eps 1e-4: at 1e-5 the difference quotient is dominated by float64
    # rounding of the loss for near-zero-gradient parameters.
    return grad_check(f, list(model.named_parameters().values()), eps=1e-4)


def run_battery(seed: int = 0, trials: int = 4) -> dict[str, float]:
    """Worst relative error per layer over randomized configurations."""
    rng = np.random.default_rng(seed)
    battery = {
        "glu": lambda: check_glu(rng),
        "conv1d_causal": lambda: check_conv1d_causal(rng),
        "gated_attention": lambda: check_gated_attention(rng),
        "gated_self_attention": lambda: check_gated_self_attention(rng),
        "hier_attention": lambda: check_hier_attention(rng, "sentence"),
        "hier_attention_global": lambda: check_hier_attention(rng, "global"),
    }
    results = {name: max(fn() for _ in range(trials)) for name, fn in battery.items()}
    results["forward_loss_flat"] = check_full_model(rng, "flat")
    results["forward_loss_hierarchical"] = check_full_model(rng, "hierarchical")
    return results
