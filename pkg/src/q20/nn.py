"""One-hidden-layer MLPs with hand-derived gradients and ADAM.

Three head kinds cover the whole system: "masked_softmax" for the policy
over questions, "scalar" for the value baseline, "sigmoid" for the reward
model.  The hidden activation is ReLU with subgradient 0 at the kink.
Forward functions accept a single example (1-d) or a batch (2-d) and
preserve the rank.  Losses are batch means, so the gradient helpers
return the gradient of the mean.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

HEADS = ("masked_softmax", "scalar", "sigmoid")

_PARAMS_FORMAT = "q20-mlp-v1"
# Open-interval guard: sigmoid outputs and targets are clipped here so they
# stay strictly inside (0, 1) even where float64 would round to 0 or 1.
SIGMOID_EPS = 1e-12


@dataclass(eq=False)
class MlpParams:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    head: str
    seed: int | None = None

    def __post_init__(self):
        if self.head not in HEADS:
            raise ValueError(f"unknown head {self.head!r}")
        n_in, hidden = self.w1.shape
        if self.b1.shape != (hidden,) or self.w2.shape[0] != hidden or self.b2.shape != (self.w2.shape[1],):
            raise ValueError("parameter shapes are mutually inconsistent")
        if self.head in ("scalar", "sigmoid") and self.w2.shape[1] != 1:
            raise ValueError(f"{self.head} head needs exactly one output, got {self.w2.shape[1]}")
        for arr in (self.w1, self.b1, self.w2, self.b2):
            if not np.isfinite(arr).all():
                raise ValueError("parameters contain non-finite values")

    @property
    def n_in(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden_size(self) -> int:
        return self.w1.shape[1]

    @property
    def n_out(self) -> int:
        return self.w2.shape[1]

    def copy(self) -> "MlpParams":
        return MlpParams(
            self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy(), self.head, self.seed
        )


@dataclass(eq=False)
class MlpGrads:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray


def init_params(n_in: int, hidden: int, n_out: int, head: str, seed: int) -> MlpParams:
    """Seeded uniform init scaled by 1/sqrt(fan_in); biases start at zero."""
    if min(n_in, hidden, n_out) < 1:
        raise ValueError("all dimensions must be positive")
    rng = np.random.default_rng(seed)
    lim1 = math.sqrt(3.0 / n_in)
    lim2 = math.sqrt(3.0 / hidden)
    return MlpParams(
        w1=rng.uniform(-lim1, lim1, size=(n_in, hidden)),
        b1=np.zeros(hidden),
        w2=rng.uniform(-lim2, lim2, size=(hidden, n_out)),
        b2=np.zeros(n_out),
        head=head,
        seed=int(seed),
    )


def sigmoid(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    z = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))


def open_sigmoid(x) -> np.ndarray:
    """Sigmoid clipped into the open interval (0, 1)."""
    return np.clip(sigmoid(x), SIGMOID_EPS, 1.0 - SIGMOID_EPS)


def masked_softmax(logits, asked) -> np.ndarray:
    """Softmax over unasked entries; asked entries get probability exactly 0."""
    logits = np.asarray(logits, dtype=np.float64)
    asked = np.broadcast_to(np.asarray(asked, dtype=bool), logits.shape)
    shifted = np.where(asked, -np.inf, logits)
    mx = shifted.max(axis=-1, keepdims=True)
    if np.isneginf(mx).any():
        raise ValueError("all questions are masked")
    e = np.exp(shifted - mx)
    return e / e.sum(axis=-1, keepdims=True)


def _as_batch(x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :], True
    if x.ndim == 2:
        return x, False
    raise ValueError(f"expected a vector or a batch of vectors, got shape {x.shape}")


def _affine(params: MlpParams, x: np.ndarray):
    if x.shape[-1] != params.n_in:
        raise ValueError(f"feature length {x.shape[-1]} does not match input size {params.n_in}")
    pre1 = x @ params.w1 + params.b1
    h = np.maximum(pre1, 0.0)
    z = h @ params.w2 + params.b2
    return pre1, h, z


def forward_policy(params: MlpParams, state, asked) -> np.ndarray:
    """Masked-softmax distribution over questions for one state or a batch."""
    if params.head != "masked_softmax":
        raise ValueError(f"forward_policy needs a masked_softmax head, got {params.head!r}")
    x, single = _as_batch(state)
    mask = np.asarray(asked, dtype=bool)
    if single and mask.ndim == 1:
        mask = mask[None, :]
    _, _, z = _affine(params, x)
    probs = masked_softmax(z, mask)
    return probs[0] if single else probs


def forward_value(params: MlpParams, state):
    """Unbounded scalar value estimate; float for a single state, (B,) for a batch."""
    if params.head != "scalar":
        raise ValueError(f"forward_value needs a scalar head, got {params.head!r}")
    x, single = _as_batch(state)
    _, _, z = _affine(params, x)
    out = z[:, 0]
    return float(out[0]) if single else out


def forward_reward(params: MlpParams, features):
    """Sigmoid head output, strictly inside (0, 1)."""
    if params.head != "sigmoid":
        raise ValueError(f"forward_reward needs a sigmoid head, got {params.head!r}")
    x, single = _as_batch(features)
    _, _, z = _affine(params, x)
    out = open_sigmoid(z[:, 0])
    return float(out[0]) if single else out


def _backprop(params: MlpParams, x: np.ndarray, pre1: np.ndarray, h: np.ndarray, dz: np.ndarray) -> MlpGrads:
    dw2 = h.T @ dz
    db2 = dz.sum(axis=0)
    dh = dz @ params.w2.T
    dpre1 = np.where(pre1 > 0.0, dh, 0.0)
    dw1 = x.T @ dpre1
    db1 = dpre1.sum(axis=0)
    return MlpGrads(dw1, db1, dw2, db2)


def policy_loss_and_grads(params: MlpParams, states, asked, actions, advantages):
    """REINFORCE loss mean(-log pi(a|s) * advantage) and its exact gradient.

    Advantages are treated as constants.  Masked questions have zero
    output probability and contribute exactly zero gradient.
    """
    x, _ = _as_batch(states)
    batch = x.shape[0]
    actions = np.asarray(actions, dtype=np.intp)
    adv = np.asarray(advantages, dtype=np.float64)
    mask = np.asarray(asked, dtype=bool)
    if mask.ndim == 1:
        mask = np.broadcast_to(mask, (batch, mask.shape[0]))
    pre1, h, z = _affine(params, x)
    probs = masked_softmax(z, mask)
    # Replayed actions the policy has abandoned can underflow to exactly 0;
    # floor the log so the reported loss stays finite (gradients don't use it).
    p_taken = np.maximum(probs[np.arange(batch), actions], 1e-300)
    loss = float(np.mean(-np.log(p_taken) * adv))
    dz = np.where(mask, 0.0, -probs)
    dz[np.arange(batch), actions] += 1.0
    dz *= (-adv / batch)[:, None]
    return loss, _backprop(params, x, pre1, h, dz)


def value_loss_and_grads(params: MlpParams, states, targets):
    """Squared-error loss mean((v - G)^2) and its gradient."""
    x, _ = _as_batch(states)
    batch = x.shape[0]
    g = np.asarray(targets, dtype=np.float64)
    pre1, h, z = _affine(params, x)
    err = z[:, 0] - g
    loss = float(np.mean(err**2))
    dz = (2.0 / batch) * err[:, None]
    return loss, _backprop(params, x, pre1, h, dz)


def reward_loss_and_grads(params: MlpParams, features, targets):
    """Squared-error loss mean((sigmoid(z) - y)^2) and its gradient."""
    x, _ = _as_batch(features)
    batch = x.shape[0]
    y = np.asarray(targets, dtype=np.float64)
    pre1, h, z = _affine(params, x)
    p = open_sigmoid(z[:, 0])
    err = p - y
    loss = float(np.mean(err**2))
    dz = ((2.0 / batch) * err * p * (1.0 - p))[:, None]
    return loss, _backprop(params, x, pre1, h, dz)


@dataclass(eq=False)
class AdamState:
    m: MlpGrads
    v: MlpGrads
    lr: float
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(params: MlpParams, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    zeros = lambda a: np.zeros_like(a)
    return AdamState(
        m=MlpGrads(zeros(params.w1), zeros(params.b1), zeros(params.w2), zeros(params.b2)),
        v=MlpGrads(zeros(params.w1), zeros(params.b1), zeros(params.w2), zeros(params.b2)),
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
    )


def adam_step(params: MlpParams, grads: MlpGrads, opt: AdamState):
    """Standard bias-corrected ADAM update, applied in place; rejects non-finite grads."""
    tensors = (
        (params.w1, grads.w1, opt.m.w1, opt.v.w1),
        (params.b1, grads.b1, opt.m.b1, opt.v.b1),
        (params.w2, grads.w2, opt.m.w2, opt.v.w2),
        (params.b2, grads.b2, opt.m.b2, opt.v.b2),
    )
    for _, g, _, _ in tensors:
        if not np.isfinite(g).all():
            raise ValueError("non-finite gradient")
    opt.t += 1
    bc1 = 1.0 - opt.beta1**opt.t
    bc2 = 1.0 - opt.beta2**opt.t
    for p, g, m, v in tensors:
        m *= opt.beta1
        m += (1.0 - opt.beta1) * g
        v *= opt.beta2
        v += (1.0 - opt.beta2) * np.square(g)
        p -= opt.lr * (m / bc1) / (np.sqrt(v / bc2) + opt.eps)
    return params, opt


def save_params(params: MlpParams, path) -> None:
    """Write a checkpoint; save -> load round-trips bit-exactly."""
    meta = json.dumps(
        {
            "format": _PARAMS_FORMAT,
            "head": params.head,
            "seed": params.seed,
            "dims": [params.n_in, params.hidden_size, params.n_out],
        }
    )
    buf = io.BytesIO()
    np.savez(buf, meta=np.array(meta), w1=params.w1, b1=params.b1, w2=params.w2, b2=params.b2)
    Path(path).write_bytes(buf.getvalue())


def load_params(path) -> MlpParams:
    with np.load(Path(path), allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("format") != _PARAMS_FORMAT:
            raise ValueError(f"not a {_PARAMS_FORMAT} checkpoint: {path}")
        params = MlpParams(
            w1=data["w1"].copy(),
            b1=data["b1"].copy(),
            w2=data["w2"].copy(),
            b2=data["b2"].copy(),
            head=meta["head"],
            seed=meta["seed"],
        )
    dims = [params.n_in, params.hidden_size, params.n_out]
    if dims != meta["dims"]:
        raise ValueError(f"checkpoint dims {meta['dims']} do not match arrays {dims}")
    return params
