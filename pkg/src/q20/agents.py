"""The learning system: returns, reward regimes, REINFORCE training, baselines.

Training follows the replayed policy-gradient recipe: every environment
step pushes a reward-model tuple into D1 and a (state, action, return)
tuple into D2, and once the memories pass their thresholds each step also
performs one mini-batch update of the reward net, the value net, and the
policy net.  The value baseline is treated as a constant inside the
policy loss; the value net is trained only by its own squared-error loss.

Reward regimes:
  direct        all intermediate rewards are 0, the terminal step is +/-30
  rewardnet     intermediate rewards come from a sigmoid MLP on (state, action)
  object_aware  same, with the episode's target object as an extra input
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import nn
from .engine import EpisodeRecord, run_episode
from .kb import KnowledgeBase
from .simulator import SimulatorConfig, make_answerer, sample_target

REWARD_MODES = ("direct", "rewardnet", "object_aware")

METRICS_HEADER = "step,episodes,win_rate,loss_policy,loss_value,loss_reward"

_CHECKPOINT_FORMAT = "q20-checkpoint-v1"


@dataclass(frozen=True)
class TrainingConfig:
    episodes: int
    gamma: float = 0.99
    lr_policy: float = 1e-3
    lr_value: float = 1e-2
    lr_reward: float = 1e-2
    hidden_size: int = 1000
    batch_size: int = 64
    d1_capacity: int = 100_000
    d2_capacity: int = 100_000
    d1_threshold: int = 1000
    d2_threshold: int = 1000
    eval_interval: int = 5000
    eval_episodes: int = 2000
    reward_mode: str = "rewardnet"
    s0_mode: str = "uniform"
    horizon: int = 20
    seed: int = 0
    eval_seed: int = 20_877

    def __post_init__(self):
        if self.episodes < 0:
            raise ValueError("episodes must be nonnegative")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.reward_mode not in REWARD_MODES:
            raise ValueError(f"unknown reward mode {self.reward_mode!r}")
        if self.s0_mode not in ("uniform", "popularity"):
            raise ValueError(f"unknown s0 mode {self.s0_mode!r}")
        for cap, thr, name in (
            (self.d1_capacity, self.d1_threshold, "d1"),
            (self.d2_capacity, self.d2_threshold, "d2"),
        ):
            if not cap >= thr >= self.batch_size >= 1:
                raise ValueError(
                    f"{name}: need capacity >= threshold >= batch_size >= 1, "
                    f"got {cap} >= {thr} >= {self.batch_size}"
                )
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.eval_interval < 1 or self.eval_episodes < 1 or self.hidden_size < 1:
            raise ValueError("eval_interval, eval_episodes and hidden_size must be positive")


class D1Entry(NamedTuple):
    state: np.ndarray
    action: int
    obj: int
    target: float  # sigmoid of the return, in (0, 1)


class D2Entry(NamedTuple):
    state: np.ndarray
    action: int
    ret: float


class ReplayMemory:
    """Bounded FIFO ring; sampling is uniform without replacement."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._items: list = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._items)

    def push(self, item) -> None:
        if len(self._items) < self.capacity:
            self._items.append(item)
        else:
            self._items[self._next] = item
            self._next = (self._next + 1) % self.capacity

    def sample(self, k: int, rng: np.random.Generator) -> list:
        if k > len(self._items):
            raise ValueError(f"cannot sample {k} of {len(self._items)} entries")
        idx = rng.choice(len(self._items), size=k, replace=False)
        return [self._items[i] for i in idx]


def select_action(
    params: nn.MlpParams,
    state: np.ndarray,
    asked: np.ndarray,
    mode: str = "sample",
    rng: np.random.Generator | None = None,
) -> int:
    """Draw from the masked policy (sample) or take its argmax (greedy)."""
    probs = nn.forward_policy(params, state, asked)
    if mode == "greedy":
        a = int(np.argmax(probs))
    elif mode == "sample":
        if rng is None:
            raise ValueError("sample mode needs an rng")
        a = int(rng.choice(probs.shape[0], p=probs))
    else:
        raise ValueError(f"unknown selection mode {mode!r}")
    if asked[a]:
        raise RuntimeError(f"selected a masked question {a}")  # softmax guarantees zero mass
    return a


def compute_returns(rewards, gamma: float) -> np.ndarray:
    """Discounted returns G_t via the backward recurrence, summing to episode end."""
    rewards = np.asarray(rewards, dtype=np.float64)
    if rewards.ndim != 1 or rewards.size == 0:
        raise ValueError("rewards must be a nonempty vector")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    returns = np.empty_like(rewards)
    acc = 0.0
    for t in range(rewards.size - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        returns[t] = acc
    return returns


def reward_features(
    states: np.ndarray,
    actions,
    n_questions: int,
    objects=None,
    n_objects: int | None = None,
) -> np.ndarray:
    """Concatenate belief, one-hot action and (optionally) one-hot object."""
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    actions = np.asarray(actions, dtype=np.intp)
    batch, n = states.shape
    width = n + n_questions + (n_objects if objects is not None else 0)
    feats = np.zeros((batch, width))
    feats[:, :n] = states
    feats[np.arange(batch), n + actions] = 1.0
    if objects is not None:
        objects = np.asarray(objects, dtype=np.intp)
        feats[np.arange(batch), n + n_questions + objects] = 1.0
    return feats


def assign_rewards(
    episode: EpisodeRecord,
    mode: str,
    reward_params: nn.MlpParams | None = None,
) -> np.ndarray:
    """Per-step rewards r_1..r_T for a finished episode.

    The terminal step always carries the environment's +/-30; in the
    rewardnet modes the earlier steps get the reward model's outputs.
    """
    if mode not in REWARD_MODES:
        raise ValueError(f"unknown reward mode {mode!r}")
    horizon = len(episode.steps)
    if horizon == 0:
        return np.zeros(0)
    rewards = np.zeros(horizon)
    rewards[-1] = episode.terminal_reward
    if mode == "direct" or horizon == 1:
        return rewards
    if reward_params is None:
        raise ValueError(f"{mode} mode needs reward-model parameters")
    states = np.stack([step.state for step in episode.steps[:-1]])
    actions = [step.action for step in episode.steps[:-1]]
    n = states.shape[1]
    if mode == "object_aware":
        if episode.target is None:
            raise ValueError("object_aware rewards need the episode's target object")
        n_questions = reward_params.n_in - 2 * n
        objs = np.full(len(actions), episode.target, dtype=np.intp)
        feats = reward_features(states, actions, n_questions, objects=objs, n_objects=n)
    else:
        n_questions = reward_params.n_in - n
        feats = reward_features(states, actions, n_questions)
    rewards[:-1] = nn.forward_reward(reward_params, feats)
    return rewards


def train_rewardnet_step(
    d1: ReplayMemory,
    params: nn.MlpParams,
    opt: nn.AdamState,
    *,
    batch_size: int,
    threshold: int,
    n_questions: int,
    object_aware: bool,
    rng: np.random.Generator,
) -> float | None:
    """One mini-batch ADAM step on the reward model; None while below threshold.

    Returns the pre-step batch loss.
    """
    if len(d1) <= threshold:
        return None
    batch = d1.sample(batch_size, rng)
    states = np.stack([e.state for e in batch])
    actions = [e.action for e in batch]
    targets = np.array([e.target for e in batch])
    if object_aware:
        objs = [e.obj for e in batch]
        feats = reward_features(states, actions, n_questions, objects=objs, n_objects=states.shape[1])
    else:
        feats = reward_features(states, actions, n_questions)
    loss, grads = nn.reward_loss_and_grads(params, feats, targets)
    nn.adam_step(params, grads, opt)
    return loss


def train_policy_value_step(
    d2: ReplayMemory,
    policy: nn.MlpParams,
    value: nn.MlpParams,
    policy_opt: nn.AdamState,
    value_opt: nn.AdamState,
    *,
    batch_size: int,
    threshold: int,
    rng: np.random.Generator,
) -> tuple[float, float] | None:
    """One value step then one policy step on a shared mini-batch.

    The baseline b_t comes from the value net before its update and enters
    the policy loss as a constant.  Replayed samples are scored with an
    empty mask; D2 stores no per-step mask.
    """
    if len(d2) <= threshold:
        return None
    batch = d2.sample(batch_size, rng)
    states = np.stack([e.state for e in batch])
    actions = [e.action for e in batch]
    returns = np.array([e.ret for e in batch])
    baselines = nn.forward_value(value, states)
    value_loss, value_grads = nn.value_loss_and_grads(value, states, returns)
    nn.adam_step(value, value_grads, value_opt)
    asked = np.zeros((len(batch), policy.n_out), dtype=bool)
    policy_loss, policy_grads = nn.policy_loss_and_grads(
        policy, states, asked, actions, returns - baselines
    )
    nn.adam_step(policy, policy_grads, policy_opt)
    return policy_loss, value_loss


def info_gain_select(kb: KnowledgeBase, belief: np.ndarray, asked: np.ndarray) -> int:
    """Non-learning baseline: minimize the expected posterior entropy.

    For each unasked question j it computes the answer probabilities
    p(x) = sum_i s_i M_x(i, j) and the entropy of each renormalized
    posterior, then picks the j with the smallest expectation (lowest
    index on ties).  Invariant to the scale of the belief.
    """
    s = np.asarray(belief, dtype=np.float64)
    s = s / s.sum()
    expected = np.zeros(kb.n_questions)
    for matrix in (kb.R, kb.W, kb.U):
        p = s @ matrix
        joint = s[:, None] * matrix
        with np.errstate(divide="ignore", invalid="ignore"):
            post = joint / p[None, :]
            terms = np.where(joint > 0.0, post * np.log(post), 0.0)
        entropy = -terms.sum(axis=0)
        expected += np.where(p > 0.0, p * entropy, 0.0)
    expected = np.where(np.asarray(asked, dtype=bool), np.inf, expected)
    if np.isinf(expected).all():
        raise ValueError("all questions are masked")
    return int(np.argmin(expected))


@dataclass
class PolicyAgent:
    """Wraps policy parameters as an evaluation agent (greedy or sampled)."""

    params: nn.MlpParams
    mode: str = "greedy"

    def questioner(self, rng: np.random.Generator | None = None):
        def pick(belief, asked):
            return select_action(self.params, belief, asked, self.mode, rng)

        return pick


@dataclass
class InfoGainAgent:
    """Expected-information-gain baseline as an evaluation agent."""

    kb: KnowledgeBase

    def questioner(self, rng: np.random.Generator | None = None):
        return lambda belief, asked: info_gain_select(self.kb, belief, asked)


class MetricsRow(NamedTuple):
    step: int
    episodes: int
    win_rate: float
    loss_policy: float
    loss_value: float
    loss_reward: float


def write_metrics_csv(rows, path) -> None:
    lines = [METRICS_HEADER]
    for r in rows:
        lines.append(
            f"{r.step},{r.episodes},{r.win_rate!r},{r.loss_policy!r},{r.loss_value!r},{r.loss_reward!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_metrics_csv(path) -> list[MetricsRow]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != METRICS_HEADER:
        raise ValueError(f"not a metrics CSV: {path}")
    rows = []
    for line in lines[1:]:
        step, episodes, wr, lp, lv, lr = line.split(",")
        rows.append(MetricsRow(int(step), int(episodes), float(wr), float(lp), float(lv), float(lr)))
    return rows


@dataclass
class TrainingResult:
    config: TrainingConfig
    policy: nn.MlpParams
    value: nn.MlpParams
    reward: nn.MlpParams | None
    metrics: list[MetricsRow]
    total_steps: int

    @property
    def final_win_rate(self) -> float:
        return self.metrics[-1].win_rate if self.metrics else float("nan")


class _MeanTracker:
    def __init__(self):
        self.total = 0.0
        self.count = 0

    def add(self, value: float) -> None:
        self.total += value
        self.count += 1

    def take(self) -> float:
        mean = self.total / self.count if self.count else float("nan")
        self.total, self.count = 0.0, 0
        return mean


def run_training(
    kb: KnowledgeBase,
    sim_config: SimulatorConfig,
    config: TrainingConfig,
    *,
    metrics_path=None,
    checkpoint_dir=None,
    progress=None,
) -> TrainingResult:
    """Train policy, value and (per mode) reward nets against the simulator.

    Fully deterministic given the config seed.  Every ``eval_interval``
    environment steps the greedy policy is evaluated on ``eval_episodes``
    fresh episodes whose targets are drawn from a fixed evaluation seed,
    so the evaluation targets are identical across training settings.
    """
    from .evaluation import evaluate_win_rate  # local import, avoids a module cycle

    n, m = kb.n_objects, kb.n_questions
    if m < config.horizon:
        raise ValueError(f"need at least horizon={config.horizon} questions, KB has {m}")
    seeds = np.random.SeedSequence(config.seed).generate_state(4)
    policy = nn.init_params(n, config.hidden_size, m, "masked_softmax", seed=int(seeds[0]))
    value = nn.init_params(n, config.hidden_size, 1, "scalar", seed=int(seeds[1]))
    aware = config.reward_mode == "object_aware"
    reward = None
    reward_opt = None
    if config.reward_mode != "direct":
        extra = n if aware else 0
        reward = nn.init_params(n + m + extra, config.hidden_size, 1, "sigmoid", seed=int(seeds[2]))
        reward_opt = nn.init_adam(reward, config.lr_reward)
    policy_opt = nn.init_adam(policy, config.lr_policy)
    value_opt = nn.init_adam(value, config.lr_value)

    rng = np.random.default_rng(int(seeds[3]))
    d1 = ReplayMemory(config.d1_capacity)
    d2 = ReplayMemory(config.d2_capacity)
    eval_sim = replace(sim_config, seed=config.eval_seed)

    questioner = lambda s, asked: select_action(policy, s, asked, "sample", rng)
    answerer = make_answerer(kb, sim_config, rng)

    metrics: list[MetricsRow] = []
    loss_p, loss_v, loss_r = _MeanTracker(), _MeanTracker(), _MeanTracker()
    steps = 0
    for episode_index in range(config.episodes):
        target = sample_target(kb, sim_config, rng)
        episode = run_episode(
            questioner, answerer, kb, target, s0_mode=config.s0_mode, horizon=config.horizon
        )
        rewards = assign_rewards(episode, config.reward_mode, reward)
        returns = compute_returns(rewards, config.gamma)
        for t, step in enumerate(episode.steps):
            steps += 1
            if reward is not None:
                d1.push(
                    D1Entry(step.state, step.action, episode.target, float(nn.open_sigmoid(returns[t])))
                )
                r_loss = train_rewardnet_step(
                    d1,
                    reward,
                    reward_opt,
                    batch_size=config.batch_size,
                    threshold=config.d1_threshold,
                    n_questions=m,
                    object_aware=aware,
                    rng=rng,
                )
                if r_loss is not None:
                    loss_r.add(r_loss)
            d2.push(D2Entry(step.state, step.action, float(returns[t])))
            pv = train_policy_value_step(
                d2,
                policy,
                value,
                policy_opt,
                value_opt,
                batch_size=config.batch_size,
                threshold=config.d2_threshold,
                rng=rng,
            )
            if pv is not None:
                loss_p.add(pv[0])
                loss_v.add(pv[1])
            if steps % config.eval_interval == 0:
                result = evaluate_win_rate(
                    PolicyAgent(policy, "greedy"),
                    kb,
                    eval_sim,
                    config.eval_episodes,
                    horizon=config.horizon,
                    s0_mode=config.s0_mode,
                )
                row = MetricsRow(
                    steps, episode_index + 1, result.win_rate, loss_p.take(), loss_v.take(), loss_r.take()
                )
                metrics.append(row)
                if progress is not None:
                    progress(row)

    result = TrainingResult(
        config=config, policy=policy, value=value, reward=reward, metrics=metrics, total_steps=steps
    )
    if metrics_path is not None:
        write_metrics_csv(metrics, metrics_path)
    if checkpoint_dir is not None:
        save_checkpoint(result, checkpoint_dir)
    return result


def save_checkpoint(result: TrainingResult, directory) -> None:
    """Persist the trained networks plus a training-state manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    nn.save_params(result.policy, directory / "policy.npz")
    nn.save_params(result.value, directory / "value.npz")
    if result.reward is not None:
        nn.save_params(result.reward, directory / "reward.npz")
    manifest = {
        "format": _CHECKPOINT_FORMAT,
        "config": asdict(result.config),
        "total_steps": result.total_steps,
        "episodes": result.config.episodes,
        "final_win_rate": result.final_win_rate,
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def load_checkpoint(directory) -> TrainingResult:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
    if manifest.get("format") != _CHECKPOINT_FORMAT:
        raise ValueError(f"not a {_CHECKPOINT_FORMAT} checkpoint: {directory}")
    config = TrainingConfig(**manifest["config"])
    policy = nn.load_params(directory / "policy.npz")
    value = nn.load_params(directory / "value.npz")
    reward_path = directory / "reward.npz"
    reward = nn.load_params(reward_path) if reward_path.exists() else None
    return TrainingResult(
        config=config,
        policy=policy,
        value=value,
        reward=reward,
        metrics=[],
        total_steps=manifest["total_steps"],
    )
