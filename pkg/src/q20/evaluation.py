"""Experiment harness: win rates, budget curves, noise sweeps, ablations.

Evaluation is paired: the target sequence is a pure function of the
simulator seed and the per-episode noise and policy-sampling streams are
derived from (seed, episode index), so different agents, budgets and
noise levels see exactly the same evaluation episodes.  Every win rate
carries a Wilson confidence half-width.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .engine import TRANSCRIPT_HEADER, EpisodeRecord, format_transcript, run_episode
from .kb import KnowledgeBase
from .simulator import SimulatorConfig, noisy_answer, sample_target

# Stream tags for per-episode generators derived from the simulator seed.
_TARGET_STREAM, _POLICY_STREAM, _NOISE_STREAM = 0, 1, 2


def wilson_interval(wins: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("need at least one trial")
    p = wins / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return max(0.0, center - half), min(1.0, center + half)


def wilson_half_width(wins: int, n: int, z: float = 1.96) -> float:
    lo, hi = wilson_interval(wins, n, z)
    return (hi - lo) / 2.0


@dataclass(frozen=True)
class WinRateResult:
    wins: int
    episodes: int
    win_rate: float
    half_width: float

    def __str__(self):
        return f"{self.win_rate:.3f} +/- {self.half_width:.3f} ({self.wins}/{self.episodes})"


def draw_targets(kb: KnowledgeBase, sim_config: SimulatorConfig, episodes: int) -> list[int]:
    """The evaluation target sequence; depends only on (kb, sim seed, count)."""
    rng = np.random.default_rng([sim_config.seed, _TARGET_STREAM])
    return [sample_target(kb, sim_config, rng) for _ in range(episodes)]


def evaluate_win_rate(
    agent,
    kb: KnowledgeBase,
    sim_config: SimulatorConfig,
    episodes: int,
    *,
    horizon: int = 20,
    s0_mode: str = "uniform",
    targets=None,
) -> WinRateResult:
    """Fraction of episodes won by the agent, with a Wilson half-width.

    ``agent`` provides ``questioner(rng)``; pass ``targets`` to evaluate an
    explicit target list (e.g. every object once) instead of sampling.
    """
    if targets is None:
        if episodes < 1:
            raise ValueError("episodes must be positive")
        targets = draw_targets(kb, sim_config, episodes)
    targets = [int(t) for t in targets]
    wins = 0
    for i, target in enumerate(targets):
        policy_rng = np.random.default_rng([sim_config.seed, i, _POLICY_STREAM])
        noise_rng = np.random.default_rng([sim_config.seed, i, _NOISE_STREAM])
        questioner = agent.questioner(policy_rng)
        answerer = lambda tgt, q: noisy_answer(kb, tgt, q, sim_config.noise_epsilon, noise_rng)
        episode = run_episode(questioner, answerer, kb, target, s0_mode=s0_mode, horizon=horizon)
        wins += episode.won
    n = len(targets)
    return WinRateResult(wins, n, wins / n, wilson_half_width(wins, n))


def win_rate_vs_budget(
    agent,
    kb: KnowledgeBase,
    sim_config: SimulatorConfig,
    budgets,
    episodes: int,
    *,
    s0_mode: str = "uniform",
    targets=None,
) -> list[tuple[int, WinRateResult]]:
    """Win rate after truncating each episode to a question budget.

    All budgets share one target sequence, so the series is paired.
    """
    budgets = sorted(int(b) for b in budgets)
    if budgets and budgets[-1] > kb.n_questions:
        raise ValueError(f"budget {budgets[-1]} exceeds the {kb.n_questions} available questions")
    if targets is None:
        targets = draw_targets(kb, sim_config, episodes)
    return [
        (
            b,
            evaluate_win_rate(
                agent, kb, sim_config, len(targets), horizon=b, s0_mode=s0_mode, targets=targets
            ),
        )
        for b in budgets
    ]


def noise_sweep(
    agent,
    kb: KnowledgeBase,
    sim_config: SimulatorConfig,
    epsilons,
    episodes: int,
    *,
    horizon: int = 20,
    s0_mode: str = "uniform",
) -> list[tuple[float, WinRateResult]]:
    """Win rate per answer-noise level; targets are paired across levels."""
    targets = draw_targets(kb, sim_config, episodes)
    series = []
    for eps in epsilons:
        cfg = replace(sim_config, noise_epsilon=float(eps))
        series.append(
            (
                float(eps),
                evaluate_win_rate(
                    agent, kb, cfg, episodes, horizon=horizon, s0_mode=s0_mode, targets=targets
                ),
            )
        )
    return series


@dataclass
class AblationRun:
    mode: str
    seed: int
    metrics: list
    final: WinRateResult
    policy: object


@dataclass
class AblationReport:
    runs: list[AblationRun]

    def runs_for(self, mode: str) -> list[AblationRun]:
        return [r for r in self.runs if r.mode == mode]

    def mean_final(self, mode: str) -> float:
        runs = self.runs_for(mode)
        return sum(r.final.win_rate for r in runs) / len(runs)


def episodes_to_reach(metrics, threshold: float) -> int | None:
    """Episode count at the first evaluation row with win_rate >= threshold."""
    for row in metrics:
        if row.win_rate >= threshold:
            return row.episodes
    return None


def run_ablation(
    kb: KnowledgeBase,
    sim_config: SimulatorConfig,
    base_config,
    *,
    modes=("direct", "rewardnet", "object_aware"),
    seeds=(0, 1, 2),
    final_eval_episodes: int = 1000,
    eval_sim_config: SimulatorConfig | None = None,
    progress=None,
) -> AblationReport:
    """Train every (reward mode, seed) pair and score finals on paired episodes.

    Final evaluations default to the training simulator with the shared
    evaluation seed; pass ``eval_sim_config`` to score finals under a
    different answerer (e.g. noise-free after noisy training).
    """
    from dataclasses import replace as cfg_replace

    from . import agents

    if eval_sim_config is None:
        eval_sim_config = sim_config
    eval_sim = replace(eval_sim_config, seed=base_config.eval_seed)
    runs = []
    for mode in modes:
        for seed in seeds:
            config = cfg_replace(base_config, reward_mode=mode, seed=seed)
            result = agents.run_training(kb, sim_config, config)
            final = evaluate_win_rate(
                agents.PolicyAgent(result.policy, "greedy"),
                kb,
                eval_sim,
                final_eval_episodes,
                horizon=config.horizon,
                s0_mode=config.s0_mode,
            )
            run = AblationRun(mode=mode, seed=seed, metrics=result.metrics, final=final, policy=result.policy)
            runs.append(run)
            if progress is not None:
                progress(run)
    return AblationReport(runs)


def dump_transcripts(episodes, kb: KnowledgeBase, path) -> None:
    """Write numbered question/answer transcripts with outcome annotations."""
    blocks = [TRANSCRIPT_HEADER + "\n"]
    for i, episode in enumerate(episodes, start=1):
        blocks.append(format_transcript(episode, kb, index=i))
    Path(path).write_text("\n".join(blocks), encoding="utf-8")


@dataclass
class EvalReport:
    """Evaluation series plus the configuration that produced them."""

    config: dict
    seeds: list[int]
    learning_curve: list | None = None
    budget_series: list[tuple[int, WinRateResult]] | None = None
    noise_series: list[tuple[float, WinRateResult]] | None = None

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        summary: dict = {"config": self.config, "seeds": self.seeds}
        if self.learning_curve is not None:
            from .agents import write_metrics_csv

            write_metrics_csv(self.learning_curve, directory / "learning_curve.csv")
            summary["final_win_rate"] = self.learning_curve[-1].win_rate if self.learning_curve else None
        if self.budget_series is not None:
            lines = ["budget,win_rate,half_width,wins,episodes"]
            for b, res in self.budget_series:
                lines.append(f"{b},{res.win_rate!r},{res.half_width!r},{res.wins},{res.episodes}")
            (directory / "budget_curve.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
            summary["budget_curve"] = {str(b): res.win_rate for b, res in self.budget_series}
        if self.noise_series is not None:
            lines = ["epsilon,win_rate,half_width,wins,episodes"]
            for eps, res in self.noise_series:
                lines.append(f"{eps!r},{res.win_rate!r},{res.half_width!r},{res.wins},{res.episodes}")
            (directory / "noise_curve.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
            summary["noise_curve"] = {repr(e): res.win_rate for e, res in self.noise_series}
        (directory / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
