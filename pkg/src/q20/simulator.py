"""Simulated answerer: samples a target and answers by the argmax rule.

Given a target object i and question j the simulator answers with
whichever of R(i,j), W(i,j), U(i,j) is largest, ties broken in the order
yes > no > unknown.  An optional noise level epsilon replaces the true
answer with one of the other two, uniformly, to model human mistakes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import ANSWER_ORDER, Answer
from .kb import KnowledgeBase, initial_belief


@dataclass(frozen=True)
class SimulatorConfig:
    target_mode: str = "popularity"
    noise_epsilon: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.target_mode not in ("uniform", "popularity"):
            raise ValueError(f"unknown target mode {self.target_mode!r}")
        if not 0.0 <= self.noise_epsilon <= 1.0:
            raise ValueError(f"noise_epsilon must lie in [0, 1], got {self.noise_epsilon}")


def sample_target(kb: KnowledgeBase, config: SimulatorConfig, rng: np.random.Generator) -> int:
    """Draw a target object index per the configured prior."""
    if config.target_mode == "uniform":
        return int(rng.integers(kb.n_objects))
    return int(rng.choice(kb.n_objects, p=initial_belief(kb, "popularity")))


def answer(kb: KnowledgeBase, target: int, question: int) -> Answer:
    """Deterministic argmax answer for (target, question).

    Ties resolve in the order yes > no > unknown.  Genuine count
    differences move the probabilities by at least 1/(total+lam), so the
    tolerance below only merges mathematically exact ties that float
    rounding pulled apart (e.g. the all-zero-counts 1/3 triple).
    """
    triple = np.array([kb.R[target, question], kb.W[target, question], kb.U[target, question]])
    winners = np.flatnonzero(triple >= triple.max() - 1e-12)
    return ANSWER_ORDER[int(winners[0])]


def noisy_answer(
    kb: KnowledgeBase,
    target: int,
    question: int,
    epsilon: float,
    rng: np.random.Generator,
) -> Answer:
    """With probability epsilon, replace the true answer by one of the other two."""
    truth = answer(kb, target, question)
    if rng.random() < epsilon:
        others = [a for a in ANSWER_ORDER if a is not truth]
        return others[int(rng.integers(2))]
    return truth


def make_answerer(kb: KnowledgeBase, config: SimulatorConfig, rng: np.random.Generator):
    """Answerer callback for the engine; applies the configured noise."""

    def reply(target: int, question: int) -> Answer:
        return noisy_answer(kb, target, question, config.noise_epsilon, rng)

    return reply
