"""The game engine: belief transitions, guessing, and episode rollout.

A belief is a plain float64 vector over objects that sums to one.  The
transition multiplies the belief elementwise by the answer-likelihood
column of the chosen question and renormalizes, which is one step of
Bayesian filtering.  Episodes run a fixed number of questions, then a
single argmax guess decides the +30 / -30 terminal reward.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .kb import KnowledgeBase, initial_belief

WIN_REWARD = 30.0
LOSS_REWARD = -30.0
DEFAULT_HORIZON = 20

TRANSCRIPT_HEADER = "q20 transcripts v1"


class Answer(str, enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, token) -> "Answer":
        """Case-insensitive parse of an answer token; canonical form is lowercase."""
        try:
            return cls(str(token).strip().lower())
        except ValueError:
            raise ValueError(f"not an answer token: {token!r}") from None


# Canonical order, also the tie-break order of the simulated answerer.
ANSWER_ORDER = (Answer.YES, Answer.NO, Answer.UNKNOWN)


class DegenerateBeliefError(RuntimeError):
    """The pre-normalization belief mass underflowed to zero."""


def likelihood_column(kb: KnowledgeBase, question: int, answer: Answer) -> np.ndarray:
    if answer is Answer.YES:
        return kb.R[:, question]
    if answer is Answer.NO:
        return kb.W[:, question]
    return kb.U[:, question]


def update_belief(s: np.ndarray, question: int, answer: Answer, kb: KnowledgeBase) -> np.ndarray:
    """One Bayes step: scale by the answer-likelihood column, renormalize."""
    post = s * likelihood_column(kb, question, answer)
    total = post.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise DegenerateBeliefError(
            f"belief mass vanished after question {question}, answer {answer.value}"
        )
    return post / total


def make_guess(s: np.ndarray) -> int:
    """Index of the maximal confidence; ties broken by lowest index."""
    return int(np.argmax(s))


def terminal_reward(won: bool) -> float:
    return WIN_REWARD if won else LOSS_REWARD


@dataclass(frozen=True)
class EpisodeStep:
    state: np.ndarray
    action: int
    answer: Answer


@dataclass
class EpisodeRecord:
    """A finished episode: per-step (belief, question, answer) plus the outcome.

    ``target`` is None for live games against a human, where the hidden
    object is never revealed to the system.
    """

    steps: list[EpisodeStep]
    guess: int
    won: bool
    terminal_reward: float
    final_belief: np.ndarray
    horizon: int
    target: int | None = None

    def __post_init__(self):
        actions = [step.action for step in self.steps]
        if len(set(actions)) != len(actions):
            raise ValueError("episode repeats a question")
        if len(self.steps) != self.horizon:
            raise ValueError(f"episode has {len(self.steps)} steps but horizon {self.horizon}")
        if self.terminal_reward not in (WIN_REWARD, LOSS_REWARD):
            raise ValueError(f"terminal reward must be +/-30, got {self.terminal_reward}")
        if self.won != (self.terminal_reward == WIN_REWARD):
            raise ValueError("won flag disagrees with the terminal reward")
        if self.target is not None and self.won != (self.guess == self.target):
            raise ValueError("won flag disagrees with guess == target")

    @property
    def actions(self) -> list[int]:
        return [step.action for step in self.steps]


def run_episode(
    questioner,
    answerer,
    kb: KnowledgeBase,
    target: int,
    *,
    s0_mode: str = "uniform",
    horizon: int = DEFAULT_HORIZON,
) -> EpisodeRecord:
    """Roll out one game.

    ``questioner(belief, asked_mask) -> question index`` picks each action;
    ``answerer(target, question index) -> Answer`` replies.  A questioner
    that returns an out-of-range or already-asked index is a contract
    violation and fails fast.
    """
    m = kb.n_questions
    if horizon < 0:
        raise ValueError(f"horizon must be nonnegative, got {horizon}")
    if horizon > m:
        raise ValueError(f"horizon {horizon} exceeds the {m} available questions")
    s = initial_belief(kb, s0_mode)
    asked = np.zeros(m, dtype=bool)
    steps: list[EpisodeStep] = []
    for _ in range(horizon):
        a = int(questioner(s, asked))
        if a < 0 or a >= m:
            raise ValueError(f"questioner returned out-of-range question {a}")
        if asked[a]:
            raise ValueError(f"questioner repeated question {a}")
        asked[a] = True
        x = answerer(target, a)
        if not isinstance(x, Answer):
            x = Answer.parse(x)
        steps.append(EpisodeStep(state=s, action=a, answer=x))
        s = update_belief(s, a, x, kb)
    guess = make_guess(s)
    won = guess == int(target)
    return EpisodeRecord(
        steps=steps,
        guess=guess,
        won=won,
        terminal_reward=terminal_reward(won),
        final_belief=s,
        horizon=horizon,
        target=int(target),
    )


def format_transcript(episode: EpisodeRecord, kb: KnowledgeBase, index: int = 1) -> str:
    """Serialize an episode as a tab-separated, parse-friendly transcript block."""
    lines = [f"episode\t{index}"]
    if episode.target is not None:
        lines.append(f"target\t{episode.target}\t{kb.objects[episode.target]}")
    after_states = [step.state for step in episode.steps[1:]] + [episode.final_belief]
    for t, (step, after) in enumerate(zip(episode.steps, after_states), start=1):
        top = np.argsort(after)[::-1][:3]
        tops = ",".join(f"{int(i)}:{after[i]:.6f}" for i in top)
        lines.append(
            f"step\t{t}\tq={step.action}\t{kb.questions[step.action]}\t{step.answer.value}\ttop3\t{tops}"
        )
    lines.append(f"guess\t{episode.guess}\t{kb.objects[episode.guess]}")
    outcome = "won" if episode.won else "lost"
    lines.append(f"outcome\t{outcome}\treward\t{episode.terminal_reward:+.1f}")
    return "\n".join(lines) + "\n"


def parse_transcripts(text: str) -> list[dict]:
    """Recover question indices, answers and outcomes from transcript text."""
    episodes: list[dict] = []
    current: dict | None = None
    for raw in text.splitlines():
        if not raw.strip() or raw == TRANSCRIPT_HEADER:
            continue
        parts = raw.split("\t")
        tag = parts[0]
        if tag == "episode":
            current = {
                "index": int(parts[1]),
                "target": None,
                "steps": [],
                "guess": None,
                "won": None,
                "reward": None,
            }
            episodes.append(current)
            continue
        if current is None:
            raise ValueError(f"transcript line outside an episode: {raw!r}")
        if tag == "target":
            current["target"] = int(parts[1])
        elif tag == "step":
            if len(parts) != 7 or not parts[2].startswith("q="):
                raise ValueError(f"malformed step line: {raw!r}")
            current["steps"].append((int(parts[2][2:]), Answer.parse(parts[4])))
        elif tag == "guess":
            current["guess"] = int(parts[1])
        elif tag == "outcome":
            current["won"] = parts[1] == "won"
            current["reward"] = float(parts[3])
        else:
            raise ValueError(f"unknown transcript record {tag!r}")
    return episodes
