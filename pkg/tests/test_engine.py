"""Belief updates, guessing, episode rollout and transcripts."""

import numpy as np
import pytest

from q20.agents import info_gain_select
from q20.engine import (
    LOSS_REWARD,
    WIN_REWARD,
    Answer,
    DegenerateBeliefError,
    EpisodeRecord,
    EpisodeStep,
    format_transcript,
    make_guess,
    parse_transcripts,
    run_episode,
    terminal_reward,
    update_belief,
)
from q20.kb import KnowledgeBase, generate_synthetic_kb
from q20.simulator import answer as sim_answer


def kb_from_columns(r_cols, lam_scale=1000):
    """Build a 2-object KB whose R columns approximate the given values."""
    r_cols = np.asarray(r_cols, dtype=np.float64)
    n, m = r_cols.shape
    counts = np.zeros((n, m, 3), dtype=np.int64)
    counts[..., 0] = np.rint(r_cols * lam_scale)
    counts[..., 1] = np.rint((1 - r_cols) * lam_scale / 2)
    counts[..., 2] = lam_scale - counts[..., 0] - counts[..., 1]
    labels = [f"obj{i}" for i in range(n)]
    questions = [f"q{j}?" for j in range(m)]
    return KnowledgeBase(labels, questions, counts, np.ones(n, dtype=np.int64))


class TestAnswer:
    def test_parse_case_insensitive(self):
        assert Answer.parse("YES") is Answer.YES
        assert Answer.parse(" No ") is Answer.NO
        assert Answer.parse("unknown") is Answer.UNKNOWN

    def test_canonical_serialization(self):
        assert Answer.YES.value == "yes"
        assert [a.value for a in Answer] == ["yes", "no", "unknown"]

    def test_parse_rejects_garbage(self):
        with pytest.raises(ValueError):
            Answer.parse("maybe")


class TestUpdateBelief:
    def test_constant_column_is_identity(self):
        kb = generate_synthetic_kb(8, 10, 3, answer_ambiguity=0.0, seed=1)
        s = np.full(8, 1 / 8)
        # filler questions at ambiguity 0 have identical columns for all objects
        out = update_belief(s, 5, Answer.UNKNOWN, kb)
        assert np.allclose(out, s, atol=1e-12)

    def test_one_step_bayes_by_hand(self):
        kb = generate_synthetic_kb(2, 1, 1, count_scale=1000, answer_ambiguity=0.0, seed=0)
        s = np.array([0.5, 0.5])
        col = kb.R[:, 0]
        expected = s * col / (s * col).sum()
        out = update_belief(s, 0, Answer.YES, kb)
        assert np.allclose(out, expected, atol=1e-15)

    def test_matches_brute_force_posterior(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            n, m = int(rng.integers(2, 11)), int(rng.integers(1, 9))
            counts = rng.integers(0, 50, size=(n, m, 3))
            kb = KnowledgeBase(
                [f"o{i}" for i in range(n)], [f"q{j}" for j in range(m)], counts, np.ones(n)
            )
            s = rng.dirichlet(np.ones(n))
            j = int(rng.integers(m))
            x = [Answer.YES, Answer.NO, Answer.UNKNOWN][int(rng.integers(3))]
            col = {Answer.YES: kb.R, Answer.NO: kb.W, Answer.UNKNOWN: kb.U}[x][:, j]
            oracle = s * col / np.sum(s * col)
            assert np.abs(update_belief(s, j, x, kb) - oracle).max() < 1e-12

    def test_composed_updates_equal_joint_posterior(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            n, m = int(rng.integers(2, 11)), int(rng.integers(1, 9))
            counts = rng.integers(0, 30, size=(n, m, 3))
            kb = KnowledgeBase(
                [f"o{i}" for i in range(n)], [f"q{j}" for j in range(m)], counts, np.ones(n)
            )
            s0 = rng.dirichlet(np.ones(n))
            length = int(rng.integers(1, 21))
            likelihood = np.ones(n)
            s = s0
            for _ in range(length):
                j = int(rng.integers(m))
                x = [Answer.YES, Answer.NO, Answer.UNKNOWN][int(rng.integers(3))]
                col = {Answer.YES: kb.R, Answer.NO: kb.W, Answer.UNKNOWN: kb.U}[x][:, j]
                likelihood = likelihood * col
                s = update_belief(s, j, x, kb)
            joint = s0 * likelihood / np.sum(s0 * likelihood)
            assert np.abs(s - joint).max() < 1e-9

    def test_degenerate_belief_detected(self):
        kb = kb_from_columns(np.array([[0.5], [0.5]]))
        s = np.array([0.0, 0.0])  # deliberately invalid state
        with pytest.raises(DegenerateBeliefError):
            update_belief(s, 0, Answer.YES, kb)


class TestMakeGuess:
    def test_unique_maximum(self):
        assert make_guess(np.array([0.1, 0.7, 0.2])) == 1

    def test_tie_breaks_lowest_index(self):
        assert make_guess(np.array([0.5, 0.5])) == 0

    def test_one_hot(self):
        one_hot = np.zeros(6)
        one_hot[4] = 1.0
        assert make_guess(one_hot) == 4


class TestTerminalReward:
    def test_values(self):
        assert terminal_reward(True) == 30.0
        assert terminal_reward(False) == -30.0


class TestRunEpisode:
    def test_info_gain_wins_every_target_on_coded_kb(self):
        kb = generate_synthetic_kb(4, 20, 2, count_scale=100, answer_ambiguity=0.0, seed=0)
        questioner = lambda s, asked: info_gain_select(kb, s, asked)
        answerer = lambda target, q: sim_answer(kb, target, q)
        for target in range(4):
            episode = run_episode(questioner, answerer, kb, target, horizon=20)
            assert episode.won
            assert episode.guess == target
            assert episode.terminal_reward == WIN_REWARD

    def test_ascending_questioner_asks_distinct_questions(self):
        kb = generate_synthetic_kb(4, 20, 2, answer_ambiguity=0.0, seed=0)
        questioner = lambda s, asked: int(np.argmin(asked))
        answerer = lambda target, q: Answer.UNKNOWN
        episode = run_episode(questioner, answerer, kb, 0, horizon=20)
        assert episode.actions == list(range(20))
        assert len(set(episode.actions)) == 20

    def test_uninformative_answers_leave_prior(self):
        # all objects share counts, so every likelihood column is constant
        counts = np.tile(np.array([3, 4, 5], dtype=np.int64), (3, 4, 1))
        kb = KnowledgeBase(["a", "b", "c"], [f"q{j}" for j in range(4)], counts, np.array([5, 2, 1]))
        questioner = lambda s, asked: int(np.argmin(asked))
        answerer = lambda target, q: Answer.UNKNOWN
        episode = run_episode(questioner, answerer, kb, 2, s0_mode="popularity", horizon=4)
        assert np.allclose(episode.final_belief, [5 / 8, 2 / 8, 1 / 8], atol=1e-12)
        assert episode.guess == 0
        assert not episode.won

    def test_repeating_questioner_fails_fast(self):
        kb = generate_synthetic_kb(4, 4, 2, seed=0)
        answerer = lambda target, q: Answer.YES
        with pytest.raises(ValueError, match="repeated"):
            run_episode(lambda s, asked: 0, answerer, kb, 0, horizon=2)

    def test_out_of_range_questioner_fails_fast(self):
        kb = generate_synthetic_kb(4, 4, 2, seed=0)
        with pytest.raises(ValueError, match="out-of-range"):
            run_episode(lambda s, asked: 99, lambda t, q: Answer.YES, kb, 0, horizon=1)

    def test_horizon_beyond_questions_rejected(self):
        kb = generate_synthetic_kb(4, 4, 2, seed=0)
        with pytest.raises(ValueError, match="exceeds"):
            run_episode(lambda s, asked: 0, lambda t, q: Answer.YES, kb, 0, horizon=5)

    def test_identical_inputs_identical_records(self):
        kb = generate_synthetic_kb(8, 10, 3, answer_ambiguity=0.1, seed=2)
        questioner = lambda s, asked: int(np.argmin(asked))
        answerer = lambda target, q: sim_answer(kb, target, q)
        a = run_episode(questioner, answerer, kb, 3, horizon=10)
        b = run_episode(questioner, answerer, kb, 3, horizon=10)
        assert a.actions == b.actions
        assert [s.answer for s in a.steps] == [s.answer for s in b.steps]
        assert a.guess == b.guess and a.won == b.won

    def test_zero_horizon_guesses_from_prior(self):
        kb = generate_synthetic_kb(4, 4, 2, seed=0)
        episode = run_episode(lambda s, asked: 0, lambda t, q: Answer.YES, kb, 0, horizon=0)
        assert episode.steps == []
        assert episode.guess == 0
        assert episode.won


class TestEpisodeRecord:
    def _steps(self, actions):
        s = np.array([0.5, 0.5])
        return [EpisodeStep(state=s, action=a, answer=Answer.YES) for a in actions]

    def test_rejects_repeated_actions(self):
        with pytest.raises(ValueError, match="repeats"):
            EpisodeRecord(
                steps=self._steps([1, 1]),
                guess=0,
                won=True,
                terminal_reward=WIN_REWARD,
                final_belief=np.array([1.0, 0.0]),
                horizon=2,
                target=0,
            )

    def test_rejects_reward_mismatch(self):
        with pytest.raises(ValueError, match="terminal reward"):
            EpisodeRecord(
                steps=self._steps([0]),
                guess=0,
                won=True,
                terminal_reward=10.0,
                final_belief=np.array([1.0, 0.0]),
                horizon=1,
                target=0,
            )

    def test_rejects_won_target_mismatch(self):
        with pytest.raises(ValueError, match="guess == target"):
            EpisodeRecord(
                steps=self._steps([0]),
                guess=1,
                won=True,
                terminal_reward=WIN_REWARD,
                final_belief=np.array([0.0, 1.0]),
                horizon=1,
                target=0,
            )

    def test_loss_reward_consistent(self):
        record = EpisodeRecord(
            steps=self._steps([0]),
            guess=1,
            won=False,
            terminal_reward=LOSS_REWARD,
            final_belief=np.array([0.0, 1.0]),
            horizon=1,
            target=0,
        )
        assert record.terminal_reward == -30.0


class TestTranscripts:
    def test_round_trip_recovers_actions_and_answers(self):
        kb = generate_synthetic_kb(8, 20, 3, answer_ambiguity=0.05, seed=4)
        questioner = lambda s, asked: int(np.argmin(asked))
        answerer = lambda target, q: sim_answer(kb, target, q)
        episode = run_episode(questioner, answerer, kb, 5, horizon=20)
        text = format_transcript(episode, kb, index=3)
        parsed = parse_transcripts(text)
        assert len(parsed) == 1
        rec = parsed[0]
        assert rec["index"] == 3
        assert rec["target"] == 5
        assert [q for q, _ in rec["steps"]] == episode.actions
        assert [x for _, x in rec["steps"]] == [s.answer for s in episode.steps]
        assert rec["guess"] == episode.guess
        assert rec["won"] == episode.won
        assert rec["reward"] == episode.terminal_reward

    def test_step_lines_are_numbered(self):
        kb = generate_synthetic_kb(4, 6, 2, seed=0)
        episode = run_episode(
            lambda s, asked: int(np.argmin(asked)), lambda t, q: Answer.NO, kb, 1, horizon=6
        )
        lines = [l for l in format_transcript(episode, kb).splitlines() if l.startswith("step\t")]
        assert [int(l.split("\t")[1]) for l in lines] == list(range(1, 7))
