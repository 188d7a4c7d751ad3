import { describe, expect, it } from "vitest";

import type { CreateGameResponse, ResultSummary, SessionView } from "../src/api.js";
import {
  applyAnswer,
  applyResult,
  fromCreate,
  fromSessionView,
  idleState,
  isBusy,
  setBusy,
} from "../src/state.js";

const created: CreateGameResponse = {
  id: "abc123",
  question_index: 4,
  question_text: "Is it alive?",
  question_number: 1,
  horizon: 20,
};

describe("fromCreate", () => {
  it("starts answering question 1 with empty history", () => {
    const state = fromCreate(created);
    expect(state.phase).toBe("answering");
    if (state.phase !== "answering") return;
    expect(state.sessionId).toBe("abc123");
    expect(state.question).toEqual({ index: 4, text: "Is it alive?", number: 1 });
    expect(state.history).toEqual([]);
    expect(state.busy).toBe(false);
  });
});

describe("applyAnswer", () => {
  it("appends history and shows the next question", () => {
    const state = applyAnswer(fromCreate(created), "yes", {
      question_index: 7,
      question_text: "Is it a person?",
      question_number: 2,
    });
    expect(state.phase).toBe("answering");
    if (state.phase !== "answering") return;
    expect(state.history).toEqual([
      { questionIndex: 4, questionText: "Is it alive?", answer: "yes" },
    ]);
    expect(state.question.number).toBe(2);
  });

  it("moves to the guess screen on a guess response", () => {
    const state = applyAnswer(fromCreate(created), "no", {
      guess: "Napoleon Bonaparte",
      guess_index: 12,
      status: "guessing",
    });
    expect(state.phase).toBe("guessed");
    if (state.phase !== "guessed") return;
    expect(state.guess).toBe("Napoleon Bonaparte");
    expect(state.history).toHaveLength(1);
  });

  it("ignores answers outside the answering phase", () => {
    expect(
      applyAnswer(idleState, "yes", {
        question_index: 0,
        question_text: "?",
        question_number: 1,
      }),
    ).toBe(idleState);
  });
});

describe("applyResult", () => {
  it("finishes the game with the summary", () => {
    const guessed = applyAnswer(fromCreate(created), "no", {
      guess: "Napoleon Bonaparte",
      guess_index: 12,
      status: "guessing",
    });
    const summary: ResultSummary = {
      status: "finished",
      won: true,
      reward: 30,
      questions_asked: 20,
    };
    const state = applyResult(guessed, summary);
    expect(state.phase).toBe("done");
    if (state.phase !== "done") return;
    expect(state.won).toBe(true);
    expect(state.reward).toBe(30);
  });
});

describe("fromSessionView", () => {
  const baseView: SessionView = {
    id: "abc123",
    status: "awaiting_answer",
    policy_mode: "greedy",
    horizon: 20,
    history: [
      { question_index: 4, question_text: "Is it alive?", answer: "yes" },
      { question_index: 7, question_text: "Is it a person?", answer: "no" },
    ],
    current_question: { question_index: 9, question_text: "Is it bigger than a car?" },
    guess: null,
    guess_index: null,
    won: null,
  };

  it("reconstructs an answering session after a refresh", () => {
    const state = fromSessionView(baseView);
    expect(state.phase).toBe("answering");
    if (state.phase !== "answering") return;
    expect(state.history).toHaveLength(2);
    expect(state.question).toEqual({ index: 9, text: "Is it bigger than a car?", number: 3 });
  });

  it("reconstruction matches incremental updates", () => {
    let incremental = fromCreate(created);
    incremental = applyAnswer(incremental, "yes", {
      question_index: 7,
      question_text: "Is it a person?",
      question_number: 2,
    });
    incremental = applyAnswer(incremental, "no", {
      question_index: 9,
      question_text: "Is it bigger than a car?",
      question_number: 3,
    });
    const refreshed = fromSessionView({
      ...baseView,
      history: [
        { question_index: 4, question_text: "Is it alive?", answer: "yes" },
        { question_index: 7, question_text: "Is it a person?", answer: "no" },
      ],
    });
    expect(refreshed).toEqual(incremental);
  });

  it("reconstructs the guess screen", () => {
    const state = fromSessionView({
      ...baseView,
      status: "guessing",
      current_question: null,
      guess: "Elon Musk",
      guess_index: 3,
    });
    expect(state.phase).toBe("guessed");
    if (state.phase !== "guessed") return;
    expect(state.guess).toBe("Elon Musk");
  });

  it("reconstructs a finished game", () => {
    const state = fromSessionView({
      ...baseView,
      status: "finished",
      current_question: null,
      guess: "Elon Musk",
      guess_index: 3,
      won: false,
    });
    expect(state.phase).toBe("done");
    if (state.phase !== "done") return;
    expect(state.won).toBe(false);
    expect(state.reward).toBe(-30);
  });
});

describe("busy lock", () => {
  it("marks and clears the in-flight flag", () => {
    const state = fromCreate(created);
    const busy = setBusy(state, true);
    expect(isBusy(busy)).toBe(true);
    expect(isBusy(setBusy(busy, false))).toBe(false);
    expect(isBusy(idleState)).toBe(false);
  });
});
