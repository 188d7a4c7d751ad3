import { describe, expect, it } from "vitest";

import { GameClient, type FetchLike } from "../src/api.js";
import { GameController } from "../src/controller.js";
import type { GameState } from "../src/state.js";

const createBody = {
  id: "s1",
  question_index: 3,
  question_text: "Is it alive?",
  question_number: 1,
  horizon: 20,
};

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("GameController", () => {
  it("runs create -> answer -> guess -> result against scripted responses", async () => {
    const script = [
      jsonResponse(201, createBody),
      jsonResponse(200, { question_index: 5, question_text: "Is it a person?", question_number: 2 }),
      jsonResponse(200, { guess: "Marie Curie", guess_index: 7, status: "guessing" }),
      jsonResponse(200, { status: "finished", won: true, reward: 30, questions_asked: 2 }),
    ];
    const fetchFn: FetchLike = async () => script.shift()!;
    const states: GameState[] = [];
    const controller = new GameController(new GameClient("", fetchFn), (s) => states.push(s));

    await controller.startGame();
    await controller.answerClick("yes");
    await controller.answerClick("no");
    await controller.confirmResult(true);

    const phases = states.map((s) => s.phase);
    expect(phases).toEqual([
      "answering",
      "answering", // busy
      "answering",
      "answering", // busy
      "guessed",
      "guessed", // busy
      "done",
    ]);
    const done = controller.current();
    expect(done.phase).toBe("done");
    if (done.phase !== "done") return;
    expect(done.won).toBe(true);
    expect(done.history).toHaveLength(2);
  });

  it("rapid double-click sends exactly one request", async () => {
    let answerCalls = 0;
    let release: (r: Response) => void = () => {};
    const fetchFn: FetchLike = async (url) => {
      if (url.endsWith("/games")) return jsonResponse(201, createBody);
      answerCalls += 1;
      return new Promise<Response>((resolve) => {
        release = resolve;
      });
    };
    const controller = new GameController(new GameClient("", fetchFn), () => {});
    await controller.startGame();

    const first = controller.answerClick("yes");
    const second = controller.answerClick("no"); // ignored: request in flight
    release(
      jsonResponse(200, { question_index: 9, question_text: "Next?", question_number: 2 }),
    );
    await Promise.all([first, second]);

    expect(answerCalls).toBe(1);
    const state = controller.current();
    expect(state.phase).toBe("answering");
    if (state.phase !== "answering") return;
    expect(state.history).toEqual([
      { questionIndex: 3, questionText: "Is it alive?", answer: "yes" },
    ]);
  });

  it("resyncs from the session view on a conflict", async () => {
    const view = {
      id: "s1",
      status: "guessing",
      policy_mode: "greedy",
      horizon: 20,
      history: [{ question_index: 3, question_text: "Is it alive?", answer: "yes" }],
      current_question: null,
      guess: "Marie Curie",
      guess_index: 7,
      won: null,
    };
    const script = [
      jsonResponse(201, createBody),
      jsonResponse(409, { code: "conflict", message: "not awaiting an answer" }),
      jsonResponse(200, view),
    ];
    const fetchFn: FetchLike = async () => script.shift()!;
    const controller = new GameController(new GameClient("", fetchFn), () => {});
    await controller.startGame();
    await controller.answerClick("yes");

    const state = controller.current();
    expect(state.phase).toBe("guessed");
    if (state.phase !== "guessed") return;
    expect(state.guess).toBe("Marie Curie");
    expect(state.history).toHaveLength(1);
  });

  it("network failures surface as a retryable error state", async () => {
    const fetchFn: FetchLike = async () => {
      throw new Error("connection refused");
    };
    const controller = new GameController(new GameClient("", fetchFn), () => {});
    await controller.startGame();
    expect(controller.current()).toEqual({ phase: "error", message: "connection refused" });
  });

  it("refresh rebuilds mid-game state from the server view", async () => {
    const view = {
      id: "s1",
      status: "awaiting_answer",
      policy_mode: "greedy",
      horizon: 20,
      history: [
        { question_index: 3, question_text: "Is it alive?", answer: "yes" },
        { question_index: 5, question_text: "Is it a person?", answer: "no" },
      ],
      current_question: { question_index: 8, question_text: "Is it an animal?" },
      guess: null,
      guess_index: null,
      won: null,
    };
    const fetchFn: FetchLike = async () => jsonResponse(200, view);
    const controller = new GameController(new GameClient("", fetchFn), () => {});
    await controller.refresh("s1");
    const state = controller.current();
    expect(state.phase).toBe("answering");
    if (state.phase !== "answering") return;
    expect(state.question.number).toBe(3);
    expect(state.history).toHaveLength(2);
  });
});
