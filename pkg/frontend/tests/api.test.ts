import { describe, expect, it } from "vitest";

import { ApiError, GameClient, isGuess, type FetchLike } from "../src/api.js";

interface Recorded {
  url: string;
  method?: string;
  body?: string;
}

function stubFetch(
  responses: { status: number; body: unknown }[],
): { fetchFn: FetchLike; calls: Recorded[] } {
  const calls: Recorded[] = [];
  const queue = [...responses];
  const fetchFn: FetchLike = async (url, init) => {
    calls.push({ url, method: init?.method, body: init?.body as string | undefined });
    const next = queue.shift();
    if (!next) throw new Error("no stubbed response left");
    return new Response(JSON.stringify(next.body), {
      status: next.status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fetchFn, calls };
}

describe("GameClient", () => {
  it("creates a game via POST /games", async () => {
    const { fetchFn, calls } = stubFetch([
      {
        status: 201,
        body: {
          id: "x",
          question_index: 1,
          question_text: "Q?",
          question_number: 1,
          horizon: 20,
        },
      },
    ]);
    const client = new GameClient("http://srv", fetchFn);
    const created = await client.createGame();
    expect(created.id).toBe("x");
    expect(calls[0].url).toBe("http://srv/games");
    expect(calls[0].method).toBe("POST");
  });

  it("posts answers and distinguishes question from guess responses", async () => {
    const { fetchFn, calls } = stubFetch([
      { status: 200, body: { question_index: 2, question_text: "Next?", question_number: 2 } },
      { status: 200, body: { guess: "Ada Lovelace", guess_index: 9, status: "guessing" } },
    ]);
    const client = new GameClient("", fetchFn);
    const next = await client.submitAnswer("x", "yes");
    expect(isGuess(next)).toBe(false);
    const guess = await client.submitAnswer("x", "no");
    expect(isGuess(guess)).toBe(true);
    expect(calls[0].url).toBe("/games/x/answer");
    expect(JSON.parse(calls[0].body ?? "")).toEqual({ answer: "yes" });
  });

  it("posts the result verdict", async () => {
    const { fetchFn, calls } = stubFetch([
      { status: 200, body: { status: "finished", won: true, reward: 30, questions_asked: 20 } },
    ]);
    const client = new GameClient("", fetchFn);
    const summary = await client.submitResult("x", true);
    expect(summary.won).toBe(true);
    expect(JSON.parse(calls[0].body ?? "")).toEqual({ correct: true });
  });

  it("fetches the session view", async () => {
    const view = {
      id: "x",
      status: "awaiting_answer",
      policy_mode: "greedy",
      horizon: 20,
      history: [],
      current_question: { question_index: 0, question_text: "Q?" },
      guess: null,
      guess_index: null,
      won: null,
    };
    const { fetchFn, calls } = stubFetch([{ status: 200, body: view }]);
    const client = new GameClient("", fetchFn);
    expect(await client.getGame("x")).toEqual(view);
    expect(calls[0].method).toBe("GET");
  });

  it("maps error payloads onto ApiError", async () => {
    const { fetchFn } = stubFetch([
      { status: 409, body: { code: "conflict", message: "result already submitted" } },
    ]);
    const client = new GameClient("", fetchFn);
    try {
      await client.submitResult("x", false);
      expect.unreachable("must throw");
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      const apiErr = err as ApiError;
      expect(apiErr.status).toBe(409);
      expect(apiErr.code).toBe("conflict");
      expect(apiErr.message).toBe("result already submitted");
    }
  });

  it("survives non-JSON error bodies", async () => {
    const calls: Recorded[] = [];
    const fetchFn: FetchLike = async (url) => {
      calls.push({ url });
      return new Response("boom", { status: 500 });
    };
    const client = new GameClient("", fetchFn);
    await expect(client.createGame()).rejects.toMatchObject({ status: 500, code: "http_error" });
  });
});
