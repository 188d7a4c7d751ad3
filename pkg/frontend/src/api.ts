// Typed client for the live-play HTTP/JSON API.
// The server is the single source of truth; this module only moves JSON.

export type AnswerToken = "yes" | "no" | "unknown";

export interface CreateGameResponse {
  id: string;
  question_index: number;
  question_text: string;
  question_number: number;
  horizon: number;
}

export interface NextQuestionResponse {
  question_index: number;
  question_text: string;
  question_number: number;
}

export interface GuessResponse {
  guess: string;
  guess_index: number;
  status: "guessing";
}

export type AnswerResponse = NextQuestionResponse | GuessResponse;

export interface ResultSummary {
  status: "finished";
  won: boolean;
  reward: number;
  questions_asked: number;
}

export interface HistoryEntry {
  question_index: number;
  question_text: string;
  answer: AnswerToken;
}

export interface SessionView {
  id: string;
  status: "awaiting_answer" | "guessing" | "finished";
  policy_mode: "greedy" | "sample";
  horizon: number;
  history: HistoryEntry[];
  current_question: { question_index: number; question_text: string } | null;
  guess: string | null;
  guess_index: number | null;
  won: boolean | null;
  beliefs?: { object: string; p: number }[];
}

export function isGuess(response: AnswerResponse): response is GuessResponse {
  return "guess" in response;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function decode<T>(response: Response): Promise<T> {
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    body = null;
  }
  if (!response.ok) {
    const record = (body ?? {}) as Record<string, unknown>;
    const code = typeof record.code === "string" ? record.code : "http_error";
    const message =
      typeof record.message === "string" ? record.message : `request failed (${response.status})`;
    throw new ApiError(response.status, code, message);
  }
  return body as T;
}

export class GameClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => decode<T>(r));
  }

  createGame(): Promise<CreateGameResponse> {
    return this.post<CreateGameResponse>("/games", {});
  }

  submitAnswer(id: string, answer: AnswerToken): Promise<AnswerResponse> {
    return this.post<AnswerResponse>(`/games/${id}/answer`, { answer });
  }

  submitResult(id: string, correct: boolean): Promise<ResultSummary> {
    return this.post<ResultSummary>(`/games/${id}/result`, { correct });
  }

  getGame(id: string): Promise<SessionView> {
    return this.fetchFn(`${this.baseUrl}/games/${id}`, { method: "GET" }).then((r) =>
      decode<SessionView>(r),
    );
  }
}
