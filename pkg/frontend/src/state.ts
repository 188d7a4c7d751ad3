// Client-side game state: a pure mirror of the server session.
// Every transition is driven by a server response; nothing is decided here.

import type {
  AnswerResponse,
  AnswerToken,
  CreateGameResponse,
  HistoryEntry,
  ResultSummary,
  SessionView,
} from "./api.js";
import { isGuess } from "./api.js";

export interface QA {
  questionIndex: number;
  questionText: string;
  answer: AnswerToken;
}

export interface CurrentQuestion {
  index: number;
  text: string;
  number: number;
}

export type GameState =
  | { phase: "idle" }
  | { phase: "error"; message: string }
  | {
      phase: "answering";
      sessionId: string;
      horizon: number;
      question: CurrentQuestion;
      history: QA[];
      busy: boolean;
    }
  | {
      phase: "guessed";
      sessionId: string;
      horizon: number;
      history: QA[];
      guess: string;
      busy: boolean;
    }
  | {
      phase: "done";
      sessionId: string;
      horizon: number;
      history: QA[];
      guess: string;
      won: boolean;
      reward: number;
    };

export const idleState: GameState = { phase: "idle" };

export function errorState(message: string): GameState {
  return { phase: "error", message };
}

export function fromCreate(response: CreateGameResponse): GameState {
  return {
    phase: "answering",
    sessionId: response.id,
    horizon: response.horizon,
    question: {
      index: response.question_index,
      text: response.question_text,
      number: response.question_number,
    },
    history: [],
    busy: false,
  };
}

export function applyAnswer(
  state: GameState,
  answered: AnswerToken,
  response: AnswerResponse,
): GameState {
  if (state.phase !== "answering") {
    return state;
  }
  const history: QA[] = [
    ...state.history,
    { questionIndex: state.question.index, questionText: state.question.text, answer: answered },
  ];
  if (isGuess(response)) {
    return {
      phase: "guessed",
      sessionId: state.sessionId,
      horizon: state.horizon,
      history,
      guess: response.guess,
      busy: false,
    };
  }
  return {
    phase: "answering",
    sessionId: state.sessionId,
    horizon: state.horizon,
    question: {
      index: response.question_index,
      text: response.question_text,
      number: response.question_number,
    },
    history,
    busy: false,
  };
}

export function applyResult(state: GameState, summary: ResultSummary): GameState {
  if (state.phase !== "guessed") {
    return state;
  }
  return {
    phase: "done",
    sessionId: state.sessionId,
    horizon: state.horizon,
    history: state.history,
    guess: state.guess,
    won: summary.won,
    reward: summary.reward,
  };
}

function toQA(entry: HistoryEntry): QA {
  return {
    questionIndex: entry.question_index,
    questionText: entry.question_text,
    answer: entry.answer,
  };
}

// Rebuild the whole client state from GET /games/{id}; this is what makes
// a mid-game page refresh safe.
export function fromSessionView(view: SessionView): GameState {
  const history = view.history.map(toQA);
  if (view.status === "awaiting_answer" && view.current_question) {
    return {
      phase: "answering",
      sessionId: view.id,
      horizon: view.horizon,
      question: {
        index: view.current_question.question_index,
        text: view.current_question.question_text,
        number: history.length + 1,
      },
      history,
      busy: false,
    };
  }
  if (view.status === "guessing" && view.guess !== null) {
    return {
      phase: "guessed",
      sessionId: view.id,
      horizon: view.horizon,
      history,
      guess: view.guess,
      busy: false,
    };
  }
  if (view.status === "finished" && view.guess !== null && view.won !== null) {
    return {
      phase: "done",
      sessionId: view.id,
      horizon: view.horizon,
      history,
      guess: view.guess,
      won: view.won,
      reward: view.won ? 30 : -30,
    };
  }
  return errorState(`unexpected session state ${view.status}`);
}

export function setBusy(state: GameState, busy: boolean): GameState {
  if (state.phase === "answering" || state.phase === "guessed") {
    return { ...state, busy };
  }
  return state;
}

export function isBusy(state: GameState): boolean {
  return (state.phase === "answering" || state.phase === "guessed") && state.busy;
}
