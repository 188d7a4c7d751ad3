// DOM wiring for the answerer UI: one render function over GameState,
// three answer buttons, a guess screen, and a summary with replay.

import { GameClient, type AnswerToken } from "./api.js";
import { GameController } from "./controller.js";
import type { GameState } from "./state.js";

declare global {
  interface Window {
    Q20_BASE_URL?: string;
  }
}

const client = new GameClient(window.Q20_BASE_URL ?? "");
const controller = new GameController(client, render);

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function historyPanel(history: { questionText: string; answer: string }[]): HTMLElement {
  const panel = el("div", "history");
  for (const [i, qa] of history.entries()) {
    const row = el("div", "history-row");
    row.appendChild(el("span", "history-q", `${i + 1}. ${qa.questionText}`));
    row.appendChild(el("span", `history-a answer-${qa.answer}`, qa.answer));
    panel.appendChild(row);
  }
  return panel;
}

function render(state: GameState): void {
  const root = document.getElementById("app");
  if (!root) return;
  root.replaceChildren();

  switch (state.phase) {
    case "idle": {
      root.appendChild(el("h1", "title", "20 Questions"));
      root.appendChild(
        el("p", "hint", "Think of an object. I will ask questions and try to guess it."),
      );
      const start = el("button", "primary", "Start game");
      start.addEventListener("click", () => void controller.startGame());
      root.appendChild(start);
      break;
    }
    case "error": {
      root.appendChild(el("h1", "title", "20 Questions"));
      root.appendChild(el("div", "banner", state.message));
      const retry = el("button", "primary", "Retry");
      retry.addEventListener("click", () => void controller.startGame());
      root.appendChild(retry);
      break;
    }
    case "answering": {
      root.appendChild(
        el("div", "counter", `Question ${state.question.number} of ${state.horizon}`),
      );
      root.appendChild(el("h2", "question", state.question.text));
      const buttons = el("div", "answers");
      for (const token of ["yes", "no", "unknown"] as AnswerToken[]) {
        const button = el("button", `answer answer-${token}`, token);
        button.disabled = state.busy;
        button.addEventListener("click", () => void controller.answerClick(token));
        buttons.appendChild(button);
      }
      root.appendChild(buttons);
      root.appendChild(historyPanel(state.history));
      break;
    }
    case "guessed": {
      root.appendChild(el("div", "counter", "My guess"));
      root.appendChild(el("h2", "question", state.guess));
      const buttons = el("div", "answers");
      const right = el("button", "answer answer-yes", "Correct");
      const wrong = el("button", "answer answer-no", "Wrong");
      right.disabled = wrong.disabled = state.busy;
      right.addEventListener("click", () => void controller.confirmResult(true));
      wrong.addEventListener("click", () => void controller.confirmResult(false));
      buttons.appendChild(right);
      buttons.appendChild(wrong);
      root.appendChild(buttons);
      root.appendChild(historyPanel(state.history));
      break;
    }
    case "done": {
      root.appendChild(el("h1", "title", state.won ? "Got it!" : "You win!"));
      root.appendChild(
        el(
          "p",
          "hint",
          `I guessed "${state.guess}" after ${state.history.length} questions ` +
            `(reward ${state.reward > 0 ? "+" : ""}${state.reward}).`,
        ),
      );
      const again = el("button", "primary", "Play again");
      again.addEventListener("click", () => void controller.startGame());
      root.appendChild(again);
      root.appendChild(historyPanel(state.history));
      break;
    }
  }
}

render(controller.current());
