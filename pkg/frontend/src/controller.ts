// Game flow controller: owns the state, talks to the client, and tells
// the view when to re-render.  The in-flight lock lives here, so a
// double-click can never produce a second request.

import { ApiError, type AnswerToken, type GameClient } from "./api.js";
import {
  applyAnswer,
  applyResult,
  errorState,
  fromCreate,
  fromSessionView,
  idleState,
  isBusy,
  setBusy,
  type GameState,
} from "./state.js";

export type StateListener = (state: GameState) => void;

export class GameController {
  private state: GameState = idleState;

  constructor(
    private readonly client: GameClient,
    private readonly onChange: StateListener,
  ) {}

  current(): GameState {
    return this.state;
  }

  private setState(next: GameState): void {
    this.state = next;
    this.onChange(next);
  }

  // Conflicting or stale responses mean the server moved on without us
  // (another tab, a retried request); its session view is authoritative.
  private async resync(sessionId: string): Promise<void> {
    try {
      this.setState(fromSessionView(await this.client.getGame(sessionId)));
    } catch (err) {
      this.setState(errorState(err instanceof Error ? err.message : String(err)));
    }
  }

  async startGame(): Promise<void> {
    try {
      this.setState(fromCreate(await this.client.createGame()));
    } catch (err) {
      this.setState(errorState(err instanceof Error ? err.message : String(err)));
    }
  }

  async refresh(sessionId: string): Promise<void> {
    await this.resync(sessionId);
  }

  async answerClick(answer: AnswerToken): Promise<void> {
    if (this.state.phase !== "answering" || isBusy(this.state)) {
      return;
    }
    const before = this.state;
    this.setState(setBusy(before, true));
    try {
      const response = await this.client.submitAnswer(before.sessionId, answer);
      this.setState(applyAnswer(setBusy(before, false), answer, response));
    } catch (err) {
      if (err instanceof ApiError && (err.status === 409 || err.status === 404)) {
        await this.resync(before.sessionId);
      } else {
        this.setState(errorState(err instanceof Error ? err.message : String(err)));
      }
    }
  }

  async confirmResult(correct: boolean): Promise<void> {
    if (this.state.phase !== "guessed" || isBusy(this.state)) {
      return;
    }
    const before = this.state;
    this.setState(setBusy(before, true));
    try {
      const summary = await this.client.submitResult(before.sessionId, correct);
      this.setState(applyResult(setBusy(before, false), summary));
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        await this.resync(before.sessionId);
      } else {
        this.setState(errorState(err instanceof Error ? err.message : String(err)));
      }
    }
  }
}
