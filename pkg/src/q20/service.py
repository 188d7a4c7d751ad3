"""Live-play game server: sessions for human answerers over HTTP/JSON.

``GameService`` holds the game logic free of any HTTP machinery: sessions
live in memory with a TTL, each session serializes its own operations
with a lock, and finished games are appended to a transcript log.  The
KB and policy snapshot are shared read-only and can be hot-swapped
atomically.  ``serve`` wraps the service in a threading HTTP server that
also serves the static web UI when given a directory.
"""

from __future__ import annotations

import json
import mimetypes
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from . import nn
from .engine import (
    DEFAULT_HORIZON,
    TRANSCRIPT_HEADER,
    Answer,
    EpisodeRecord,
    EpisodeStep,
    format_transcript,
    make_guess,
    terminal_reward,
    update_belief,
)
from .kb import KnowledgeBase, initial_belief

DEFAULT_TTL_SECONDS = 30 * 60


class ServiceError(Exception):
    """Client-visible error with an HTTP status and a stable code."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message

    def payload(self) -> dict:
        return {"code": self.code, "message": self.message}


def _unknown_session(session_id: str) -> ServiceError:
    return ServiceError(404, "unknown_session", f"no session {session_id!r}")


@dataclass
class GameSession:
    id: str
    kb: KnowledgeBase
    policy: nn.MlpParams
    policy_mode: str
    horizon: int
    belief: np.ndarray
    asked: np.ndarray
    rng: np.random.Generator
    created_at: float
    status: str = "awaiting_answer"
    steps: list[EpisodeStep] = field(default_factory=list)
    current_question: int | None = None
    guess: int | None = None
    won: bool | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class GameService:
    """Session manager for live games; thread-safe, no persistence beyond the log."""

    def __init__(
        self,
        kb: KnowledgeBase | None = None,
        policy: nn.MlpParams | None = None,
        *,
        policy_mode: str = "greedy",
        horizon: int = DEFAULT_HORIZON,
        s0_mode: str = "uniform",
        ttl_seconds: float = DEFAULT_TTL_SECONDS,
        transcript_path=None,
        debug: bool = False,
        seed: int = 0,
        clock=time.monotonic,
    ):
        if policy_mode not in ("greedy", "sample"):
            raise ValueError(f"unknown policy mode {policy_mode!r}")
        self._model = (kb, policy) if kb is not None and policy is not None else None
        self.policy_mode = policy_mode
        self.horizon = horizon
        self.s0_mode = s0_mode
        self.ttl_seconds = ttl_seconds
        self.transcript_path = Path(transcript_path) if transcript_path else None
        self.debug = debug
        self.seed = seed
        self._clock = clock
        self._sessions: dict[str, GameSession] = {}
        self._lock = threading.Lock()
        self._counter = 0
        self._log_lock = threading.Lock()

    # -- model management ------------------------------------------------

    def load_model(self, kb: KnowledgeBase, policy: nn.MlpParams) -> None:
        """Atomically replace the shared (kb, policy) snapshot."""
        if policy.n_in != kb.n_objects or policy.n_out != kb.n_questions:
            raise ValueError("policy dimensions do not match the knowledge base")
        self._model = (kb, policy)

    @property
    def model_loaded(self) -> bool:
        return self._model is not None

    def session_count(self) -> int:
        with self._lock:
            return len(self._sessions)

    # -- session plumbing --------------------------------------------------

    def _select(self, session: GameSession) -> int:
        from .agents import select_action

        mode = session.policy_mode
        return select_action(session.policy, session.belief, session.asked, mode, session.rng)

    def _purge_expired(self, now: float) -> None:
        dead = [sid for sid, s in self._sessions.items() if now - s.created_at > self.ttl_seconds]
        for sid in dead:
            del self._sessions[sid]

    def _get(self, session_id: str) -> GameSession:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None or self._clock() - session.created_at > self.ttl_seconds:
                self._sessions.pop(session_id, None)
                raise _unknown_session(session_id)
            return session

    # -- operations --------------------------------------------------------

    def create_session(self, policy_mode: str | None = None) -> dict:
        model = self._model
        if model is None:
            raise ServiceError(503, "no_model", "no knowledge base / policy checkpoint loaded")
        kb, policy = model
        mode = policy_mode or self.policy_mode
        if mode not in ("greedy", "sample"):
            raise ServiceError(400, "invalid_mode", f"unknown policy mode {mode!r}")
        now = self._clock()
        with self._lock:
            self._purge_expired(now)
            self._counter += 1
            rng = np.random.default_rng([self.seed, self._counter])
            session = GameSession(
                id=uuid.uuid4().hex,
                kb=kb,
                policy=policy,
                policy_mode=mode,
                horizon=self.horizon,
                belief=initial_belief(kb, self.s0_mode),
                asked=np.zeros(kb.n_questions, dtype=bool),
                rng=rng,
                created_at=now,
            )
            self._sessions[session.id] = session
        with session.lock:
            q = self._select(session)
            session.asked[q] = True
            session.current_question = q
            return {
                "id": session.id,
                "question_index": q,
                "question_text": kb.questions[q],
                "question_number": 1,
                "horizon": session.horizon,
            }

    def submit_answer(self, session_id: str, answer_token) -> dict:
        session = self._get(session_id)
        try:
            answer = Answer.parse(answer_token)
        except ValueError:
            raise ServiceError(400, "invalid_answer", f"not an answer token: {answer_token!r}") from None
        with session.lock:
            if session.status != "awaiting_answer":
                raise ServiceError(
                    409, "conflict", f"session is {session.status}, not awaiting an answer"
                )
            q = session.current_question
            session.steps.append(EpisodeStep(state=session.belief, action=q, answer=answer))
            session.belief = update_belief(session.belief, q, answer, session.kb)
            if len(session.steps) >= session.horizon:
                session.current_question = None
                session.guess = make_guess(session.belief)
                session.status = "guessing"
                return {
                    "guess": session.kb.objects[session.guess],
                    "guess_index": session.guess,
                    "status": "guessing",
                }
            nxt = self._select(session)
            session.asked[nxt] = True
            session.current_question = nxt
            return {
                "question_index": nxt,
                "question_text": session.kb.questions[nxt],
                "question_number": len(session.steps) + 1,
            }

    def submit_result(self, session_id: str, correct) -> dict:
        if not isinstance(correct, bool):
            raise ServiceError(400, "invalid_result", "body must carry a boolean 'correct' field")
        session = self._get(session_id)
        with session.lock:
            if session.status == "finished":
                raise ServiceError(409, "conflict", "result already submitted")
            if session.status != "guessing":
                raise ServiceError(409, "conflict", "the game has not reached a guess yet")
            session.won = correct
            session.status = "finished"
            record = EpisodeRecord(
                steps=session.steps,
                guess=session.guess,
                won=correct,
                terminal_reward=terminal_reward(correct),
                final_belief=session.belief,
                horizon=len(session.steps),
                target=None,
            )
            self._log_transcript(record, session.kb)
            return {
                "status": "finished",
                "won": correct,
                "reward": record.terminal_reward,
                "questions_asked": len(session.steps),
            }

    def get_session(self, session_id: str) -> dict:
        """Read-only snapshot; beliefs stay hidden unless the server runs in debug."""
        session = self._get(session_id)
        with session.lock:
            view = {
                "id": session.id,
                "status": session.status,
                "policy_mode": session.policy_mode,
                "horizon": session.horizon,
                "history": [
                    {
                        "question_index": step.action,
                        "question_text": session.kb.questions[step.action],
                        "answer": step.answer.value,
                    }
                    for step in session.steps
                ],
                "current_question": None
                if session.current_question is None
                else {
                    "question_index": session.current_question,
                    "question_text": session.kb.questions[session.current_question],
                },
                "guess": None if session.guess is None else session.kb.objects[session.guess],
                "guess_index": session.guess,
                "won": session.won,
            }
            if self.debug:
                top = np.argsort(session.belief)[::-1][:5]
                view["beliefs"] = [
                    {"object": session.kb.objects[int(i)], "p": float(session.belief[i])} for i in top
                ]
            return view

    def _log_transcript(self, record: EpisodeRecord, kb: KnowledgeBase) -> None:
        if self.transcript_path is None:
            return
        with self._log_lock:
            new_file = not self.transcript_path.exists()
            with self.transcript_path.open("a", encoding="utf-8") as fh:
                if new_file:
                    fh.write(TRANSCRIPT_HEADER + "\n\n")
                fh.write(format_transcript(record, kb) + "\n")


# -- HTTP layer -------------------------------------------------------------

_GAME_PATH = re.compile(r"^/games/([0-9a-f]{32})$")
_ANSWER_PATH = re.compile(r"^/games/([0-9a-f]{32})/answer$")
_RESULT_PATH = re.compile(r"^/games/([0-9a-f]{32})/result$")


def _make_handler(service: GameService, static_dir: Path | None, quiet: bool):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            if not quiet:
                super().log_message(fmt, *args)

        def _send_json(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _read_json(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if not raw:
                return {}
            try:
                payload = json.loads(raw.decode("utf-8"))
            except (ValueError, UnicodeDecodeError):
                raise ServiceError(400, "bad_json", "request body is not valid JSON") from None
            if not isinstance(payload, dict):
                raise ServiceError(400, "bad_json", "request body must be a JSON object")
            return payload

        def _serve_static(self, path: str) -> bool:
            if static_dir is None:
                return False
            rel = "index.html" if path in ("/", "") else path.lstrip("/")
            root = static_dir.resolve()
            target = (root / rel).resolve()
            if root not in target.parents and target != root:
                return False
            if not target.is_file():
                return False
            body = target.read_bytes()
            ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
            return True

        def do_GET(self):
            try:
                if self.path == "/healthz":
                    self._send_json(
                        200,
                        {
                            "status": "ok",
                            "model_loaded": service.model_loaded,
                            "sessions": service.session_count(),
                        },
                    )
                    return
                match = _GAME_PATH.match(self.path)
                if match:
                    self._send_json(200, service.get_session(match.group(1)))
                    return
                if self._serve_static(self.path):
                    return
                self._send_json(404, {"code": "not_found", "message": f"no route {self.path}"})
            except ServiceError as err:
                self._send_json(err.status, err.payload())

        def do_POST(self):
            try:
                if self.path == "/games":
                    body = self._read_json()
                    self._send_json(201, service.create_session(body.get("policy_mode")))
                    return
                match = _ANSWER_PATH.match(self.path)
                if match:
                    body = self._read_json()
                    if "answer" not in body:
                        raise ServiceError(400, "invalid_answer", "body needs an 'answer' field")
                    self._send_json(200, service.submit_answer(match.group(1), body["answer"]))
                    return
                match = _RESULT_PATH.match(self.path)
                if match:
                    body = self._read_json()
                    if "correct" not in body:
                        raise ServiceError(400, "invalid_result", "body needs a 'correct' field")
                    self._send_json(200, service.submit_result(match.group(1), body["correct"]))
                    return
                self._send_json(404, {"code": "not_found", "message": f"no route {self.path}"})
            except ServiceError as err:
                self._send_json(err.status, err.payload())

    return Handler


def make_server(
    service: GameService,
    addr: tuple[str, int] = ("127.0.0.1", 0),
    *,
    static_dir=None,
    quiet: bool = True,
) -> ThreadingHTTPServer:
    """Build (but do not start) the threading HTTP server for a service."""
    static = Path(static_dir) if static_dir else None
    handler = _make_handler(service, static, quiet)
    server = ThreadingHTTPServer(addr, handler)
    server.daemon_threads = True
    return server
