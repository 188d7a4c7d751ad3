"""Objects, questions, answer counts, and the smoothed answer model.

A knowledge base holds, for every (object, question) pair, raw counts of
"yes" / "no" / "unknown" answers.  Smoothing turns the counts into three
probability matrices R (yes), W (no) and U (unknown) that drive both the
belief updates and the simulated answerer.  Counts are the source of
truth: the matrices are always rederived from them, never stored.

Instances are immutable by convention once constructed and safe to share
between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Column layout of the counts grid along axis 2.
YES_IDX, NO_IDX, UNK_IDX = 0, 1, 2

_POP_BASE = 10_000.0


class KbError(ValueError):
    """Invalid knowledge-base data."""


class KbFormatError(KbError):
    """A KB file that does not follow the q20kb v1 line format."""


class DuplicateLabelError(KbError):
    """Two objects (or two questions) share the same label."""


class NegativeCountError(KbError):
    """An answer count or popularity count is negative."""


class GridShapeError(KbError):
    """Counts refer to objects or questions that do not exist."""


class InvalidPriorError(KbError):
    """The popularity prior was requested but every popularity count is zero."""


def derive_answer_model(counts, delta: float = 1.0, lam: float = 3.0):
    """Smooth raw answer counts into the (R, W, U) probability matrices.

    R and W are the smoothed probabilities of hearing "yes" and "no" for
    each (object, question) pair; U is their complement.  With the default
    delta=1, lam=3 this is exactly add-one smoothing of the three-way
    answer frequency.  ``lam >= 2 * delta`` keeps U nonnegative.
    """
    counts = np.asarray(counts, dtype=np.float64)
    if counts.ndim != 3 or counts.shape[-1] != 3:
        raise GridShapeError(f"counts grid must have shape (n, m, 3), got {counts.shape}")
    if delta <= 0:
        raise KbError(f"smoothing delta must be positive, got {delta}")
    if lam < 2 * delta:
        raise KbError(
            "smoothing lambda must be >= 2*delta to keep the unknown "
            f"probability nonnegative, got lambda={lam}, delta={delta}"
        )
    if (counts < 0).any():
        i, j, _ = np.argwhere(counts < 0)[0]
        raise NegativeCountError(f"negative count at object {i}, question {j}")
    total = counts.sum(axis=-1) + lam
    r = (counts[..., YES_IDX] + delta) / total
    w = (counts[..., NO_IDX] + delta) / total
    # Complement; the clamp only removes float dust in the lam == 2*delta corner.
    u = np.maximum(1.0 - r - w, 0.0)
    return r, w, u


def _check_label(kind: str, index: int, text: str) -> None:
    if not text:
        raise KbError(f"{kind} {index} has an empty label")
    if "\t" in text or "\n" in text or "\r" in text:
        raise KbError(f"{kind} {index} label may not contain tabs or newlines")


@dataclass(eq=False)
class KnowledgeBase:
    """The object/question universe plus its derived answer model.

    ``counts`` is an (n, m, 3) integer grid of yes/no/unknown answer
    frequencies; ``popularity`` is a per-object nonnegative count used for
    the popularity prior.  The derived matrices ``R``, ``W``, ``U`` are
    computed at construction time.
    """

    objects: list[str]
    questions: list[str]
    counts: np.ndarray
    popularity: np.ndarray
    delta: float = 1.0
    lam: float = 3.0

    def __post_init__(self):
        self.objects = [str(o) for o in self.objects]
        self.questions = [str(q) for q in self.questions]
        n, m = len(self.objects), len(self.questions)
        if n < 2:
            raise KbError(f"need at least two objects, got {n}")
        if m < 1:
            raise KbError("need at least one question")
        if len(set(self.objects)) != n:
            raise DuplicateLabelError("duplicate object label")
        if len(set(self.questions)) != m:
            raise DuplicateLabelError("duplicate question text")
        for i, label in enumerate(self.objects):
            _check_label("object", i, label)
        for j, text in enumerate(self.questions):
            _check_label("question", j, text)
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (n, m, 3):
            raise GridShapeError(f"counts shape {counts.shape} does not match {(n, m, 3)}")
        popularity = np.asarray(self.popularity, dtype=np.int64)
        if popularity.shape != (n,):
            raise GridShapeError(f"popularity shape {popularity.shape} does not match ({n},)")
        if (popularity < 0).any():
            raise NegativeCountError(f"negative popularity for object {int(np.argwhere(popularity < 0)[0][0])}")
        self.counts = counts
        self.popularity = popularity
        self.delta = float(self.delta)
        self.lam = float(self.lam)
        self.R, self.W, self.U = derive_answer_model(counts, self.delta, self.lam)

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def n_questions(self) -> int:
        return len(self.questions)

    def equals(self, other: "KnowledgeBase") -> bool:
        return (
            self.objects == other.objects
            and self.questions == other.questions
            and np.array_equal(self.counts, other.counts)
            and np.array_equal(self.popularity, other.popularity)
            and self.delta == other.delta
            and self.lam == other.lam
        )

    def verify_integrity(self, atol: float = 1e-9) -> None:
        """Recompute the answer model from counts and compare with the stored one."""
        r, w, u = derive_answer_model(self.counts, self.delta, self.lam)
        drift = max(
            float(np.abs(self.R - r).max()),
            float(np.abs(self.W - w).max()),
            float(np.abs(self.U - u).max()),
        )
        if drift > atol:
            raise KbError(f"stored answer model drifts from counts by {drift:g}")


def initial_belief(kb: KnowledgeBase, mode: str = "uniform") -> np.ndarray:
    """Initial belief over objects: uniform, or proportional to popularity."""
    n = kb.n_objects
    if mode == "uniform":
        return np.full(n, 1.0 / n)
    if mode == "popularity":
        total = int(kb.popularity.sum())
        if total <= 0:
            raise InvalidPriorError("popularity prior needs at least one nonzero popularity count")
        return kb.popularity / total
    raise ValueError(f"unknown initial-belief mode {mode!r}")


def generate_synthetic_kb(
    n_objects: int,
    n_questions: int,
    n_code_questions: int,
    count_scale: int = 1000,
    answer_ambiguity: float = 0.0,
    seed: int = 0,
    *,
    zipf_exponent: float = 1.0,
    delta: float = 1.0,
    lam: float = 3.0,
) -> KnowledgeBase:
    """Build a seeded synthetic KB whose first questions binary-code the objects.

    Code question j asks whether bit j of the object index is set, so the
    code block deterministically identifies every object under the
    argmax answer rule.  ``answer_ambiguity`` blurs the counts: code
    questions keep a 1-ambiguity majority on the designated answer, and
    each filler question mixes a shared per-question answer profile with
    a per-object random one.  At ambiguity 0 the filler questions have
    identical columns for every object, so only the code questions
    discriminate.  Popularity follows a seeded Zipf-like curve.

    The same seed reproduces the same KB bit for bit.
    """
    if n_objects < 2:
        raise KbError(f"need at least two objects, got {n_objects}")
    if not 0 <= n_code_questions <= n_questions:
        raise KbError(
            f"n_code_questions must lie in [0, n_questions], got {n_code_questions} of {n_questions}"
        )
    if n_code_questions > 0 and 2**n_code_questions < n_objects:
        raise KbError(
            f"{n_code_questions} code questions cannot give {n_objects} objects distinct codes"
        )
    if count_scale < 1:
        raise KbError(f"count_scale must be >= 1, got {count_scale}")
    if not 0.0 <= answer_ambiguity < 0.5:
        raise KbError(f"answer_ambiguity must lie in [0, 0.5), got {answer_ambiguity}")

    rng = np.random.default_rng(seed)
    n, m, k = n_objects, n_questions, n_code_questions
    counts = np.zeros((n, m, 3), dtype=np.int64)

    on = int(round(count_scale * (1.0 - answer_ambiguity)))
    off = int(round(count_scale * answer_ambiguity / 2.0))
    idx = np.arange(n)
    for j in range(k):
        bit = (idx >> j) & 1
        counts[:, j, YES_IDX] = np.where(bit == 1, on, off)
        counts[:, j, NO_IDX] = np.where(bit == 1, off, on)
        counts[:, j, UNK_IDX] = off

    if m > k:
        base = rng.dirichlet((2.0, 2.0, 1.0), size=m - k)
        blur = rng.dirichlet((1.0, 1.0, 1.0), size=(n, m - k))
        mix = (1.0 - answer_ambiguity) * base[None, :, :] + answer_ambiguity * blur
        counts[:, k:, :] = np.rint(count_scale * mix).astype(np.int64)

    ranks = rng.permutation(n) + 1
    popularity = np.maximum(
        1, np.rint(_POP_BASE / ranks.astype(np.float64) ** zipf_exponent)
    ).astype(np.int64)

    objects = [f"object-{i:03d}" for i in range(n)]
    questions = [f"Is bit {j} of the object code set?" for j in range(k)]
    questions += [f"Does the object have trait {t:02d}?" for t in range(m - k)]

    kb = KnowledgeBase(objects, questions, counts, popularity, delta=delta, lam=lam)

    if k:
        bits = ((idx[:, None] >> np.arange(k)[None, :]) & 1).astype(bool)
        winner = np.argmax(np.stack([kb.R[:, :k], kb.W[:, :k], kb.U[:, :k]]), axis=0)
        expected = np.where(bits, YES_IDX, NO_IDX)
        if not (winner == expected).all():
            raise KbError("ambiguity too high: code answers are no longer deterministic")
    return kb


def save_kb(kb: KnowledgeBase, path) -> None:
    """Write a KB in the q20kb v1 line format (counts only, zero pairs omitted)."""
    lines = [f"q20kb v1 n={kb.n_objects} m={kb.n_questions} delta={kb.delta!r} lambda={kb.lam!r}"]
    for i, label in enumerate(kb.objects):
        lines.append(f"object\t{i}\t{int(kb.popularity[i])}\t{label}")
    for j, text in enumerate(kb.questions):
        lines.append(f"question\t{j}\t{text}")
    for i, j in np.argwhere(kb.counts.sum(axis=2) > 0):
        y, no, u = (int(v) for v in kb.counts[i, j])
        lines.append(f"count\t{i}\t{j}\t{y}\t{no}\t{u}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise KbFormatError(f"line {lineno}: expected an integer, got {token!r}") from None


def load_kb(path) -> KnowledgeBase:
    """Parse a q20kb v1 file; the answer model is rederived and checked on load."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise KbFormatError("empty KB file")
    head = lines[0].split()
    if len(head) != 6 or head[0] != "q20kb" or head[1] != "v1":
        raise KbFormatError(f"bad header: {lines[0]!r}")
    fields = {}
    for token in head[2:]:
        key, sep, value = token.partition("=")
        if not sep:
            raise KbFormatError(f"bad header field {token!r}")
        fields[key] = value
    if sorted(fields) != ["delta", "lambda", "m", "n"]:
        raise KbFormatError(f"bad header fields: {lines[0]!r}")
    try:
        n, m = int(fields["n"]), int(fields["m"])
        delta, lam = float(fields["delta"]), float(fields["lambda"])
    except ValueError:
        raise KbFormatError(f"bad header value in {lines[0]!r}") from None
    if n < 2 or m < 1:
        raise KbFormatError(f"header sizes out of range: n={n}, m={m}")

    objects: list = [None] * n
    questions: list = [None] * m
    popularity = np.zeros(n, dtype=np.int64)
    counts = np.zeros((n, m, 3), dtype=np.int64)
    seen_count = np.zeros((n, m), dtype=bool)

    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split("\t")
        tag = parts[0]
        if tag == "object":
            if len(parts) != 4:
                raise KbFormatError(f"line {lineno}: object record needs 4 tab-separated fields")
            i = _parse_int(parts[1], lineno)
            pop = _parse_int(parts[2], lineno)
            if not 0 <= i < n:
                raise GridShapeError(f"line {lineno}: object index {i} out of range for n={n}")
            if objects[i] is not None:
                raise KbFormatError(f"line {lineno}: object {i} defined twice")
            if pop < 0:
                raise NegativeCountError(f"line {lineno}: negative popularity for object {i}")
            objects[i] = parts[3]
            popularity[i] = pop
        elif tag == "question":
            if len(parts) != 3:
                raise KbFormatError(f"line {lineno}: question record needs 3 tab-separated fields")
            j = _parse_int(parts[1], lineno)
            if not 0 <= j < m:
                raise GridShapeError(f"line {lineno}: question index {j} out of range for m={m}")
            if questions[j] is not None:
                raise KbFormatError(f"line {lineno}: question {j} defined twice")
            questions[j] = parts[2]
        elif tag == "count":
            if len(parts) != 6:
                raise KbFormatError(f"line {lineno}: count record needs 6 tab-separated fields")
            i = _parse_int(parts[1], lineno)
            j = _parse_int(parts[2], lineno)
            triple = [_parse_int(p, lineno) for p in parts[3:6]]
            if not 0 <= i < n or not 0 <= j < m:
                raise GridShapeError(f"line {lineno}: count pair ({i}, {j}) out of range")
            if any(c < 0 for c in triple):
                raise NegativeCountError(f"line {lineno}: negative count at object {i}, question {j}")
            if seen_count[i, j]:
                raise KbFormatError(f"line {lineno}: count for pair ({i}, {j}) defined twice")
            seen_count[i, j] = True
            counts[i, j] = triple
        else:
            raise KbFormatError(f"line {lineno}: unknown record type {tag!r}")

    missing_obj = [i for i, o in enumerate(objects) if o is None]
    if missing_obj:
        raise KbFormatError(f"object {missing_obj[0]} missing from file")
    missing_q = [j for j, q in enumerate(questions) if q is None]
    if missing_q:
        raise KbFormatError(f"question {missing_q[0]} missing from file")

    kb = KnowledgeBase(objects, questions, counts, popularity, delta=delta, lam=lam)
    kb.verify_integrity()
    return kb
