"""Joint unitary equivalence of finite matrix tuples.

Two routes are provided and cross-checked:

* trace words -- ``tr w(A, A^*)`` for words over the members and their
  adjoints is a joint unitary invariant; a mismatching word is a proof of
  inequivalence.
* certificates -- the space of ``S`` with ``S A = B S`` and ``S A^* = B^* S``
  is computed as a null space; the unitary polar factor of a generic element
  conjugates one tuple onto the other when they are equivalent.
"""
from __future__ import annotations

import enum
import string
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

__all__ = [
    "MatrixTuple",
    "TraceWord",
    "Status",
    "EquivalenceVerdict",
    "trace_word_value",
    "enumerate_words",
    "word_count",
    "sufficiency_bound",
    "specht_test",
    "find_certificate",
    "certificate_residual",
    "closest_unitary",
    "conjugate",
]

DEFAULT_MAX_WORDS = 20_000


def _default_labels(s: int) -> tuple[str, ...]:
    if s <= 26:
        return tuple(string.ascii_lowercase[:s])
    return tuple(f"x{i}" for i in range(s))


@dataclass(frozen=True, eq=False)
class MatrixTuple:
    """Ordered tuple of equally sized square complex matrices."""

    matrices: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        mats = np.asarray(self.matrices, dtype=complex)
        if mats.ndim == 2:
            mats = mats[None]
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError(f"expected a stack of square matrices, got shape {mats.shape}")
        labels = tuple(self.labels) or _default_labels(mats.shape[0])
        if len(labels) != mats.shape[0]:
            raise ValueError(f"{len(labels)} labels for {mats.shape[0]} matrices")
        if len(set(labels)) != len(labels):
            raise ValueError("member labels must be unique")
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "labels", labels)

    @property
    def p(self) -> int:
        return self.matrices.shape[1]

    @property
    def s(self) -> int:
        return self.matrices.shape[0]

    def __len__(self) -> int:
        return self.s

    def __getitem__(self, i) -> np.ndarray:
        return self.matrices[i]

    def letters(self) -> np.ndarray:
        """Stack ``[A_1, A_1^*, A_2, A_2^*, ...]``, the word alphabet."""
        adj = np.conj(np.swapaxes(self.matrices, 1, 2))
        return np.stack([self.matrices, adj], axis=1).reshape(2 * self.s, self.p, self.p)

    def norm_bound(self) -> float:
        if self.s == 0:
            return 0.0
        return float(max(np.linalg.norm(A, 2) for A in self.matrices))


def conjugate(t: MatrixTuple, V: np.ndarray) -> MatrixTuple:
    """``V A V^*`` for every member."""
    V = np.asarray(V, dtype=complex)
    return MatrixTuple(V @ t.matrices @ V.conj().T, t.labels)


@dataclass(frozen=True)
class TraceWord:
    """A word as a tuple of ``(member index, starred)`` letters."""

    letters: tuple[tuple[int, bool], ...]

    def __post_init__(self):
        if not self.letters:
            raise ValueError("trace words must be non-empty")
        object.__setattr__(self, "letters", tuple((int(i), bool(st)) for i, st in self.letters))

    def __len__(self) -> int:
        return len(self.letters)

    def render(self, labels: Sequence[str]) -> str:
        return " ".join(labels[i] + ("*" if st else "") for i, st in self.letters)

    @classmethod
    def parse(cls, text: str, labels: Sequence[str]) -> "TraceWord":
        """Inverse of :meth:`render`: ``"a a* b"``."""
        pos = {lab: i for i, lab in enumerate(labels)}
        letters = []
        for tok in text.split():
            star = tok.endswith("*")
            name = tok[:-1] if star else tok
            if name not in pos:
                raise ValueError(f"unknown member {name!r} in word {text!r}")
            letters.append((pos[name], star))
        return cls(tuple(letters))


def _decode(flat: int, length: int, alphabet: int) -> TraceWord:
    digits = []
    for _ in range(length):
        flat, r = divmod(flat, alphabet)
        digits.append(r)
    digits.reverse()
    return TraceWord(tuple((c // 2, bool(c % 2)) for c in digits))


def trace_word_value(t: MatrixTuple, w: TraceWord) -> complex:
    """``tr`` of the ordered product of the letters of ``w``."""
    prod = np.eye(t.p, dtype=complex)
    for i, star in w.letters:
        if not 0 <= i < t.s:
            raise ValueError(f"letter index {i} out of range for a {t.s}-tuple")
        A = t.matrices[i]
        prod = prod @ (A.conj().T if star else A)
    return complex(np.trace(prod))


def word_count(s: int, max_len: int) -> int:
    """Number of words of length ``1..max_len`` over ``s`` members and their adjoints."""
    return sum((2 * s) ** j for j in range(1, max_len + 1))


def enumerate_words(s: int, max_len: int) -> Iterator[TraceWord]:
    """All words by increasing length, lexicographic in ``[a, a*, b, b*, ...]`` within a length."""
    for length in range(1, max_len + 1):
        for flat in range((2 * s) ** length):
            yield _decode(flat, length, 2 * s)


def sufficiency_bound(p: int) -> int:
    """Default word length after which matching traces are accepted: ``2 p^2``."""
    return 2 * p * p


class Status(str, enum.Enum):
    EQUIVALENT = "Equivalent"
    INEQUIVALENT = "Inequivalent"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class EquivalenceVerdict:
    """Outcome of a joint unitary equivalence test.

    ``guarantee`` records why an Equivalent verdict was issued: ``"certificate"``
    (a unitary was found and verified) or ``"word-bound"`` (all words up to the
    configured sufficiency bound matched).
    """

    status: Status
    reason: str
    certificate: Optional[np.ndarray] = None
    residual: Optional[float] = None
    witness: Optional[TraceWord] = None
    witness_values: Optional[tuple[complex, complex]] = None
    witness_text: Optional[str] = None
    guarantee: Optional[str] = None
    max_len: int = 0
    words_checked: int = 0
    sufficiency_bound: int = 0

    @property
    def equivalent(self) -> bool:
        return self.status is Status.EQUIVALENT


def _check_pair(tA: MatrixTuple, tB: MatrixTuple):
    if tA.p != tB.p:
        raise ValueError(f"dimension mismatch: {tA.p} vs {tB.p}")
    if tA.s != tB.s:
        raise ValueError(f"tuple size mismatch: {tA.s} vs {tB.s}")


def certificate_residual(tA: MatrixTuple, tB: MatrixTuple, U: np.ndarray) -> float:
    """``max_alpha ||U A_alpha U^* - B_alpha||_F``."""
    if tA.s == 0:
        return 0.0
    diff = U @ tA.matrices @ U.conj().T - tB.matrices
    return float(np.max(np.linalg.norm(diff, axis=(1, 2))))


def _intertwiner_system(tA: MatrixTuple, tB: MatrixTuple) -> np.ndarray:
    # vec(S A) = (A^T kron I) vec(S), vec(B S) = (I kron B) vec(S), column-major vec
    p = tA.p
    eye = np.eye(p)
    rows = []
    for A, B in zip(tA.letters(), tB.letters()):
        rows.append(np.kron(A.T, eye) - np.kron(eye, B))
    if not rows:
        return np.zeros((0, p * p), dtype=complex)
    return np.vstack(rows)


def _polar(S: np.ndarray) -> tuple[np.ndarray, float]:
    W, sig, Vh = np.linalg.svd(S)
    ratio = sig[-1] / sig[0] if sig[0] > 0 else 0.0
    return W @ Vh, ratio


def find_certificate(
    tA: MatrixTuple,
    tB: MatrixTuple,
    tol: float = 1e-6,
    seed: int = 0,
    retries: int = 32,
) -> Optional[np.ndarray]:
    """Search for a unitary ``U`` with ``U A_alpha U^* = B_alpha`` for all members.

    Returns ``None`` when no candidate reaches residual ``tol`` within
    ``retries`` random draws from the intertwiner space.
    """
    _check_pair(tA, tB)
    p = tA.p
    if tA.s == 0:
        return np.eye(p, dtype=complex)
    M = _intertwiner_system(tA, tB)
    scale = max(1.0, float(np.max(np.abs(tA.matrices))), float(np.max(np.abs(tB.matrices))))
    _, sig, Vh = np.linalg.svd(M)
    sig = np.concatenate([sig, np.zeros(p * p - sig.size)])
    basis = Vh.conj().T[:, sig <= tol * scale]
    if basis.shape[1] == 0:
        return None
    rng = np.random.default_rng(seed)
    for _ in range(retries):
        c = rng.standard_normal(basis.shape[1]) + 1j * rng.standard_normal(basis.shape[1])
        S = (basis @ c).reshape(p, p, order="F")
        U, ratio = _polar(S)
        if ratio < 1e-12:
            continue
        if certificate_residual(tA, tB, U) <= tol:
            return U
    return None


def closest_unitary(tA: MatrixTuple, tB: MatrixTuple) -> np.ndarray:
    """Polar factor of the least-squares intertwiner; a best-effort alignment.

    Used for reporting distances when no certificate exists.
    """
    _check_pair(tA, tB)
    if tA.s == 0:
        return np.eye(tA.p, dtype=complex)
    _, _, Vh = np.linalg.svd(_intertwiner_system(tA, tB))
    S = Vh[-1].conj().reshape(tA.p, tA.p, order="F")
    return _polar(S)[0]


def _auto_max_len(s: int, bound: int, max_words: int) -> int:
    length = 0
    while length < bound and word_count(s, length + 1) <= max_words:
        length += 1
    return max(length, 1)


def specht_test(
    tA: MatrixTuple,
    tB: MatrixTuple,
    max_len: Optional[int] = None,
    tol: float = 1e-8,
    *,
    bound: Optional[int] = None,
    cert_tol: float = 1e-6,
    seed: int = 0,
    retries: int = 32,
    max_words: int = DEFAULT_MAX_WORDS,
) -> EquivalenceVerdict:
    """Decide joint unitary equivalence of two tuples.

    All words of length ``<= max_len`` are compared first; the first word whose
    traces differ by more than ``tol * c**len(w)`` (``c`` the larger operator
    norm bound, at least 1) gives Inequivalent.  If every word matched and
    ``max_len`` reached ``bound`` (default ``2 p^2``) the verdict is Equivalent
    on the word bound; otherwise a certificate is searched for.  A certificate
    is also attempted after a successful word pass so both routes cross-check.

    ``max_len=None`` picks the longest length whose word count fits in
    ``max_words``, capped at ``bound``.
    """
    _check_pair(tA, tB)
    p, s = tA.p, tA.s
    bound = sufficiency_bound(p) if bound is None else int(bound)
    if max_len is None:
        max_len = _auto_max_len(s, bound, max_words) if s else 0
    c = max(1.0, tA.norm_bound(), tB.norm_bound())
    common = dict(max_len=max_len, sufficiency_bound=bound)

    checked = 0
    if s:
        la, lb = tA.letters(), tB.letters()
        prevA = np.eye(p, dtype=complex)[None]
        prevB = prevA
        for length in range(1, max_len + 1):
            curA = (prevA[:, None] @ la[None]).reshape(-1, p, p)
            curB = (prevB[:, None] @ lb[None]).reshape(-1, p, p)
            trA = np.trace(curA, axis1=1, axis2=2)
            trB = np.trace(curB, axis1=1, axis2=2)
            bad = np.flatnonzero(np.abs(trA - trB) > tol * c ** length)
            if bad.size:
                flat = int(bad[0])
                w = _decode(flat, length, 2 * s)
                return EquivalenceVerdict(
                    Status.INEQUIVALENT,
                    reason=f"trace word of length {length} differs",
                    witness=w,
                    witness_values=(complex(trA[flat]), complex(trB[flat])),
                    witness_text=w.render(tA.labels),
                    words_checked=checked + flat + 1,
                    **common,
                )
            checked += trA.size
            prevA, prevB = curA, curB

    U = find_certificate(tA, tB, tol=cert_tol, seed=seed, retries=retries)
    residual = None if U is None else certificate_residual(tA, tB, U)
    words_sufficient = s == 0 or max_len >= bound
    if U is not None:
        how = "word bound reached and certificate found" if words_sufficient else "certificate found"
        return EquivalenceVerdict(
            Status.EQUIVALENT,
            reason=f"{how}; sufficiency bound {bound} is a configurable heuristic",
            certificate=U,
            residual=residual,
            guarantee="certificate",
            words_checked=checked,
            **common,
        )
    if words_sufficient:
        return EquivalenceVerdict(
            Status.EQUIVALENT,
            reason=(
                f"all {checked} words up to length {max_len} matched (bound {bound}); "
                "no certificate within the retry budget"
            ),
            guarantee="word-bound",
            words_checked=checked,
            **common,
        )
    return EquivalenceVerdict(
        Status.INCONCLUSIVE,
        reason=(
            f"all {checked} words up to length {max_len} matched but the bound is {bound}, "
            "and no certificate was found"
        ),
        words_checked=checked,
        **common,
    )
