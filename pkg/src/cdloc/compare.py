"""Comparison of localizations of two kernel models, at a point or over a grid."""
from __future__ import annotations

import csv
import io
import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .kernels import KernelModel, jet_at
from .localization import InvariantSet, extract_invariants, normalize
from .multiindex import enumerate_indices
from .specht import (
    DEFAULT_MAX_WORDS,
    EquivalenceVerdict,
    MatrixTuple,
    Status,
    certificate_residual,
    closest_unitary,
    specht_test,
)

__all__ = [
    "CompareOptions",
    "PointResult",
    "ComparisonRequest",
    "ComparisonReport",
    "compare_localizations",
    "compare_via_metric",
    "invariant_tuple",
    "metric_tuple",
    "grid_points",
    "sweep",
]


@dataclass(frozen=True)
class CompareOptions:
    tol: float = 1e-8
    cert_tol: float = 1e-6
    word_bound: Optional[int] = None
    max_words: int = DEFAULT_MAX_WORDS
    seed: int = 0
    keep_invariants: bool = False


@dataclass
class PointResult:
    """Verdict at a single basepoint.

    ``distance`` is ``max ||U M_A U^* - M_B||_F`` over the tuple members, with
    ``U`` the certificate when one exists and a best-effort alignment otherwise.
    """

    z: np.ndarray
    k: int
    verdict: Optional[EquivalenceVerdict]
    distance: float = float("nan")
    invariants: Optional[tuple[InvariantSet, InvariantSet]] = None
    error: Optional[str] = None
    elapsed: float = 0.0
    index: int = 0

    @property
    def status(self) -> str:
        if self.error is not None:
            return "Error"
        return self.verdict.status.value


def _check_models(a: KernelModel, b: KernelModel):
    if a.m != b.m:
        raise ValueError(f"models live in C^{a.m} and C^{b.m}")
    if a.n != b.n:
        raise ValueError(f"rank mismatch: {a.n} vs {b.n}")


def _resolve_k(model: KernelModel, k: Optional[int]) -> int:
    k = model.n + 1 if k is None else int(k)
    if k < 2:
        raise ValueError(f"localization order must be >= 2, got {k}")
    return k


def invariant_tuple(model: KernelModel, z, k: int) -> tuple[MatrixTuple, InvariantSet]:
    jet, _ = normalize(jet_at(model, z, k - 1))
    inv = extract_invariants(jet, k)
    return MatrixTuple(np.array(inv.matrices()).reshape(-1, model.n, model.n), inv.labels()), inv


def metric_tuple(model: KernelModel, z, k: int) -> MatrixTuple:
    """Normalized ``D[I][J]`` for ``|I|, |J| <= k-1`` except ``(0, 0)``."""
    jet, _ = normalize(jet_at(model, z, k - 1))
    order = enumerate_indices(model.m, k - 1)
    mats, labels = [], []
    for s, I in enumerate(order):
        for t, J in enumerate(order):
            if s == 0 and t == 0:
                continue
            mats.append(jet.data[s, t])
            labels.append(f"H{list(I)}{list(J)}")
    return MatrixTuple(np.array(mats), tuple(labels))


def _decide(tA: MatrixTuple, tB: MatrixTuple, opts: CompareOptions) -> tuple[EquivalenceVerdict, float]:
    verdict = specht_test(
        tA, tB, tol=opts.tol, bound=opts.word_bound, cert_tol=opts.cert_tol,
        seed=opts.seed, max_words=opts.max_words,
    )
    U = verdict.certificate if verdict.certificate is not None else closest_unitary(tA, tB)
    return verdict, certificate_residual(tA, tB, U)


def compare_localizations(
    model_a: KernelModel,
    model_b: KernelModel,
    z,
    k: Optional[int] = None,
    opts: CompareOptions = CompareOptions(),
) -> PointResult:
    """Test whether the order-``k`` localizations of two models at ``z`` are unitarily equivalent.

    Both models are reduced to their invariant tuples ``{M^{IJ}}`` in normalized
    frames; the tuples are then compared with :func:`cdloc.specht.specht_test`.
    ``k`` defaults to ``n + 1``.
    """
    _check_models(model_a, model_b)
    k = _resolve_k(model_a, k)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    start = time.perf_counter()
    tA, invA = invariant_tuple(model_a, z, k)
    tB, invB = invariant_tuple(model_b, z, k)
    verdict, dist = _decide(tA, tB, opts)
    return PointResult(
        z, k, verdict, dist,
        invariants=(invA, invB) if opts.keep_invariants else None,
        elapsed=time.perf_counter() - start,
    )


def compare_via_metric(
    model_a: KernelModel,
    model_b: KernelModel,
    z,
    k: Optional[int] = None,
    opts: CompareOptions = CompareOptions(),
) -> PointResult:
    """Same question, answered on the normalized metric derivatives instead of the invariants."""
    _check_models(model_a, model_b)
    k = _resolve_k(model_a, k)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    start = time.perf_counter()
    verdict, dist = _decide(metric_tuple(model_a, z, k), metric_tuple(model_b, z, k), opts)
    return PointResult(z, k, verdict, dist, elapsed=time.perf_counter() - start)


def grid_points(axes: Sequence[Sequence[float]]) -> list[np.ndarray]:
    """Rectangular grid from ``(min, max, count)`` per real axis ``(Re z1, Im z1, Re z2, ...)``.

    Ordering is row-major over the axes as listed.
    """
    if len(axes) % 2:
        raise ValueError("grid needs a (min, max, count) triple for both Re and Im of every coordinate")
    ticks = []
    for lo, hi, count in axes:
        count = int(count)
        if count < 0:
            raise ValueError(f"negative grid count {count}")
        ticks.append(np.linspace(float(lo), float(hi), count) if count != 1 else np.array([float(lo)]))
    pts = []
    for combo in itertools.product(*ticks):
        pts.append(np.array(combo[0::2]) + 1j * np.array(combo[1::2]))
    return pts


@dataclass
class ComparisonRequest:
    model_a: KernelModel
    model_b: KernelModel
    points: list = field(default_factory=list)
    k: Optional[int] = None
    options: CompareOptions = CompareOptions()
    path: str = "localization"
    workers: int = 1

    def __post_init__(self):
        _check_models(self.model_a, self.model_b)
        if self.k is not None and int(self.k) < 2:
            raise ValueError(f"localization order must be >= 2, got {self.k}")
        if self.path not in ("localization", "metric"):
            raise ValueError(f"unknown comparison path {self.path!r}")
        pts = [np.atleast_1d(np.asarray(p, dtype=complex)) for p in self.points]
        for p in pts:
            if p.shape != (self.model_a.m,):
                raise ValueError(f"point {p.tolist()} is not in C^{self.model_a.m}")
            if not (self.model_a.contains(p) and self.model_b.contains(p)):
                raise ValueError(f"point {p.tolist()} is not interior to both domains")
        self.points = pts


def _run_point(args) -> PointResult:
    index, request, z = args
    fn = compare_localizations if request.path == "localization" else compare_via_metric
    k = _resolve_k(request.model_a, request.k)
    start = time.perf_counter()
    try:
        res = fn(request.model_a, request.model_b, z, k, request.options)
    except Exception as exc:  # recorded per point, the sweep goes on
        res = PointResult(z, k, None, error=f"{type(exc).__name__}: {exc}",
                          elapsed=time.perf_counter() - start)
    res.index = index
    return res


@dataclass
class ComparisonReport:
    request: ComparisonRequest
    records: list[PointResult]

    @property
    def counts(self) -> dict[str, int]:
        out = {s.value: 0 for s in Status}
        out["Error"] = 0
        for r in self.records:
            out[r.status] += 1
        return out

    @property
    def all_equivalent(self) -> bool:
        """True iff every sampled point is Equivalent (vacuously true for no points)."""
        return all(r.status == Status.EQUIVALENT.value for r in self.records)

    @property
    def first_inequivalent(self) -> Optional[PointResult]:
        for r in self.records:
            if r.status == Status.INEQUIVALENT.value:
                return r
        return None

    def summary(self) -> dict:
        first = self.first_inequivalent
        return {
            "all_equivalent": self.all_equivalent,
            "scope": "sampled",
            "points": len(self.records),
            "counts": self.counts,
            "first_inequivalent": None if first is None else {
                "index": first.index, "z": first.z,
            },
        }

    def to_text(self) -> str:
        lines = [
            f"path: {self.request.path}; points: {len(self.records)}",
        ]
        for r in self.records:
            z = ", ".join(f"{c.real:+.4f}{c.imag:+.4f}i" for c in r.z)
            tail = r.error if r.error else f"distance {r.distance:.3e}"
            if r.verdict is not None and r.verdict.witness_text:
                a, b = r.verdict.witness_values
                tail += f"; witness '{r.verdict.witness_text}': {a:.6g} vs {b:.6g}"
            lines.append(f"[{r.index:4d}] z=({z}) k={r.k} {r.status:<12} {tail}")
        c = self.counts
        verdict = "all equivalent" if self.all_equivalent else "NOT all equivalent"
        lines.append(
            f"summary (sampled points only): {verdict}; "
            + ", ".join(f"{key}={val}" for key, val in c.items())
        )
        return "\n".join(lines)

    def to_csv(self) -> str:
        """One row per point with the scalar distance, for external plotting."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        m = self.request.model_a.m
        header = ["index"]
        for i in range(m):
            header += [f"re_z{i + 1}", f"im_z{i + 1}"]
        w.writerow(header + ["k", "status", "distance"])
        for r in self.records:
            row = [r.index]
            for c in r.z:
                row += [repr(float(c.real)), repr(float(c.imag))]
            w.writerow(row + [r.k, r.status, repr(float(r.distance))])
        return buf.getvalue()


def sweep(request: ComparisonRequest) -> ComparisonReport:
    """Compare at every requested point; output order follows the point order."""
    tasks = [(i, request, z) for i, z in enumerate(request.points)]
    if request.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=request.workers) as pool:
            records = list(pool.map(_run_point, tasks))
    else:
        records = [_run_point(t) for t in tasks]
    return ComparisonReport(request, records)
