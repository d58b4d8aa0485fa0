"""Reproducing-kernel models and exact/quadrature jet extraction.

A model stands for the adjoint of the coordinate multiplication tuple on a
space of holomorphic functions; the only thing the rest of the package ever
needs from it is the Gram kernel ``K(z, w)`` of a holomorphic frame and the
mixed derivatives of that kernel at a point.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Callable, Mapping, Optional, Union

import numpy as np
from scipy.linalg import block_diag

from .jets import HoloJet, MatrixJet2, constant_jet, sandwich
from .multiindex import enumerate_indices, factorial, falling

__all__ = [
    "DomainError",
    "KernelModel",
    "ProductPolydisc",
    "BallKernel",
    "PowerSeries",
    "DirectSum",
    "ConjugateBy",
    "Scale",
    "CallableKernel",
    "jet_at",
    "jet_at_numeric",
    "transform",
    "conjugate_by",
    "scale",
    "direct_sum",
    "szego",
    "bergman",
    "catalog",
]


class DomainError(ValueError):
    """Basepoint outside the domain of a model."""


def _point(z0, m: int) -> np.ndarray:
    z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
    if z0.shape != (m,):
        raise ValueError(f"expected a point in C^{m}, got shape {z0.shape}")
    return z0


def _rising(x: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= x + j
    return out


class KernelModel:
    """Base class; concrete variants are the dataclasses below."""

    m: int
    n: int

    def jet(self, z0: np.ndarray, d: int) -> MatrixJet2:
        raise NotImplementedError

    def evaluate(self, z, w) -> np.ndarray:
        """``K(z, w)`` for arrays of shape ``(..., m)``; returns ``(..., n, n)``."""
        raise NotImplementedError

    def boundary_distance(self, z0: np.ndarray) -> float:
        """Largest polyradius ``r`` such that ``K`` is regular for ``z, w`` within ``r`` of ``z0``.

        Non-positive means ``z0`` is not in the domain; ``inf`` for entire kernels.
        """
        raise NotImplementedError

    def contains(self, z0) -> bool:
        return self.boundary_distance(_point(z0, self.m)) > 0


@dataclass(frozen=True)
class ProductPolydisc(KernelModel):
    """``K(z, w) = prod_i (1 - z_i conj(w_i))^(-weights[i])`` on the unit polydisc.

    ``weights=(1,)`` is the Hardy/Szego kernel, ``(2,)`` the Bergman kernel.
    """

    weights: tuple

    def __post_init__(self):
        w = tuple(float(x) for x in np.atleast_1d(self.weights))
        if not w or any(x <= 0 for x in w):
            raise ValueError(f"weights must be positive, got {w}")
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return len(self.weights)

    @property
    def n(self) -> int:
        return 1

    def boundary_distance(self, z0):
        return float(np.min(1.0 - np.abs(z0)))

    def evaluate(self, z, w):
        z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
        val = np.prod((1.0 - z * np.conj(w)) ** (-np.array(self.weights)), axis=-1)
        return val[..., None, None]

    def jet(self, z0, d):
        order = enumerate_indices(self.m, d)
        tables = [_one_variable_derivatives(lam, x0, d) for lam, x0 in zip(self.weights, z0)]
        L = len(order)
        data = np.ones((L, L), dtype=complex)
        for s, I in enumerate(order):
            for t, J in enumerate(order):
                for T, a, b in zip(tables, I, J):
                    data[s, t] *= T[a, b]
        return MatrixJet2(self.m, 1, d, z0, data[:, :, None, None])


def _one_variable_derivatives(lam: float, x0: complex, d: int) -> np.ndarray:
    """``T[a, b] = d_x^a d_y^b (1 - x y)^(-lam)`` at ``x = x0, y = conj(x0)``.

    Uses ``d_x^a f = (lam)_a y^a (1 - xy)^(-lam-a)`` followed by Leibniz in ``y``.
    """
    x, y = complex(x0), complex(np.conj(x0))
    u = 1.0 - x * y
    T = np.zeros((d + 1, d + 1), dtype=complex)
    for a in range(d + 1):
        for b in range(d + 1):
            acc = 0.0
            for c in range(min(a, b) + 1):
                acc += (
                    comb(b, c) * falling((a,), (c,)) * y ** (a - c)
                    * _rising(lam + a, b - c) * x ** (b - c)
                    * u ** (-lam - a - b + c)
                )
            T[a, b] = _rising(lam, a) * acc
    return T


@dataclass(frozen=True)
class BallKernel(KernelModel):
    """``K(z, w) = (1 - <z, w>)^(-weight)`` on the unit ball of ``C^m``.

    ``weight=1`` is the Drury-Arveson kernel, ``weight=m`` the Hardy space of
    the ball and ``weight=m+1`` its Bergman space.
    """

    m: int
    weight: float

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"need m >= 1, got {self.m}")
        if self.weight <= 0:
            raise ValueError(f"weight must be positive, got {self.weight}")

    @property
    def n(self) -> int:
        return 1

    def boundary_distance(self, z0):
        return float((1.0 - np.linalg.norm(z0)) / np.sqrt(self.m))

    def evaluate(self, z, w):
        z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
        s = np.sum(z * np.conj(w), axis=-1)
        return ((1.0 - s) ** (-self.weight))[..., None, None]

    def jet(self, z0, d):
        # g(s0 + delta) = sum_q (weight)_q / q! (1 - s0)^(-weight - q) delta^q with
        # delta = sum_i conj(z0_i) xi_i + z0_i eta_i + xi_i eta_i, truncated per side at d.
        m = self.m
        s0 = complex(np.vdot(z0, z0))
        unit = [tuple(1 if j == i else 0 for j in range(m)) for i in range(m)]
        zero = (0,) * m
        delta: dict = {}
        for i in range(m):
            delta[(unit[i], zero)] = np.conj(z0[i])
            delta[(zero, unit[i])] = z0[i]
            delta[(unit[i], unit[i])] = 1.0
        series = {(zero, zero): (1.0 - s0) ** (-self.weight)}
        power = {(zero, zero): 1.0 + 0j}
        for q in range(1, 2 * d + 1):
            power = _truncated_product(power, delta, d)
            c = _rising(self.weight, q) / factorial((q,)) * (1.0 - s0) ** (-self.weight - q)
            for key, val in power.items():
                series[key] = series.get(key, 0.0) + c * val
        order = enumerate_indices(m, d)
        L = len(order)
        data = np.zeros((L, L, 1, 1), dtype=complex)
        for s, I in enumerate(order):
            for t, J in enumerate(order):
                data[s, t, 0, 0] = series.get((I, J), 0.0) * factorial(I) * factorial(J)
        return MatrixJet2(m, 1, d, z0, data)


def _truncated_product(p: dict, q: dict, d: int) -> dict:
    out: dict = {}
    for (I1, J1), a in p.items():
        for (I2, J2), b in q.items():
            I = tuple(x + y for x, y in zip(I1, I2))
            J = tuple(x + y for x, y in zip(J1, J2))
            if sum(I) <= d and sum(J) <= d:
                out[(I, J)] = out.get((I, J), 0.0) + a * b
    return out


@dataclass(frozen=True, eq=False)
class PowerSeries(KernelModel):
    """Polynomial kernel ``K(z, w) = sum A[P, Q] z^P conj(w)^Q``.

    ``coeffs`` maps ``(P, Q)`` pairs of multi-indices to ``n x n`` matrices and
    must satisfy ``A[Q, P] = A[P, Q]^*``.
    """

    m: int
    n: int
    coeffs: Mapping = field(hash=False)

    def __post_init__(self):
        table = {}
        for (P, Q), A in dict(self.coeffs).items():
            P, Q = tuple(int(p) for p in P), tuple(int(q) for q in Q)
            A = np.atleast_2d(np.asarray(A, dtype=complex))
            if len(P) != self.m or len(Q) != self.m:
                raise ValueError(f"multi-index length mismatch in term {(P, Q)}")
            if A.shape != (self.n, self.n):
                raise ValueError(f"coefficient {(P, Q)} has shape {A.shape}, expected {(self.n, self.n)}")
            table[(P, Q)] = A
        for (P, Q), A in table.items():
            B = table.get((Q, P))
            partner = np.zeros_like(A) if B is None else B
            if not np.allclose(partner, A.conj().T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
                raise ValueError(f"coefficients violate A[Q,P] = A[P,Q]^* at {(P, Q)}")
        object.__setattr__(self, "coeffs", table)

    def boundary_distance(self, z0):
        return float("inf")

    def evaluate(self, z, w):
        z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
        out = np.zeros(z.shape[:-1] + (self.n, self.n), dtype=complex)
        wb = np.conj(w)
        for (P, Q), A in self.coeffs.items():
            mono = np.prod(z ** np.array(P), axis=-1) * np.prod(wb ** np.array(Q), axis=-1)
            out = out + mono[..., None, None] * A
        return out

    def jet(self, z0, d):
        order = enumerate_indices(self.m, d)
        L = len(order)
        zb = np.conj(z0)
        data = np.zeros((L, L, self.n, self.n), dtype=complex)
        for (P, Q), A in self.coeffs.items():
            left = [
                falling(P, I) * np.prod(z0 ** (np.array(P) - I)) if falling(P, I) else 0.0
                for I in order
            ]
            right = [
                falling(Q, J) * np.prod(zb ** (np.array(Q) - J)) if falling(Q, J) else 0.0
                for J in order
            ]
            data += np.multiply.outer(left, right)[:, :, None, None] * A
        return MatrixJet2(self.m, self.n, d, z0, data)


@dataclass(frozen=True)
class DirectSum(KernelModel):
    """Orthogonal direct sum; the Gram kernel is block diagonal."""

    first: KernelModel
    second: KernelModel

    def __post_init__(self):
        if self.first.m != self.second.m:
            raise ValueError(f"cannot sum models in C^{self.first.m} and C^{self.second.m}")

    @property
    def m(self) -> int:
        return self.first.m

    @property
    def n(self) -> int:
        return self.first.n + self.second.n

    def boundary_distance(self, z0):
        return min(self.first.boundary_distance(z0), self.second.boundary_distance(z0))

    def evaluate(self, z, w):
        a, b = self.first.evaluate(z, w), self.second.evaluate(z, w)
        out = np.zeros(a.shape[:-2] + (self.n, self.n), dtype=complex)
        p = self.first.n
        out[..., :p, :p] = a
        out[..., p:, p:] = b
        return out

    def jet(self, z0, d):
        A, B = self.first.jet(z0, d), self.second.jet(z0, d)
        L = A.data.shape[0]
        data = np.zeros((L, L, self.n, self.n), dtype=complex)
        for s in range(L):
            for t in range(L):
                data[s, t] = block_diag(A.data[s, t], B.data[s, t])
        return MatrixJet2(self.m, self.n, d, z0, data)


@dataclass(frozen=True, eq=False)
class ConjugateBy(KernelModel):
    """Frame change ``Phi(z) K(z, w) Phi(w)^*``.

    ``phi`` is a constant invertible matrix or a :class:`HoloJet` read as the
    polynomial given by its Taylor data.  Either way the underlying operator
    tuple is unchanged; only the frame is.
    """

    inner: KernelModel
    phi: Union[np.ndarray, HoloJet] = field(hash=False)

    def __post_init__(self):
        if isinstance(self.phi, HoloJet):
            if (self.phi.m, self.phi.n) != (self.inner.m, self.inner.n):
                raise ValueError("frame change jet does not match the model's (m, n)")
        else:
            phi = np.atleast_2d(np.asarray(self.phi, dtype=complex))
            if phi.shape != (self.inner.n, self.inner.n):
                raise ValueError(f"frame change has shape {phi.shape}, model rank is {self.inner.n}")
            if np.linalg.cond(phi) > 1e12:
                raise ValueError("constant frame change is not invertible")
            object.__setattr__(self, "phi", phi)

    @property
    def m(self) -> int:
        return self.inner.m

    @property
    def n(self) -> int:
        return self.inner.n

    def boundary_distance(self, z0):
        return self.inner.boundary_distance(z0)

    def _phi_at(self, z):
        if isinstance(self.phi, HoloJet):
            return self.phi.evaluate(z)
        return self.phi

    def evaluate(self, z, w):
        K = self.inner.evaluate(z, w)
        Pz = self._phi_at(np.asarray(z, dtype=complex))
        Pw = self._phi_at(np.asarray(w, dtype=complex))
        return Pz @ K @ np.conj(np.swapaxes(Pw, -1, -2))

    def jet(self, z0, d):
        if isinstance(self.phi, HoloJet):
            Phi = self.phi.reexpand(z0, d)
        else:
            Phi = constant_jet(self.phi, self.m, d, z0)
        return sandwich(Phi, self.inner.jet(z0, d), Phi)


@dataclass(frozen=True)
class Scale(KernelModel):
    inner: KernelModel
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"scale factor must be positive, got {self.c}")

    @property
    def m(self) -> int:
        return self.inner.m

    @property
    def n(self) -> int:
        return self.inner.n

    def boundary_distance(self, z0):
        return self.inner.boundary_distance(z0)

    def evaluate(self, z, w):
        return self.c * self.inner.evaluate(z, w)

    def jet(self, z0, d):
        return self.inner.jet(z0, d).scaled(self.c)


@dataclass(frozen=True, eq=False)
class CallableKernel(KernelModel):
    """Opaque user-supplied kernel; jets come from Cauchy quadrature only.

    ``func(z, w)`` must broadcast over leading axes of ``(..., m)`` arrays and
    return ``(..., n, n)``.  ``radius`` is the polydisc (about the origin) on
    which ``func`` is regular; ``None`` means entire.
    """

    func: Callable = field(hash=False)
    m: int = 1
    n: int = 1
    radius: Optional[float] = None

    def boundary_distance(self, z0):
        if self.radius is None:
            return float("inf")
        return float(np.min(self.radius - np.abs(z0)))

    def evaluate(self, z, w):
        out = np.asarray(self.func(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)))
        if self.n == 1 and out.shape[-2:] != (1, 1):
            out = out[..., None, None]
        return out

    def jet(self, z0, d):
        return jet_at_numeric(self, z0, d)


def _checked_point(model: KernelModel, z0) -> np.ndarray:
    z0 = _point(z0, model.m)
    if not model.boundary_distance(z0) > 0:
        raise DomainError(f"basepoint {z0.tolist()} lies outside the domain of {model!r}")
    return z0


def jet_at(model: KernelModel, z0, d: int) -> MatrixJet2:
    """Exact jet of the model's Gram kernel at ``(z0, z0)`` through order ``d``."""
    if d < 0:
        raise ValueError(f"jet order must be >= 0, got {d}")
    return model.jet(_checked_point(model, z0), d)


def jet_at_numeric(
    model: KernelModel,
    z0,
    d: int,
    r: Optional[float] = None,
    N: Optional[int] = None,
) -> MatrixJet2:
    """Jet by tensor-product Cauchy quadrature on the ``2m``-torus of radius ``r``.

    With ``z = z0 + r e^{i theta}`` and ``conj(w) = conj(z0) + r e^{i phi}`` the
    discrete Fourier coefficient at ``(I, J)`` is ``r^{|I|+|J|}`` times the Taylor
    coefficient, up to aliasing from degrees ``>= N``.  Exact for polynomials of
    per-variable degree below ``N``.

    Defaults: ``r`` is half the distance to the boundary (0.5 for entire
    kernels), ``N = max(4 (d + 1), 32)``.
    """
    z0 = _checked_point(model, z0)
    m = model.m
    if r is None:
        dist = model.boundary_distance(z0)
        r = 0.5 if not np.isfinite(dist) else dist / 2
    if N is None:
        N = max(4 * (d + 1), 32)
    if N <= d:
        raise ValueError(f"need more than d={d} nodes per circle, got N={N}")
    if not r > 0:
        raise ValueError(f"quadrature radius must be positive, got {r}")
    nodes = r * np.exp(2j * np.pi * np.arange(N) / N)
    grids = np.meshgrid(*([nodes] * (2 * m)), indexing="ij")
    zeta = np.stack(grids[:m], axis=-1)
    eta = np.stack(grids[m:], axis=-1)
    try:
        F = np.asarray(model.evaluate(z0 + zeta, z0 + np.conj(eta)), dtype=complex)
    except Exception as exc:  # user evaluators can fail in arbitrary ways
        raise RuntimeError(f"kernel evaluation failed: {exc}") from exc
    F = F.reshape((N,) * (2 * m) + (model.n, model.n))
    C = np.fft.fftn(F, axes=tuple(range(2 * m))) / N ** (2 * m)
    order = enumerate_indices(m, d)
    L = len(order)
    data = np.zeros((L, L, model.n, model.n), dtype=complex)
    for s, I in enumerate(order):
        for t, J in enumerate(order):
            scale_ = factorial(I) * factorial(J) / r ** (sum(I) + sum(J))
            data[s, t] = scale_ * C[I + J]
    if not np.all(np.isfinite(data)):
        raise RuntimeError("quadrature produced non-finite derivatives")
    return MatrixJet2(m, model.n, d, z0, data)


def transform(model: KernelModel, phi0) -> ConjugateBy:
    """Constant frame change by an invertible matrix."""
    return ConjugateBy(model, np.asarray(phi0, dtype=complex))


def conjugate_by(model: KernelModel, phi) -> ConjugateBy:
    return ConjugateBy(model, phi)


def scale(model: KernelModel, c: float) -> Scale:
    return Scale(model, c)


def direct_sum(a: KernelModel, b: KernelModel) -> DirectSum:
    return DirectSum(a, b)


def szego(m: int = 1) -> ProductPolydisc:
    return ProductPolydisc((1.0,) * m)


def bergman(m: int = 1) -> ProductPolydisc:
    return ProductPolydisc((2.0,) * m)


def _rank2_power_series() -> PowerSeries:
    # Gram kernel of the frame gamma_i(z) = (z^p B_p[i, :])_p in C^2 (+) ... (+) C^2.
    B = [
        np.array([[1.0, 0.0], [0.0, 1.0]]),
        np.array([[1.0, 0.5j], [0.0, 1.0]]),
        np.array([[0.5, 0.0], [0.3, 1.0]]),
        np.array([[0.25, 0.1], [-0.2j, 0.5]]),
        np.array([[0.1, 0.0], [0.0, 0.2]]),
    ]
    coeffs = {((p,), (p,)): B[p] @ B[p].conj().T for p in range(len(B))}
    return PowerSeries(1, 2, coeffs)


def catalog() -> dict[str, KernelModel]:
    """Named models used for demos, sweeps and the test-suite (``n <= 2``, ``m <= 2``)."""
    sz, bg = szego(1), bergman(1)
    shear = np.zeros((2, 2, 2), dtype=complex)
    shear[0] = np.eye(2)
    shear[1] = [[0.0, 1.0], [0.0, 0.0]]
    return {
        "szego": sz,
        "bergman": bg,
        "weighted3": ProductPolydisc((3.0,)),
        "bidisc_hardy": szego(2),
        "bidisc_mixed": ProductPolydisc((1.0, 2.0)),
        "drury_arveson": BallKernel(2, 1.0),
        "ball_hardy": BallKernel(2, 2.0),
        "szego_plus_bergman": DirectSum(sz, bg),
        "sheared_sum": ConjugateBy(DirectSum(sz, bg), HoloJet(1, 2, 1, [0.0], shear)),
        "poly_rank2": _rank2_power_series(),
        "bidisc_plus_ball": DirectSum(szego(2), BallKernel(2, 2.0)),
    }
