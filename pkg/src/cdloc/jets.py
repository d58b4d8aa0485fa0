"""Truncated jets of matrix-valued functions at a single basepoint.

Two kinds of jet are used:

* :class:`MatrixJet2` -- derivatives ``d_z^I dbar_w^J H(z, w)`` at
  ``z = w = z0`` of a kernel that is holomorphic in ``z`` and
  anti-holomorphic in ``w`` (a Gram matrix of a holomorphic frame).
* :class:`HoloJet` -- derivatives ``d^I Phi(z0)`` of a holomorphic matrix
  function (a frame change).

Both store derivative *values*, not Taylor coefficients.  Blocks are laid
out along the graded-lex ordering of :mod:`cdloc.multiindex`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .multiindex import (
    IndexOrdering,
    binom,
    enumerate_indices,
    factorial,
    lower_set,
    sub,
)

COND_LIMIT = 1e12

__all__ = [
    "COND_LIMIT",
    "SingularJetError",
    "MatrixJet2",
    "HoloJet",
    "constant_jet",
    "identity_jet",
    "sandwich",
    "holo_mul",
    "holo_invert",
    "restrict_left",
    "hermitian_sqrt",
]


class SingularJetError(ValueError):
    """A matrix that has to be inverted (or square-rooted) is not usable."""


def _as_point(z0, m=None) -> np.ndarray:
    z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
    if z0.ndim != 1 or (m is not None and z0.shape[0] != m):
        raise ValueError(f"basepoint must be a length-{m} vector, got shape {z0.shape}")
    return z0


@lru_cache(maxsize=None)
def _leibniz_table(m: int, d: int) -> tuple[tuple[tuple[int, int, int], ...], ...]:
    """For each position s of I: tuples (pos(A), pos(I - A), binom(I, A)) over A <= I."""
    order = enumerate_indices(m, d)
    table = []
    for I in order:
        table.append(tuple(
            (order.sigma(A), order.sigma(sub(I, A)), binom(I, A)) for A in lower_set(I)
        ))
    return tuple(table)


@dataclass(frozen=True, eq=False)
class MatrixJet2:
    """Mixed-derivative table of a two-point matrix kernel.

    ``data[s, t]`` holds ``d^I dbar^J H(z0, z0)`` with ``s = sigma(I)``,
    ``t = sigma(J)``; shape ``(L, L, n, n)``.
    """

    m: int
    n: int
    d: int
    z0: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        z0 = _as_point(self.z0, self.m)
        data = np.asarray(self.data, dtype=complex)
        L = len(enumerate_indices(self.m, self.d))
        if data.shape != (L, L, self.n, self.n):
            raise ValueError(
                f"jet table has shape {data.shape}, expected {(L, L, self.n, self.n)}"
            )
        object.__setattr__(self, "z0", z0)
        object.__setattr__(self, "data", data)

    @property
    def ordering(self) -> IndexOrdering:
        return enumerate_indices(self.m, self.d)

    def __getitem__(self, key) -> np.ndarray:
        I, J = key
        order = self.ordering
        return self.data[order.sigma(I), order.sigma(J)]

    def scaled(self, c) -> "MatrixJet2":
        return MatrixJet2(self.m, self.n, self.d, self.z0, c * self.data)

    def truncate(self, d: int) -> "MatrixJet2":
        """Drop everything above order ``d`` (orderings are nested prefixes)."""
        if d > self.d:
            raise ValueError(f"cannot raise jet order from {self.d} to {d}")
        L = len(enumerate_indices(self.m, d))
        return MatrixJet2(self.m, self.n, d, self.z0, self.data[:L, :L].copy())

    def hermitian_defect(self) -> float:
        """``max |D[J][I] - D[I][J]^*|`` over the table."""
        swapped = np.conj(np.transpose(self.data, (1, 0, 3, 2)))
        return float(np.max(np.abs(self.data - swapped)))

    def normalization_defect(self) -> float:
        """Distance from the normalized form ``D00 = 1``, ``D[I][0] = D[0][I] = 0``."""
        eye = np.eye(self.n)
        err = np.max(np.abs(self.data[0, 0] - eye))
        if self.data.shape[0] > 1:
            err = max(err, np.max(np.abs(self.data[1:, 0])), np.max(np.abs(self.data[0, 1:])))
        return float(err)

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return self.normalization_defect() <= tol

    def taylor(self) -> np.ndarray:
        """Taylor coefficients ``D[I][J] / (I! J!)`` in the same layout."""
        f = np.array([factorial(I) for I in self.ordering], dtype=float)
        return self.data / np.multiply.outer(f, f)[:, :, None, None]

    def __repr__(self) -> str:
        return f"MatrixJet2(m={self.m}, n={self.n}, d={self.d}, z0={self.z0.tolist()})"


@dataclass(frozen=True, eq=False)
class HoloJet:
    """Derivatives ``d^I Phi(z0)`` of a holomorphic matrix function; shape ``(L, n, n)``."""

    m: int
    n: int
    d: int
    z0: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        z0 = _as_point(self.z0, self.m)
        data = np.asarray(self.data, dtype=complex)
        L = len(enumerate_indices(self.m, self.d))
        if data.shape != (L, self.n, self.n):
            raise ValueError(f"jet table has shape {data.shape}, expected {(L, self.n, self.n)}")
        object.__setattr__(self, "z0", z0)
        object.__setattr__(self, "data", data)

    @property
    def ordering(self) -> IndexOrdering:
        return enumerate_indices(self.m, self.d)

    def __getitem__(self, I) -> np.ndarray:
        return self.data[self.ordering.sigma(I)]

    def is_constant(self, tol: float = 0.0) -> bool:
        return self.data.shape[0] == 1 or float(np.max(np.abs(self.data[1:]))) <= tol

    def evaluate(self, z) -> np.ndarray:
        """Evaluate the Taylor polynomial ``sum_I data[I] (z - z0)^I / I!``.

        ``z`` has shape ``(..., m)``; returns ``(..., n, n)``.
        """
        z = np.asarray(z, dtype=complex)
        dz = z - self.z0
        out = np.zeros(dz.shape[:-1] + (self.n, self.n), dtype=complex)
        for s, I in enumerate(self.ordering):
            mono = np.prod(dz ** np.array(I), axis=-1) / factorial(I)
            out = out + mono[..., None, None] * self.data[s]
        return out

    def reexpand(self, z1, d: int) -> "HoloJet":
        """Treat this jet as a polynomial and take its jet at ``z1`` up to order ``d``."""
        z1 = _as_point(z1, self.m)
        dz = z1 - self.z0
        src = self.ordering
        dst = enumerate_indices(self.m, d)
        out = np.zeros((len(dst), self.n, self.n), dtype=complex)
        for t, A in enumerate(dst):
            for s, I in enumerate(src):
                if all(i >= a for i, a in zip(I, A)):
                    R = sub(I, A)
                    out[t] += self.data[s] * (np.prod(dz ** np.array(R)) / factorial(R))
        return HoloJet(self.m, self.n, d, z1, out)

    def __repr__(self) -> str:
        return f"HoloJet(m={self.m}, n={self.n}, d={self.d}, z0={self.z0.tolist()})"


def constant_jet(mat, m: int, d: int, z0) -> HoloJet:
    """Jet of the constant function ``z -> mat``."""
    mat = np.atleast_2d(np.asarray(mat, dtype=complex))
    n = mat.shape[0]
    L = len(enumerate_indices(m, d))
    data = np.zeros((L, n, n), dtype=complex)
    data[0] = mat
    return HoloJet(m, n, d, z0, data)


def identity_jet(m: int, n: int, d: int, z0) -> HoloJet:
    return constant_jet(np.eye(n), m, d, z0)


def _check_compatible(*jets):
    ref = jets[0]
    for j in jets[1:]:
        if (j.m, j.n, j.d) != (ref.m, ref.n, ref.d):
            raise ValueError(
                f"jet shape mismatch: (m, n, d) = {(ref.m, ref.n, ref.d)} vs {(j.m, j.n, j.d)}"
            )
        if not np.allclose(j.z0, ref.z0, rtol=0, atol=1e-14):
            raise ValueError(f"basepoint mismatch: {ref.z0} vs {j.z0}")


def sandwich(left: HoloJet, K: MatrixJet2, right: HoloJet) -> MatrixJet2:
    """Jet of ``Phi_L(z) K(z, w) Phi_R(w)^*`` by the two-variable Leibniz rule."""
    _check_compatible(left, K, right)
    table = _leibniz_table(K.m, K.d)
    L = len(table)
    # LK[a, r, t] = L.C[a] @ K.D[r][t]
    Lc, Rc = left.data, np.conj(np.transpose(right.data, (0, 2, 1)))
    out = np.zeros_like(K.data)
    for s in range(L):
        for t in range(L):
            acc = np.zeros((K.n, K.n), dtype=complex)
            for a, ia, ca in table[s]:
                for b, jb, cb in table[t]:
                    acc += (ca * cb) * (Lc[a] @ K.data[ia, jb] @ Rc[b])
            out[s, t] = acc
    return MatrixJet2(K.m, K.n, K.d, K.z0, out)


def holo_mul(F: HoloJet, G: HoloJet) -> HoloJet:
    """Jet of the pointwise product ``F(z) G(z)``."""
    _check_compatible(F, G)
    table = _leibniz_table(F.m, F.d)
    out = np.zeros_like(F.data)
    for s, row in enumerate(table):
        for a, ia, c in row:
            out[s] += c * (F.data[a] @ G.data[ia])
    return HoloJet(F.m, F.n, F.d, F.z0, out)


def holo_invert(F: HoloJet) -> HoloJet:
    """Jet of ``F(z)^{-1}`` via degree-graded recursion.

    ``G[0] = F[0]^{-1}`` and
    ``G[I] = -F[0]^{-1} sum_{0 < A <= I} binom(I, A) F[A] G[I - A]``.
    """
    F0 = F.data[0]
    if not np.all(np.isfinite(F0)) or np.linalg.cond(F0) > COND_LIMIT:
        raise SingularJetError("frame value at the basepoint is not invertible")
    F0inv = np.linalg.inv(F0)
    table = _leibniz_table(F.m, F.d)
    out = np.zeros_like(F.data)
    out[0] = F0inv
    # positions are degree-sorted, so every G[I - A] with A != 0 is already known
    for s in range(1, len(table)):
        acc = np.zeros((F.n, F.n), dtype=complex)
        for a, ia, c in table[s]:
            if a != 0:
                acc += c * (F.data[a] @ out[ia])
        out[s] = -F0inv @ acc
    return HoloJet(F.m, F.n, F.d, F.z0, out)


def restrict_left(K: MatrixJet2) -> HoloJet:
    """Holomorphic jet of ``z -> K(z, z0)``."""
    return HoloJet(K.m, K.n, K.d, K.z0, K.data[:, 0].copy())


def hermitian_sqrt(A, tol: float = 1e-14) -> np.ndarray:
    """Hermitian positive definite square root via ``eigh``."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.conj().T)) > 1e-10 * scale:
        raise SingularJetError("matrix is not Hermitian")
    w, V = np.linalg.eigh((A + A.conj().T) / 2)
    if w[0] <= tol * max(1.0, w[-1]):
        raise SingularJetError(f"matrix is not positive definite (min eigenvalue {w[0]:.3e})")
    return (V * np.sqrt(w)) @ V.conj().T


def jet_from_taylor(coeffs: np.ndarray, m: int, n: int, d: int, z0) -> MatrixJet2:
    """Inverse of :meth:`MatrixJet2.taylor`."""
    f = np.array([factorial(I) for I in enumerate_indices(m, d)], dtype=float)
    return MatrixJet2(m, n, d, z0, coeffs * np.multiply.outer(f, f)[:, :, None, None])


