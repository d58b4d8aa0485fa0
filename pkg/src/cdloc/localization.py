"""Localization invariants ``K_z^{IJ}`` from a Gram-kernel jet.

Pipeline: :func:`normalize` the jet, assemble the block Gram matrix of the
basis ``{d^K gamma(z) : |K| <= k-1}`` of the order-``k`` localization, invert
it and read off ``M^{IJ} = I! J! G_{JI}``.  :func:`oracle_invariants_direct`
recomputes the same matrices by composing the operator matrices of
``N^I (N^J)^*`` and compressing to the first-order localization.

Matrices representing operators use the left-action convention:
``Phi e_a = sum_b A[a, b] e_b``, so ``Phi Psi`` is represented by ``B A``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .jets import (
    COND_LIMIT,
    HoloJet,
    MatrixJet2,
    SingularJetError,
    hermitian_sqrt,
    holo_invert,
    restrict_left,
    sandwich,
)
from .multiindex import IndexOrdering, MultiIndex, enumerate_indices, factorial, falling, sub

PD_RATIO = 1e-10

__all__ = [
    "DegenerateGramError",
    "BlockGram",
    "InvariantSet",
    "normalize",
    "build_block_gram",
    "extract_invariants",
    "build_N_matrix",
    "adjoint_matrix",
    "compress_to_H1",
    "oracle_invariants_direct",
]


class DegenerateGramError(ValueError):
    """Block Gram matrix is indefinite or too ill-conditioned to invert."""


@dataclass(frozen=True, eq=False)
class BlockGram:
    """Gram matrix of ``{d^K gamma_i(z)}`` as an ``nL x nL`` array.

    Row ``sigma(I) * n + i`` belongs to ``d^I gamma_i``.
    """

    k: int
    m: int
    n: int
    matrix: np.ndarray
    eigenvalues: np.ndarray

    @property
    def ordering(self) -> IndexOrdering:
        return enumerate_indices(self.m, self.k - 1)

    @property
    def L(self) -> int:
        return len(self.ordering)

    @property
    def condition(self) -> float:
        return float(self.eigenvalues[-1] / self.eigenvalues[0])

    def block(self, I, J) -> np.ndarray:
        n, o = self.n, self.ordering
        s, t = o.sigma(I), o.sigma(J)
        return self.matrix[s * n:(s + 1) * n, t * n:(t + 1) * n]

    def inverse(self) -> np.ndarray:
        """Full inverse via a Cholesky solve."""
        if self.condition > COND_LIMIT:
            raise DegenerateGramError(
                f"block Gram matrix condition number {self.condition:.3e} exceeds {COND_LIMIT:.0e}"
            )
        factor = cho_factor(self.matrix, lower=True)
        G = cho_solve(factor, np.eye(self.matrix.shape[0], dtype=complex))
        return (G + G.conj().T) / 2

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """``H^{-1} rhs`` without forming the inverse."""
        return cho_solve(cho_factor(self.matrix, lower=True), rhs)


@dataclass(frozen=True, eq=False)
class InvariantSet:
    """The matrices ``M^{IJ}`` for ``1 <= |I|, |J| <= k-1`` in the normalized frame at ``z``.

    ``data[a, b]`` belongs to the pair ``(indices[a], indices[b])``.
    """

    z: np.ndarray
    k: int
    m: int
    n: int
    data: np.ndarray

    @property
    def indices(self) -> list[MultiIndex]:
        return enumerate_indices(self.m, self.k - 1).positive()

    def __getitem__(self, key) -> np.ndarray:
        I, J = (tuple(x) for x in key)
        idx = {K: a for a, K in enumerate(self.indices)}
        try:
            return self.data[idx[I], idx[J]]
        except KeyError:
            raise KeyError(f"({I}, {J}) outside 1 <= |I|,|J| <= {self.k - 1}") from None

    def items(self) -> Iterator[tuple[tuple[MultiIndex, MultiIndex], np.ndarray]]:
        ind = self.indices
        for a, I in enumerate(ind):
            for b, J in enumerate(ind):
                yield (I, J), self.data[a, b]

    def matrices(self) -> list[np.ndarray]:
        """All members flattened in ``(sigma(I), sigma(J))`` order."""
        return [M for _, M in self.items()]

    def labels(self) -> list[str]:
        return [f"K{list(I)}{list(J)}" for (I, J), _ in self.items()]

    def adjoint_defect(self) -> float:
        """``max |M^{JI} - (M^{IJ})^*|``."""
        swapped = np.conj(np.transpose(self.data, (1, 0, 3, 2)))
        return float(np.max(np.abs(self.data - swapped))) if self.data.size else 0.0


def normalize(jet: MatrixJet2) -> tuple[MatrixJet2, HoloJet]:
    """Change to the frame normalized at the basepoint.

    With ``Phi(z) = K(z0, z0)^{1/2} K(z, z0)^{-1}`` the new frame
    ``Phi gamma`` satisfies ``<gamma_i(z), gamma_j(z0)> = delta_ij``.
    Returns the new jet and ``Phi``.
    """
    try:
        root = hermitian_sqrt(jet.data[0, 0])
    except SingularJetError as exc:
        raise DegenerateGramError(f"K(z0, z0) is not positive definite: {exc}") from exc
    inv = holo_invert(restrict_left(jet))
    phi = HoloJet(jet.m, jet.n, jet.d, jet.z0, root @ inv.data)
    return sandwich(phi, jet, phi), phi


def build_block_gram(jet: MatrixJet2, k: int) -> BlockGram:
    """Assemble the ``nL x nL`` Gram matrix of the order-``k`` localization basis."""
    if k < 1:
        raise ValueError(f"localization order must be >= 1, got {k}")
    if jet.d < k - 1:
        raise ValueError(f"jet order {jet.d} is too low for k={k} (need {k - 1})")
    L = len(enumerate_indices(jet.m, k - 1))
    n = jet.n
    blocks = jet.data[:L, :L]
    H = np.transpose(blocks, (0, 2, 1, 3)).reshape(n * L, n * L)
    scale = max(1.0, float(np.max(np.abs(H))))
    if np.max(np.abs(H - H.conj().T)) > 1e-10 * scale:
        raise DegenerateGramError("block Gram matrix is not Hermitian")
    H = (H + H.conj().T) / 2
    w = np.linalg.eigvalsh(H)
    if not w[0] > PD_RATIO * w[-1]:
        raise DegenerateGramError(
            f"block Gram matrix is not positive definite (eigenvalues {w[0]:.3e} .. {w[-1]:.3e})"
        )
    return BlockGram(k, jet.m, n, H, w)


def extract_invariants(jet: MatrixJet2, k: int) -> InvariantSet:
    """``M^{IJ} = I! J! G_{JI}`` where ``G`` is the inverse block Gram matrix.

    ``jet`` must already be normalized.
    """
    if not jet.is_normalized(1e-8):
        raise ValueError("extract_invariants needs a normalized jet; call normalize() first")
    H = build_block_gram(jet, k)
    G = H.inverse()
    n = jet.n
    ind = H.ordering.positive()
    pos = [H.ordering.sigma(I) for I in ind]
    data = np.zeros((len(ind), len(ind), n, n), dtype=complex)
    for a, I in enumerate(ind):
        for b, J in enumerate(ind):
            s, t = pos[b], pos[a]  # block (J, I)
            data[a, b] = factorial(I) * factorial(J) * G[s * n:(s + 1) * n, t * n:(t + 1) * n]
    return InvariantSet(jet.z0.copy(), k, jet.m, n, data)


def build_N_matrix(I, k: int, m: int, n: int) -> np.ndarray:
    """Matrix of ``(T - z)^I`` on the order-``k`` localization, left-action convention.

    ``(T - z)^I d^K gamma = K!/(K-I)! d^{K-I} gamma``, so block
    ``(sigma(K), sigma(K - I))`` is ``falling(K, I) * 1_n``.
    """
    I = tuple(I)
    if len(I) != m:
        raise ValueError(f"multi-index {I} does not have length m={m}")
    order = enumerate_indices(m, k - 1)
    L = len(order)
    N = np.zeros((n * L, n * L), dtype=complex)
    eye = np.eye(n)
    for K in order:
        c = falling(K, I)
        if c:
            s, t = order.sigma(K), order.sigma(sub(K, I))
            N[s * n:(s + 1) * n, t * n:(t + 1) * n] = c * eye
    return N


def adjoint_matrix(A: np.ndarray, H: BlockGram) -> np.ndarray:
    """Matrix of the adjoint operator: ``H A^* H^{-1}``."""
    if H.condition > COND_LIMIT:
        raise DegenerateGramError(f"block Gram condition number {H.condition:.3e} too large")
    # H A^* H^{-1} = (H^{-1} A H)^*, with H Hermitian
    return H.solve(A @ H.matrix).conj().T


def compress_to_H1(A: np.ndarray, H: BlockGram) -> np.ndarray:
    """Represent ``P_{H^1} X |_{H^1}`` in the basis ``gamma(z)``.

    ``X`` is given by ``A`` (left action on the full localization basis).
    Returns ``E A H E^T (E H E^T)^{-1}`` with ``E`` the first block row selector.
    """
    n = H.n
    top = (A @ H.matrix[:, :n])[:n]
    return np.linalg.solve(H.matrix[:n, :n].T, top.T).T


def oracle_invariants_direct(jet: MatrixJet2, k: int) -> InvariantSet:
    """Recompute ``M^{IJ}`` by forming ``N^I (N^J)^*`` explicitly.

    The operator composition is represented by ``B A`` where ``A`` is the
    matrix of ``N^I`` and ``B`` that of ``(N^J)^*``.
    """
    H = build_block_gram(jet, k)
    ind = H.ordering.positive()
    mats = {I: build_N_matrix(I, k, jet.m, jet.n) for I in ind}
    adjs = {J: adjoint_matrix(mats[J], H) for J in ind}
    data = np.zeros((len(ind), len(ind), jet.n, jet.n), dtype=complex)
    for a, I in enumerate(ind):
        for b, J in enumerate(ind):
            data[a, b] = compress_to_H1(adjs[J] @ mats[I], H)
    return InvariantSet(jet.z0.copy(), k, jet.m, jet.n, data)


def invariants_for_pair(jet: MatrixJet2, k: int, I, J) -> np.ndarray:
    """Single ``M^{IJ}`` through the direct route; zero indices are rejected."""
    if sum(I) == 0 or sum(J) == 0:
        raise ValueError("K^{IJ} is only defined for |I|, |J| >= 1")
    H = build_block_gram(jet, k)
    A = build_N_matrix(I, k, jet.m, jet.n)
    B = adjoint_matrix(build_N_matrix(J, k, jet.m, jet.n), H)
    return compress_to_H1(B @ A, H)
