"""Multi-index arithmetic and the graded-lexicographic block ordering.

A multi-index is a plain tuple of non-negative ints.  Everything here is
exact integer arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import comb, factorial as _fact, prod
from typing import Iterator, Sequence

MultiIndex = tuple[int, ...]

__all__ = [
    "MultiIndex",
    "IndexOrdering",
    "enumerate_indices",
    "factorial",
    "degree",
    "geq",
    "sub",
    "add",
    "falling",
    "binom",
    "lower_set",
    "unit",
    "zero",
]


def _check(I: Sequence[int]) -> MultiIndex:
    I = tuple(int(i) for i in I)
    if not I:
        raise ValueError("multi-index must have at least one entry")
    if any(i < 0 for i in I):
        raise ValueError(f"multi-index entries must be non-negative: {I}")
    return I


def zero(m: int) -> MultiIndex:
    return (0,) * m


def unit(m: int, i: int) -> MultiIndex:
    """The multi-index with a single 1 in slot ``i``."""
    return tuple(1 if j == i else 0 for j in range(m))


def degree(I: Sequence[int]) -> int:
    return sum(I)


def factorial(I: Sequence[int]) -> int:
    """``I! = i_1! ... i_m!``."""
    return prod(_fact(i) for i in _check(I))


def geq(I: Sequence[int], J: Sequence[int]) -> bool:
    """Componentwise partial order ``I >= J``."""
    if len(I) != len(J):
        raise ValueError(f"length mismatch: {tuple(I)} vs {tuple(J)}")
    return all(i >= j for i, j in zip(I, J))


def sub(I: Sequence[int], J: Sequence[int]) -> MultiIndex:
    """``I - J``; only defined when ``I >= J``."""
    if not geq(I, J):
        raise ValueError(f"{tuple(I)} - {tuple(J)} is undefined: not I >= J")
    return tuple(i - j for i, j in zip(I, J))


def add(I: Sequence[int], J: Sequence[int]) -> MultiIndex:
    if len(I) != len(J):
        raise ValueError(f"length mismatch: {tuple(I)} vs {tuple(J)}")
    return tuple(i + j for i, j in zip(I, J))


def falling(J: Sequence[int], I: Sequence[int]) -> int:
    """``J!/(J-I)!`` when ``J >= I``, otherwise 0.

    This is the coefficient by which ``(T - z)^I`` acts on ``d^J gamma``.
    """
    if not geq(J, I):
        return 0
    out = 1
    for j, i in zip(J, I):
        for t in range(j - i + 1, j + 1):
            out *= t
    return out


def binom(I: Sequence[int], A: Sequence[int]) -> int:
    """Multi-binomial ``prod_k C(i_k, a_k)``; zero unless ``I >= A``."""
    if not geq(I, A):
        return 0
    return prod(comb(i, a) for i, a in zip(I, A))


def lower_set(I: Sequence[int]) -> Iterator[MultiIndex]:
    """All ``A <= I`` in lexicographic order."""
    return product(*(range(i + 1) for i in I))


@dataclass(frozen=True)
class IndexOrdering:
    """All multi-indices of length ``m`` with total degree at most ``d``.

    ``indices[s]`` is the index at block position ``s`` and ``position``
    is the inverse map (the ordering ``sigma``).  Degree-major, ascending
    lexicographic inside each degree, so ``(0,...,0)`` sits at position 0.
    """

    m: int
    d: int
    indices: tuple[MultiIndex, ...] = field(repr=False)
    position: dict = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self.indices)

    def __contains__(self, I) -> bool:
        return tuple(I) in self.position

    def sigma(self, I: Sequence[int]) -> int:
        try:
            return self.position[tuple(I)]
        except KeyError:
            raise KeyError(f"{tuple(I)} not in ordering (m={self.m}, d={self.d})") from None

    def of_degree(self, k: int) -> list[MultiIndex]:
        return [I for I in self.indices if sum(I) == k]

    def positive(self) -> list[MultiIndex]:
        """Indices with ``|I| >= 1``, in ordering order."""
        return list(self.indices[1:])


@lru_cache(maxsize=None)
def enumerate_indices(m: int, d: int) -> IndexOrdering:
    """Build the graded-lex ordering of ``{I : |I| <= d}`` in ``m`` variables.

    >>> enumerate_indices(2, 1).indices
    ((0, 0), (0, 1), (1, 0))
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    if d < 0:
        raise ValueError(f"need d >= 0, got {d}")
    by_degree = sorted(
        (I for I in product(range(d + 1), repeat=m) if sum(I) <= d),
        key=lambda I: (sum(I), I),
    )
    indices = tuple(by_degree)
    return IndexOrdering(m, d, indices, {I: s for s, I in enumerate(indices)})
