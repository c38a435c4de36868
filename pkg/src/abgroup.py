"""
Finite abelian groups and integer matrix algorithms
Smith normal form with transformation tracking, cokernels, homomorphisms and the character pairing
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidGroup, ShapeMismatch, SingularMatrix, WellDefinednessFailure
from .exactnum import PhaseQZ

logger = logging.getLogger(__name__)

Element = Tuple[int, ...]
IntMatrix = Tuple[Tuple[int, ...], ...]


def to_object_matrix(M: Sequence[Sequence[int]]) -> np.ndarray:
    """Exact integer matrix as a numpy object array (shape-safe for empty input)."""
    if isinstance(M, np.ndarray) and M.ndim == 2:
        rows, cols = M.shape
    else:
        rows = len(M)
        cols = len(M[0]) if rows else 0
    out = np.empty((rows, cols), dtype=object)
    for i in range(rows):
        if len(M[i]) != cols:
            raise ShapeMismatch("ragged integer matrix")
        for j in range(cols):
            out[i, j] = int(M[i][j])
    return out


def _identity(size: int) -> np.ndarray:
    out = np.zeros((size, size), dtype=object)
    for i in range(size):
        out[i, i] = 1
    return out


def _smith(M) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Return (U, D, V, U⁻¹) with U·M·V = D, pivoting on the least absolute entry."""
    A = to_object_matrix(M)
    m, n = A.shape
    U, U_inv, V = _identity(m), _identity(m), _identity(n)

    for t in range(min(m, n)):
        while True:
            candidates = [
                (abs(A[i, j]), i, j)
                for i in range(t, m)
                for j in range(t, n)
                if A[i, j] != 0
            ]
            if not candidates:
                return U, A, V, U_inv
            _, pi, pj = min(candidates)
            if pi != t:
                A[[t, pi]] = A[[pi, t]]
                U[[t, pi]] = U[[pi, t]]
                U_inv[:, [t, pi]] = U_inv[:, [pi, t]]
            if pj != t:
                A[:, [t, pj]] = A[:, [pj, t]]
                V[:, [t, pj]] = V[:, [pj, t]]

            pivot = A[t, t]
            clean = True
            for i in range(t + 1, m):
                q = A[i, t] // pivot
                if q:
                    A[i] = A[i] - q * A[t]
                    U[i] = U[i] - q * U[t]
                    U_inv[:, t] = U_inv[:, t] + q * U_inv[:, i]
                if A[i, t] != 0:
                    clean = False
            for j in range(t + 1, n):
                q = A[t, j] // pivot
                if q:
                    A[:, j] = A[:, j] - q * A[:, t]
                    V[:, j] = V[:, j] - q * V[:, t]
                if A[t, j] != 0:
                    clean = False
            if not clean:
                continue

            offender = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if A[i, j] % pivot != 0),
                None,
            )
            if offender is None:
                break
            A[t] = A[t] + A[offender]
            U[t] = U[t] + U[offender]
            U_inv[:, offender] = U_inv[:, offender] - U_inv[:, t]

        if A[t, t] < 0:
            A[t] = -A[t]
            U[t] = -U[t]
            U_inv[:, t] = -U_inv[:, t]

    return U, A, V, U_inv


def smith_normal_form(M: Sequence[Sequence[int]]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Smith normal form of an integer matrix.

    Returns unimodular U, V and diagonal D with U @ M @ V == D and d_i | d_{i+1}.
    """
    U, D, V, _ = _smith(M)
    return U, D, V


def integer_det(M: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    A = [[int(v) for v in row] for row in M]
    n = len(A)
    if n == 0:
        return 1
    if any(len(row) != n for row in A):
        raise ShapeMismatch("determinant of a non-square matrix")
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


@dataclass(frozen=True)
class FinAbGroup:
    """Finite abelian group ℤ/d₁ × ... × ℤ/d_r with d₁ | d₂ | ... | d_r."""

    invariant_factors: Tuple[int, ...] = ()

    def __post_init__(self):
        factors = tuple(int(d) for d in self.invariant_factors)
        if any(d < 2 for d in factors):
            raise InvalidGroup(f"Invariant factors must be >= 2, got {list(factors)}")
        for a, b in zip(factors, factors[1:]):
            if b % a:
                raise InvalidGroup(f"Invariant factors must form a divisibility chain, got {list(factors)}")
        object.__setattr__(self, "invariant_factors", factors)

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @property
    def order(self) -> int:
        result = 1
        for d in self.invariant_factors:
            result *= d
        return result

    @property
    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    def zero(self) -> Element:
        return (0,) * self.rank

    def generators(self) -> List[Element]:
        return [tuple(1 if i == j else 0 for j in range(self.rank)) for i in range(self.rank)]

    def normalize(self, x: Sequence[int]) -> Element:
        if len(x) != self.rank:
            raise ShapeMismatch(f"Element {tuple(x)} does not match factors {list(self.invariant_factors)}")
        return tuple(int(v) % d for v, d in zip(x, self.invariant_factors))

    def add(self, x: Sequence[int], y: Sequence[int]) -> Element:
        if len(y) != self.rank:
            raise ShapeMismatch("element shapes differ")
        return self.normalize([a + b for a, b in zip(x, y)])

    def neg(self, x: Sequence[int]) -> Element:
        return self.normalize([-a for a in x])

    def scale(self, k: int, x: Sequence[int]) -> Element:
        return self.normalize([k * a for a in x])

    def elements(self) -> Iterator[Element]:
        return itertools.product(*(range(d) for d in self.invariant_factors))

    def element_array(self) -> np.ndarray:
        """All elements as rows of an (order, rank) array, in the order of elements()."""
        if self.rank == 0:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.meshgrid(*(np.arange(d) for d in self.invariant_factors), indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=1).astype(np.int64)

    def index(self, x: Sequence[int]) -> int:
        idx = 0
        for v, d in zip(self.normalize(x), self.invariant_factors):
            idx = idx * d + v
        return idx

    def render(self) -> dict:
        return {"factors": list(self.invariant_factors)}


@dataclass(frozen=True)
class GroupHom:
    """Homomorphism given by an integer matrix acting on generator coordinates."""

    domain: FinAbGroup
    codomain: FinAbGroup
    matrix: IntMatrix

    def __post_init__(self):
        matrix = tuple(tuple(int(v) for v in row) for row in self.matrix)
        if len(matrix) != self.codomain.rank or any(len(row) != self.domain.rank for row in matrix):
            raise ShapeMismatch("homomorphism matrix has the wrong shape")
        object.__setattr__(self, "matrix", matrix)
        for i, d in enumerate(self.domain.invariant_factors):
            relation = [d * matrix[k][i] for k in range(self.codomain.rank)]
            if any(self.codomain.normalize(relation)):
                raise WellDefinednessFailure(
                    f"Relation {d}·e_{i} is not mapped to zero", {"generator": i}
                )

    def __call__(self, x: Sequence[int]) -> Element:
        x = self.domain.normalize(x)
        return self.codomain.normalize(
            [sum(row[j] * x[j] for j in range(len(x))) for row in self.matrix]
        )

    def kernel_size(self) -> int:
        zero = self.codomain.zero()
        return sum(1 for x in self.domain.elements() if self(x) == zero)


@dataclass(frozen=True)
class Cokernel:
    """ℤ^r / M·ℤ^r together with the projection from ℤ^r and integer lifts of the generators."""

    group: FinAbGroup
    presentation: IntMatrix
    projection: IntMatrix
    lifts: IntMatrix

    def project(self, vector: Sequence[int]) -> Element:
        if len(vector) != len(self.presentation):
            raise ShapeMismatch("vector does not match the presentation")
        return self.group.normalize(
            [sum(a * int(b) for a, b in zip(row, vector)) for row in self.projection]
        )

    def lift(self, x: Sequence[int]) -> Tuple[int, ...]:
        x = self.group.normalize(x)
        size = len(self.presentation)
        return tuple(sum(x[i] * self.lifts[i][k] for i in range(len(x))) for k in range(size))


def cokernel(M: Sequence[Sequence[int]]) -> Cokernel:
    rows = len(M)
    if any(len(row) != rows for row in M):
        raise ShapeMismatch("cokernel needs a square presentation matrix")
    if integer_det(M) == 0:
        raise SingularMatrix("presentation matrix has zero determinant")
    U, D, _, U_inv = _smith(M)
    keep = [i for i in range(rows) if D[i, i] != 1]
    group = FinAbGroup(tuple(int(D[i, i]) for i in keep))
    logger.debug("cokernel of %dx%d matrix has factors %s", rows, rows, group.invariant_factors)
    return Cokernel(
        group=group,
        presentation=tuple(tuple(int(v) for v in row) for row in M),
        projection=tuple(tuple(int(v) for v in U[i]) for i in keep),
        lifts=tuple(tuple(int(v) for v in U_inv[:, i]) for i in keep),
    )


@dataclass(frozen=True)
class DirectSum:
    """Product of finite abelian groups re-presented in invariant-factor form."""

    group: FinAbGroup
    summands: Tuple[FinAbGroup, ...]
    presentation: Cokernel

    def combine(self, parts: Sequence[Sequence[int]]) -> Element:
        flat: List[int] = []
        for part, summand in zip(parts, self.summands):
            flat.extend(summand.normalize(part))
        return self.presentation.project(flat)

    def split(self, x: Sequence[int]) -> Tuple[Element, ...]:
        flat = self.presentation.lift(x)
        parts, start = [], 0
        for summand in self.summands:
            parts.append(summand.normalize(flat[start:start + summand.rank]))
            start += summand.rank
        return tuple(parts)


def direct_sum(*groups: FinAbGroup) -> DirectSum:
    factors = [d for g in groups for d in g.invariant_factors]
    diagonal = [[d if i == j else 0 for j in range(len(factors))] for i, d in enumerate(factors)]
    presentation = cokernel(diagonal)
    return DirectSum(group=presentation.group, summands=tuple(groups), presentation=presentation)


def char_pairing(group: FinAbGroup, x: Sequence[int], chi: Sequence[int]) -> PhaseQZ:
    """⟨x, χ⟩ = Σ x_i·χ_i / d_i mod 1 under the self-dual presentation."""
    if len(x) != group.rank or len(chi) != group.rank:
        raise ShapeMismatch("element and character must match the invariant factors")
    return PhaseQZ(sum((Fraction(int(a) * int(c), d) for a, c, d in zip(x, chi, group.invariant_factors)), Fraction(0)))


def pairing_radical_witness(
    group: FinAbGroup, pairing: Callable[[Element, Element], PhaseQZ]
) -> Optional[Element]:
    """A nonzero x pairing trivially with every generator, or None when the pairing is perfect."""
    gens = group.generators()
    zero = group.zero()
    for x in group.elements():
        if x != zero and all(pairing(x, g).is_zero() for g in gens):
            return x
    return None


def is_perfect_pairing(group: FinAbGroup, pairing: Callable[[Element, Element], PhaseQZ]) -> bool:
    return pairing_radical_witness(group, pairing) is None
