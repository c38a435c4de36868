"""
The invertible four-dimensional anomaly theory of a metric group
Gerbe path integral over H²(X; A) and its Gauss-sum closed form on a small catalog of closed 4-manifolds
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Sequence, Tuple

from .abgroup import Element, integer_det
from .errors import SchemaError, ShapeMismatch, TooLarge
from .exactnum import CycloValue, EighthRootForm, PhaseQZ
from .lattice import E8_GRAM, inertia
from .metric import MetricGroup, b_eval, milgram_signature, q_eval, quadratic_sum

logger = logging.getLogger(__name__)

IntMatrix = Tuple[Tuple[int, ...], ...]

SUM_LIMIT = 10 ** 8

HYPERBOLIC: IntMatrix = ((0, 1), (1, 0))


def _block_sum(*blocks: Sequence[Sequence[int]]) -> IntMatrix:
    size = sum(len(b) for b in blocks)
    rows, offset = [], 0
    for block in blocks:
        for row in block:
            rows.append(tuple([0] * offset + [int(v) for v in row] + [0] * (size - offset - len(block))))
        offset += len(block)
    return tuple(rows)


@dataclass(frozen=True)
class FourManifoldSpec:
    """Closed oriented 4-manifold seen through b₁ and its unimodular intersection form."""

    intersection: IntMatrix = ()
    b1: int = 0
    name: str = ""

    def __post_init__(self):
        Q = tuple(tuple(int(v) for v in row) for row in self.intersection)
        n = len(Q)
        if any(len(row) != n for row in Q):
            raise ShapeMismatch("intersection form must be square")
        if any(Q[i][j] != Q[j][i] for i in range(n) for j in range(n)):
            raise SchemaError("intersection form must be symmetric", {"intersection": [list(r) for r in Q]})
        if n and abs(integer_det(Q)) != 1:
            raise SchemaError("intersection form must be unimodular", {"intersection": [list(r) for r in Q]})
        if self.b1 < 0:
            raise SchemaError("b1 must be nonnegative")
        object.__setattr__(self, "intersection", Q)

    @property
    def b2(self) -> int:
        return len(self.intersection)

    @property
    def euler(self) -> int:
        return 2 - 2 * self.b1 + self.b2

    @property
    def sign(self) -> int:
        pos, neg, _ = inertia(self.intersection)
        return pos - neg

    def render(self) -> Dict:
        return {
            "name": self.name,
            "b1": self.b1,
            "b2": self.b2,
            "euler": self.euler,
            "signature": self.sign,
        }


def _negated(M: Sequence[Sequence[int]]) -> IntMatrix:
    return tuple(tuple(-v for v in row) for row in M)


CATALOG: Dict[str, FourManifoldSpec] = {
    "S4": FourManifoldSpec((), 0, "S4"),
    "CP2": FourManifoldSpec(((1,),), 0, "CP2"),
    "CP2bar": FourManifoldSpec(((-1,),), 0, "CP2bar"),
    "S2xS2": FourManifoldSpec(HYPERBOLIC, 0, "S2xS2"),
    "T4": FourManifoldSpec(_block_sum(HYPERBOLIC, HYPERBOLIC, HYPERBOLIC), 4, "T4"),
    "K3": FourManifoldSpec(
        _block_sum(_negated(E8_GRAM), _negated(E8_GRAM), HYPERBOLIC, HYPERBOLIC, HYPERBOLIC), 0, "K3"
    ),
}


def catalog(name: str) -> FourManifoldSpec:
    if name not in CATALOG:
        raise SchemaError(f"Unknown 4-manifold {name!r}; known: {sorted(CATALOG)}")
    return CATALOG[name]


def connected_sum(X1: FourManifoldSpec, X2: FourManifoldSpec) -> FourManifoldSpec:
    return FourManifoldSpec(
        _block_sum(X1.intersection, X2.intersection), X1.b1 + X2.b1, f"{X1.name}#{X2.name}"
    )


def reverse_orientation(X: FourManifoldSpec) -> FourManifoldSpec:
    return FourManifoldSpec(_negated(X.intersection), X.b1, f"-{X.name}" if X.name else "")


@dataclass(frozen=True)
class GerbeField:
    """A class in H²(X; A) ≅ A^{b₂}, one group element per basis class."""

    c: Tuple[Element, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(tuple(int(v) for v in x) for x in self.c))


def q_X_eval(M: MetricGroup, X: FourManifoldSpec, field: GerbeField) -> PhaseQZ:
    """Σ_i Q_ii·q(c_i) + Σ_{i<j} Q_ij·b(c_i, c_j)."""
    Q, c = X.intersection, field.c
    if len(c) != X.b2:
        raise ShapeMismatch(f"gerbe field needs {X.b2} components, got {len(c)}")
    total = PhaseQZ()
    for i in range(X.b2):
        total = total + q_eval(M, c[i]) * Q[i][i]
        for j in range(i + 1, X.b2):
            if Q[i][j]:
                total = total + b_eval(M, c[i], c[j]) * Q[i][j]
    return total


def partition_sum(M: MetricGroup, X: FourManifoldSpec) -> CycloValue:
    """(#H⁰/#H¹)·Σ_{c ∈ A^{b₂}} e(q_X(c)) with #Hⁱ(X; A) = |A|^{bᵢ}."""
    size = M.order ** X.b2
    if size > SUM_LIMIT:
        raise TooLarge(f"|A|^b2 = {size} exceeds {SUM_LIMIT}", {"order": M.order, "b2": X.b2})
    logger.debug("gerbe sum on %s over %d fields", X.name or "X", size)
    total = quadratic_sum(M, X.intersection) if X.b2 else CycloValue.rational(1)
    return total * Fraction(M.order, M.order ** X.b1)


def partition_closed(M: MetricGroup, X: FourManifoldSpec) -> EighthRootForm:
    """(√|A|)^{χ(X)}·ζ₈^{σ(M)·sign(X)}."""
    sigma = milgram_signature(M)
    return EighthRootForm.sqrt_power(M.order, X.euler, sigma * X.sign)
