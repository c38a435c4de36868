"""
Even lattices and their finite shadows
Discriminant forms, the n-torsion approximation tower, the center of the twisted
skyscraper category and the phase formulas of the torus gerbe (K, L, χ, σ, θ)
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

from .abgroup import Cokernel, Element, FinAbGroup, cokernel, integer_det
from .errors import BadSymmetrization, DegenerateLattice, SchemaError, ShapeMismatch
from .exactnum import PhaseQZ, format_fraction, parse_fraction
from .metric import (
    MetricGroup,
    Subgroup,
    commutant_subgroup,
    form_sign,
    gauss_sum,
    is_nondegenerate,
    metric_from_lifts,
    orthogonal_sum,
    q_eval,
    radical,
    scale_form,
)

logger = logging.getLogger(__name__)

IntMatrix = Tuple[Tuple[int, ...], ...]

E8_GRAM: IntMatrix = (
    (2, 0, -1, 0, 0, 0, 0, 0),
    (0, 2, 0, -1, 0, 0, 0, 0),
    (-1, 0, 2, -1, 0, 0, 0, 0),
    (0, -1, -1, 2, -1, 0, 0, 0),
    (0, 0, 0, -1, 2, -1, 0, 0),
    (0, 0, 0, 0, -1, 2, -1, 0),
    (0, 0, 0, 0, 0, -1, 2, -1),
    (0, 0, 0, 0, 0, 0, -1, 2),
)

BUILTIN_LATTICES: Dict[str, IntMatrix] = {
    "A1": ((2,),),
    "A2": ((2, 1), (1, 2)),
    "E8": E8_GRAM,
    "U": ((0, 1), (1, 0)),
}

_NEGATED = re.compile(r"^(?P<base>[A-Za-z0-9]+)\(-1\)$")


# ---------------------------------------------------------------------------
# Exact symmetric linear algebra
# ---------------------------------------------------------------------------

def _fraction_matrix(M: Sequence[Sequence]) -> List[List[Fraction]]:
    return [[Fraction(v) for v in row] for row in M]


def rational_inverse(M: Sequence[Sequence[int]]) -> Tuple[Tuple[Fraction, ...], ...]:
    """Exact inverse over Q by Gauss-Jordan elimination."""
    n = len(M)
    A = _fraction_matrix(M)
    inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if A[r][col] != 0), None)
        if pivot is None:
            raise DegenerateLattice("matrix is singular over Q", {"matrix": [list(map(int, r)) for r in M]})
        A[col], A[pivot] = A[pivot], A[col]
        inv[col], inv[pivot] = inv[pivot], inv[col]
        p = A[col][col]
        A[col] = [v / p for v in A[col]]
        inv[col] = [v / p for v in inv[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
                inv[r] = [a - f * b for a, b in zip(inv[r], inv[col])]
    return tuple(tuple(row) for row in inv)


def inertia(M: Sequence[Sequence[int]]) -> Tuple[int, int, int]:
    """
    (positive, negative, zero) counts of a symmetric rational matrix.

    Symmetric elimination: a nonzero diagonal pivot contributes its sign; when
    the whole remaining diagonal vanishes, a 2×2 block [[0, a], [a, 0]] contributes
    one positive and one negative direction. The Schur complement carries on.
    """
    A = _fraction_matrix(M)
    n = len(A)
    if any(len(row) != n for row in A):
        raise ShapeMismatch("inertia needs a square matrix")
    if any(A[i][j] != A[j][i] for i in range(n) for j in range(n)):
        raise ShapeMismatch("inertia needs a symmetric matrix")

    pos = neg = 0
    while A:
        size = len(A)
        i = next((k for k in range(size) if A[k][k] != 0), None)
        if i is not None:
            p = A[i][i]
            if p > 0:
                pos += 1
            else:
                neg += 1
            rest = [k for k in range(size) if k != i]
            A = [[A[r][c] - A[r][i] * A[i][c] / p for c in rest] for r in rest]
            continue
        pair = next(((r, c) for r in range(size) for c in range(r + 1, size) if A[r][c] != 0), None)
        if pair is None:
            break
        i, j = pair
        a = A[i][j]
        pos += 1
        neg += 1
        rest = [k for k in range(size) if k not in (i, j)]
        # block inverse of [[0, a], [a, 0]] is [[0, 1/a], [1/a, 0]]
        A = [
            [A[r][c] - (A[r][i] * A[j][c] + A[r][j] * A[i][c]) / a for c in rest]
            for r in rest
        ]
    return pos, neg, len(M) - pos - neg


# ---------------------------------------------------------------------------
# Lattices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvenLattice:
    """ℤ^r with the even symmetric pairing ⟨π, π'⟩ = πᵀGπ'."""

    gram: IntMatrix
    name: str = "lattice"

    def __post_init__(self):
        gram = tuple(tuple(int(v) for v in row) for row in self.gram)
        r = len(gram)
        if any(len(row) != r for row in gram):
            raise ShapeMismatch("Gram matrix must be square")
        if any(gram[i][j] != gram[j][i] for i in range(r) for j in range(r)):
            raise SchemaError("Gram matrix must be symmetric", {"gram": [list(row) for row in gram]})
        if any(gram[i][i] % 2 for i in range(r)):
            raise SchemaError("Gram matrix must have even diagonal", {"gram": [list(row) for row in gram]})
        object.__setattr__(self, "gram", gram)

    @classmethod
    def builtin(cls, name: str) -> "EvenLattice":
        """A named lattice; "X(-1)" negates X and "X+Y" is an orthogonal sum."""
        parts = [p.strip() for p in name.split("+")]
        lattices = []
        for part in parts:
            negated = _NEGATED.match(part)
            base = negated.group("base") if negated else part
            if base not in BUILTIN_LATTICES:
                raise SchemaError(f"Unknown lattice {part!r}; known: {sorted(BUILTIN_LATTICES)}")
            lattice = cls(BUILTIN_LATTICES[base], name=base)
            lattices.append(lattice.negated() if negated else lattice)
        result = lattices[0]
        for other in lattices[1:]:
            result = result.orthogonal_sum(other)
        return cls(result.gram, name=name)

    @property
    def rank(self) -> int:
        return len(self.gram)

    @cached_property
    def det(self) -> int:
        return integer_det(self.gram) if self.rank else 1

    @property
    def is_nondegenerate(self) -> bool:
        return self.det != 0

    def require_nondegenerate(self) -> None:
        if not self.is_nondegenerate:
            raise DegenerateLattice(f"{self.name} has determinant 0", {"gram": [list(r) for r in self.gram]})

    @cached_property
    def gram_inverse(self) -> Tuple[Tuple[Fraction, ...], ...]:
        self.require_nondegenerate()
        return rational_inverse(self.gram)

    def pair(self, x: Sequence, y: Sequence) -> Fraction:
        if len(x) != self.rank or len(y) != self.rank:
            raise ShapeMismatch(f"vectors must have {self.rank} coordinates")
        return sum(
            (Fraction(x[i]) * self.gram[i][j] * Fraction(y[j]) for i in range(self.rank) for j in range(self.rank) if x[i] and y[j]),
            Fraction(0),
        )

    def norm(self, x: Sequence) -> Fraction:
        return self.pair(x, x)

    def tau_inverse(self, lam: Sequence[int]) -> Tuple[Fraction, ...]:
        """G⁻¹λ, the rational point of 𝔱 paired against Λ."""
        inv = self.gram_inverse
        return tuple(sum((inv[i][j] * int(lam[j]) for j in range(self.rank)), Fraction(0)) for i in range(self.rank))

    def dual_pair(self, m: Sequence[int], m2: Sequence[int]) -> Fraction:
        """mᵀG⁻¹m' for covectors m, m'."""
        inv = self.gram_inverse
        return sum(
            (int(m[i]) * inv[i][j] * int(m2[j]) for i in range(self.rank) for j in range(self.rank) if m[i] and m2[j]),
            Fraction(0),
        )

    def negated(self) -> "EvenLattice":
        return EvenLattice(tuple(tuple(-v for v in row) for row in self.gram), name=f"{self.name}(-1)")

    def orthogonal_sum(self, other: "EvenLattice") -> "EvenLattice":
        r, s = self.rank, other.rank
        gram = [list(row) + [0] * s for row in self.gram] + [[0] * r + list(row) for row in other.gram]
        return EvenLattice(gram, name=f"{self.name}+{other.name}")

    def render(self) -> Dict:
        return {"name": self.name, "gram": [list(row) for row in self.gram]}


def signature(L: EvenLattice) -> int:
    L.require_nondegenerate()
    pos, neg, _ = inertia(L.gram)
    return pos - neg


def discriminant_form(L: EvenLattice) -> MetricGroup:
    """F = G⁻¹ℤ^r / ℤ^r as coker(G) with q(m) = ½·mᵀG⁻¹m."""
    L.require_nondegenerate()
    if L.rank == 0:
        return MetricGroup(FinAbGroup(()))
    return metric_from_lifts(cokernel(L.gram), lambda m: L.dual_pair(m, m) / 2)


# ---------------------------------------------------------------------------
# Approximation tower
# ---------------------------------------------------------------------------

def _scaled(gram: IntMatrix, k: int) -> List[List[int]]:
    return [[k * v for v in row] for row in gram]


@dataclass(frozen=True)
class ApproxTower:
    """Level n of the finite approximation: T*₍ₙ₎, T₍ₙF₎ and the metric group 𝔱⁽ⁿ⁾."""

    lattice: EvenLattice
    n: int
    t_star: Cokernel
    t_nf: Cokernel
    t_n: Cokernel
    metric: MetricGroup

    @property
    def f_order(self) -> int:
        return abs(self.lattice.det)

    def cardinalities(self) -> Dict[str, int]:
        return {
            "T_star_n": self.t_star.group.order,
            "T_nF": self.t_nf.group.order,
            "t_n": self.metric.order,
        }

    def expected_cardinalities(self) -> Dict[str, int]:
        r, n, f = self.lattice.rank, self.n, self.f_order
        return {"T_star_n": n ** r, "T_nF": f * n ** r, "t_n": f * n ** (2 * r)}

    def render(self) -> Dict:
        return {
            "n": self.n,
            "rank": self.lattice.rank,
            "det": self.lattice.det,
            "T_star_n": self.t_star.group.render(),
            "T_nF": self.t_nf.group.render(),
            "t_n": self.metric.render(),
            "cardinalities": self.cardinalities(),
            "expected_cardinalities": self.expected_cardinalities(),
        }


def approximation_tower(L: EvenLattice, n: int) -> ApproxTower:
    if n < 1:
        raise ValueError("tower level n must be positive")
    L.require_nondegenerate()
    r = L.rank
    identity = [[n if i == j else 0 for j in range(r)] for i in range(r)]
    if r == 0:
        trivial = cokernel([[1]])
        return ApproxTower(L, n, trivial, trivial, trivial, MetricGroup(FinAbGroup(())))
    t_star = cokernel(identity)
    t_nf = cokernel(_scaled(L.gram, n))
    t_n = cokernel(_scaled(L.gram, n * n))
    metric = metric_from_lifts(t_n, lambda m: L.dual_pair(m, m) / (2 * n * n))
    logger.debug("tower level %d of %s: |t_n| = %d", n, L.name, metric.order)
    return ApproxTower(L, n, t_star, t_nf, t_n, metric)


@dataclass(frozen=True)
class DualityReport:
    ok: bool
    order: int
    witness: Optional[Element] = None

    def render(self) -> Dict:
        return {"ok": self.ok, "order": self.order, "witness": list(self.witness) if self.witness is not None else None}


def duality_check(tower: ApproxTower) -> DualityReport:
    """Whether b on 𝔱⁽ⁿ⁾ is perfect, with a radical element when it is not."""
    rad = [x for x in radical(tower.metric) if any(x)]
    return DualityReport(ok=not rad, order=tower.metric.order, witness=rad[0] if rad else None)


# ---------------------------------------------------------------------------
# Drinfeld center of the twisted skyscraper category
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CenterForm:
    """
    The metric group C of simple objects with its two orthogonal factors.

    metric is presented as (ℤ^r ⊕ ℤ^r)/P with P = [[0, nG], [nG, G]] on pairs
    (m, λ) standing for ξ = G⁻¹m/n, with q_C(m, λ) the phase of θ. product is
    the same group assembled as (−q_𝔱) ⊕ q_F.
    """

    lattice: EvenLattice
    n: int
    metric: MetricGroup
    presentation: Cokernel
    factor_t: Subgroup
    factor_F: Subgroup
    product: MetricGroup
    sign_t: Optional[int]
    sign_F: Optional[int]

    def checks(self) -> Dict[str, bool]:
        expected_order = self.lattice.det ** 2 * self.n ** (2 * self.lattice.rank)
        cross = all(
            not self._b(x, y) for x in self.factor_t.generators for y in self.factor_F.generators
        )
        return {
            "order": self.metric.order == expected_order,
            "nondegenerate": is_nondegenerate(self.metric),
            "factors_orthogonal": cross,
            "commutant_of_t_is_F": commutant_subgroup(self.metric, self.factor_t) == self.factor_F,
            "commutant_of_F_is_t": commutant_subgroup(self.metric, self.factor_F) == self.factor_t,
            "product_order_agrees": self.product.order == self.metric.order,
            "product_gauss_sum_agrees": gauss_sum(self.product) == gauss_sum(self.metric),
        }

    def _b(self, x: Element, y: Element) -> int:
        return self.metric.b_int(x, y)

    def render(self) -> Dict:
        return {
            "lattice": self.lattice.render(),
            "n": self.n,
            "C": self.metric.render(),
            "order": self.metric.order,
            "factor_t": {"order": self.factor_t.order, "generators": [list(g) for g in self.factor_t.generators]},
            "factor_F": {"order": self.factor_F.order, "generators": [list(g) for g in self.factor_F.generators]},
            "sign_pattern": {"t": self.sign_t, "F": self.sign_F},
        }


def center_form(L: EvenLattice, n: int) -> CenterForm:
    tower = approximation_tower(L, n)
    disc = discriminant_form(L)
    r = L.rank
    if r == 0:
        trivial = MetricGroup(FinAbGroup(()))
        empty = Subgroup(trivial, ())
        return CenterForm(L, n, trivial, cokernel([[1]]), empty, empty, trivial, 1, 1)

    nG = _scaled(L.gram, n)
    presentation = [
        [0] * r + nG[i] for i in range(r)
    ] + [
        nG[i] + list(L.gram[i]) for i in range(r)
    ]
    quotient = cokernel(presentation)

    def theta(v: Sequence[int]) -> Fraction:
        m, lam = v[:r], v[r:]
        return L.dual_pair(lam, m) / n - L.dual_pair(m, m) / (2 * n * n)

    metric = metric_from_lifts(quotient, theta)

    def image_t(m: Sequence[int]) -> Element:
        return quotient.project(list(m) + [0] * r)

    def image_F(lam: Sequence[int]) -> Element:
        return quotient.project([n * v for v in lam] + list(lam))

    factor_t = Subgroup(metric, tuple(image_t(tower.t_n.lifts[i]) for i in range(tower.metric.group.rank)))
    disc_pres = cokernel(L.gram)
    factor_F = Subgroup(metric, tuple(image_F(lift) for lift in disc_pres.lifts))

    sign_t = form_sign(
        metric, ((image_t(tower.t_n.lift(x)), q_eval(tower.metric, x)) for x in tower.metric.group.elements())
    )
    sign_F = form_sign(
        metric, ((image_F(disc_pres.lift(x)), q_eval(disc, x)) for x in disc.group.elements())
    )
    product = orthogonal_sum(scale_form(tower.metric, -1), disc)
    logger.debug("center of %s at level %d: |C| = %d, signs t=%s F=%s", L.name, n, metric.order, sign_t, sign_F)
    return CenterForm(L, n, metric, quotient, factor_t, factor_F, product, sign_t, sign_F)


# ---------------------------------------------------------------------------
# Phase formulas on rational points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalPoint:
    """A lift ξ ∈ ℚ^r of a point of T = 𝔱/Π."""

    lift: Tuple[Fraction, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "lift", tuple(Fraction(v) for v in self.lift))

    @classmethod
    def parse(cls, values: Sequence) -> "RationalPoint":
        return cls(tuple(parse_fraction(v) if isinstance(v, str) else Fraction(v) for v in values))

    @classmethod
    def zero(cls, rank: int) -> "RationalPoint":
        return cls((Fraction(0),) * rank)

    def __add__(self, other: "RationalPoint") -> "RationalPoint":
        return RationalPoint(tuple(a + b for a, b in zip(self.lift, other.lift)))

    def __sub__(self, other: "RationalPoint") -> "RationalPoint":
        return RationalPoint(tuple(a - b for a, b in zip(self.lift, other.lift)))

    def shift(self, pi: Sequence[int]) -> "RationalPoint":
        return RationalPoint(tuple(a + int(p) for a, p in zip(self.lift, pi)))

    def scaled(self, k: Fraction) -> "RationalPoint":
        return RationalPoint(tuple(a * k for a in self.lift))

    def render(self) -> List[str]:
        return [format_fraction(v) for v in self.lift]


def default_B(L: EvenLattice) -> IntMatrix:
    """Upper-triangular B with B + Bᵀ = G: B_ii = G_ii/2, B_ij = G_ij for i < j."""
    r = L.rank
    return tuple(
        tuple(L.gram[i][i] // 2 if i == j else (L.gram[i][j] if i < j else 0) for j in range(r))
        for i in range(r)
    )


def check_symmetrization(L: EvenLattice, B: Sequence[Sequence[int]]) -> IntMatrix:
    r = L.rank
    if len(B) != r or any(len(row) != r for row in B):
        raise ShapeMismatch(f"B must be {r}×{r}")
    B = tuple(tuple(int(v) for v in row) for row in B)
    if any(B[i][j] + B[j][i] != L.gram[i][j] for i in range(r) for j in range(r)):
        raise BadSymmetrization("B + Bᵀ differs from the Gram matrix", {"B": [list(row) for row in B]})
    return B


def _bilinear(B: IntMatrix, x: Sequence, y: Sequence) -> Fraction:
    return sum(
        (Fraction(x[i]) * B[i][j] * Fraction(y[j]) for i in range(len(B)) for j in range(len(B)) if x[i] and y[j]),
        Fraction(0),
    )


def cocycle_phase_K(
    L: EvenLattice,
    B: Sequence[Sequence[int]],
    x: RationalPoint,
    y: RationalPoint,
    pi: Sequence[int],
    pi2: Sequence[int],
) -> PhaseQZ:
    """(B(π, ξ') − B(ξ, π') + B(π, π'))/2, the multiplier of (π, π'): K_{ξ,ξ'} → K_{ξ+π,ξ'+π'}."""
    B = check_symmetrization(L, B)
    xi, xi2 = x.lift, y.lift
    return PhaseQZ.of((_bilinear(B, pi, xi2) - _bilinear(B, xi, pi2) + _bilinear(B, pi, pi2)) / 2)


def commutator_phase_L(
    L: EvenLattice, x: RationalPoint, y: RationalPoint, pi: Sequence[int], pi2: Sequence[int]
) -> PhaseQZ:
    """(⟨π, ξ'⟩ − ⟨ξ, π'⟩ + ⟨π, π'⟩)/2."""
    return PhaseQZ.of((L.pair(pi, y.lift) - L.pair(x.lift, pi2) + L.pair(pi, pi2)) / 2)


def antisymmetrized_K(
    L: EvenLattice,
    B: Sequence[Sequence[int]],
    x: RationalPoint,
    y: RationalPoint,
    pi: Sequence[int],
    pi2: Sequence[int],
) -> PhaseQZ:
    """K(x, y; π, π') − K(y, x; π', π); agrees with the commutator phase L for every admissible B."""
    return cocycle_phase_K(L, B, x, y, pi, pi2) - cocycle_phase_K(L, B, y, x, pi2, pi)


def splitting_character(L: EvenLattice, xi: RationalPoint, lam: Sequence[int], xi2: RationalPoint) -> PhaseQZ:
    """χ_(ξ,λ)(ξ') = ⟨G⁻¹λ − ξ/2, ξ'⟩."""
    shifted = RationalPoint(L.tau_inverse(lam)) - xi.scaled(Fraction(1, 2))
    return PhaseQZ.of(L.pair(shifted.lift, xi2.lift))


def s_map(L: EvenLattice, lam: Sequence[int]) -> Tuple[RationalPoint, Tuple[int, ...]]:
    """s(λ) = (G⁻¹λ, λ)."""
    lam = tuple(int(v) for v in lam)
    return RationalPoint(L.tau_inverse(lam)), lam


def braiding_phase(L: EvenLattice, xi: RationalPoint, xi2: RationalPoint) -> PhaseQZ:
    """σ(ξ, ξ') = −⟨ξ, ξ'⟩/2."""
    return PhaseQZ.of(-L.pair(xi.lift, xi2.lift) / 2)


def ribbon_theta(L: EvenLattice, xi: RationalPoint, lam: Sequence[int]) -> PhaseQZ:
    """(‖G⁻¹λ‖² − ‖ξ − G⁻¹λ‖²)/2."""
    point = RationalPoint(L.tau_inverse(lam))
    return PhaseQZ.of((L.norm(point.lift) - L.norm((xi - point).lift)) / 2)
