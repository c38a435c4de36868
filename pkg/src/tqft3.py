"""
Pointed modular data and abelian surgery invariants
S and T matrices of a metric group checked exactly over ℤ[ζ_N], Verlinde counts and fusion,
and the surgery invariant of a 3-manifold presented by a framed-link linking matrix
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .abgroup import Element, integer_det
from .errors import NotEighthRootForm, SchemaError, ShapeMismatch, SingularMatrix, VerificationFailure
from .exactnum import CycloMatrix, CycloValue, EighthRootForm, PhaseQZ, recognize_eighthroot
from .lattice import inertia
from .metric import MetricGroup, gauss_sum, milgram_signature, quadratic_sum, require_nondegenerate

logger = logging.getLogger(__name__)

IntMatrix = Tuple[Tuple[int, ...], ...]


def _phase_tables(M: MetricGroup) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Elements as rows, N·q(x) and N·b(x, y) for every element pair."""
    E = M.group.element_array()
    n = M.denominator
    upper = np.triu(M.b_numerators, k=1) + np.diag(M.q_numerators)
    q = np.einsum("xi,ij,xj->x", E, upper, E) % n
    b = (E @ M.b_numerators @ E.T) % n
    return E, q, b


@dataclass(frozen=True, eq=False)
class PointedMTC:
    """
    Modular data of a nondegenerate metric group.

    S_{xy} = D⁻¹·e(−b(x, y)) and T_{xx} = e(q(x)) with D = √|A|; the matrices are
    stored as exponents of ζ_N with D factored out.
    """

    metric: MetricGroup
    D: EighthRootForm
    c: int
    elements: Tuple[Element, ...]
    s_exponents: np.ndarray
    t_exponents: np.ndarray

    @property
    def order(self) -> int:
        return self.metric.denominator

    @property
    def rank(self) -> int:
        return len(self.elements)

    def s_unnormalized(self) -> CycloMatrix:
        return CycloMatrix.from_exponents(self.order, self.s_exponents)

    def s_entry(self, x: int, y: int) -> CycloValue:
        return CycloValue.root_of_unity(Fraction(int(self.s_exponents[x, y]), self.order)) / self.D.to_cyclo()

    def t_entry(self, x: int) -> CycloValue:
        return CycloValue.root_of_unity(Fraction(int(self.t_exponents[x]), self.order))

    def charge_conjugation(self) -> List[int]:
        index = {e: i for i, e in enumerate(self.elements)}
        return [index[self.metric.group.neg(e)] for e in self.elements]

    def checks(self) -> Dict[str, bool]:
        """
        The modular identities with D factored out, S' = D·S:
        S'·S̄'ᵀ = |A|·I, S'² = |A|·C and (S'T)³ = G·S'² for the Gauss sum G = D·ζ₈^c.
        """
        n, size = self.order, self.rank
        S = self.s_unnormalized()
        scalar = [size] + [0] * (n - 1)

        unitary = S.times_monomial(-self.s_exponents) == CycloMatrix.from_permutation(n, list(range(size))).scale(scalar)
        S2 = S.times_monomial(self.s_exponents)
        conjugation = S2 == CycloMatrix.from_permutation(n, self.charge_conjugation()).scale(scalar)

        st = self.s_exponents + self.t_exponents[None, :]
        ST = CycloMatrix.from_exponents(n, st)
        ST3 = ST.times_monomial(st).times_monomial(st)
        gauss = gauss_sum(self.metric).lift(n)
        gauss_counts = [int(v) for v in gauss.coeffs] + [0] * (n - len(gauss.coeffs))
        modular = ST3 == S2.scale(gauss_counts)
        closed = self.D * EighthRootForm(Fraction(1), 1, 0, self.c)
        return {
            "unitary": unitary,
            "charge_conjugation": conjugation,
            "modular_relation": modular,
            "gauss_closed_form": closed.to_cyclo() == gauss,
        }

    def render(self) -> Dict:
        n = self.order
        return {
            "metric": self.metric.render(),
            "rank": self.rank,
            "D": self.D.render(),
            "central_charge_mod_8": self.c,
            "elements": [list(e) for e in self.elements],
            "S_phases": [[str(PhaseQZ(Fraction(int(v), n))) for v in row] for row in self.s_exponents],
            "T_phases": [str(PhaseQZ(Fraction(int(v), n))) for v in self.t_exponents],
        }


def modular_data(M: MetricGroup, verify: bool = True) -> PointedMTC:
    require_nondegenerate(M)
    E, q, b = _phase_tables(M)
    mtc = PointedMTC(
        metric=M,
        D=EighthRootForm.sqrt_power(M.order, 1),
        c=milgram_signature(M),
        elements=tuple(tuple(int(v) for v in row) for row in E),
        s_exponents=(-b) % M.denominator,
        t_exponents=q,
    )
    if verify:
        failed = [name for name, ok in mtc.checks().items() if not ok]
        if failed:
            raise VerificationFailure(f"modular identities failed: {failed}", {"metric": M.render()})
    logger.debug("modular data of rank %d, c = %d", mtc.rank, mtc.c)
    return mtc


def verlinde_dim(M: MetricGroup, genus: int) -> int:
    """Σ_x S_{0x}^{2−2g} with S_{0x} = D⁻¹·e(−b(0, x)), evaluated exactly."""
    if genus < 0:
        raise ValueError("genus must be nonnegative")
    require_nondegenerate(M)
    E, _, b = _phase_tables(M)
    n = M.denominator
    zero = [i for i, row in enumerate(E) if not row.any()][0]
    power = 2 - 2 * genus
    phases = [Fraction(-int(b[zero, x]) * power, n) for x in range(len(E))]
    total = CycloValue.from_phases(phases) * EighthRootForm.sqrt_power(M.order, -power).to_cyclo()
    if not total.is_rational() or total.to_fraction().denominator != 1:
        raise VerificationFailure("Verlinde sum is not an integer", {"value": total.render()})
    return int(total.to_fraction())


def fusion_coefficients(mtc: PointedMTC) -> np.ndarray:
    """N_{xy}^z = Σ_w S_{xw}S_{yw}S̄_{zw}/S_{0w} = (1/|A|)·Σ_w e(−b(x,w) − b(y,w) + b(z,w))."""
    n, size = mtc.order, mtc.rank
    s = mtc.s_exponents
    pairs = (s[:, None, :] + s[None, :, :]).reshape(size * size, size)
    product = CycloMatrix.from_exponents(n, pairs).times_monomial(-s)
    reduced = product.reduced()
    if reduced[..., 1:].any():
        raise VerificationFailure("fusion coefficients are not rational")
    counts = reduced[..., 0].reshape(size, size, size)
    if (counts % size).any():
        raise VerificationFailure("fusion coefficients are not integers")
    return counts // size


def group_fusion_holds(mtc: PointedMTC) -> bool:
    """N_{xy}^z = δ_{x+y, z}."""
    N = fusion_coefficients(mtc)
    index = {e: i for i, e in enumerate(mtc.elements)}
    group = mtc.metric.group
    expected = np.zeros_like(N)
    for x, ex in enumerate(mtc.elements):
        for y, ey in enumerate(mtc.elements):
            expected[x, y, index[group.add(ex, ey)]] = 1
    return bool(np.array_equal(N, expected))


# ---------------------------------------------------------------------------
# Surgery
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurgeryPresentation:
    """Linking matrix of a framed link in S³; the empty matrix is S³ itself."""

    linking: IntMatrix = ()

    def __post_init__(self):
        B = tuple(tuple(int(v) for v in row) for row in self.linking)
        n = len(B)
        if any(len(row) != n for row in B):
            raise ShapeMismatch("linking matrix must be square")
        if any(B[i][j] != B[j][i] for i in range(n) for j in range(n)):
            raise SchemaError("linking matrix must be symmetric", {"linking": [list(r) for r in B]})
        object.__setattr__(self, "linking", B)

    @property
    def rank(self) -> int:
        return len(self.linking)

    @property
    def signature(self) -> int:
        pos, neg, _ = inertia(self.linking)
        return pos - neg

    def render(self) -> Dict:
        return {"linking": [list(r) for r in self.linking], "signature": self.signature}


def lens_space(p: int) -> SurgeryPresentation:
    """L(p, 1) as surgery on the p-framed unknot."""
    return SurgeryPresentation(((p,),))


def connected_sum(L1: SurgeryPresentation, L2: SurgeryPresentation) -> SurgeryPresentation:
    n, m = L1.rank, L2.rank
    rows = [list(r) + [0] * m for r in L1.linking] + [[0] * n + list(r) for r in L2.linking]
    return SurgeryPresentation(tuple(tuple(r) for r in rows))


def stabilize(L: SurgeryPresentation, sign: int) -> SurgeryPresentation:
    """Blow-up: add a split ±1-framed unknot."""
    if sign not in (1, -1):
        raise ValueError("stabilization sign must be +1 or -1")
    return connected_sum(L, SurgeryPresentation(((sign,),)))


def congruence(L: SurgeryPresentation, E: Sequence[Sequence[int]]) -> SurgeryPresentation:
    """EᵀBE for a unimodular change of basis E (handle slides and reorientations)."""
    n = L.rank
    if len(E) != n or any(len(row) != n for row in E):
        raise ShapeMismatch(f"change of basis must be {n}×{n}")
    if n and abs(integer_det(E)) != 1:
        raise SingularMatrix("change of basis must be unimodular")
    B = np.array(L.linking, dtype=object).reshape(n, n)
    Em = np.array([[int(v) for v in row] for row in E], dtype=object).reshape(n, n)
    return SurgeryPresentation(tuple(tuple(int(v) for v in row) for row in Em.T @ B @ Em))


def elementary_matrix(n: int, i: int, j: int, k: int) -> List[List[int]]:
    """Identity plus k at (i, j), i ≠ j: a handle slide of component j over i, k times."""
    if i == j:
        raise ValueError("elementary matrices need i ≠ j")
    E = [[int(a == b) for b in range(n)] for a in range(n)]
    E[i][j] = k
    return E


def rt_invariant(M: MetricGroup, L: SurgeryPresentation) -> CycloValue:
    """
    Z = D^{−(n+1)}·ζ₈^{−c·σ(B)}·Σ_{x ∈ Aⁿ} e(Σ_i B_ii·q(x_i) + Σ_{i<j} B_ij·b(x_i, x_j)).

    Normalized so that Z(S³) = D⁻¹.
    """
    require_nondegenerate(M)
    c = milgram_signature(M)
    total = quadratic_sum(M, L.linking) if L.rank else CycloValue.rational(1)
    prefactor = EighthRootForm.sqrt_power(M.order, -(L.rank + 1), -c * L.signature)
    return prefactor.to_cyclo() * total


def closed_form(value: CycloValue) -> Optional[EighthRootForm]:
    """The r·√m·ζ₈ˢ form of value when it has one."""
    if value.is_zero():
        return None
    try:
        return recognize_eighthroot(value)
    except NotEighthRootForm:
        return None
