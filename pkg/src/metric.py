"""
Metric groups: finite abelian groups with a Q/Z-valued homogeneous quadratic form
Gauss sums, Milgram signature, orthogonal sums, commutants and Heisenberg algebras
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .abgroup import Cokernel, Element, FinAbGroup, direct_sum
from .dw import solve_phase_graph
from .errors import DegenerateForm, NotEighthRootForm, ShapeMismatch, VerificationFailure, WellDefinednessFailure
from .exactnum import CycloValue, EighthRootForm, PhaseQZ, lcm, recognize_eighthroot
from .parallel import fold_ranges

logger = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 10_000
INNER_BLOCK = 1 << 16
BATCH_CELLS = 1 << 20


@dataclass(frozen=True)
class MetricGroup:
    """Finite abelian group with quadratic form given by q(e_i) and b(e_i, e_j) for i < j."""

    group: FinAbGroup
    q_diag: Tuple[PhaseQZ, ...] = ()
    b_off: Tuple[Tuple[PhaseQZ, ...], ...] = ()

    def __post_init__(self):
        r = self.group.rank
        q_diag = tuple(PhaseQZ.of(v) for v in self.q_diag)
        if len(q_diag) != r:
            raise ShapeMismatch(f"q_diag needs {r} entries, got {len(q_diag)}")
        rows = [tuple(PhaseQZ.of(v) for v in row) for row in self.b_off]
        rows += [()] * (r - len(rows))
        if len(rows) != r or any(len(rows[i]) != r - i - 1 for i in range(r)):
            raise ShapeMismatch("b_off must list b(e_i, e_j) for j > i, one row per generator")
        object.__setattr__(self, "q_diag", q_diag)
        object.__setattr__(self, "b_off", tuple(rows))

        factors = self.group.invariant_factors
        for i, d in enumerate(factors):
            q = q_diag[i].value
            if (d * d * q) % 1 or (2 * d * q) % 1:
                raise WellDefinednessFailure(
                    f"q(e_{i}) = {q_diag[i]} is not compatible with order {d}", {"generator": i}
                )
            for j in range(i + 1, r):
                b = self.b_off[i][j - i - 1].value
                if (d * b) % 1 or (factors[j] * b) % 1:
                    raise WellDefinednessFailure(
                        f"b(e_{i}, e_{j}) = {self.b_off[i][j - i - 1]} is not compatible with the group orders",
                        {"pair": [i, j]},
                    )

    @classmethod
    def from_strings(cls, factors: Sequence[int], q_diag: Sequence[str], b_off: Sequence[Sequence[str]] = ()) -> "MetricGroup":
        return cls(FinAbGroup(tuple(factors)), tuple(q_diag), tuple(tuple(row) for row in b_off))

    @classmethod
    def from_quadratic(cls, group: FinAbGroup, fn: Callable[[Element], Fraction]) -> "MetricGroup":
        """Metric group from a quadratic function on elements, read off on generators."""
        gens = group.generators()
        q_diag = tuple(PhaseQZ.of(fn(g)) for g in gens)
        b_off = tuple(
            tuple(
                PhaseQZ.of(fn(group.add(gens[i], gens[j])) - fn(gens[i]) - fn(gens[j]))
                for j in range(i + 1, group.rank)
            )
            for i in range(group.rank)
        )
        return cls(group, q_diag, b_off)

    @property
    def order(self) -> int:
        return self.group.order

    def b_gen(self, i: int, j: int) -> PhaseQZ:
        if i == j:
            return self.q_diag[i] * 2
        if i > j:
            i, j = j, i
        return self.b_off[i][j - i - 1]

    @cached_property
    def denominator(self) -> int:
        n = 1
        for v in self.q_diag:
            n = lcm(n, v.value.denominator)
        for row in self.b_off:
            for v in row:
                n = lcm(n, v.value.denominator)
        return n

    @cached_property
    def q_numerators(self) -> np.ndarray:
        n = self.denominator
        return np.array([int(v.value * n) for v in self.q_diag], dtype=np.int64)

    @cached_property
    def b_numerators(self) -> np.ndarray:
        """Symmetric integer matrix of b(e_i, e_j)·N (diagonal 2·q(e_i)·N)."""
        n, r = self.denominator, self.group.rank
        out = np.zeros((r, r), dtype=np.int64)
        for i in range(r):
            for j in range(r):
                out[i, j] = int(self.b_gen(i, j).value * n) % n
        return out

    def q_int(self, x: Sequence[int]) -> int:
        """N·q(x) mod N for the common denominator N."""
        n = self.denominator
        total = sum(int(q) * x[i] * x[i] for i, q in enumerate(self.q_numerators))
        r = self.group.rank
        for i in range(r):
            for j in range(i + 1, r):
                total += int(self.b_numerators[i, j]) * x[i] * x[j]
        return total % n

    def b_int(self, x: Sequence[int], y: Sequence[int]) -> int:
        n, r = self.denominator, self.group.rank
        total = 0
        for i in range(r):
            if x[i]:
                for j in range(r):
                    if y[j]:
                        total += int(self.b_numerators[i, j]) * x[i] * y[j]
        return total % n

    def render(self) -> Dict:
        return {
            "factors": list(self.group.invariant_factors),
            "q_diag": [str(v) for v in self.q_diag],
            "b_off": [[str(v) for v in row] for row in self.b_off],
        }


def q_eval(M: MetricGroup, x: Sequence[int]) -> PhaseQZ:
    x = M.group.normalize(x)
    return PhaseQZ(Fraction(M.q_int(x), M.denominator))


def b_eval(M: MetricGroup, x: Sequence[int], y: Sequence[int]) -> PhaseQZ:
    x, y = M.group.normalize(x), M.group.normalize(y)
    return PhaseQZ(Fraction(M.b_int(x, y), M.denominator))


def scale_form(M: MetricGroup, k: int) -> MetricGroup:
    """The same group with q replaced by k·q."""
    return MetricGroup(
        M.group,
        tuple(v * k for v in M.q_diag),
        tuple(tuple(v * k for v in row) for row in M.b_off),
    )


# ---------------------------------------------------------------------------
# Exhaustive quadratic phase counts
# ---------------------------------------------------------------------------

def quadratic_phase_counts(upper: np.ndarray, radices: Sequence[int], order: int) -> np.ndarray:
    """
    counts[k] = #{x in Π ℤ/radices : xᵀ·upper·x ≡ k mod order}.

    upper is an integer matrix whose upper triangle (diagonal included) holds the
    coefficients of the quadratic polynomial; the form must be well defined on the box.
    """
    radices = [int(d) for d in radices]
    n = len(radices)
    upper = np.triu(np.asarray(upper, dtype=np.int64).reshape(n, n)) % order
    if n == 0:
        counts = np.zeros(order, dtype=np.int64)
        counts[0] = 1
        return counts

    split, inner_size = n, 1
    while split > 0 and (inner_size * radices[split - 1] <= INNER_BLOCK or split == n):
        split -= 1
        inner_size *= radices[split]
    inner_idx, outer_idx = np.arange(split, n), np.arange(split)
    inner_radices = radices[split:]
    outer_radices = radices[:split]

    X_in = np.stack(np.unravel_index(np.arange(inner_size), inner_radices), axis=1).astype(np.int64)
    U_ii = upper[np.ix_(inner_idx, inner_idx)]
    v_in = ((X_in @ U_ii) * X_in).sum(axis=1) % order
    U_oo = upper[np.ix_(outer_idx, outer_idx)]
    cross = (upper[np.ix_(outer_idx, inner_idx)] + upper[np.ix_(inner_idx, outer_idx)].T) % order
    X_in_t = X_in.T.copy()

    outer_total = int(np.prod(outer_radices)) if outer_radices else 1
    batch = max(1, BATCH_CELLS // inner_size)
    logger.debug("phase count over %d x %d cells (order %d)", outer_total, inner_size, order)

    def work(start: int, stop: int) -> np.ndarray:
        counts = np.zeros(order, dtype=np.int64)
        for lo in range(start, stop, batch):
            hi = min(stop, lo + batch)
            if outer_radices:
                O = np.stack(np.unravel_index(np.arange(lo, hi), outer_radices), axis=1).astype(np.int64)
            else:
                O = np.zeros((hi - lo, 0), dtype=np.int64)
            v_out = ((O @ U_oo) * O).sum(axis=1) % order
            L = (O @ cross) % order
            values = (v_out[:, None] + v_in[None, :] + L @ X_in_t) % order
            counts += np.bincount(values.reshape(-1), minlength=order)
        return counts

    return fold_ranges(outer_total, work)


def power_form(M: MetricGroup, Q: Sequence[Sequence[int]]) -> np.ndarray:
    """Upper coefficient matrix of c ↦ Σ Q_ii·q(c_i) + Σ_{i<j} Q_ij·b(c_i, c_j) on A^m, scaled by N."""
    m, r = len(Q), M.group.rank
    qn, bn = M.q_numerators, M.b_numerators
    out = np.zeros((m * r, m * r), dtype=np.int64)
    for i in range(m):
        for a in range(r):
            out[i * r + a, i * r + a] = int(Q[i][i]) * int(qn[a])
            for b in range(a + 1, r):
                out[i * r + a, i * r + b] = int(Q[i][i]) * int(bn[a, b])
        for j in range(i + 1, m):
            if Q[i][j]:
                for a in range(r):
                    for b in range(r):
                        out[i * r + a, j * r + b] = int(Q[i][j]) * int(bn[a, b])
    return out % M.denominator


def quadratic_sum(M: MetricGroup, Q: Sequence[Sequence[int]]) -> CycloValue:
    """Σ_{c ∈ A^m} e(Σ_i Q_ii·q(c_i) + Σ_{i<j} Q_ij·b(c_i, c_j)) exactly."""
    radices = list(M.group.invariant_factors) * len(Q)
    counts = quadratic_phase_counts(power_form(M, Q), radices, M.denominator)
    return CycloValue.from_counts(M.denominator, [int(c) for c in counts])


def gauss_sum(M: MetricGroup) -> CycloValue:
    return quadratic_sum(M, [[1]])


def milgram_signature(M: MetricGroup) -> int:
    """σ mod 8 with Σ_x e(q(x)) = √|A|·ζ₈^σ."""
    total = gauss_sum(M)
    try:
        form = recognize_eighthroot(total)
    except NotEighthRootForm as e:
        raise DegenerateForm("Gauss sum has no closed form; q is degenerate", {"metric": M.render()}) from e
    magnitude_sq = form.rational ** 2 * (form.radicand if form.half_power else 1)
    if magnitude_sq != M.order:
        raise DegenerateForm(
            f"|Gauss sum|² = {magnitude_sq} differs from |A| = {M.order}", {"metric": M.render()}
        )
    return form.eighth


def gauss_closed_form(M: MetricGroup) -> EighthRootForm:
    return EighthRootForm.sqrt_power(M.order, 1, milgram_signature(M))


# ---------------------------------------------------------------------------
# Radical and nondegeneracy
# ---------------------------------------------------------------------------

def radical(M: MetricGroup) -> List[Element]:
    """All x with b(x, y) = 0 for every y, by exhaustion."""
    E = M.group.element_array()
    values = (E @ M.b_numerators) % M.denominator
    mask = ~values.any(axis=1)
    return [tuple(int(v) for v in row) for row in E[mask]]


def is_nondegenerate(M: MetricGroup) -> bool:
    if M.order <= EXHAUSTIVE_LIMIT:
        return len(radical(M)) == 1
    logger.warning("deciding nondegeneracy of a group of order %d by the Milgram magnitude test", M.order)
    try:
        milgram_signature(M)
    except DegenerateForm:
        return False
    return True


def require_nondegenerate(M: MetricGroup) -> None:
    if not is_nondegenerate(M):
        raise DegenerateForm("bilinear form has a nontrivial radical", {"metric": M.render()})


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------

def metric_from_lifts(presentation: Cokernel, fn: Callable[[Sequence[int]], Fraction]) -> MetricGroup:
    """
    Metric group on a cokernel from a rational quadratic form fn on ℤ^r.

    fn must vanish mod 1 on relation columns and pair integrally with them.
    """
    size = len(presentation.presentation)
    columns = [tuple(presentation.presentation[i][j] for i in range(size)) for j in range(size)]
    basis = [tuple(1 if i == k else 0 for i in range(size)) for k in range(size)]

    def polar(u, v):
        w = tuple(a + b for a, b in zip(u, v))
        return fn(w) - fn(u) - fn(v)

    for col in columns:
        if Fraction(fn(col)) % 1:
            raise WellDefinednessFailure("quadratic form does not vanish on a relation", {"relation": list(col)})
        for v in basis:
            if Fraction(polar(col, v)) % 1:
                raise WellDefinednessFailure(
                    "quadratic form does not descend to the quotient", {"relation": list(col), "direction": list(v)}
                )

    lifts = presentation.lifts
    rank = presentation.group.rank
    q_diag = tuple(PhaseQZ.of(fn(lifts[i])) for i in range(rank))
    b_off = tuple(
        tuple(PhaseQZ.of(polar(lifts[i], lifts[j])) for j in range(i + 1, rank))
        for i in range(rank)
    )
    return MetricGroup(presentation.group, q_diag, b_off)


def orthogonal_sum(M1: MetricGroup, M2: MetricGroup) -> MetricGroup:
    ds = direct_sum(M1.group, M2.group)

    def fn(x):
        a, b = ds.split(x)
        return q_eval(M1, a).value + q_eval(M2, b).value

    return MetricGroup.from_quadratic(ds.group, fn)


# ---------------------------------------------------------------------------
# Subgroups
# ---------------------------------------------------------------------------

def _span(group: FinAbGroup, generators: Iterable[Element]) -> FrozenSet[Element]:
    span = {group.zero()}
    for g in generators:
        g = group.normalize(g)
        if g in span:
            continue
        multiples = [group.scale(k, g) for k in range(group.exponent)]
        span = {group.add(s, m) for s in span for m in multiples}
    return frozenset(span)


@dataclass(frozen=True, eq=False)
class Subgroup:
    """Span of a list of elements of a metric group."""

    parent: MetricGroup
    generators: Tuple[Element, ...]
    elements: FrozenSet[Element] = field(default=frozenset(), repr=False)

    def __post_init__(self):
        gens = tuple(self.parent.group.normalize(g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "elements", _span(self.parent.group, gens))

    @classmethod
    def from_elements(cls, parent: MetricGroup, elements: Iterable[Element]) -> "Subgroup":
        """Subgroup spanned by elements, with a greedily chosen generating list."""
        gens: List[Element] = []
        span = {parent.group.zero()}
        for x in sorted(elements):
            if x not in span:
                gens.append(x)
                span = set(_span(parent.group, gens))
        return cls(parent, tuple(gens))

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, x) -> bool:
        return tuple(x) in self.elements

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.parent.group == other.parent.group and self.elements == other.elements

    def __hash__(self) -> int:
        return hash(self.elements)


def commutant_subgroup(M: MetricGroup, S: Subgroup) -> Subgroup:
    """{x : b(x, s) = 0 for all s in S}."""
    E = M.group.element_array()
    if S.generators:
        gens = np.array(S.generators, dtype=np.int64).reshape(len(S.generators), M.group.rank)
        values = (E @ M.b_numerators @ gens.T) % M.denominator
        mask = ~values.any(axis=1)
    else:
        mask = np.ones(len(E), dtype=bool)
    return Subgroup.from_elements(M, (tuple(int(v) for v in row) for row in E[mask]))


def form_sign(M: MetricGroup, pairs: Iterable[Tuple[Element, PhaseQZ]]) -> Optional[int]:
    """+1 or −1 when q_M(x) = ±ref for every (x, ref) pair, otherwise None."""
    signs = {1, -1}
    for x, ref in pairs:
        value = q_eval(M, x)
        if value != ref:
            signs.discard(1)
        if value != -ref:
            signs.discard(-1)
        if not signs:
            return None
    return 1 if 1 in signs else -1


# ---------------------------------------------------------------------------
# Heisenberg algebras
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HeisenbergSummary:
    algebra_dim: int
    center_dim: int
    irrep_dim: int

    def render(self) -> Dict:
        return {"algebra_dim": self.algebra_dim, "center_dim": self.center_dim, "irrep_dim": self.irrep_dim}


def heisenberg_summary(M: MetricGroup, genus: int) -> HeisenbergSummary:
    """
    Twisted group algebra of A^{2g} with cocycle ε((a,b),(a',b')) = e(Σ_i b(a_i, b'_i)).

    The center is found by solving the centrality equations exactly on the
    phase-labelled graph of basis vectors.
    """
    if genus < 0:
        raise ValueError("genus must be nonnegative")
    require_nondegenerate(M)
    if genus == 0:
        return HeisenbergSummary(1, 1, 1)

    A = M.group
    n = M.denominator
    copies = 2 * genus
    radices = list(A.invariant_factors) * copies
    r = A.rank

    def parts(u):
        return [u[k * r:(k + 1) * r] for k in range(copies)]

    def cocycle(u, v) -> int:
        pu, pv = parts(u), parts(v)
        return sum(M.b_int(pu[i], pv[genus + i]) for i in range(genus)) % n

    generators = []
    for k in range(copies):
        for a in range(r):
            gen = [0] * (r * copies)
            gen[k * r + a] = 1
            generators.append(tuple(gen))

    nodes = [tuple(int(v) for v in x) for x in np.ndindex(*radices)] if radices else [()]
    edges = []
    for u in nodes:
        for y in generators:
            defect = (cocycle(u, y) - cocycle(y, u)) % n
            edges.append((u, u, Fraction(defect, n)))
    center_dim = len(solve_phase_graph(nodes, edges))
    algebra_dim = len(nodes)
    irrep_sq, rem = divmod(algebra_dim, center_dim)
    irrep_dim = math.isqrt(irrep_sq)
    if rem or irrep_dim * irrep_dim != irrep_sq:
        raise VerificationFailure(
            "Heisenberg algebra is not a sum of equal matrix blocks",
            {"algebra_dim": algebra_dim, "center_dim": center_dim},
        )
    return HeisenbergSummary(algebra_dim, center_dim, irrep_dim)
