"""
Finite groupoids and the finite path integral in dimension one
Action groupoids Γ⋉S, groupoid cardinality, limits of local systems (invariant sections)
and pushforward along correspondences, with the gauge-theory instances on the point,
interval and circle
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .dw import FiniteGroup, builtin_group, character_values, direct_product
from .errors import IncompatibleSystems, NonIntegerDimension, ShapeMismatch, TooLarge
from .exactnum import CycloValue, PhaseQZ, as_cyclo, cyclo_rref

logger = logging.getLogger(__name__)

Matrix = List[List[CycloValue]]

FIBER_PRODUCT_LIMIT = 10 ** 7
FUNCTORIALITY_CHECK_LIMIT = 10 ** 5

_ZERO = CycloValue.rational(0)
_ONE = CycloValue.rational(1)


def _identity_matrix(size: int) -> Matrix:
    return [[_ONE if i == j else _ZERO for j in range(size)] for i in range(size)]


def _matmul(a: Matrix, b: Matrix, rows: int, inner: int, cols: int) -> Matrix:
    out = [[_ZERO for _ in range(cols)] for _ in range(rows)]
    for i in range(rows):
        for k in range(inner):
            if a[i][k].is_zero():
                continue
            for j in range(cols):
                if not b[k][j].is_zero():
                    out[i][j] = out[i][j] + a[i][k] * b[k][j]
    return out


def _matrix_equal(a: Matrix, b: Matrix) -> bool:
    return len(a) == len(b) and all(len(r) == len(s) and all(x == y for x, y in zip(r, s)) for r, s in zip(a, b))


# ---------------------------------------------------------------------------
# Cardinality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PiTower:
    """Per component, the orders [#π₁, #π₂, ...] of its homotopy groups."""

    components: Tuple[Tuple[int, ...], ...] = ()

    def __post_init__(self):
        components = tuple(tuple(int(v) for v in comp) for comp in self.components)
        if any(v < 1 for comp in components for v in comp):
            raise ValueError("homotopy group orders must be positive")
        object.__setattr__(self, "components", components)

    def render(self) -> Dict:
        return {"components": [list(c) for c in self.components]}


def groupoid_cardinality(t: PiTower) -> Fraction:
    """Σ over components of Π_i (#π_i)^{(−1)^i}."""
    total = Fraction(0)
    for comp in t.components:
        term = Fraction(1)
        for i, size in enumerate(comp, start=1):
            term *= Fraction(size) if i % 2 == 0 else Fraction(1, size)
        total += term
    return total


# ---------------------------------------------------------------------------
# Action groupoids
# ---------------------------------------------------------------------------

class ActionGroupoid:
    """Γ⋉S for a finite group Γ acting on points 0..|S|-1 through action[γ, s]."""

    def __init__(self, group: FiniteGroup, points: Sequence[Any], action: Sequence[Sequence[int]], name: str = "groupoid", check: bool = True):
        self.group = group
        self.points = tuple(points)
        self.action = np.asarray(action, dtype=np.int64).reshape(group.order, len(self.points))
        self.name = name
        if check:
            self._check_axioms()

    def _check_axioms(self) -> None:
        n = len(self.points)
        if n and (self.action.min() < 0 or self.action.max() >= n):
            raise ShapeMismatch(f"{self.name}: action table must map points to points")
        if not np.array_equal(self.action[self.group.identity], np.arange(n)):
            raise ShapeMismatch(f"{self.name}: identity must act trivially")
        # (gh)·s = g·(h·s)
        composed = self.action[self.group.table]
        stacked = self.action[:, self.action]
        if not np.array_equal(composed, stacked):
            raise ShapeMismatch(f"{self.name}: action is not compatible with multiplication")

    @classmethod
    def from_func(cls, group: FiniteGroup, points: Sequence[Any], act: Callable[[int, int], int], name: str = "groupoid") -> "ActionGroupoid":
        table = [[act(g, s) for s in range(len(points))] for g in range(group.order)]
        return cls(group, points, table, name=name)

    @property
    def size(self) -> int:
        return len(self.points)

    def act(self, g: int, s: int) -> int:
        return int(self.action[g, s])

    def stabilizer(self, s: int) -> List[int]:
        return [g for g in range(self.group.order) if self.action[g, s] == s]

    def orbits(self) -> List[List[int]]:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.size))
        for g in self.group.generating_set():
            graph.add_edges_from((s, int(self.action[g, s])) for s in range(self.size))
        return sorted(sorted(c) for c in nx.connected_components(graph))

    def pi_tower(self) -> PiTower:
        return PiTower(tuple((len(self.stabilizer(orbit[0])),) for orbit in self.orbits()))

    def cardinality(self) -> Fraction:
        return groupoid_cardinality(self.pi_tower())

    def render(self) -> Dict:
        return {
            "name": self.name,
            "group": self.group.name,
            "objects": self.size,
            "orbits": len(self.orbits()),
            "pi_tower": self.pi_tower().render(),
        }

    def __repr__(self) -> str:
        return f"ActionGroupoid({self.name}, |Γ|={self.group.order}, |S|={self.size})"


def bun_groupoid(manifold: str, G: FiniteGroup) -> ActionGroupoid:
    """G-bundles on "pt" (*/G) or on "circle" (G//G by conjugation)."""
    if manifold == "pt":
        return ActionGroupoid(G, [None], [[0] for _ in range(G.order)], name=f"*/{G.name}")
    if manifold == "circle":
        return ActionGroupoid.from_func(G, G.elements, lambda g, s: G.conj(s, G.inv(g)), name=f"{G.name}//{G.name}")
    raise ValueError(f"Unknown manifold {manifold!r}; expected 'pt' or 'circle'")


# ---------------------------------------------------------------------------
# Local systems
# ---------------------------------------------------------------------------

class LocalSystem:
    """Functor Γ⋉S → Vect: a fiber dimension per point and matrices ρ(γ, s): V_s → V_{γ·s}."""

    def __init__(self, groupoid: ActionGroupoid, dims: Sequence[int], rho: Callable[[int, int], Matrix], name: str = "system"):
        self.groupoid = groupoid
        self.dims = tuple(int(d) for d in dims)
        if len(self.dims) != groupoid.size:
            raise ShapeMismatch("one fiber dimension per object is required")
        self.name = name
        self._rho: Dict[Tuple[int, int], Matrix] = {}
        for g in range(groupoid.group.order):
            for s in range(groupoid.size):
                m = [[as_cyclo(v) for v in row] for row in rho(g, s)]
                t = groupoid.act(g, s)
                if len(m) != self.dims[t] or any(len(row) != self.dims[s] for row in m):
                    raise ShapeMismatch(f"ρ({g}, {s}) must be {self.dims[t]}×{self.dims[s]}")
                self._rho[g, s] = m
        offsets = np.concatenate([[0], np.cumsum(self.dims)]).astype(int)
        self.offsets = tuple(int(v) for v in offsets)

    @classmethod
    def trivial(cls, groupoid: ActionGroupoid) -> "LocalSystem":
        return cls(groupoid, [1] * groupoid.size, lambda g, s: [[_ONE]], name="trivial")

    @classmethod
    def from_phases(cls, groupoid: ActionGroupoid, phase: Callable[[int, int], Any], name: str = "line") -> "LocalSystem":
        """One-dimensional system ρ(γ, s) = e(phase(γ, s))."""
        return cls(groupoid, [1] * groupoid.size, lambda g, s: [[CycloValue.root_of_unity(phase(g, s))]], name=name)

    def rho(self, g: int, s: int) -> Matrix:
        return self._rho[g, s]

    @property
    def total_dim(self) -> int:
        return self.offsets[-1]

    def functoriality_defect(self) -> Optional[Tuple[int, int, int]]:
        """First (γ, γ', s) with ρ(γγ', s) ≠ ρ(γ, γ'·s)·ρ(γ', s), or None."""
        G, X = self.groupoid.group, self.groupoid
        if G.order ** 2 * X.size > FUNCTORIALITY_CHECK_LIMIT:
            logger.warning("functoriality of %s checked on generators only", self.name)
            pairs = [(g, h) for g in G.generating_set() for h in range(G.order)]
        else:
            pairs = [(g, h) for g in range(G.order) for h in range(G.order)]
        for s in range(X.size):
            if not _matrix_equal(self.rho(G.identity, s), _identity_matrix(self.dims[s])):
                return (G.identity, G.identity, s)
        for g, h in pairs:
            for s in range(X.size):
                hs = X.act(h, s)
                lhs = self.rho(G.mul(g, h), s)
                rhs = _matmul(self.rho(g, hs), self.rho(h, s), self.dims[X.act(g, hs)], self.dims[hs], self.dims[s])
                if not _matrix_equal(lhs, rhs):
                    return (g, h, s)
        return None

    def averaging_projector(self) -> Matrix:
        """(1/|Γ|)·Σ_γ ρ(γ) on ⊕_s V_s."""
        G, X = self.groupoid.group, self.groupoid
        n = self.total_dim
        P = [[_ZERO for _ in range(n)] for _ in range(n)]
        weight = CycloValue.rational(Fraction(1, G.order))
        for g in range(G.order):
            for s in range(X.size):
                t = X.act(g, s)
                block = self.rho(g, s)
                for i in range(self.dims[t]):
                    for j in range(self.dims[s]):
                        if not block[i][j].is_zero():
                            P[self.offsets[t] + i][self.offsets[s] + j] = (
                                P[self.offsets[t] + i][self.offsets[s] + j] + block[i][j] * weight
                            )
        return P

    def invariant_basis(self) -> "InvariantBasis":
        P = self.averaging_projector()
        n = self.total_dim
        transposed = [[P[j][i] for j in range(n)] for i in range(n)]
        rows, pivots = cyclo_rref(transposed)
        return InvariantBasis(vectors=[rows[k] for k in range(len(pivots))], pivots=list(pivots))

    def render(self) -> Dict:
        return {"name": self.name, "groupoid": self.groupoid.render(), "dims": list(self.dims)}


@dataclass
class InvariantBasis:
    """Basis of invariant sections; the coordinate of an invariant vector is its entry at each pivot."""

    vectors: List[List[CycloValue]] = field(default_factory=list)
    pivots: List[int] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def coordinates(self, v: Sequence[CycloValue]) -> List[CycloValue]:
        return [v[p] for p in self.pivots]


def sum1_limit(ls: LocalSystem) -> int:
    """dim of invariant sections, (1/|Γ|)·Σ_γ Σ_{γ·s = s} tr ρ(γ, s)."""
    G, X = ls.groupoid.group, ls.groupoid
    total = CycloValue.rational(0)
    for g in range(G.order):
        for s in range(X.size):
            if X.act(g, s) == s:
                block = ls.rho(g, s)
                for i in range(ls.dims[s]):
                    total = total + block[i][i]
    total = total / G.order
    if not total.is_rational():
        raise NonIntegerDimension("character average is not rational", {"value": total.render()})
    value = total.to_fraction()
    if value.denominator != 1 or value < 0:
        raise NonIntegerDimension(f"character average {value} is not a nonnegative integer")
    return int(value)


# ---------------------------------------------------------------------------
# Correspondences
# ---------------------------------------------------------------------------

class Correspondence:
    """
    X ← C → Y between local systems on action groupoids.

    Each leg is an equivariant map (h, f): h a group homomorphism Γ_C → Γ_X given
    by element indices and f a map of points. phi(c) is a linear map
    V_X(f1 c) → V_Y(f2 c) intertwining both systems.
    """

    def __init__(
        self,
        apex: ActionGroupoid,
        source: LocalSystem,
        target: LocalSystem,
        f1: Sequence[int],
        h1: Sequence[int],
        f2: Sequence[int],
        h2: Sequence[int],
        phi: Callable[[int], Matrix],
        name: str = "correspondence",
        check: bool = True,
    ):
        self.apex = apex
        self.source = source
        self.target = target
        self.f1, self.h1 = tuple(int(v) for v in f1), tuple(int(v) for v in h1)
        self.f2, self.h2 = tuple(int(v) for v in f2), tuple(int(v) for v in h2)
        self.name = name
        self._phi = {}
        for c in range(apex.size):
            m = [[as_cyclo(v) for v in row] for row in phi(c)]
            rows, cols = target.dims[self.f2[c]], source.dims[self.f1[c]]
            if len(m) != rows or any(len(row) != cols for row in m):
                raise ShapeMismatch(f"φ({c}) must be {rows}×{cols}")
            self._phi[c] = m
        if check:
            self.check()

    def phi(self, c: int) -> Matrix:
        return self._phi[c]

    def check(self) -> None:
        C = self.apex
        K = C.group
        for side, (f, h, system) in {"source": (self.f1, self.h1, self.source), "target": (self.f2, self.h2, self.target)}.items():
            G = system.groupoid.group
            if len(f) != C.size or len(h) != K.order:
                raise IncompatibleSystems(f"{side} leg has the wrong size")
            for a in range(K.order):
                for b in range(K.order):
                    if h[K.mul(a, b)] != G.mul(h[a], h[b]):
                        raise IncompatibleSystems(f"{side} leg is not a homomorphism", {"pair": [a, b]})
            for k in range(K.order):
                for c in range(C.size):
                    if f[C.act(k, c)] != system.groupoid.act(h[k], f[c]):
                        raise IncompatibleSystems(f"{side} leg is not equivariant", {"element": k, "object": c})
        X, Y = self.source, self.target
        for k in range(K.order):
            for c in range(C.size):
                kc = C.act(k, c)
                x, y = self.f1[c], self.f2[c]
                lhs = _matmul(Y.rho(self.h2[k], y), self.phi(c), Y.dims[self.f2[kc]], Y.dims[y], X.dims[x])
                rhs = _matmul(self.phi(kc), X.rho(self.h1[k], x), Y.dims[self.f2[kc]], X.dims[self.f1[kc]], X.dims[x])
                if not _matrix_equal(lhs, rhs):
                    raise IncompatibleSystems("φ does not intertwine the local systems", {"element": k, "object": c})

    def push_vector(self, v: Sequence[CycloValue]) -> List[CycloValue]:
        """(Tv)_y = (1/|Γ_C|)·Σ_c Σ_{γ: γ·f2(c) = y} ρ_Y(γ, f2 c)·φ(c)·v_{f1(c)}."""
        X, Y, C = self.source, self.target, self.apex
        GY = Y.groupoid.group
        out = [_ZERO] * Y.total_dim
        for c in range(C.size):
            x, y0 = self.f1[c], self.f2[c]
            vx = v[X.offsets[x]:X.offsets[x + 1]]
            image = [
                sum((self.phi(c)[i][j] * vx[j] for j in range(X.dims[x]) if not vx[j].is_zero()), _ZERO)
                for i in range(Y.dims[y0])
            ]
            if all(w.is_zero() for w in image):
                continue
            for g in range(GY.order):
                y = Y.groupoid.act(g, y0)
                block = Y.rho(g, y0)
                for i in range(Y.dims[y]):
                    acc = sum((block[i][j] * image[j] for j in range(Y.dims[y0]) if not image[j].is_zero()), _ZERO)
                    out[Y.offsets[y] + i] = out[Y.offsets[y] + i] + acc
        weight = Fraction(1, C.group.order)
        return [w * weight for w in out]


def sum1_push(corr: Correspondence) -> Matrix:
    """Matrix of the pushforward between invariant sections, in the pivot bases."""
    source_basis = corr.source.invariant_basis()
    target_basis = corr.target.invariant_basis()
    columns = [target_basis.coordinates(corr.push_vector(b)) for b in source_basis.vectors]
    logger.debug("pushforward along %s: %d×%d", corr.name, target_basis.dim, source_basis.dim)
    return [[columns[k][j] for k in range(source_basis.dim)] for j in range(target_basis.dim)]


def compose_matrices(second: Matrix, first: Matrix, rows: int, inner: int, cols: int) -> Matrix:
    return _matmul(second, first, rows, inner, cols)


def compose_correspondences(first: Correspondence, second: Correspondence) -> Correspondence:
    """
    Homotopy fiber product X ← C ×_Y C' → Z.

    Objects are (c, γ, c') with γ·f2(c) = f1'(c'); Γ_C × Γ_C' acts by
    (k, k')·(c, γ, c') = (k·c, h1'(k')·γ·h2(k)⁻¹, k'·c').
    """
    if first.target is not second.source:
        raise IncompatibleSystems("correspondences do not share the middle local system")
    C, C2 = first.apex, second.apex
    Y = first.target
    GY = Y.groupoid.group
    K = direct_product(C.group, C2.group)

    objects = [
        (c, g, c2)
        for c in range(C.size)
        for g in range(GY.order)
        for c2 in range(C2.size)
        if Y.groupoid.act(g, first.f2[c]) == second.f1[c2]
    ]
    if K.order * len(objects) > FIBER_PRODUCT_LIMIT:
        raise TooLarge(f"fiber product has {len(objects)} objects under a group of order {K.order}")
    index = {obj: i for i, obj in enumerate(objects)}

    def act(k: int, i: int) -> int:
        a, b = divmod(k, C2.group.order)
        c, g, c2 = objects[i]
        moved = GY.mul(GY.mul(second.h1[b], g), GY.inv(first.h2[a]))
        return index[(C.act(a, c), moved, C2.act(b, c2))]

    apex = ActionGroupoid.from_func(K, objects, act, name=f"{C.name}x_{Y.name}{C2.name}")
    split = [divmod(k, C2.group.order) for k in range(K.order)]

    def phi(i: int) -> Matrix:
        c, g, c2 = objects[i]
        y = first.f2[c]
        middle = Y.dims[y]
        moved = Y.groupoid.act(g, y)
        step = _matmul(Y.rho(g, y), first.phi(c), Y.dims[moved], middle, first.source.dims[first.f1[c]])
        return _matmul(
            second.phi(c2), step, second.target.dims[second.f2[c2]], Y.dims[moved], first.source.dims[first.f1[c]]
        )

    return Correspondence(
        apex,
        first.source,
        second.target,
        f1=[first.f1[c] for c, _, _ in objects],
        h1=[first.h1[a] for a, _ in split],
        f2=[second.f2[c2] for _, _, c2 in objects],
        h2=[second.h2[b] for _, b in split],
        phi=phi,
        name=f"{second.name}∘{first.name}",
        check=False,
    )


def identity_correspondence(ls: LocalSystem) -> Correspondence:
    X = ls.groupoid
    ids = list(range(X.group.order))
    points = list(range(X.size))
    return Correspondence(X, ls, ls, points, ids, points, ids, lambda c: _identity_matrix(ls.dims[c]), name="id")


# ---------------------------------------------------------------------------
# One-dimensional gauge theory with a character λ
# ---------------------------------------------------------------------------

def unit_system() -> LocalSystem:
    """Bundles on the empty manifold: one object, trivial group, the line ℂ."""
    trivial = builtin_group("Z1")
    return LocalSystem.trivial(ActionGroupoid(trivial, [None], [[0]], name="*"))


def point_system(G: FiniteGroup, character: Sequence[Any]) -> LocalSystem:
    """*/G with ρ(g) = e(λ(g))."""
    values = character_values(G, character)
    return LocalSystem.from_phases(bun_groupoid("pt", G), lambda g, s: values[g], name=f"pt[{G.name}]")


def _interval_groupoid(G: FiniteGroup) -> Tuple[ActionGroupoid, FiniteGroup]:
    """Bundles on [0, 1] trivialized at the ends: points g ∈ G, (h0, h1)·g = h1·g·h0⁻¹."""
    GG = direct_product(G, G)
    apex = ActionGroupoid.from_func(
        GG, G.elements, lambda k, g: G.mul(G.mul(k % G.order, g), G.inv(k // G.order)), name=f"I[{G.name}]"
    )
    return apex, GG


def _pair_system(G: FiniteGroup, GG: FiniteGroup, values: Sequence[PhaseQZ]) -> LocalSystem:
    """*/(G×G) for the two endpoints with opposite orientations: ρ(h0, h1) = e(λ(h1) − λ(h0))."""
    groupoid = ActionGroupoid(GG, [None], [[0] for _ in range(GG.order)], name=f"*/{GG.name}")
    return LocalSystem.from_phases(
        groupoid, lambda k, s: values[k % G.order] - values[k // G.order], name=f"pt+pt[{G.name}]"
    )


def interval_correspondence(G: FiniteGroup, character: Sequence[Any]) -> Correspondence:
    """The interval as a bordism pt → pt: */G ← I → */G with φ(g) = e(λ(g))."""
    values = character_values(G, character)
    apex, GG = _interval_groupoid(G)
    system = point_system(G, character)
    zeros = [0] * G.order
    return Correspondence(
        apex,
        system,
        system,
        f1=zeros,
        h1=[k // G.order for k in range(GG.order)],
        f2=zeros,
        h2=[k % G.order for k in range(GG.order)],
        phi=lambda g: [[CycloValue.root_of_unity(values[g])]],
        name="interval",
    )


def elbow_in(G: FiniteGroup, character: Sequence[Any], pair: Optional[LocalSystem] = None) -> Correspondence:
    """The interval as a bordism ∅ → pt ⊔ pt̄ with φ(g) = e(λ(g))."""
    values = character_values(G, character)
    apex, GG = _interval_groupoid(G)
    target = pair if pair is not None else _pair_system(G, GG, values)
    unit = unit_system()
    return Correspondence(
        apex,
        unit,
        target,
        f1=[0] * G.order,
        h1=[0] * GG.order,
        f2=[0] * G.order,
        h2=list(range(GG.order)),
        phi=lambda g: [[CycloValue.root_of_unity(values[g])]],
        name="elbow_in",
    )


def elbow_out(G: FiniteGroup, character: Sequence[Any], pair: Optional[LocalSystem] = None) -> Correspondence:
    """The interval as a bordism pt ⊔ pt̄ → ∅ with φ(g) = e(−λ(g))."""
    values = character_values(G, character)
    apex, GG = _interval_groupoid(G)
    source = pair if pair is not None else _pair_system(G, GG, values)
    unit = unit_system()
    return Correspondence(
        apex,
        source,
        unit,
        f1=[0] * G.order,
        h1=list(range(GG.order)),
        f2=[0] * G.order,
        h2=[0] * GG.order,
        phi=lambda g: [[CycloValue.root_of_unity(-values[g])]],
        name="elbow_out",
    )


def elbow_pair(G: FiniteGroup, character: Sequence[Any]) -> Tuple[Correspondence, Correspondence]:
    """elbow_in and elbow_out sharing one boundary system, ready to compose."""
    values = character_values(G, character)
    _, GG = _interval_groupoid(G)
    pair = _pair_system(G, GG, values)
    return elbow_in(G, character, pair), elbow_out(G, character, pair)


def circle_correspondence(G: FiniteGroup, character: Sequence[Any]) -> Correspondence:
    """The circle as a bordism ∅ → ∅: ∅ ← G//G → ∅ with φ(c) = e(λ(c))."""
    values = character_values(G, character)
    apex = bun_groupoid("circle", G)
    unit = unit_system()
    zeros_points = [0] * apex.size
    zeros_group = [0] * G.order
    return Correspondence(
        apex,
        unit,
        unit,
        f1=zeros_points,
        h1=zeros_group,
        f2=zeros_points,
        h2=zeros_group,
        phi=lambda c: [[CycloValue.root_of_unity(values[c])]],
        name="circle",
    )


def scalar(matrix: Matrix) -> CycloValue:
    if len(matrix) != 1 or len(matrix[0]) != 1:
        raise ShapeMismatch("expected a 1×1 matrix")
    return matrix[0][0]


def render_matrix(matrix: Matrix) -> List[List[Dict]]:
    return [[v.render() for v in row] for row in matrix]
