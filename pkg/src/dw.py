"""
Finite gauge theory over finite groups
Cayley-table groups, 2-cocycles, twisted group algebras with their Frobenius trace,
surface partition functions by two routes, the 1- and 3-dimensional untwisted counts
and the simple objects of the Drinfeld center for abelian groups
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import InvalidCocycle, InvalidGroup, NonAbelian, NotACharacter, SchemaError, SingularMatrix, SingularTrace, TooLarge
from .exactnum import CycloValue, PhaseQZ, as_cyclo, cyclo_inverse
from .parallel import fold_ranges

logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 10 ** 8
DIRECT_ENUMERATION_LIMIT = 10 ** 5
ASSOCIATIVITY_CHECK_LIMIT = 64


# ---------------------------------------------------------------------------
# Phase-labelled linear systems
# ---------------------------------------------------------------------------

def solve_phase_graph(
    nodes: Iterable[Hashable], edges: Iterable[Tuple[Hashable, Hashable, Fraction]]
) -> List[Dict[Hashable, Fraction]]:
    """
    Solve a_v = a_u·e(phase) for every edge (u, v, phase).

    Returns one potential map per connected component on which the constraints
    are consistent; each such component carries a one-dimensional solution space
    and every other component forces its coefficients to zero.
    """
    graph = nx.MultiGraph()
    graph.add_nodes_from(nodes)
    for u, v, phase in edges:
        graph.add_edge(u, v, source=u, phase=Fraction(phase) % 1)

    solutions = []
    for component in nx.connected_components(graph):
        root = min(component)
        potential = {root: Fraction(0)}
        for a, b in nx.bfs_edges(graph, root):
            data = next(iter(graph.get_edge_data(a, b).values()))
            step = data["phase"] if data["source"] == a else -data["phase"]
            potential[b] = (potential[a] + step) % 1
        consistent = True
        for x, y, data in graph.subgraph(component).edges(data=True):
            u, v = (x, y) if data["source"] == x else (y, x)
            if (potential[v] - potential[u] - data["phase"]) % 1:
                consistent = False
                break
        if consistent:
            solutions.append(potential)
    return sorted(solutions, key=lambda p: min(p))


# ---------------------------------------------------------------------------
# Finite groups
# ---------------------------------------------------------------------------

class FiniteGroup:
    """Finite group given by a Cayley table over element indices."""

    def __init__(self, table: Sequence[Sequence[int]], name: str = "group", elements: Optional[Sequence[Any]] = None, check: bool = True):
        self.table = np.asarray(table, dtype=np.int64)
        n = len(self.table)
        if self.table.shape != (n, n) or n == 0:
            raise InvalidGroup("Cayley table must be a nonempty square table")
        if self.table.min() < 0 or self.table.max() >= n:
            raise InvalidGroup("Cayley table entries must be element indices")
        self.name = name
        self.elements = tuple(elements) if elements is not None else tuple(range(n))

        identity = next(
            (e for e in range(n) if all(self.table[e, x] == x and self.table[x, e] == x for x in range(n))),
            None,
        )
        if identity is None:
            raise InvalidGroup(f"{name} has no identity element")
        self.identity = identity
        inverses = []
        for x in range(n):
            inv = np.nonzero(self.table[x] == identity)[0]
            if len(inv) != 1 or self.table[inv[0], x] != identity:
                raise InvalidGroup(f"element {x} of {name} has no two-sided inverse")
            inverses.append(int(inv[0]))
        self.inverses = tuple(inverses)
        if check and n <= ASSOCIATIVITY_CHECK_LIMIT:
            t = self.table
            if not np.array_equal(t[t, :], t[:, t]):
                raise InvalidGroup(f"{name} multiplication is not associative")

    @classmethod
    def from_func(cls, elements: Sequence[Any], mult: Callable[[Any, Any], Any], name: str = "group") -> "FiniteGroup":
        elements = list(elements)
        index = {e: i for i, e in enumerate(elements)}
        try:
            table = [[index[mult(a, b)] for b in elements] for a in elements]
        except KeyError as e:
            raise InvalidGroup(f"{name} is not closed under multiplication: {e}") from e
        return cls(table, name=name, elements=elements)

    @property
    def order(self) -> int:
        return len(self.table)

    def __len__(self) -> int:
        return self.order

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return self.inverses[a]

    def conj(self, x: int, y: int) -> int:
        """y⁻¹·x·y."""
        return self.mul(self.mul(self.inv(y), x), y)

    def power(self, a: int, k: int) -> int:
        base = a if k >= 0 else self.inv(a)
        result = self.identity
        for _ in range(abs(k)):
            result = self.mul(result, base)
        return result

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.mul(x, a)
            k += 1
        return k

    def commutator(self, a: int, b: int) -> int:
        """a·b·a⁻¹·b⁻¹."""
        return self.mul(self.mul(self.mul(a, b), self.inv(a)), self.inv(b))

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def span(self, generators: Iterable[int]) -> frozenset:
        found = {self.identity}
        frontier = [self.identity]
        gens = list(generators)
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = self.mul(x, g)
                if y not in found:
                    found.add(y)
                    frontier.append(y)
        return frozenset(found)

    def generating_set(self) -> List[int]:
        gens: List[int] = []
        span = {self.identity}
        for x in range(self.order):
            if x not in span:
                gens.append(x)
                span = set(self.span(gens))
        return gens

    def conjugacy_classes(self) -> List[List[int]]:
        seen, classes = set(), []
        for x in range(self.order):
            if x in seen:
                continue
            cls = sorted({self.conj(x, y) for y in range(self.order)})
            seen.update(cls)
            classes.append(cls)
        return classes

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.order})"


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    """G × H with element (g, h) at index g·|H| + h."""
    n, m = G.order, H.order
    g_idx = np.repeat(np.arange(n), m)
    h_idx = np.tile(np.arange(m), n)
    table = G.table[g_idx][:, g_idx] * m + H.table[h_idx][:, h_idx]
    elements = [(a, b) for a in G.elements for b in H.elements]
    return FiniteGroup(table, name=f"{G.name}x{H.name}", elements=elements, check=False)


def _compose(p: Tuple[int, ...], q: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(p[q[i]] for i in range(len(q)))


def _permutation_group(generators: Sequence[Tuple[int, ...]], name: str) -> FiniteGroup:
    identity = tuple(range(len(generators[0])))
    found, frontier = {identity}, [identity]
    while frontier:
        x = frontier.pop()
        for g in generators:
            y = _compose(x, g)
            if y not in found:
                found.add(y)
                frontier.append(y)
    return FiniteGroup.from_func(sorted(found), _compose, name=name)


def _quaternion_product(a, b):
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return (
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    )


def cyclic_group(n: int) -> FiniteGroup:
    if n < 1:
        raise InvalidGroup(f"cyclic group order must be positive, got {n}")
    return FiniteGroup.from_func(range(n), lambda a, b: (a + b) % n, name=f"Z{n}")


def builtin_group(name: str) -> FiniteGroup:
    """Catalog: Zn (1 <= n <= 20), Z2xZ2, S3, D4, Q8, A4."""
    key = name.strip()
    if key.upper().startswith("Z") and key[1:].isdigit():
        n = int(key[1:])
        if not 1 <= n <= 20:
            raise InvalidGroup(f"built-in cyclic groups have order 1..20, got {n}")
        return cyclic_group(n)
    if key.upper() == "Z2XZ2":
        elements = [(a, b) for a in range(2) for b in range(2)]
        return FiniteGroup.from_func(elements, lambda x, y: ((x[0] + y[0]) % 2, (x[1] + y[1]) % 2), name="Z2xZ2")
    if key == "S3":
        return _permutation_group([(1, 0, 2), (1, 2, 0)], name="S3")
    if key == "D4":
        return _permutation_group([(1, 2, 3, 0), (0, 3, 2, 1)], name="D4")
    if key == "A4":
        return _permutation_group([(1, 2, 0, 3), (1, 0, 3, 2)], name="A4")
    if key == "Q8":
        units = []
        for axis in range(4):
            for sign in (1, -1):
                unit = [0, 0, 0, 0]
                unit[axis] = sign
                units.append(tuple(unit))
        return FiniteGroup.from_func(units, _quaternion_product, name="Q8")
    raise InvalidGroup(f"Unknown built-in group {name!r}")


BUILTIN_GROUP_NAMES = [f"Z{n}" for n in range(1, 21)] + ["Z2xZ2", "S3", "D4", "Q8", "A4"]


# ---------------------------------------------------------------------------
# Cocycles and twisted group algebras
# ---------------------------------------------------------------------------

class Cocycle2:
    """Q/Z-valued function c(x, y) on pairs of group elements."""

    def __init__(self, group: FiniteGroup, table: Sequence[Sequence[Any]]):
        n = group.order
        if len(table) != n or any(len(row) != n for row in table):
            raise InvalidCocycle(f"cocycle table must be {n}x{n}")
        self.group = group
        self.table = tuple(tuple(PhaseQZ.of(v).value for v in row) for row in table)

    @classmethod
    def trivial(cls, group: FiniteGroup) -> "Cocycle2":
        return cls(group, [[0] * group.order for _ in range(group.order)])

    @classmethod
    def from_function(cls, group: FiniteGroup, fn: Callable[[Any, Any], Any]) -> "Cocycle2":
        """Cocycle from a function on element labels."""
        return cls(group, [[fn(a, b) for b in group.elements] for a in group.elements])

    def __call__(self, x: int, y: int) -> Fraction:
        return self.table[x][y]

    def is_trivial(self) -> bool:
        return not any(v for row in self.table for v in row)


@dataclass(frozen=True)
class CocycleReport:
    ok: bool
    kind: str = ""
    witness: Tuple[int, ...] = ()

    def render(self) -> Dict:
        if self.ok:
            return {"ok": True}
        return {"ok": False, "kind": self.kind, "witness": list(self.witness)}


def validate_cocycle(c: Cocycle2) -> CocycleReport:
    """Normalization, then c(y,z) − c(xy,z) + c(x,yz) − c(x,y) = 0 over all triples."""
    G = c.group
    e = G.identity
    for x in range(G.order):
        if c(e, x) or c(x, e):
            return CocycleReport(False, "not_normalized", (x,))
    for x, y, z in itertools.product(range(G.order), repeat=3):
        if (c(y, z) - c(G.mul(x, y), z) + c(x, G.mul(y, z)) - c(x, y)) % 1:
            return CocycleReport(False, "cocycle_identity", (x, y, z))
    return CocycleReport(True)


Vector = Dict[int, CycloValue]


class TwistedGroupAlgebra:
    """ℂ^c[G]: basis δ_x with δ_x·δ_y = e(c(x,y))·δ_{xy}; trace tr(δ_x) = [x = e]/|G|."""

    def __init__(self, group: FiniteGroup, cocycle: Optional[Cocycle2] = None):
        self.group = group
        self.cocycle = cocycle if cocycle is not None else Cocycle2.trivial(group)
        if self.cocycle.group is not group:
            raise InvalidCocycle("cocycle belongs to a different group")
        report = validate_cocycle(self.cocycle)
        if not report.ok:
            raise InvalidCocycle(f"cocycle fails {report.kind}", report.render())

    @property
    def dim(self) -> int:
        return self.group.order

    def basis_product(self, x: int, y: int) -> Tuple[int, Fraction]:
        return self.group.mul(x, y), self.cocycle(x, y)

    def multiply(self, a: Vector, b: Vector) -> Vector:
        result: Vector = {}
        for x, ax in a.items():
            for y, by in b.items():
                z, phase = self.basis_product(x, y)
                term = ax * by * CycloValue.root_of_unity(phase)
                result[z] = result[z] + term if z in result else term
        return {k: v for k, v in result.items() if not v.is_zero()}

    def unit(self) -> Vector:
        return {self.group.identity: CycloValue.rational(1)}

    def trace(self, a: Vector) -> CycloValue:
        return a.get(self.group.identity, CycloValue.rational(0)) / self.group.order

    def trace_form(self, basis: Sequence[Vector]) -> List[List[CycloValue]]:
        return [[self.trace(self.multiply(u, v)) for v in basis] for u in basis]

    def is_associative_on(self, triples: Iterable[Tuple[int, int, int]]) -> bool:
        for x, y, z in triples:
            dx, dy, dz = ({k: CycloValue.rational(1)} for k in (x, y, z))
            left = self.multiply(self.multiply(dx, dy), dz)
            right = self.multiply(dx, self.multiply(dy, dz))
            if set(left) != set(right) or any(left[k] != right[k] for k in left):
                return False
        return True


def _center_solutions(A: TwistedGroupAlgebra) -> List[Dict[int, Fraction]]:
    G, c = A.group, A.cocycle
    edges = []
    for y in G.generating_set():
        for u in range(G.order):
            v = G.conj(u, y)
            edges.append((u, v, c(u, y) - c(y, v)))
    return solve_phase_graph(range(G.order), edges)


def center_basis(A: TwistedGroupAlgebra) -> List[Vector]:
    """Basis of Z(A): one phase-weighted sum per consistent conjugation component."""
    return [
        {u: CycloValue.root_of_unity(p) for u, p in sorted(potential.items())}
        for potential in _center_solutions(A)
    ]


def algebra_center_dim(A: TwistedGroupAlgebra) -> int:
    return len(_center_solutions(A))


def frobenius_partition(A: TwistedGroupAlgebra, genus: int, basis: Optional[Sequence[Vector]] = None) -> CycloValue:
    """
    ε(H^g) for the handle element H = Σ_k z_k·z^k of the center.

    basis may be any basis of Z(A); the result does not depend on it.
    """
    if genus < 0:
        raise ValueError("genus must be nonnegative")
    basis = list(basis) if basis is not None else center_basis(A)
    gram = A.trace_form(basis)
    try:
        gram_inv_t = cyclo_inverse([list(row) for row in zip(*gram)])
    except SingularMatrix as e:
        raise SingularTrace("trace form on the center is degenerate") from e

    handle: Vector = {}
    for k, z in enumerate(basis):
        dual: Vector = {}
        for m, w in enumerate(basis):
            coeff = gram_inv_t[k][m]
            if coeff.is_zero():
                continue
            for x, v in w.items():
                dual[x] = dual[x] + coeff * v if x in dual else coeff * v
        for x, v in A.multiply(z, dual).items():
            handle[x] = handle[x] + v if x in handle else v

    power = A.unit()
    for _ in range(genus):
        power = A.multiply(power, handle)
    return A.trace(power)


def _surface_counts(G: FiniteGroup, genus: int, cocycle: Optional[Cocycle2]) -> Dict[Tuple[int, Fraction], int]:
    """Distribution of the monomial Π δ_{a_i}δ_{b_i}δ_{a_i}⁻¹δ_{b_i}⁻¹ over all tuples, one handle at a time."""
    c = cocycle if cocycle is not None else Cocycle2.trivial(G)

    def times(state, x):
        u, phase = state
        return G.mul(u, x), (phase + c(u, x)) % 1

    def inverse_factor(state, a):
        u, phase = times(state, G.inv(a))
        return u, (phase - c(a, G.inv(a))) % 1

    handles: Dict[Tuple[int, Fraction], int] = {}
    for a in range(G.order):
        for b in range(G.order):
            state = (G.identity, Fraction(0))
            state = times(times(state, a), b)
            state = inverse_factor(inverse_factor(state, a), b)
            handles[state] = handles.get(state, 0) + 1

    dist: Dict[Tuple[int, Fraction], int] = {(G.identity, Fraction(0)): 1}
    for _ in range(genus):
        nxt: Dict[Tuple[int, Fraction], int] = {}
        for (u, p), count in dist.items():
            for (k, q), mult in handles.items():
                key = (G.mul(u, k), (p + q + c(u, k)) % 1)
                nxt[key] = nxt.get(key, 0) + count * mult
        dist = nxt
    return dist


def _check_size(G: FiniteGroup, exponent: int) -> None:
    if G.order ** exponent > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"|G|^{exponent} = {G.order ** exponent} exceeds {BRUTE_FORCE_LIMIT}")


def enumerate_surface_tuples(G: FiniteGroup, genus: int) -> int:
    """#{(a₁,b₁,...,a_g,b_g) : Π[a_i,b_i] = e} by walking every tuple in mixed-radix order."""
    _check_size(G, 2 * genus)
    radices = [G.order] * (2 * genus)

    def work(start: int, stop: int) -> np.ndarray:
        found = 0
        for idx in range(start, stop):
            tup = np.unravel_index(idx, radices) if radices else ()
            x = G.identity
            for i in range(genus):
                x = G.mul(x, G.commutator(int(tup[2 * i]), int(tup[2 * i + 1])))
            found += x == G.identity
        return np.array([found], dtype=np.int64)

    return int(fold_ranges(G.order ** (2 * genus), work)[0])


def brute_force_surface(G: FiniteGroup, genus: int) -> Fraction:
    """
    (1/|G|)·#{(a₁,b₁,...,a_g,b_g) : Π[a_i,b_i] = e}.

    Tuples are enumerated directly up to DIRECT_ENUMERATION_LIMIT; larger counts
    convolve the per-handle commutator distribution.
    """
    _check_size(G, 2 * genus)
    if G.order ** (2 * genus) <= DIRECT_ENUMERATION_LIMIT:
        return Fraction(enumerate_surface_tuples(G, genus), G.order)
    logger.debug("surface count for %s at genus %d by handle convolution", G.name, genus)
    dist = _surface_counts(G, genus, None)
    return Fraction(dist.get((G.identity, Fraction(0)), 0), G.order)


def twisted_surface_sum(A: TwistedGroupAlgebra, genus: int) -> CycloValue:
    """(1/|G|)·Σ over tuples of the δ_e-coefficient of Π δ_{a_i}δ_{b_i}δ_{a_i}⁻¹δ_{b_i}⁻¹."""
    G = A.group
    _check_size(G, 2 * genus)
    dist = _surface_counts(G, genus, A.cocycle)
    phases = []
    for (u, phase), count in sorted(dist.items()):
        if u == G.identity:
            phases.extend([phase] * count)
    return CycloValue.from_phases(phases) / G.order


def character_values(G: FiniteGroup, character: Sequence[Any]) -> List[PhaseQZ]:
    """Check that λ: G → Q/Z is a homomorphism and return its values as phases."""
    if len(character) != G.order:
        raise NotACharacter(f"character needs {G.order} values, got {len(character)}")
    values = [PhaseQZ.of(v) for v in character]
    for x in range(G.order):
        for y in range(G.order):
            if values[G.mul(x, y)] != values[x] + values[y]:
                raise NotACharacter("λ(xy) ≠ λ(x) + λ(y)", {"pair": [x, y]})
    return values


def dim1_partition(G: FiniteGroup, character: Sequence[Any]) -> Fraction:
    """(1/|G|)·Σ_g e(λ(g)) for a character λ: G → Q/Z."""
    values = character_values(G, character)
    total = CycloValue.from_phases(values) / G.order
    return total.to_fraction()


Word = Sequence[Tuple[int, int]]


def dw3_invariant(num_generators: int, relators: Sequence[Word], G: FiniteGroup) -> Fraction:
    """(1/|G|)·#{(g_1, ..., g_k) satisfying every relator}."""
    _check_size(G, num_generators)
    for word in relators:
        for gen, _ in word:
            if not 0 <= gen < num_generators:
                raise SchemaError(f"relator uses generator {gen} outside 0..{num_generators - 1}", {"generator": gen})
    powers = {}
    for word in relators:
        for _, exp in word:
            if exp not in powers:
                powers[exp] = [G.power(a, exp) for a in range(G.order)]
    radices = [G.order] * num_generators

    def work(start: int, stop: int) -> np.ndarray:
        found = 0
        for idx in range(start, stop):
            assignment = np.unravel_index(idx, radices) if radices else ()
            ok = True
            for word in relators:
                x = G.identity
                for gen, exp in word:
                    x = G.mul(x, powers[exp][int(assignment[gen])])
                if x != G.identity:
                    ok = False
                    break
            found += ok
        return np.array([found], dtype=np.int64)

    total = G.order ** num_generators
    count = int(fold_ranges(total, work)[0])
    return Fraction(count, G.order)


# ---------------------------------------------------------------------------
# Drinfeld center of a twisted abelian group
# ---------------------------------------------------------------------------

def _holonomy_phase(c: Cocycle2, x: int, y: int) -> Fraction:
    """Phase of the unit section of L_{x,y} = K*_{x,y} ⊗ K_{y,x} for abelian G."""
    return c(y, x) - c(x, y)


def l_defect(c: Cocycle2, x: int, y: int, y2: int) -> Fraction:
    """Defect of the composition L_{x,y'} ⊗ L_{x,y} → L_{x,y'y} on unit sections."""
    G = c.group
    return (_holonomy_phase(c, x, y) + _holonomy_phase(c, x, y2) - _holonomy_phase(c, x, G.mul(y2, y))) % 1


@dataclass(frozen=True)
class CenterSimple:
    point: int
    character: Tuple[Fraction, ...] = field(default=())

    def render(self) -> Dict:
        return {"point": self.point, "character": [str(PhaseQZ(v)) for v in self.character]}


def center_simples_abelian(G: FiniteGroup, c: Optional[Cocycle2] = None) -> List[CenterSimple]:
    """
    Pairs (x, φ) with φ(y) + φ(y') − φ(yy') = L-defect at (x; y, y').

    Candidates are enumerated from the values allowed on a generating set and
    every candidate is checked against all pairs.
    """
    if not G.is_abelian():
        raise NonAbelian(f"{G.name} is not abelian")
    c = c if c is not None else Cocycle2.trivial(G)
    report = validate_cocycle(c)
    if not report.ok:
        raise InvalidCocycle(f"cocycle fails {report.kind}", report.render())

    e = G.identity
    gens = G.generating_set()
    simples: List[CenterSimple] = []
    for x in range(G.order):
        defect = lambda y, y2: l_defect(c, x, y, y2)
        options = []
        for g in gens:
            d = G.element_order(g)
            rhs = defect(e, e)
            power = g
            for _ in range(1, d):
                rhs += defect(power, g)
                power = G.mul(power, g)
            rhs %= 1
            options.append([((rhs + j) / d) % 1 for j in range(d)])

        found = set()
        for choice in itertools.product(*options):
            phi = {e: defect(e, e)}
            frontier, ok = [e], True
            while frontier and ok:
                u = frontier.pop()
                for g, value in zip(gens, choice):
                    v = G.mul(u, g)
                    candidate = (phi[u] + value - defect(u, g)) % 1
                    if v not in phi:
                        phi[v] = candidate
                        frontier.append(v)
                    elif phi[v] != candidate:
                        ok = False
                        break
            if not ok:
                continue
            if all(
                (phi[y] + phi[y2] - phi[G.mul(y, y2)] - defect(y, y2)) % 1 == 0
                for y in range(G.order)
                for y2 in range(G.order)
            ):
                found.add(tuple(phi[y] for y in range(G.order)))
        simples.extend(CenterSimple(x, phi) for phi in sorted(found))
    logger.debug("center of %s has %d simple objects", G.name, len(simples))
    return simples
