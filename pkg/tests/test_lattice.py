import dataclasses
import itertools
import random
from fractions import Fraction

import pytest

from src.abgroup import cokernel, integer_det
from src.errors import BadSymmetrization, DegenerateLattice, SchemaError, ShapeMismatch
from src.exactnum import PhaseQZ
from src.lattice import (
    E8_GRAM,
    EvenLattice,
    RationalPoint,
    antisymmetrized_K,
    approximation_tower,
    braiding_phase,
    center_form,
    check_symmetrization,
    cocycle_phase_K,
    commutator_phase_L,
    default_B,
    discriminant_form,
    duality_check,
    inertia,
    rational_inverse,
    ribbon_theta,
    s_map,
    signature,
    splitting_character,
)
from src.metric import MetricGroup, is_nondegenerate, milgram_signature, q_eval

BUILTINS = ["A1", "A2", "E8", "U", "A1(-1)"]


def random_even_lattice(rng, max_rank=4, max_det=50):
    while True:
        r = rng.randint(1, max_rank)
        gram = [[0] * r for _ in range(r)]
        for i in range(r):
            gram[i][i] = 2 * rng.randint(-2, 2)
            for j in range(i + 1, r):
                gram[i][j] = gram[j][i] = rng.randint(-2, 2)
        det = integer_det(gram)
        if det and abs(det) <= max_det:
            return EvenLattice(gram, name="random")


def random_point(rng, rank, max_den=6):
    return RationalPoint(tuple(Fraction(rng.randint(-12, 12), rng.randint(1, max_den)) for _ in range(rank)))


def random_vector(rng, rank):
    return tuple(rng.randint(-4, 4) for _ in range(rank))


def test_inertia():
    assert inertia([[0, 1], [1, 0]]) == (1, 1, 0)
    assert inertia(E8_GRAM) == (8, 0, 0)
    assert inertia([[1, 2], [2, 4]]) == (1, 0, 1)
    assert inertia([[0]]) == (0, 0, 1)
    assert inertia([]) == (0, 0, 0)
    assert inertia([[0, 1, 0], [1, 0, 0], [0, 0, -3]]) == (1, 2, 0)
    with pytest.raises(ShapeMismatch):
        inertia([[0, 1], [2, 0]])


def test_rational_inverse():
    inv = rational_inverse([[2, 1], [1, 2]])
    assert inv == ((Fraction(2, 3), Fraction(-1, 3)), (Fraction(-1, 3), Fraction(2, 3)))
    with pytest.raises(DegenerateLattice):
        rational_inverse([[2, 2], [2, 2]])


def test_lattice_validation():
    with pytest.raises(SchemaError):
        EvenLattice([[1]])
    with pytest.raises(SchemaError):
        EvenLattice([[2, 1], [0, 2]])
    with pytest.raises(SchemaError):
        EvenLattice.builtin("D4")
    L = EvenLattice.builtin("A1+A1(-1)")
    assert L.gram == ((2, 0), (0, -2))
    assert signature(L) == 0
    assert EvenLattice.builtin("E8").det == 1
    with pytest.raises(DegenerateLattice):
        signature(EvenLattice([[2, 2], [2, 2]]))


def test_discriminant_examples():
    A1 = discriminant_form(EvenLattice.builtin("A1"))
    assert A1.group.invariant_factors == (2,)
    assert A1.q_diag == (PhaseQZ(Fraction(1, 4)),)
    A2 = discriminant_form(EvenLattice.builtin("A2"))
    assert A2.group.invariant_factors == (3,)
    assert A2.q_diag == (PhaseQZ(Fraction(1, 3)),)
    assert discriminant_form(EvenLattice.builtin("E8")).order == 1
    assert discriminant_form(EvenLattice.builtin("U")).order == 1


@pytest.mark.parametrize("name", BUILTINS)
def test_builtin_signatures_match_milgram(name):
    L = EvenLattice.builtin(name)
    disc = discriminant_form(L)
    assert disc.order == abs(L.det)
    assert milgram_signature(disc) == signature(L) % 8


def test_random_lattices_match_milgram():
    rng = random.Random(20)
    for _ in range(20):
        L = random_even_lattice(rng)
        disc = discriminant_form(L)
        assert disc.order == abs(L.det)
        assert is_nondegenerate(disc)
        assert milgram_signature(disc) == signature(L) % 8


@pytest.mark.parametrize("name", ["A1", "A2", "A1+A1", "U"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_tower_cardinalities_and_duality(name, n):
    tower = approximation_tower(EvenLattice.builtin(name), n)
    assert tower.cardinalities() == tower.expected_cardinalities()
    report = duality_check(tower)
    assert report.ok and report.witness is None


def test_tower_rejects_bad_level():
    with pytest.raises(ValueError):
        approximation_tower(EvenLattice.builtin("A1"), 0)


def test_duality_reports_witness():
    tower = approximation_tower(EvenLattice.builtin("A1"), 2)
    assert duality_check(tower).order == 8
    broken = dataclasses.replace(tower, metric=MetricGroup.from_strings([2], ["1/2"]))
    report = duality_check(broken)
    assert not report.ok
    assert report.witness == (1,)
    assert report.render() == {"ok": False, "order": 2, "witness": [1]}


@pytest.mark.parametrize("name", ["A1", "A2", "A1+A1", "U"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_center_form_checks(name, n):
    cf = center_form(EvenLattice.builtin(name), n)
    checks = cf.checks()
    assert all(checks.values()), checks
    assert cf.factor_t.order * cf.factor_F.order == cf.metric.order


@pytest.mark.parametrize("name", ["A1", "A2"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_center_sign_pattern(name, n):
    cf = center_form(EvenLattice.builtin(name), n)
    assert cf.sign_t == -1
    assert cf.sign_F == 1


def test_symmetrization():
    L = EvenLattice.builtin("A2")
    assert default_B(L) == ((1, 1), (0, 1))
    assert check_symmetrization(L, [[1, 0], [1, 1]]) == ((1, 0), (1, 1))
    with pytest.raises(BadSymmetrization):
        check_symmetrization(L, [[1, 1], [1, 1]])
    with pytest.raises(ShapeMismatch):
        check_symmetrization(L, [[1]])


def symmetrizations(L):
    B = default_B(L)
    r = L.rank
    transpose = tuple(tuple(B[j][i] for j in range(r)) for i in range(r))
    skew = tuple(tuple(B[i][j] + (3 if i < j else -3 if i > j else 0) for j in range(r)) for i in range(r))
    return [B, transpose, skew]


@pytest.mark.parametrize("name", ["A1", "A2", "A1+A1", "U"])
def test_commutator_is_antisymmetrized_cocycle(name):
    L = EvenLattice.builtin(name)
    rng = random.Random(name)
    for B in symmetrizations(L):
        for _ in range(200):
            x, y = random_point(rng, L.rank), random_point(rng, L.rank)
            pi, pi2 = random_vector(rng, L.rank), random_vector(rng, L.rank)
            assert antisymmetrized_K(L, B, x, y, pi, pi2) == commutator_phase_L(L, x, y, pi, pi2)


@pytest.mark.parametrize("name", ["A1", "A2", "U"])
def test_lifted_action_composes(name):
    L = EvenLattice.builtin(name)
    rng = random.Random(f"compose-{name}")
    for B in symmetrizations(L):
        for _ in range(200):
            x, y = random_point(rng, L.rank), random_point(rng, L.rank)
            pi, pi2, rho, rho2 = (random_vector(rng, L.rank) for _ in range(4))
            first = cocycle_phase_K(L, B, x, y, pi, pi2)
            second = cocycle_phase_K(L, B, x.shift(pi), y.shift(pi2), rho, rho2)
            total = cocycle_phase_K(L, B, x, y, [a + b for a, b in zip(pi, rho)], [a + b for a, b in zip(pi2, rho2)])
            assert first + second == total


def small_points(rank, max_den=6):
    values = sorted({Fraction(k, d) for d in range(1, max_den + 1) for k in range(d)})
    for combo in itertools.product(values, repeat=rank):
        yield RationalPoint(combo)


def test_splitting_character_is_additive():
    L = EvenLattice.builtin("A1")
    points = list(small_points(1))
    for lam in range(-2, 3):
        for xi in points[::3]:
            for a in points:
                for b in points[::5]:
                    assert splitting_character(L, xi, [lam], a + b) == splitting_character(L, xi, [lam], a) + splitting_character(L, xi, [lam], b)


def test_s_map_is_a_homomorphism():
    for name in ["A1", "A2"]:
        L = EvenLattice.builtin(name)
        vectors = list(itertools.product(range(-2, 3), repeat=L.rank))
        for lam in vectors:
            for mu in vectors:
                xs, ls = s_map(L, lam)
                xt, lt = s_map(L, mu)
                xsum, lsum = s_map(L, [a + b for a, b in zip(lam, mu)])
                assert xsum == xs + xt
                assert lsum == tuple(a + b for a, b in zip(ls, lt))


def test_ribbon_on_section_is_discriminant_form():
    for name in ["A1", "A2", "A1+A1"]:
        L = EvenLattice.builtin(name)
        disc = discriminant_form(L)
        presentation = cokernel(L.gram)
        for lam in itertools.product(range(-3, 4), repeat=L.rank):
            xi, _ = s_map(L, lam)
            assert ribbon_theta(L, xi, lam) == q_eval(disc, presentation.project(lam))


def test_braiding_is_symmetric():
    L = EvenLattice.builtin("A2")
    points = list(small_points(2, max_den=3))
    for a in points:
        for b in points[::4]:
            assert braiding_phase(L, a, b) == braiding_phase(L, b, a)
            assert braiding_phase(L, a, b) * 2 == PhaseQZ.of(-L.pair(a.lift, b.lift))


def test_rational_point_parse():
    p = RationalPoint.parse(["1/2", 3, "-2/6"])
    assert p.lift == (Fraction(1, 2), Fraction(3), Fraction(-1, 3))
    assert p.shift([1, 0, 1]).render() == ["3/2", "3/1", "2/3"]
    assert RationalPoint.zero(2).lift == (Fraction(0), Fraction(0))
