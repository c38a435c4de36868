import itertools
from fractions import Fraction

import pytest

import src.dw as dw
from src.dw import (
    BUILTIN_GROUP_NAMES,
    Cocycle2,
    FiniteGroup,
    TwistedGroupAlgebra,
    algebra_center_dim,
    brute_force_surface,
    builtin_group,
    center_basis,
    center_simples_abelian,
    cyclic_group,
    dim1_partition,
    direct_product,
    dw3_invariant,
    enumerate_surface_tuples,
    frobenius_partition,
    l_defect,
    twisted_surface_sum,
    validate_cocycle,
)
from src.errors import InvalidCocycle, InvalidGroup, NonAbelian, NotACharacter, SchemaError, TooLarge
from src.exactnum import CycloValue

SMALL_GROUPS = [name for name in BUILTIN_GROUP_NAMES if builtin_group(name).order <= 12]


def heisenberg_cocycle():
    """c(x, y) = x₂·y₁/2 on ℤ/2 × ℤ/2."""
    G = builtin_group("Z2xZ2")
    return G, Cocycle2.from_function(G, lambda x, y: Fraction(x[1] * y[0], 2))


def test_builtin_groups():
    orders = {"Z1": 1, "Z7": 7, "Z2xZ2": 4, "S3": 6, "D4": 8, "Q8": 8, "A4": 12}
    for name, order in orders.items():
        assert builtin_group(name).order == order
    assert len(builtin_group("S3").conjugacy_classes()) == 3
    assert len(builtin_group("D4").conjugacy_classes()) == 5
    assert len(builtin_group("Q8").conjugacy_classes()) == 5
    assert len(builtin_group("A4").conjugacy_classes()) == 4
    assert not builtin_group("Q8").is_abelian()
    assert builtin_group("Z2xZ2").is_abelian()
    with pytest.raises(InvalidGroup):
        builtin_group("Z21")
    with pytest.raises(InvalidGroup):
        builtin_group("SL2F3")
    with pytest.raises(InvalidGroup):
        cyclic_group(0)


def test_group_validation():
    with pytest.raises(InvalidGroup):
        FiniteGroup([[0, 1], [1, 1]])
    with pytest.raises(InvalidGroup):
        FiniteGroup([[0, 1, 2], [1, 2, 0]])
    # a Latin square with identity 0 that is not associative
    loop = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 4, 0, 1, 3],
        [3, 2, 4, 0, 1],
        [4, 3, 1, 2, 0],
    ]
    with pytest.raises(InvalidGroup):
        FiniteGroup(loop)


def test_group_helpers():
    S3 = builtin_group("S3")
    for a, b in itertools.product(range(6), repeat=2):
        assert S3.mul(S3.commutator(a, b), S3.mul(b, a)) == S3.mul(a, b)
    assert sorted(S3.element_order(a) for a in range(6)) == [1, 2, 2, 2, 3, 3]
    assert len(S3.span(S3.generating_set())) == 6
    G = direct_product(builtin_group("Z2"), builtin_group("Z3"))
    assert G.order == 6 and G.is_abelian()


def test_cocycle_validation():
    G, c = heisenberg_cocycle()
    assert validate_cocycle(c).ok
    Z3 = builtin_group("Z3")
    not_normalized = Cocycle2(Z3, [["1/3", "0", "0"], ["0", "0", "0"], ["0", "0", "0"]])
    report = validate_cocycle(not_normalized)
    assert not report.ok and report.kind == "not_normalized"
    broken = Cocycle2(Z3, [["0", "0", "0"], ["0", "1/2", "0"], ["0", "0", "0"]])
    report = validate_cocycle(broken)
    assert not report.ok and report.kind == "cocycle_identity"
    assert report.render()["witness"] == list(report.witness)
    with pytest.raises(InvalidCocycle):
        TwistedGroupAlgebra(Z3, broken)
    with pytest.raises(InvalidCocycle):
        Cocycle2(Z3, [["0", "0"], ["0", "0"]])
    with pytest.raises(InvalidCocycle):
        TwistedGroupAlgebra(builtin_group("Z3"), Cocycle2.trivial(Z3))


def test_twisted_algebra_is_associative():
    G, c = heisenberg_cocycle()
    A = TwistedGroupAlgebra(G, c)
    assert A.is_associative_on(itertools.product(range(4), repeat=3))
    x, y = 1, 2
    xy = A.multiply({x: CycloValue.rational(1)}, {y: CycloValue.rational(1)})
    yx = A.multiply({y: CycloValue.rational(1)}, {x: CycloValue.rational(1)})
    assert xy[3] == -yx[3]


def test_center_dimensions():
    assert algebra_center_dim(TwistedGroupAlgebra(builtin_group("S3"))) == 3
    assert algebra_center_dim(TwistedGroupAlgebra(builtin_group("Q8"))) == 5
    assert algebra_center_dim(TwistedGroupAlgebra(builtin_group("Z2xZ2"))) == 4
    G, c = heisenberg_cocycle()
    A = TwistedGroupAlgebra(G, c)
    assert algebra_center_dim(A) == 1
    (z,) = center_basis(A)
    assert set(z) == {G.identity}


@pytest.mark.parametrize("name", SMALL_GROUPS)
@pytest.mark.parametrize("genus", [0, 1, 2])
def test_frobenius_matches_brute_force(name, genus):
    G = builtin_group(name)
    value = frobenius_partition(TwistedGroupAlgebra(G), genus)
    assert value == CycloValue.rational(brute_force_surface(G, genus))


def test_surface_values():
    S3 = builtin_group("S3")
    assert brute_force_surface(S3, 0) == Fraction(1, 6)
    assert brute_force_surface(S3, 1) == 3
    assert brute_force_surface(S3, 2) == 81
    assert frobenius_partition(TwistedGroupAlgebra(S3), 2) == CycloValue.rational(81)
    assert brute_force_surface(builtin_group("Z5"), 2) == 125
    # dims 1, 1, 1, 3: 3·12² + 4²
    assert brute_force_surface(builtin_group("A4"), 2) == 448


def test_frobenius_basis_independent():
    A = TwistedGroupAlgebra(builtin_group("D4"))
    basis = center_basis(A)
    rescaled = [{k: v * (i + 2) for k, v in z.items()} for i, z in enumerate(basis)]
    mixed = [rescaled[0]] + [{**z} for z in rescaled[1:]]
    for k, v in rescaled[1].items():
        mixed[0][k] = mixed[0][k] + v if k in mixed[0] else v
    assert frobenius_partition(A, 2, mixed) == frobenius_partition(A, 2)


def test_twisted_heisenberg_surfaces():
    G, c = heisenberg_cocycle()
    A = TwistedGroupAlgebra(G, c)
    expected = {0: Fraction(1, 4), 1: Fraction(1), 2: Fraction(4), 3: Fraction(16)}
    for genus, value in expected.items():
        assert frobenius_partition(A, genus) == CycloValue.rational(value)
        assert twisted_surface_sum(A, genus) == CycloValue.rational(value)


@pytest.mark.parametrize("name", ["Z2", "Z3", "S3", "D4", "Q8"])
def test_direct_enumeration_matches_handle_counts(name):
    G = builtin_group(name)
    for genus in range(3):
        if G.order ** (2 * genus) > dw.DIRECT_ENUMERATION_LIMIT:
            continue
        count = enumerate_surface_tuples(G, genus)
        assert count == dw._surface_counts(G, genus, None)[(G.identity, Fraction(0))]
        assert brute_force_surface(G, genus) == Fraction(count, G.order)
    assert enumerate_surface_tuples(builtin_group("S3"), 2) == 486
    assert enumerate_surface_tuples(builtin_group("S3"), 0) == 1


def test_brute_force_limit():
    with pytest.raises(TooLarge):
        brute_force_surface(builtin_group("Z20"), 4)
    with pytest.raises(ValueError):
        frobenius_partition(TwistedGroupAlgebra(builtin_group("Z2")), -1)


def test_dim1_partition():
    Z4 = builtin_group("Z4")
    assert dim1_partition(Z4, ["0", "0", "0", "0"]) == 1
    assert dim1_partition(Z4, ["0", "1/4", "1/2", "3/4"]) == 0
    with pytest.raises(NotACharacter):
        dim1_partition(Z4, ["0", "1/4", "0", "0"])
    with pytest.raises(NotACharacter):
        dim1_partition(Z4, ["0"])


def test_dw3_invariant():
    Z2 = builtin_group("Z2")
    commutes = lambda i, j: [(i, 1), (j, 1), (i, -1), (j, -1)]
    assert dw3_invariant(3, [commutes(0, 1), commutes(0, 2), commutes(1, 2)], Z2) == 4
    assert dw3_invariant(0, [], Z2) == Fraction(1, 2)
    # lens space L(p, 1): π₁ = ⟨g | g^p⟩, giving gcd(p, n)/n
    assert dw3_invariant(1, [[(0, 4)]], builtin_group("Z6")) == Fraction(2, 6)
    assert dw3_invariant(1, [[(0, 3)]], builtin_group("S3")) == Fraction(3, 6)
    # S¹ × S²
    assert dw3_invariant(1, [], builtin_group("S3")) == 1
    with pytest.raises(SchemaError):
        dw3_invariant(1, [[(1, 1)]], Z2)


def test_center_simples_abelian():
    assert len(center_simples_abelian(builtin_group("Z3"))) == 9
    G, c = heisenberg_cocycle()
    simples = center_simples_abelian(G, c)
    assert len(simples) == 16
    assert len({(s.point, s.character) for s in simples}) == 16
    for x, y, y2 in itertools.product(range(4), repeat=3):
        assert l_defect(c, x, y, y2) == 0
    with pytest.raises(NonAbelian):
        center_simples_abelian(builtin_group("S3"))
    rendered = simples[0].render()
    assert set(rendered) == {"point", "character"}
