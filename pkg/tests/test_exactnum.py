import cmath
import random
from fractions import Fraction

import numpy as np
import pytest

from src.errors import NotEighthRootForm, SingularMatrix
from src.exactnum import (
    CycloMatrix,
    CycloValue,
    EighthRootForm,
    PhaseQZ,
    cyclo_combine,
    cyclo_inverse,
    cyclo_rank,
    cyclotomic_polynomial,
    parse_fraction,
    recognize_eighthroot,
    sqrt_cyclo,
    squarefree_split,
)


def zeta(k, n):
    return CycloValue.root_of_unity(Fraction(k, n))


def test_phase_arithmetic_is_modular():
    assert PhaseQZ.of("3/4") + PhaseQZ.of("1/2") == PhaseQZ.of("1/4")
    assert -PhaseQZ.of("1/3") == PhaseQZ.of("2/3")
    assert PhaseQZ.of("5/6") * 3 == PhaseQZ.of("1/2")
    assert PhaseQZ(Fraction(7, 4)).value == Fraction(3, 4)
    assert str(PhaseQZ(Fraction(-1, 3))) == "2/3"


def test_parse_fraction_rejects_unreduced():
    assert parse_fraction("2/4") == Fraction(1, 2)
    with pytest.raises(ValueError):
        parse_fraction("2/4", require_reduced=True)
    with pytest.raises(ValueError):
        parse_fraction("1/0")


def test_cyclotomic_polynomials():
    assert cyclotomic_polynomial(1) == (-1, 1)
    assert cyclotomic_polynomial(4) == (1, 0, 1)
    assert cyclotomic_polynomial(6) == (1, -1, 1)


def test_combine_examples():
    assert cyclo_combine(zeta(1, 4), zeta(3, 4), "add").is_zero()
    assert cyclo_combine(zeta(1, 8), zeta(1, 8), "mul") == zeta(1, 4)
    one_plus_i = CycloValue.rational(1) + zeta(1, 4)
    one_minus_i = CycloValue.rational(1) - zeta(1, 4)
    assert cyclo_combine(one_plus_i, one_minus_i, "mul") == CycloValue.rational(2)
    with pytest.raises(ValueError):
        cyclo_combine(one_plus_i, one_minus_i, "div")


def test_sum_of_all_roots_vanishes():
    for n in range(2, 13):
        assert CycloValue.from_phases(Fraction(k, n) for k in range(n)).is_zero()


def test_equality_across_orders():
    assert zeta(2, 8) == zeta(1, 4)
    assert zeta(3, 6) == CycloValue.rational(-1)
    assert zeta(1, 3) + zeta(2, 3) == CycloValue.rational(-1)


def test_combine_matches_floats():
    rng = random.Random(7)
    for _ in range(50):
        x = CycloValue.from_counts(rng.choice([3, 4, 5, 8, 12]), {rng.randrange(12): rng.randint(-3, 3) for _ in range(4)})
        y = CycloValue.from_counts(rng.choice([2, 6, 7, 8]), {rng.randrange(8): rng.randint(-3, 3) for _ in range(4)})
        assert abs((x + y).to_complex() - (x.to_complex() + y.to_complex())) < 1e-10
        assert abs((x * y).to_complex() - x.to_complex() * y.to_complex()) < 1e-10


def test_inverse_and_conjugate():
    x = CycloValue.rational(2) + zeta(1, 5)
    assert x * x.inverse() == CycloValue.rational(1)
    assert abs(x.conjugate().to_complex() - x.to_complex().conjugate()) < 1e-12
    with pytest.raises(ZeroDivisionError):
        CycloValue.rational(0).inverse()


def test_squarefree_split():
    assert squarefree_split(12) == (2, 3)
    assert squarefree_split(49) == (7, 1)
    assert squarefree_split(30) == (1, 30)


def test_sqrt_cyclo_squares_back():
    for m in [2, 3, 5, 6, 7, 10, 15, 30]:
        root = sqrt_cyclo(m)
        assert root * root == CycloValue.rational(m)
        assert abs(root.to_complex() - m ** 0.5) < 1e-10


def test_recognize_examples():
    form = recognize_eighthroot(CycloValue.rational(1) + zeta(1, 4))
    assert (form.rational, form.radicand, form.half_power, form.eighth) == (1, 2, 1, 1)
    form = recognize_eighthroot(CycloValue.rational(2))
    assert (form.rational, form.radicand, form.half_power, form.eighth) == (2, 1, 0, 0)
    with pytest.raises(NotEighthRootForm):
        recognize_eighthroot(zeta(1, 3))
    with pytest.raises(NotEighthRootForm):
        recognize_eighthroot(CycloValue.rational(0))


def test_recognize_round_trips():
    rng = random.Random(11)
    for _ in range(40):
        form = EighthRootForm(Fraction(rng.randint(1, 9), rng.randint(1, 9)), rng.choice([1, 2, 3, 5, 6, 12]), rng.randint(0, 3), rng.randrange(8))
        value = form.to_cyclo()
        assert recognize_eighthroot(value) == form
        assert abs(value.to_complex() - form.to_complex()) < 1e-9


def test_eighthroot_normal_form():
    assert EighthRootForm(Fraction(1), 8, 1) == EighthRootForm(Fraction(2), 2, 1)
    assert EighthRootForm.sqrt_power(4, 3) == EighthRootForm(Fraction(8))
    assert EighthRootForm.sqrt_power(2, -1).rational == Fraction(1, 2)
    product = EighthRootForm.sqrt_power(3, 1, 1) * EighthRootForm.sqrt_power(3, 1, 7)
    assert product == EighthRootForm(Fraction(3))
    rendered = EighthRootForm.sqrt_power(2, 1, 1).render()
    assert rendered["rational"] == "1/1" and rendered["sqrt"] == 2 and rendered["zeta8"] == 1
    assert abs(complex(*rendered["float"]) - cmath.exp(1j * cmath.pi / 4) * 2 ** 0.5) < 1e-9


def test_cyclo_matrix_products():
    n = 5
    rng = np.random.default_rng(3)
    a = rng.integers(0, n, size=(3, 4))
    b = rng.integers(0, n, size=(4, 2))
    product = CycloMatrix.from_exponents(n, a).times_monomial(b)
    for i in range(3):
        for j in range(2):
            expected = CycloValue.from_phases(Fraction(int(a[i, k] + b[k, j]), n) for k in range(4))
            assert product.entry(i, j) == expected


def test_cyclo_matrix_scale_and_equality():
    n = 4
    identity = CycloMatrix.from_permutation(n, [0, 1])
    doubled = identity.scale([2, 0, 0, 0])
    assert doubled.entry(0, 0) == CycloValue.rational(2)
    assert doubled.entry(0, 1).is_zero()
    # ζ₄² + 1 = 0
    assert CycloMatrix.from_exponents(n, [[2]]).scale([1, 0, 0, 0]) != CycloMatrix.from_exponents(n, [[0]])
    assert CycloMatrix.from_exponents(2, [[1]]) == CycloMatrix.from_exponents(4, [[2]])


def test_cyclo_linear_algebra():
    m = [[zeta(1, 3), CycloValue.rational(1)], [CycloValue.rational(1), zeta(2, 3)]]
    assert cyclo_rank(m) == 1
    with pytest.raises(SingularMatrix):
        cyclo_inverse(m)
    m2 = [[zeta(1, 4), CycloValue.rational(0)], [CycloValue.rational(1), CycloValue.rational(2)]]
    inv = cyclo_inverse(m2)
    assert inv[0][0] == zeta(3, 4)
    assert inv[1][1] == CycloValue.rational(Fraction(1, 2))
