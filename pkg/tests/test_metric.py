import random
from fractions import Fraction

import numpy as np
import pytest

from src.abgroup import FinAbGroup, cokernel
from src.errors import DegenerateForm, ShapeMismatch, WellDefinednessFailure
from src.exactnum import CycloValue, PhaseQZ, recognize_eighthroot
from src.metric import (
    MetricGroup,
    Subgroup,
    b_eval,
    commutant_subgroup,
    form_sign,
    gauss_closed_form,
    gauss_sum,
    heisenberg_summary,
    is_nondegenerate,
    metric_from_lifts,
    milgram_signature,
    orthogonal_sum,
    q_eval,
    quadratic_phase_counts,
    radical,
    require_nondegenerate,
    scale_form,
)
from src.parallel import configure_threads

SEMION = MetricGroup.from_strings([2], ["1/4"])
Z3 = MetricGroup.from_strings([3], ["1/3"])


def random_cyclic(rng, max_order):
    """A nondegenerate form on ℤ/n: q(1) = a/2n with a odd for even n, q(1) = k/n with gcd(k, n) = 1 for odd n."""
    n = rng.randint(2, max_order)
    if n % 2 == 0:
        a = rng.choice([a for a in range(1, 2 * n, 2)])
        q = Fraction(a, 2 * n)
    else:
        q = Fraction(rng.choice([k for k in range(1, n) if np.gcd(k, n) == 1]), n)
    return MetricGroup(FinAbGroup((n,)), (PhaseQZ(q),))


def random_metric(rng, max_order=200):
    M = random_cyclic(rng, 12)
    while True:
        N = random_cyclic(rng, 12)
        if M.order * N.order > max_order or rng.random() < 0.3:
            return M
        M = orthogonal_sum(M, N)


def test_well_definedness():
    with pytest.raises(WellDefinednessFailure):
        MetricGroup.from_strings([2], ["1/3"])
    with pytest.raises(WellDefinednessFailure):
        MetricGroup.from_strings([2, 2], ["0", "0"], [["1/4"]])
    with pytest.raises(ShapeMismatch):
        MetricGroup.from_strings([2, 2], ["1/4"])


def test_evaluation():
    assert q_eval(Z3, (2,)).value == Fraction(1, 3)
    assert b_eval(Z3, (1,), (1,)).value == Fraction(2, 3)
    M = MetricGroup.from_strings([2, 2], ["0", "0"], [["1/2"]])
    assert q_eval(M, (1, 1)).value == Fraction(1, 2)
    assert b_eval(M, (1, 0), (0, 1)).value == Fraction(1, 2)


def test_gauss_sum_examples():
    # two-term sum 1 + i
    assert gauss_sum(SEMION) == CycloValue.rational(1) + CycloValue.root_of_unity(Fraction(1, 4))
    assert milgram_signature(SEMION) == 1
    assert milgram_signature(scale_form(SEMION, -1)) == 7
    assert milgram_signature(Z3) == 2
    assert milgram_signature(MetricGroup.from_strings([4], ["1/8"])) == 1
    hyperbolic = MetricGroup.from_strings([2, 2], ["0", "0"], [["1/2"]])
    assert gauss_sum(hyperbolic) == CycloValue.rational(2)
    assert milgram_signature(hyperbolic) == 0
    assert milgram_signature(MetricGroup(FinAbGroup(()))) == 0


def test_degenerate_forms():
    degenerate = MetricGroup.from_strings([2], ["1/2"])
    assert radical(degenerate) == [(0,), (1,)]
    assert not is_nondegenerate(degenerate)
    with pytest.raises(DegenerateForm):
        milgram_signature(degenerate)
    with pytest.raises(DegenerateForm):
        require_nondegenerate(degenerate)
    # sum has a closed form but the wrong magnitude
    z4 = MetricGroup.from_strings([4], ["1/4"])
    assert radical(z4) == [(0,), (2,)]
    with pytest.raises(DegenerateForm):
        milgram_signature(z4)


def test_milgram_reciprocity_random():
    rng = random.Random(50)
    for _ in range(50):
        M = random_metric(rng)
        assert M.order <= 200
        assert is_nondegenerate(M)
        total = gauss_sum(M)
        assert gauss_closed_form(M).to_cyclo() == total
        assert recognize_eighthroot(total).eighth == milgram_signature(M)


def test_signature_is_additive():
    rng = random.Random(8)
    for _ in range(20):
        M, N = random_cyclic(rng, 10), random_cyclic(rng, 10)
        assert milgram_signature(orthogonal_sum(M, N)) == (milgram_signature(M) + milgram_signature(N)) % 8
        assert (milgram_signature(M) + milgram_signature(scale_form(M, -1))) % 8 == 0


def test_phase_counts():
    assert list(quadratic_phase_counts(np.array([[1]]), [3], 3)) == [1, 2, 0]
    assert list(quadratic_phase_counts(np.zeros((0, 0)), [], 4)) == [1, 0, 0, 0]
    # x·y on (ℤ/2)²
    assert list(quadratic_phase_counts(np.array([[0, 1], [0, 0]]), [2, 2], 2)) == [3, 1]


def test_gauss_sum_independent_of_threads():
    M = orthogonal_sum(MetricGroup.from_strings([5], ["1/5"]), MetricGroup.from_strings([8], ["3/16"]))
    single = gauss_sum(M)
    try:
        configure_threads(4)
        assert gauss_sum(M) == single
    finally:
        configure_threads(1)


def test_metric_from_lifts():
    M = metric_from_lifts(cokernel([[2]]), lambda m: Fraction(m[0] * m[0], 4))
    assert M.group.invariant_factors == (2,)
    assert M.q_diag == (PhaseQZ(Fraction(1, 4)),)
    with pytest.raises(WellDefinednessFailure):
        metric_from_lifts(cokernel([[2]]), lambda m: Fraction(m[0] * m[0], 3))


def test_commutants_and_signs():
    M = MetricGroup.from_strings([2, 2], ["1/4", "1/4"], [["0"]])
    first = Subgroup(M, ((1, 0),))
    second = Subgroup(M, ((0, 1),))
    assert commutant_subgroup(M, first) == second
    assert commutant_subgroup(M, second) == first
    assert commutant_subgroup(M, Subgroup(M, ())).order == 4
    assert form_sign(Z3, [((1,), PhaseQZ(Fraction(1, 3)))]) == 1
    assert form_sign(Z3, [((1,), PhaseQZ(Fraction(2, 3)))]) == -1
    assert form_sign(Z3, [((1,), PhaseQZ(Fraction(1, 3))), ((2,), PhaseQZ(Fraction(2, 3)))]) is None


@pytest.mark.parametrize("M", [SEMION, Z3, MetricGroup.from_strings([4], ["1/8"]), MetricGroup.from_strings([3, 3], ["1/3", "2/3"], [["0"]])])
@pytest.mark.parametrize("genus", [0, 1, 2])
def test_heisenberg_matrix_algebra(M, genus):
    if M.order ** (2 * genus) > 6561:
        pytest.skip("too many basis elements")
    summary = heisenberg_summary(M, genus)
    assert summary.algebra_dim == M.order ** (2 * genus)
    assert summary.center_dim == 1
    assert summary.irrep_dim == M.order ** genus


def test_commutant_of_pairing_only_form():
    M = MetricGroup.from_strings([2, 2], ["0", "0"], [["1/2"]])
    e1 = Subgroup(M, ((1, 0),))
    assert commutant_subgroup(M, e1) == e1
    assert commutant_subgroup(M, Subgroup(M, ((1, 0), (0, 1)))).order == 1


def test_commutant_is_an_involution():
    rng = random.Random(64)
    for _ in range(15):
        M = random_metric(rng, max_order=64)
        elements = list(M.group.elements())
        for x in elements:
            S = Subgroup(M, (x,))
            perp = commutant_subgroup(M, S)
            assert S.order * perp.order == M.order
            assert commutant_subgroup(M, perp) == S


def test_commutant_reverses_inclusion():
    rng = random.Random(65)
    for _ in range(15):
        M = random_metric(rng, max_order=64)
        elements = list(M.group.elements())
        for _ in range(10):
            x, y = rng.choice(elements), rng.choice(elements)
            small, big = Subgroup(M, (x,)), Subgroup(M, (x, y))
            assert small.elements <= big.elements
            assert commutant_subgroup(M, big).elements <= commutant_subgroup(M, small).elements


def test_bilinear_form_is_polarization():
    rng = random.Random(66)
    for _ in range(20):
        M = random_metric(rng)
        elements = list(M.group.elements())
        for _ in range(30):
            x, y = rng.choice(elements), rng.choice(elements)
            assert b_eval(M, x, y) == q_eval(M, M.group.add(x, y)) - q_eval(M, x) - q_eval(M, y)
            assert b_eval(M, x, y) == b_eval(M, y, x)


def test_quadratic_homogeneity():
    rng = random.Random(67)
    for _ in range(20):
        M = random_metric(rng)
        elements = list(M.group.elements())
        for _ in range(30):
            x, k = rng.choice(elements), rng.randint(-5, 5)
            assert q_eval(M, M.group.scale(k, x)) == q_eval(M, x) * (k * k)
