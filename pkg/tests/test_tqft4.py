import pytest

from src.errors import SchemaError, ShapeMismatch, TooLarge
from src.exactnum import CycloValue, EighthRootForm, PhaseQZ
from src.metric import MetricGroup, scale_form
from src.tqft4 import (
    CATALOG,
    FourManifoldSpec,
    GerbeField,
    catalog,
    connected_sum,
    partition_closed,
    partition_sum,
    q_X_eval,
    reverse_orientation,
)

SMALL_METRICS = {
    "semion": MetricGroup.from_strings([2], ["1/4"]),
    "antisemion": MetricGroup.from_strings([2], ["3/4"]),
    "z3": MetricGroup.from_strings([3], ["1/3"]),
    "z3_bar": MetricGroup.from_strings([3], ["2/3"]),
    "z4": MetricGroup.from_strings([4], ["1/8"]),
    "toric": MetricGroup.from_strings([2, 2], ["0", "0"], [["1/2"]]),
    "double_semion": MetricGroup.from_strings([2, 2], ["1/4", "3/4"], [["0"]]),
}

MANIFOLDS = [
    "S4",
    "CP2",
    "CP2bar",
    "S2xS2",
    "T4",
    pytest.param("K3", marks=pytest.mark.slow),
]


def test_catalog_invariants():
    expected = {
        "S4": (2, 0),
        "CP2": (3, 1),
        "CP2bar": (3, -1),
        "S2xS2": (4, 0),
        "T4": (0, 0),
        "K3": (24, -16),
    }
    assert set(CATALOG) == set(expected)
    for name, (euler, sign) in expected.items():
        X = catalog(name)
        assert (X.euler, X.sign) == (euler, sign)
    with pytest.raises(SchemaError):
        catalog("Enriques")


def test_manifold_operations():
    X = connected_sum(catalog("CP2"), catalog("CP2bar"))
    assert (X.euler, X.sign, X.b2) == (4, 0, 2)
    assert X.name == "CP2#CP2bar"
    Y = reverse_orientation(catalog("K3"))
    assert Y.sign == 16 and Y.euler == 24


def test_manifold_validation():
    with pytest.raises(SchemaError):
        FourManifoldSpec(((2,),))
    with pytest.raises(SchemaError):
        FourManifoldSpec(((0, 1), (-1, 0)))
    with pytest.raises(SchemaError):
        FourManifoldSpec((), -1)
    with pytest.raises(ShapeMismatch):
        FourManifoldSpec(((0, 1),))


def test_gerbe_action():
    M = SMALL_METRICS["semion"]
    assert q_X_eval(M, catalog("CP2"), GerbeField(((1,),))) == PhaseQZ.of("1/4")
    assert q_X_eval(M, catalog("CP2bar"), GerbeField(((1,),))) == PhaseQZ.of("3/4")
    assert q_X_eval(M, catalog("S2xS2"), GerbeField(((1,), (1,)))) == PhaseQZ.of("1/2")
    with pytest.raises(ShapeMismatch):
        q_X_eval(M, catalog("S2xS2"), GerbeField(((1,),)))


@pytest.mark.parametrize("manifold", MANIFOLDS)
@pytest.mark.parametrize("metric", sorted(SMALL_METRICS))
def test_sum_matches_closed_form(manifold, metric):
    M, X = SMALL_METRICS[metric], catalog(manifold)
    if M.order ** X.b2 > 10 ** 7:
        pytest.skip("field space too large for the test suite")
    assert partition_sum(M, X) == partition_closed(M, X).to_cyclo()


def test_sphere_values():
    assert partition_sum(SMALL_METRICS["semion"], catalog("S4")) == CycloValue.rational(2)
    assert partition_closed(SMALL_METRICS["z3"], catalog("S4")) == EighthRootForm.sqrt_power(3, 2)
    # χ(T⁴) = 0 and σ = 0
    assert partition_sum(SMALL_METRICS["z4"], catalog("T4")) == CycloValue.rational(1)


def test_orientation_reversal_conjugates():
    for M in SMALL_METRICS.values():
        X = catalog("CP2")
        assert partition_sum(M, reverse_orientation(X)) == partition_sum(scale_form(M, -1), X)
        assert partition_sum(M, reverse_orientation(X)) == partition_sum(M, X).conjugate()


def test_sum_limit():
    with pytest.raises(TooLarge):
        partition_sum(MetricGroup.from_strings([5], ["1/5"]), catalog("K3"))
