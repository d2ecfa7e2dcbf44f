import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tvspec.corpus import geometric, harmonic, random_finite_rank, superexponential_box
from tvspec.errors import InsufficientData, NonCommuting
from tvspec.operators import Diagonal, FiniteRank, decay_weighted_shift, forward_shift, left_shift
from tvspec.radii import (
    KINDS,
    estimate_all,
    estimate_radius,
    fast_null_check,
    inf_nu_bounded,
    inf_nu_vanishing,
    limsup_root,
    radius_arithmetic_check,
    verify_ordering,
)
from tvspec.spaces import (
    ExtReal,
    SparseVector,
    all_sequences,
    bounded_sequences_coordinatewise,
    null_sequences_coordinatewise,
    sup_normed,
)

half = Diagonal.constant_value(0.5)


def test_limsup_geometric():
    b = limsup_root([ExtReal.from_log2(n * math.log2(3)) for n in range(1, 201)])
    assert b.contains(3.0) and b.width <= 0.05


def test_limsup_polynomial_times_geometric():
    b = limsup_root([n * n * 0.5 ** n for n in range(1, 501)])
    assert b.contains(0.5) and b.width <= 0.05


def test_limsup_zero_sequence():
    b = limsup_root([0.0] * 20)
    assert b.lower.value == 0.0 and b.upper.value == 0.0


def test_limsup_needs_eight_terms():
    with pytest.raises(InsufficientData):
        limsup_root([1.0] * 7)


def test_limsup_infinite_tail():
    b = limsup_root([1.0] * 10 + [ExtReal(math.inf)] * 10)
    assert b.upper.is_infinite


@given(c=st.floats(0.1, 10), r=st.floats(0.05, 5), a=st.integers(-2, 2))
def test_three_characterizations_agree(c, r, a):
    t = [ExtReal.from_log2(math.log2(c) + n * math.log2(r) + a * math.log2(n)) for n in range(1, 301)]
    for f in (limsup_root, inf_nu_vanishing, inf_nu_bounded):
        b = f(t)
        assert b.contains(r, 1e-9) and b.width <= 1e-2


def test_decay_shift_pointwise_radius_vanishes():
    est = estimate_radius("l", decay_weighted_shift(), bounded_sequences_coordinatewise(),
                          aux=[SparseVector.unit(k) for k in range(1, 21)], depth=50)
    assert est.upper.value <= 1e-3


def test_decay_shift_bb_radius_diverges_on_superexponential_box():
    est = estimate_radius("bb", decay_weighted_shift(), bounded_sequences_coordinatewise(),
                          aux=superexponential_box(), depth=30)
    assert est.lower.value >= 10 and est.certified_lower is not None


def test_constant_half_nb_radius():
    est = estimate_radius("nb", half, sup_normed(), depth=40)
    assert est.lower.value == est.upper.value == 0.5 and est.certified == "both"


def test_ordering_constant_half():
    ests = estimate_all(half, sup_normed(), depth=40)
    assert all(e.lower.value == 0.5 == e.upper.value for e in ests.values())
    assert verify_ordering(ests).ok


def test_ordering_decay_shift():
    space = bounded_sequences_coordinatewise()
    ests = {"l": estimate_radius("l", decay_weighted_shift(), space,
                                 aux=[SparseVector.unit(k) for k in range(1, 21)], depth=50),
            "bb": estimate_radius("bb", decay_weighted_shift(), space, aux=superexponential_box(), depth=30)}
    assert ests["l"].upper.value <= 1e-3 <= 10 <= ests["bb"].lower.value
    assert verify_ordering(ests).ok


def test_c0_forward_shift_all_radii_zero():
    ests = estimate_all(forward_shift(), null_sequences_coordinatewise(), depth=40)
    for k in KINDS:
        assert ests[k].lower.value == 0.0 == ests[k].upper.value, k
    assert verify_ordering(ests).ok


def test_ordering_detects_violation():
    lo = estimate_radius("l", Diagonal.constant_value(2.0), sup_normed(), depth=20)
    hi = estimate_radius("nb", half, sup_normed(), depth=20)
    assert not verify_ordering({"l": lo, "nb": hi}).ok


def test_arithmetic_positive_constants():
    out = radius_arithmetic_check(half, Diagonal.constant_value(1 / 3), sup_normed())
    assert out["r_ST"] == pytest.approx(1 / 6, rel=1e-15) and out["r_S_plus_T"] == pytest.approx(5 / 6, rel=1e-15)
    assert out["product_ok"] and out["sum_ok"]


def test_arithmetic_harmonic_times_half():
    out = radius_arithmetic_check(harmonic(), half, sup_normed())
    assert out["r_ST"] == pytest.approx(0.5) and out["product_ok"] and out["sum_ok"]


def test_arithmetic_zero():
    out = radius_arithmetic_check(Diagonal.constant_value(0.0), harmonic(), sup_normed())
    assert out["r_ST"] == 0.0 and out["product_ok"]


def test_arithmetic_rejects_noncommuting():
    with pytest.raises(NonCommuting):
        radius_arithmetic_check(left_shift(), harmonic())


def test_fast_null_contracting():
    out = fast_null_check(half, lambda n: (SparseVector.unit(1), -math.lgamma(n + 1) / math.log(2)))
    assert out["precondition"] and out["result"]


def test_fast_null_expanding_diagonal():
    out = fast_null_check(Diagonal.constant_value(3.0),
                          lambda n: (SparseVector.unit(1), -math.lgamma(n + 1) / math.log(2)))
    assert out["precondition"] and out["result"]


def test_fast_null_precondition_violation():
    out = fast_null_check(Diagonal.constant_value(3.0), lambda n: (SparseVector.unit(1), -float(n)))
    assert out["precondition"] is False and out["result"] is None


CLOSED = [(half, 0.5), (geometric(0.5), 0.5), (harmonic(), 1.0), (Diagonal.periodic([0.3, -0.9j]), 0.9),
          (left_shift(), 1.0)]


@pytest.mark.parametrize("T,value", CLOSED, ids=lambda v: getattr(v, "label", str(v)))
def test_estimate_contains_closed_form(T, value):
    for k in KINDS:
        est = estimate_radius(k, T, sup_normed(), depth=60)
        assert est.contains(value, 1e-12), (k, est.lower, est.upper)


@pytest.mark.parametrize("T,value", CLOSED[:4], ids=lambda v: getattr(v, "label", str(v)))
def test_numeric_bracket_of_diagonal_contains_closed_form(T, value):
    for k in KINDS:
        est = estimate_radius(k, T, sup_normed(), depth=60, closed_form=False)
        assert est.contains(value, 1e-6 + 0.05 * value), (k, est.lower, est.upper)


def test_numeric_certified_sides_respect_shift_radius():
    # finitely supported probes never see the constant sequence that makes
    # r_l(left shift) = 1 on bounded sequences, so only certified sides apply
    for k in KINDS:
        est = estimate_radius(k, left_shift(), sup_normed(), depth=60, closed_form=False)
        if est.certified_lower is not None:
            assert est.certified_lower.value <= 1.0 + 1e-9, k
        if est.certified_upper is not None:
            assert est.certified_upper.value >= 1.0 - 1e-9, k


@pytest.mark.parametrize("seed", range(5))
def test_finite_rank_radii_collapse(seed):
    T = random_finite_rank(np.random.default_rng(seed), 1 + seed % 3, 4, 0.7)
    ests = estimate_all(T, all_sequences(), depth=60)
    vals = [ests[k] for k in ("bb", "c", "nn", "nb")]
    lo, hi = max(e.lower.value for e in vals), min(e.upper.value for e in vals)
    assert lo <= hi * (1 + 1e-9) + 1e-12
    width = max(e.width for e in vals)
    assert max(e.upper.value for e in vals) - min(e.lower.value for e in vals) <= width + 1e-9
