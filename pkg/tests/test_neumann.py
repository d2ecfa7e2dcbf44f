import math

import numpy as np
import pytest

from tvspec.corpus import harmonic
from tvspec.errors import NoClosedForm, ZeroLambda
from tvspec.neumann import (
    Verdict,
    converge_monitor,
    merge_reports,
    partial_sum,
    residual_identity_check,
    spectrum_probe,
    truncated_solve_evidence,
)
from tvspec.operators import (
    Diagonal,
    FiniteRank,
    Sum,
    decay_weighted_shift,
    forward_shift,
    left_shift,
)
from tvspec.radii import KINDS
from tvspec.spaces import (
    SparseVector,
    all_sequences,
    bounded_sequences_coordinatewise,
    null_sequences_coordinatewise,
    sup_normed,
)

e = SparseVector.unit
half = Diagonal.constant_value(0.5)


def test_geometric_partial_sum():
    x = partial_sum(half, 1.0, 40, e(1))
    assert abs(x.coeff(1) - 2.0) <= 1e-12 and x.support == (1,)


def test_zero_operator_partial_sum():
    x = SparseVector({1: 3.0, 5: -1j})
    got = partial_sum(Diagonal.constant_value(0.0), 2.0 + 1j, 7, x)
    assert (got - x * (1 / (2.0 + 1j))).max_abs() <= 1e-15


def test_forward_shift_partial_sum_is_trail():
    assert partial_sum(forward_shift(), 1.0, 6, e(1)) == SparseVector({k: 1.0 for k in range(1, 8)})


def test_zero_lambda_rejected():
    with pytest.raises(ZeroLambda):
        partial_sum(half, 0.0, 3, e(1))
    with pytest.raises(ZeroLambda):
        residual_identity_check(half, 0.0, 3, e(1))


def test_residual_identity_nilpotent_exact():
    T = FiniteRank((e(2),), (e(1),))
    assert residual_identity_check(T, 1.0, 5, e(2)).value == 0.0


def test_residual_identity_inside_spectrum():
    assert residual_identity_check(Diagonal.constant_value(2.0), 1.0, 10, e(1)).value <= 1e-12


def test_residual_identity_huge_terms():
    # T^n e_1 grows like 10^n: the check runs in scaled form
    assert residual_identity_check(Diagonal.constant_value(1e8), 1e-3, 200, e(1)).value <= 1e-12


def test_monitor_geometric_converges():
    rep = converge_monitor(half, 1.0, "l", sup_normed(), probes=[e(1)], depth=50)
    assert rep.verdict is Verdict.CONVERGED


def test_monitor_c0_forward_shift_diverges_with_trail():
    rep = converge_monitor(forward_shift(), 1.0, "l", null_sequences_coordinatewise(), probes=[e(1)], depth=100)
    assert rep.verdict is Verdict.DIVERGED
    trail = rep.witness["coordinate_trace"]
    assert trail == sorted(trail) and trail[-1] > trail[0]
    assert rep.witness["newest_coordinates"][-1] == 101


def test_monitor_inside_spectrum_diverges():
    rep = converge_monitor(Diagonal.constant_value(2.0), 1.0, "l", sup_normed(), probes=[e(1)], depth=60)
    assert rep.verdict is Verdict.DIVERGED and rep.witness is not None


def test_diverged_witness_exceeds_escape_or_grows():
    rep = converge_monitor(Diagonal.constant_value(3.0), 1.0, "nb", sup_normed(), depth=60)
    assert rep.verdict is Verdict.DIVERGED
    tail = [v.value for _, v in rep.partial_trace[3 * len(rep.partial_trace) // 4:]]
    assert tail[-1] > 1e12 or all(b > a for a, b in zip(tail, tail[1:]))


def test_all_kinds_merge():
    rep = converge_monitor(half, 1.0, "all", sup_normed(), probes=[e(1)], depth=60)
    assert set(rep.verdicts) == set(KINDS)
    assert all(v is Verdict.CONVERGED for v in rep.verdicts.values())


def test_merge_is_order_independent():
    a = converge_monitor(half, 1.0, "l", sup_normed(), probes=[e(1)], depth=40)
    b = converge_monitor(Diagonal.constant_value(0.5), 1.0, "c", sup_normed(), depth=40)
    assert merge_reports(a, b).to_dict() == merge_reports(b, a).to_dict()


@pytest.mark.parametrize("kind", KINDS)
def test_converges_beyond_certified_radius(kind):
    for T, lam in ((half, 0.75), (harmonic(), 1.5), (Diagonal.periodic([0.5, -0.9]), -1.2)):
        rep = converge_monitor(T, lam, kind, sup_normed(), probes=[e(1), e(2)], depth=200)
        assert rep.verdict is Verdict.CONVERGED, (T.label, kind)


def test_harmonic_diagonal_spectrum():
    two = spectrum_probe(harmonic(), 2.0, sup_normed())
    assert all(two.resolvent[k] for k in KINDS)
    zero = spectrum_probe(harmonic(), 0.0, sup_normed())
    assert zero.in_spectrum("bb")


def test_resolvent_sets_nest():
    for T, space in ((harmonic(), all_sequences()), (decay_weighted_shift(), bounded_sequences_coordinatewise()),
                     (forward_shift(), all_sequences()), (half, sup_normed())):
        for lam in (0.0, 0.5, 2.0, -1j):
            m = spectrum_probe(T, lam, space)
            flags = [m.resolvent[k] for k in KINDS]
            assert flags == sorted(flags, reverse=True), (T.label, lam)


def test_decay_shift_pointwise_spectrum():
    space = bounded_sequences_coordinatewise()
    assert spectrum_probe(decay_weighted_shift(), 0.0, space).in_spectrum("l")
    m = spectrum_probe(decay_weighted_shift(), 0.5, space)
    assert m.resolvent["l"] and all(m.in_spectrum(k) for k in ("bb", "c", "nn", "nb"))


def test_truncated_solves_stabilise():
    ev = truncated_solve_evidence(decay_weighted_shift(), 0.5)
    assert ev["leading_drift"] <= 1e-12 and max(ev["residuals"]) <= 1e-12


def test_unsupported_kind():
    with pytest.raises(NoClosedForm):
        spectrum_probe(Sum((left_shift(), harmonic())), 2.0)
