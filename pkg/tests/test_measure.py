import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tvspec.errors import NoCover
from tvspec.measure import (
    GOLDEN,
    RotationOperator,
    StepFunction,
    build_counterexample,
    covering_count,
    coverage_gap,
    measure_radius_check,
    rotate_apply,
)
from tvspec.neumann import Verdict


def test_rotation_by_zero_powers_is_identity():
    f = StepFunction((0.0, 0.2, 0.7), (1.0, -3.0, 5.0))
    assert rotate_apply(RotationOperator(), f, 0) == f


def test_quarter_rotation_of_half_indicator():
    g = rotate_apply(RotationOperator(0.25), StepFunction.indicator(0.0, 0.5), 1)
    assert g == StepFunction.indicator(0.25, 0.75)
    assert g.log2_at(0.3) == 0.0 and g.log2_at(0.1) == -math.inf and g.log2_at(0.8) == -math.inf


def test_negative_power_rejected():
    with pytest.raises(ValueError):
        rotate_apply(RotationOperator(), StepFunction.indicator(0.0, 0.5), -1)


def test_step_function_validation():
    with pytest.raises(ValueError):
        StepFunction((0.0, 0.5, 0.4), (0.0, 1.0, 2.0))
    with pytest.raises(ValueError):
        StepFunction((0.0, 1.0), (0.0, 1.0))


@st.composite
def step_functions(draw):
    pts = sorted(set(draw(st.lists(st.floats(0.001, 0.999), min_size=1, max_size=6))))
    vals = draw(st.lists(st.floats(-20, 20), min_size=len(pts) + 1, max_size=len(pts) + 1))
    return StepFunction(tuple([0.0] + pts), tuple(vals))


@given(step_functions(), st.integers(0, 500), st.floats(-25, 25), st.sampled_from([GOLDEN, 0.25, math.sqrt(2) - 1]))
def test_superlevel_measure_is_rotation_invariant(f, k, level, alpha):
    g = rotate_apply(RotationOperator(alpha), f, k)
    assert abs(g.superlevel(level) - f.superlevel(level)) <= 1e-12
    assert abs(g.superlevel(level, strict=False) - f.superlevel(level, strict=False)) <= 1e-12


def test_covering_count_one():
    assert covering_count(GOLDEN, 1) == 1


@pytest.mark.parametrize("n, expected", [(2, 3), (3, 5)])
def test_covering_count_golden(n, expected):
    # start points 0.618, 0.236, 0.854, 0.472, 0.090, ... ; the largest
    # circular gap first drops to <= 1/n after the stated number of arcs
    M = covering_count(GOLDEN, n)
    assert M == expected
    assert coverage_gap(GOLDEN, n, M) == 0.0
    assert coverage_gap(GOLDEN, n, M - 1) > 0.0


@pytest.mark.parametrize("n", range(2, 12))
def test_covering_count_is_minimal_for_the_sweep(n):
    M = covering_count(GOLDEN, n)
    assert coverage_gap(GOLDEN, n, M) == 0.0
    assert coverage_gap(GOLDEN, n, M - 1) > 0.0


def test_rational_rotation_never_covers():
    with pytest.raises(NoCover):
        covering_count(0.25, 8)


def test_counterexample_blocks():
    h, s, certs = build_counterexample(GOLDEN, 4)
    assert s == (0, 1, 4, 9, 14)
    assert len(certs) == 4
    for c in certs:
        assert c.measure_at_least_one >= 1 - 1e-9
        assert c.min_term_measure >= 1.0 / c.n - 1e-12
        assert c.ok
    # h = 2**(s_n) on (1/(n+1), 1/n]
    assert h.log2_at(0.75) == s[1]
    assert h.log2_at(0.4) == s[2]


def test_counterexample_needs_two_blocks():
    with pytest.raises(ValueError):
        build_counterexample(GOLDEN, 1)


def test_rotation_neumann_diverges_at_two():
    rep = RotationOperator().neumann_monitor(2.0, depth=200)
    assert rep.verdict is Verdict.DIVERGED
    assert all(b["ok"] for b in rep.witness["blocks"])


def test_rotation_neumann_inconclusive_when_depth_too_small():
    rep = RotationOperator().neumann_monitor(2.0, depth=5)
    assert rep.verdict is Verdict.INCONCLUSIVE


def test_radius_check_collapses_to_one():
    rep = measure_radius_check(RotationOperator(), depth=200)
    assert rep.invariance_error <= 1e-12
    for v in rep.lower_probe.values():
        assert v["min_measure"] == pytest.approx(0.5, abs=1e-12)
    # nu = 2: the values 2**-n drop below eps, the superlevel set empties
    assert rep.upper_probe["2.0"]["last_measure"] == 0.0
    for k in ("l", "bb", "c", "nn"):
        assert rep.radii[k] == {"lower": 1.0, "upper": 1.0}
    assert rep.radii["nb"]["lower"] == 1.0
