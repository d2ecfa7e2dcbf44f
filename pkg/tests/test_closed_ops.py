import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import sparse_vectors
from tvspec.closed_ops import (
    ClosedOperatorModel,
    default_probes,
    mu,
    resolvent_bound_check,
    resolvent_constant,
    restricted_radius_check,
)
from tvspec.errors import NonCommuting, SpectrumLambda
from tvspec.operators import Diagonal, identity, left_shift
from tvspec.spaces import SparseVector


@pytest.fixture(scope="module")
def model():
    return ClosedOperatorModel.diagonal()


def test_resolvent_norm_and_example_probe(model):
    R = model.resolvent(-1.0)
    assert math.isclose(R.exact_sup(), 0.5)
    x = SparseVector.unit(5)
    # R e_5 = e_5 / (-6), T R e_5 = 5 e_5 / (-6)
    assert math.isclose(model.graph_norm(1)(R.apply(x)).value, 1.0)
    rep = resolvent_bound_check(model, -1.0, 1, [x])
    assert math.isclose(rep.constant, 2.0)  # mu_1 * 1/2 + mu_0 = 2 * 1/2 + 1
    assert rep.ok and math.isclose(rep.worst_ratio, 1.0)


def test_zero_probe(model):
    rep = resolvent_bound_check(model, -1.0, 2, [SparseVector()])
    assert rep.ok and rep.worst_ratio == 0.0


def test_lambda_on_the_diagonal_is_rejected(model):
    with pytest.raises(SpectrumLambda):
        resolvent_bound_check(model, 1.0, 1)


def test_n_must_be_positive(model):
    with pytest.raises(ValueError):
        resolvent_bound_check(model, -1.0, 0)


def test_mu_constants():
    assert mu(2.0, -1) == 0.0
    assert mu(2.0, 0) == 1.0
    assert mu(2.0, 3) == 15.0
    assert math.isclose(resolvent_constant(-2.0, 2, 1 / 3), 7 / 3 + 3)


def test_distance_to_diagonal(model):
    assert math.isclose(model.distance(2.5), 0.5)
    assert math.isclose(model.distance(0.5 + 0.5j), abs(0.5 + 0.5j - 1))
    assert math.isclose(model.distance(-2.0), 3.0)


@pytest.mark.parametrize("lam", [-1.0, -2.0, 0.5 + 0.5j])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_resolvent_bound_on_probes(model, lam, n):
    rep = resolvent_bound_check(model, lam, n, default_probes(100))
    assert rep.probes == 100
    assert rep.ok, rep.to_dict()


@given(sparse_vectors(max_index=40), st.integers(0, 5))
def test_graph_norms_are_nondecreasing(x, m):
    model = ClosedOperatorModel.diagonal()
    lo, hi = model.graph_norm(m)(x).value, model.graph_norm(m + 1)(x).value
    assert lo <= hi * (1 + 1e-12)


def test_graph_norm_direct_sum(model):
    x = SparseVector({2: 1.0, 3: -1.0})
    # sup |x|, sup |Tx|, sup |T^2 x| = 1, 3, 9
    assert math.isclose(model.graph_norm(2)(x).value, 13.0)


def test_restricted_radius_of_half(model):
    out = restricted_radius_check(model, Diagonal.constant_value(0.5))
    assert out["S"]["r_base"] == 0.5
    assert out["S"]["graph_nn_upper"] <= 0.5 + 1e-9
    assert out["S"]["ok"]


def test_restricted_radius_of_identity(model):
    out = restricted_radius_check(model, identity())
    assert out["S"]["r_base"] == 1.0
    assert math.isclose(out["S"]["graph_nn_upper"], 1.0, abs_tol=1e-9)


def test_restricted_radius_of_resolvent(model):
    out = restricted_radius_check(model, lam=-1.0)
    r = out["R"]
    assert r["r_base"] == 0.5
    assert r["graph_nb_upper"] <= 0.5 + r["bracket_width"] + 1e-9
    assert r["worst_bound_ratio"] <= 1 + 1e-12
    assert r["ok"]


def test_non_commuting_operator_is_rejected(model):
    with pytest.raises(NonCommuting):
        restricted_radius_check(model, left_shift())
