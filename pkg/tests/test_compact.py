import numpy as np
import pytest

from tvspec.compact import (
    CompactModel,
    charpoly,
    charpoly_roots,
    compact_radius_equality,
    leading_block,
    spectral_bound,
    spectrum_of_truncation,
    tail_sup,
)
from tvspec.corpus import geometric, harmonic
from tvspec.errors import InvalidOperator
from tvspec.operators import Diagonal, FiniteRank, left_shift
from tvspec.spaces import SparseVector


def _matched(a, b, tol):
    """Greedy matching of two eigenvalue lists."""
    b = list(b)
    for z in a:
        i = int(np.argmin([abs(z - w) for w in b]))
        if abs(z - b[i]) > tol:
            return False
        b.pop(i)
    return not b


def test_geometric_diagonal_truncation():
    eig = spectrum_of_truncation(CompactModel(geometric(0.5), 8))
    assert eig == [complex(2.0 ** -k) for k in range(1, 9)]


def test_scaled_rank_one():
    K = FiniteRank((SparseVector.unit(1),), (SparseVector({1: 3.0}),), "3 e1(x)e1")
    eig = sorted(spectrum_of_truncation(CompactModel(K, 6)), key=abs)
    assert np.allclose(eig, [0, 0, 0, 0, 0, 3])


@pytest.mark.parametrize("seed", range(10))
def test_dense_block_against_characteristic_polynomial(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    K = FiniteRank.from_matrix(a)
    eig = spectrum_of_truncation(CompactModel(K, 5))
    assert np.allclose(leading_block(K, 5), a)
    assert _matched(eig, charpoly_roots(a), 1e-8)


def test_charpoly_of_known_matrix():
    a = np.array([[2.0, 1.0], [0.0, 3.0]])
    assert np.allclose(charpoly(a), [1, -5, 6])
    assert np.allclose(sorted(charpoly_roots(a).real), [2, 3])


def test_tail_sup():
    assert tail_sup(geometric(0.5), 8) == 2.0 ** -9
    assert tail_sup(harmonic(), 10) == 1 / 11
    assert tail_sup(Diagonal.finite({1: 2.0, 5: 0.5}), 3) == 0.5


def test_spectral_bound_includes_tail():
    sb = spectral_bound(CompactModel(harmonic(), 16))
    assert sb["value"] == 1.0
    assert sb["truncations"][-1] == (16, 1.0)


def test_non_compact_models_are_rejected():
    with pytest.raises(InvalidOperator):
        CompactModel(Diagonal.constant_value(1.0))
    with pytest.raises(InvalidOperator):
        CompactModel(left_shift())
    with pytest.raises(ValueError):
        CompactModel(harmonic(), 1024)


def test_equality_geometric():
    rep = compact_radius_equality(CompactModel(geometric(0.5), 64))
    assert rep.ok and rep.collapsed
    assert abs(rep.radius_upper - 0.5) <= 1e-6 and abs(rep.spectrum_abs - 0.5) <= 1e-12
    assert rep.bb_bounded == "Yes"


def test_equality_harmonic():
    rep = compact_radius_equality(CompactModel(harmonic(), 64))
    assert rep.ok and abs(rep.radius_lower - 1.0) <= rep.width + 1e-6
    assert rep.spectrum_abs == 1.0


def test_equality_nilpotent():
    K = FiniteRank((SparseVector.unit(2),), (SparseVector.unit(1),), "e1(x)e2")
    rep = compact_radius_equality(CompactModel(K, 16))
    assert rep.ok and rep.spectrum_abs == 0.0
    assert rep.radius_upper <= 1e-6
    assert rep.details["radii"]["l"]["upper"] <= 1e-6


@pytest.mark.parametrize("seed", range(10))
def test_equality_random_finite_rank(seed):
    rng = np.random.default_rng(100 + seed)
    a = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))) / 2
    rep = compact_radius_equality(CompactModel(FiniteRank.from_matrix(a), 8), depth=300)
    assert rep.ok, rep.to_dict()
    assert abs(rep.spectrum_abs - max(abs(np.linalg.eigvals(a)))) <= 1e-9
