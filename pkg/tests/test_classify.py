import numpy as np
import pytest

from tvspec.classify import (
    CLASSES,
    ClassificationReport,
    HierarchyViolation,
    Verdict,
    classify_boundedness,
    finite_rank_bound,
    kernel_basis,
    matrix_rank,
)
from tvspec.corpus import LAMBDA_GRID, build_corpus, random_finite_rank
from tvspec.errors import PreconditionFailed
from tvspec.neumann import spectrum_probe
from tvspec.operators import FiniteRank, identity, left_shift
from tvspec.radii import KINDS
from tvspec.spaces import SparseVector, all_sequences, finite_dimensional, sup_normed

e = SparseVector.unit


def test_left_shift_continuous_not_nn():
    rep = classify_boundedness(left_shift(), all_sequences())
    assert rep["continuous"] is Verdict.YES and rep["nn"] is Verdict.NO
    assert "bounded neighbourhood" in rep.evidence["nn"]


def test_identity_not_nb_on_all_sequences():
    rep = classify_boundedness(identity(), all_sequences())
    assert rep["nb"] is Verdict.NO and rep["nn"] is Verdict.YES


def test_finite_rank_nb():
    T = random_finite_rank(np.random.default_rng(3), 2, 5)
    assert classify_boundedness(T, all_sequences())["nb"] is Verdict.YES


def test_report_rejects_hierarchy_violation():
    v = {c: Verdict.UNKNOWN for c in CLASSES}
    v["nn"], v["bb"] = Verdict.YES, Verdict.NO
    with pytest.raises(HierarchyViolation):
        ClassificationReport(v)


def test_hierarchy_over_corpus():
    order = list(CLASSES)
    for entry in build_corpus():
        rep = classify_boundedness(entry.operator, entry.space)
        for i, strong in enumerate(order):
            for weak in order[i + 1:]:
                assert not (rep[strong] is Verdict.YES and rep[weak] is Verdict.NO), entry.name


def test_normed_spaces_have_one_verdict():
    for entry in build_corpus():
        if entry.space.topology != "normed":
            continue
        rep = classify_boundedness(entry.operator, entry.space)
        assert len({rep[c] for c in CLASSES}) == 1, entry.name


def test_gallery_like_examples_have_no_unknowns():
    for T, space in ((left_shift(), all_sequences()), (identity(), all_sequences()), (left_shift(), sup_normed())):
        rep = classify_boundedness(T, space)
        assert Verdict.UNKNOWN not in rep.verdicts.values()


def test_finite_rank_spectra_agree_across_classes():
    for entry in build_corpus():
        if entry.family != "finite-rank":
            continue
        for lam in LAMBDA_GRID:
            m = spectrum_probe(entry.operator, lam, entry.space)
            assert len({m.resolvent[k] for k in ("bb", "c", "nn", "nb")}) == 1, (entry.name, lam)


def _outer(ys, fs):
    return FiniteRank(tuple(fs), tuple(ys))


def test_rank_two_construction():
    r = np.random.default_rng(0)
    fs = [SparseVector({k: r.normal() for k in range(1, 11)}) for _ in range(2)]
    ys = [SparseVector({k: r.normal() for k in range(1, 6)}) for _ in range(2)]
    out = finite_rank_bound(fs, _outer(ys, fs), 10)
    assert out.ok and out.bound == 2 and out.rank == 2 and out.factor_residual <= 1e-10


def test_rank_one_with_extra_functional():
    f1, f2 = SparseVector({1: 1.0, 2: 2.0}), SparseVector({3: 1.0, 7: -1.0})
    out = finite_rank_bound([f1, f2], _outer([SparseVector({4: 1.0})], [f1]), 10)
    assert out.ok and out.rank == 1 <= out.bound == 2


def test_violation_raises_with_kernel_probe():
    T = _outer([e(1)], [e(3)])
    with pytest.raises(PreconditionFailed) as info:
        finite_rank_bound([e(1), e(2)], T, 5)
    probe = info.value.probe
    assert probe.coeff(1) == 0 and probe.coeff(2) == 0 and T.apply(probe).max_abs() > 0


def test_rank_and_kernel_match_numpy():
    r = np.random.default_rng(1)
    for _ in range(20):
        a = r.normal(size=(4, 3)) @ r.normal(size=(3, 6))
        assert matrix_rank(a) == np.linalg.matrix_rank(a) == 3
        for z in kernel_basis(a):
            assert np.abs(a @ z).max() <= 1e-9
        assert len(kernel_basis(a)) == 3
