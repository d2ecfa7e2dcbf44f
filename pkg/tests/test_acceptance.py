"""Acceptance criteria, one test each.

Every test prints a single line ``PASS`` or ``FAIL`` with the criterion
number, the measured quantity and the elapsed time, then asserts.  Run
``pytest -s tests/test_acceptance.py`` or ``python tests/test_acceptance.py``
to see the lines; under plain ``pytest -v`` they are printed with capture
disabled.
"""

import math
import sys
import time
from contextlib import nullcontext

import numpy as np
import pytest

from tvspec.classify import finite_rank_bound
from tvspec.closed_ops import ClosedOperatorModel, default_probes, resolvent_bound_check
from tvspec.compact import CompactModel, compact_radius_equality
from tvspec.corpus import (
    LAMBDA_GRID,
    build_corpus,
    geometric,
    harmonic,
    one_plus_harmonic,
    probe_vectors,
    superexponential_box,
)
from tvspec.errors import PreconditionFailed
from tvspec.measure import GOLDEN, RotationOperator, build_counterexample, measure_radius_check
from tvspec.neumann import Verdict, converge_monitor, residual_identity_check
from tvspec.operators import (
    Diagonal,
    FiniteRank,
    WeightedShift,
    decay_weighted_shift,
    forward_shift,
    left_shift,
)
from tvspec.radii import (
    KINDS,
    estimate_all,
    estimate_radius,
    inf_nu_bounded,
    inf_nu_vanishing,
    limsup_root,
    radius_arithmetic_check,
    verify_ordering,
)
from tvspec.report import to_json
from tvspec.runner import gallery_scenario, run_scenario
from tvspec.seminorm_calculus import Certainty, mixed_seminorm, sampled_sup_oracle
from tvspec.spaces import (
    Coordinate,
    ExtReal,
    FiniteMax,
    SparseVector,
    WeightedSup,
    bounded_sequences_coordinatewise,
    finite_dimensional,
    null_sequences_coordinatewise,
    sup_normed,
)


def _line(capsys, number, title, ok, detail, elapsed):
    text = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}: {detail} ({elapsed:.2f} s)"
    with (capsys.disabled() if capsys is not None else nullcontext()):
        print("\n" + text if capsys is not None else text)


# 1. radii ordering over the generated corpus


def criterion_1():
    t0 = time.perf_counter()
    corpus = build_corpus()
    bad, pairs = [], 0
    for entry in corpus:
        rep = verify_ordering(estimate_all(entry.operator, entry.space, depth=50))
        pairs += rep.checked_pairs
        if not rep.ok:
            bad.append((entry.name, rep.violations))
    dt = time.perf_counter() - t0
    ok = len(corpus) >= 50 and not bad and dt < 30
    return ok, f"{len(corpus)} operators, {pairs} certified pairs, violations {bad}", dt


# 2. single-norm collapse for dense 5x5 blocks


def criterion_2():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst, misses = 0.0, []
    for i in range(20):
        a = (rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))) / np.sqrt(10)
        target = float(max(abs(np.linalg.eigvals(a))))
        ests = estimate_all(FiniteRank.from_matrix(a), finite_dimensional(5), depth=300)
        for k in KINDS:
            e = ests[k]
            rel = e.width / target
            worst = max(worst, rel)
            if not e.contains(target) or rel > 0.05:
                misses.append((i, k, e.lower.value, e.upper.value, target))
    dt = time.perf_counter() - t0
    return not misses and dt < 10, f"worst relative width {worst:.3g}, misses {misses}", dt


# 3. decay-weighted shift: pointwise radius 0, bb radius infinite


def criterion_3():
    t0 = time.perf_counter()
    space = bounded_sequences_coordinatewise()
    T = decay_weighted_shift()
    rl = estimate_radius("l", T, space, aux=[SparseVector.unit(k) for k in range(1, 21)], depth=50)
    rbb = estimate_radius("bb", T, space, aux=superexponential_box(), depth=30)
    dt = time.perf_counter() - t0
    ok = rl.upper.value <= 1e-3 and rbb.certified_lower is not None and rbb.lower.value >= 10
    return ok, f"r_l upper {rl.upper.value:.3g}, r_bb certified lower {rbb.lower.value:.3g}", dt


# 4. forward shift on null sequences


def criterion_4():
    t0 = time.perf_counter()
    space = null_sequences_coordinatewise()
    nb = estimate_radius("nb", forward_shift(), space, depth=50)
    rep = converge_monitor(forward_shift(), 1.0, "l", space, probes=[SparseVector.unit(1)], depth=100)
    dt = time.perf_counter() - t0
    trail = (rep.witness or {}).get("coordinate_trace", [])
    ok = (nb.lower.value == 0.0 == nb.upper.value and nb.certified == "both"
          and rep.verdict is Verdict.DIVERGED and rep.terms_used <= 101
          and trail == sorted(trail) and trail[-1] > trail[0])
    return ok, f"r_nb = [{nb.lower.value}, {nb.upper.value}], verdict {rep.verdict.value}, trail end {trail[-3:]}", dt


# 5. residual identity


def criterion_5():
    t0 = time.perf_counter()
    probes = probe_vectors(20)
    worst, count = 0.0, 0
    for entry in build_corpus():
        for lam in LAMBDA_GRID:
            for x in probes:
                worst = max(worst, residual_identity_check(entry.operator, lam, 40, x).value)
                count += 1
    dt = time.perf_counter() - t0
    return worst <= 1e-12, f"{count} checks, max relative deviation {worst:.3g}", dt


# 6. rotation of the circle


def criterion_6():
    t0 = time.perf_counter()
    rep = measure_radius_check(RotationOperator(GOLDEN), depth=200)
    _, s, certs = build_counterexample(GOLDEN, 4)
    dt = time.perf_counter() - t0
    chain = all(rep.radii.get(k) == {"lower": 1.0, "upper": 1.0} for k in ("l", "bb", "c", "nn"))
    blocks = [c.measure_at_least_one for c in certs]
    ok = chain and len(certs) == 4 and all(m >= 1 - 1e-9 for m in blocks) and all(c.ok for c in certs) and dt < 60
    return ok, f"chain = 1: {chain}, s = {s}, block measures {blocks}", dt


# 7. compact operators


def criterion_7():
    t0 = time.perf_counter()
    cases = [(geometric(0.5), 0.5, 64), (harmonic(), 1.0, 64)]
    rng = np.random.default_rng(77)
    for _ in range(10):
        a = (rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))) / np.sqrt(10)
        cases.append((FiniteRank.from_matrix(a), float(max(abs(np.linalg.eigvals(a)))), 5))
    misses, worst = [], 0.0
    for K, target, dim in cases:
        rep = compact_radius_equality(CompactModel(K, dim), depth=300)
        gap = max(abs(rep.radius_lower - target), abs(rep.radius_upper - target))
        worst = max(worst, gap - rep.width)
        if not rep.ok or gap > rep.width + 1e-6 or abs(rep.spectrum_abs - target) > 1e-9:
            misses.append((K.label, rep.radius_lower, rep.radius_upper, target))
    dt = time.perf_counter() - t0
    return not misses, f"{len(cases)} models, max excess over width {worst:.3g}, misses {misses}", dt


# 8. closed operator resolvent bounds


def criterion_8():
    t0 = time.perf_counter()
    model = ClosedOperatorModel.diagonal()
    probes = default_probes(100)
    violations, worst = 0, 0.0
    for lam in (-1.0, -2.0, 0.5 + 0.5j):
        for n in range(1, 5):
            rep = resolvent_bound_check(model, lam, n, probes)
            violations += rep.violations
            worst = max(worst, rep.worst_ratio / rep.constant)
    dt = time.perf_counter() - t0
    return violations == 0, f"violations {violations}, largest ratio / C_n {worst:.3g}", dt


# 9. three characterizations of the root limit


def criterion_9():
    t0 = time.perf_counter()
    misses, worst = [], 0.0
    for c in (0.01, 1.0, 100.0):
        for r in (0.1, 1.0, 7.5):
            for a in (-3, 0, 3):
                t = [ExtReal.from_log2(math.log2(c) + n * math.log2(r) + a * math.log2(n)) for n in range(1, 501)]
                for f in (limsup_root, inf_nu_vanishing, inf_nu_bounded):
                    b = f(t)
                    worst = max(worst, b.width)
                    if not b.contains(r) or b.width > 1e-2:
                        misses.append((c, r, a, f.__name__, b.lower.value, b.upper.value))
    dt = time.perf_counter() - t0
    return not misses, f"27 sequences x 3, worst width {worst:.3g}, misses {misses}", dt


# 10. mixed seminorm laws


def _law_cases():
    rng = np.random.default_rng(7)
    halfs = Diagonal.constant_value(0.5)
    sup = WeightedSup(None, None, "sup")
    return [
        (left_shift(), FiniteMax({2, 3}), Coordinate(1)),
        (left_shift(), FiniteMax({1, 2, 3, 4}), FiniteMax({1, 2, 3})),
        (halfs, Coordinate(3), Coordinate(3)),
        (halfs, sup, sup),
        (harmonic(), sup, sup),
        (decay_weighted_shift(), FiniteMax(range(1, 6)), FiniteMax(range(1, 5))),
        (Diagonal.periodic([1.0, -2.0, 0.5j]), FiniteMax({1, 2, 3, 6}), FiniteMax({1, 6})),
        (FiniteRank.from_matrix(rng.normal(size=(4, 4))), FiniteMax(range(1, 5)), FiniteMax(range(1, 5))),
        (WeightedShift(-1, lambda k: 1.0 / k, sup=1.0), WeightedSup(None, lambda k: 1.0 / k, "w"), Coordinate(3)),
    ]


def _law_probes(count, seed, width=8):
    r = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        idx = r.choice(np.arange(1, width + 1), size=int(r.integers(1, width)), replace=False)
        out.append(SparseVector({int(i): complex(*r.normal(size=2) * 10.0 ** r.integers(-3, 4)) for i in idx}))
    return out


def criterion_10():
    t0 = time.perf_counter()
    probes = _law_probes(1000, 11)
    bad = []
    worst = 0.0
    for i, (S, p, q) in enumerate(_law_cases()):
        m = mixed_seminorm(S, p, q)
        if m.certainty is not Certainty.EXACT or m.value.is_infinite:
            bad.append((i, "no exact finite value"))
            continue
        mv = m.value.value
        for x in probes:
            px = p(x).value
            lhs = q(S.apply(x)).value
            if px > 0:
                worst = max(worst, lhs / (mv * px) if mv > 0 else (0.0 if lhs == 0 else math.inf))
            if lhs > mv * px * (1 + 1e-12) + 1e-300:
                bad.append((i, "bound law"))
                break
            for c in (2.0, -0.5j):
                y = x.scale(c)
                if not math.isclose(q(S.apply(y)).value, abs(c) * lhs, rel_tol=1e-12, abs_tol=1e-300):
                    bad.append((i, "homogeneity"))
                    break
        oracle = sampled_sup_oracle(S, p, q, trials=400).value
        if oracle > mv * (1 + 1e-12):
            bad.append((i, "oracle above exact value"))
    dt = time.perf_counter() - t0
    return not bad, f"{len(_law_cases())} operators x 1000 probes, max q(Sx)/(m p(x)) {worst:.3g}, failures {bad}", dt


# 11. r_c product and sum laws on commuting diagonals


def _diag_oracle(d, K=4000):
    return max(abs(d(k)) for k in range(1, K + 1))


def criterion_11():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    pairs = []
    for _ in range(10):
        a = rng.normal(size=int(rng.integers(1, 5))) + 1j * rng.normal(size=1)
        b = rng.normal(size=int(rng.integers(1, 5))) * rng.choice([1.0, 1j])
        pairs.append((Diagonal.periodic(list(a)), Diagonal.periodic(list(b))))
    monotone = [geometric(0.5), geometric(0.9), harmonic(), one_plus_harmonic(), geometric(0.3)]
    for i in range(10):
        pairs.append((monotone[i % 5], monotone[(i * 2 + 1) % 5]))
    bad = []
    space = sup_normed()
    for S, T in pairs:
        out = radius_arithmetic_check(S, T, space)
        rs, rt = _diag_oracle(S.d), _diag_oracle(T.d)
        rst = _diag_oracle(lambda k: S.d(k) * T.d(k))
        rsum = _diag_oracle(lambda k: S.d(k) + T.d(k))
        exact = (math.isclose(out["r_S"], rs, rel_tol=1e-12) and math.isclose(out["r_T"], rt, rel_tol=1e-12)
                 and math.isclose(out["r_ST"], rst, rel_tol=1e-12)
                 and math.isclose(out["r_S_plus_T"], rsum, rel_tol=1e-12))
        if not (out["product_ok"] is True and out["sum_ok"] is True and exact):
            bad.append((S.label, T.label, out))
    dt = time.perf_counter() - t0
    return not bad, f"{len(pairs)} pairs, failures {bad}", dt


# 12. finite-rank bound


def _outer(ys, fs):
    return FiniteRank(tuple(fs), tuple(ys))


def criterion_12():
    t0 = time.perf_counter()
    rng = np.random.default_rng(12)
    bad = []
    for i in range(20):
        n = int(rng.integers(1, 5))
        fs = [SparseVector({k: rng.normal() for k in range(1, 11)}) for _ in range(n)]
        m = int(rng.integers(1, n + 1))
        coef = rng.normal(size=(m, n))
        ys = [SparseVector({k: rng.normal() for k in range(1, 7)}) for _ in range(m)]
        # T x = sum_j y_j (sum_i coef[j, i] f_i(x)) is annihilated by ker f_1 .. f_n
        gs = [SparseVector({k: sum(coef[j, i] * fs[i].coeff(k) for i in range(n)) for k in range(1, 11)})
              for j in range(m)]
        out = finite_rank_bound(fs, _outer(ys, gs), 10)
        if not (out.ok and out.rank <= out.bound == n and out.rank == m):
            bad.append((i, n, m, out.rank))
    raised = False
    try:
        finite_rank_bound([SparseVector.unit(1), SparseVector.unit(2)],
                          _outer([SparseVector.unit(1)], [SparseVector.unit(3)]), 5)
    except PreconditionFailed:
        raised = True
    dt = time.perf_counter() - t0
    return not bad and raised, f"20 constructions, failures {bad}, violation raised {raised}", dt


# 13. determinism


def criterion_13():
    t0 = time.perf_counter()
    a = to_json(run_scenario(gallery_scenario(seed=0)))
    b = to_json(run_scenario(gallery_scenario(seed=0)))
    dt = time.perf_counter() - t0
    return a == b and '"passed": true' in a, f"{len(a)} bytes, identical {a == b}", dt


CRITERIA = [
    (1, "radii ordering over the corpus", criterion_1),
    (2, "single-norm collapse on 5x5 blocks", criterion_2),
    (3, "decay-weighted shift radii", criterion_3),
    (4, "forward shift on null sequences", criterion_4),
    (5, "Neumann residual identity", criterion_5),
    (6, "circle rotation", criterion_6),
    (7, "compact radius equals spectral bound", criterion_7),
    (8, "closed operator resolvent bounds", criterion_8),
    (9, "root-limit characterizations", criterion_9),
    (10, "mixed seminorm laws", criterion_10),
    (11, "r_c product and sum laws", criterion_11),
    (12, "finite-rank bound", criterion_12),
    (13, "byte-identical gallery JSON", criterion_13),
]


@pytest.mark.parametrize("number, title, fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, fn, capsys):
    ok, detail, dt = fn()
    _line(capsys, number, title, ok, detail, dt)
    assert ok, detail


if __name__ == "__main__":
    results = []
    for number, title, fn in CRITERIA:
        ok, detail, dt = fn()
        _line(None, number, title, ok, detail, dt)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
