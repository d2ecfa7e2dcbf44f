"""Neumann partial sums R_{lam,n} = sum_{i<=n} T^i / lam^(i+1), convergence
monitoring in the five operator topologies, and resolvent-set probes.

Partial sums are accumulated in scaled form (vector, log2 scale) so that
terms of very different size can be added without overflow.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .classify import Verdict as ClassVerdict
from .classify import classify_boundedness
from .errors import NoClosedForm, ZeroLambda
from .operators import (
    Diagonal,
    FiniteRank,
    Operator,
    Scale,
    Sum,
    WeightedShift,
    _renormalize,
    identity,
    power_iterates,
    power_rows,
)
from .radii import KINDS, _nb_structure, _sup_set, nn_chain
from .seminorm_calculus import ESCAPE, mixed_from_rows, mixed_seminorm, power_operator, targets_of
from .spaces import (
    ExtReal,
    FiniteMax,
    INFINITY,
    SequenceSpace,
    SparseVector,
    ZERO,
    all_sequences,
    as_scalar,
)

CONVERGED_TOL = 1e-12


class Verdict(str, enum.Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    INCONCLUSIVE = "Inconclusive"


def _check_lambda(lam) -> complex:
    lam = as_scalar(lam)
    if lam == 0:
        raise ZeroLambda("lambda must be nonzero")
    return lam


# scaled accumulation


def _add_scaled(acc, term):
    """(a, sa) + (b, sb) for pairs standing for a * 2**sa."""
    a, sa = acc
    b, sb = term
    if not b:
        return acc
    if not a:
        return term
    e = max(sa, sb)
    fa, fb = 2.0 ** (sa - e), 2.0 ** (sb - e)
    out: dict[int, complex] = {k: c * fa for k, c in a.items()}
    for k, c in b.items():
        out[k] = out.get(k, 0j) + c * fb
    return _renormalize(SparseVector({k: c for k, c in out.items()}), e)


def _neumann_term(v: SparseVector, s: float, i: int, lam: complex):
    """T^i x / lam^(i+1) in scaled form, given T^i x = v * 2**s."""
    ph = cmath.exp(-1j * (i + 1) * cmath.phase(lam))
    return v.scale(ph) if ph != 1 else v, s - (i + 1) * math.log2(abs(lam))


def partial_sum_scaled(T: Operator, lam, n: int, x: SparseVector) -> tuple[SparseVector, float]:
    """R_{lam,n} x as (v, s) with R_{lam,n} x = v * 2**s."""
    lam = _check_lambda(lam)
    if n < 0:
        raise ValueError("n must be >= 0")
    acc = (SparseVector(), -math.inf)
    for i, v, s in power_iterates(T, x, n):
        if v:
            acc = _add_scaled(acc, _neumann_term(v, s, i, lam))
    return acc


def _materialize(v: SparseVector, s: float) -> SparseVector:
    if not v:
        return v
    f = 2.0 ** s
    if not math.isfinite(f):
        raise OverflowError(f"entries of size 2**{s:.1f} are not representable")
    return SparseVector({k: c * f for k, c in v.items()})


def partial_sum(T: Operator, lam, n: int, x: SparseVector) -> SparseVector:
    """R_{lam,n} x = (1/lam) sum_{i=0..n} T^i x / lam^i."""
    return _materialize(*partial_sum_scaled(T, lam, n, x))


def residual_identity_check(T: Operator, lam, n: int, x: SparseVector) -> ExtReal:
    """Max coordinate deviation between R_{lam,n}(lam x - Tx) and x - T^(n+1)x / lam^(n+1).

    The deviation is relative to the largest term entering either side.
    """
    lam = _check_lambda(lam)
    y = x.scale(lam) - T.apply(x)
    terms = []
    for i, v, s in power_iterates(T, y, n):
        if v:
            terms.append((_neumann_term(v, s, i, lam), 1.0))
    vx, sx = _renormalize(x, 0.0)
    if vx:
        terms.append(((vx, sx), -1.0))
    for i, v, s in power_iterates(T, x, n + 1):
        if i == n + 1 and v:
            vv, ss = _neumann_term(v, s, n, lam)
            terms.append(((vv, ss), 1.0))
    if not terms:
        return ZERO
    E = max(s for (_, s), _ in terms)
    diff: dict[int, complex] = {}
    for (v, s), sign in terms:
        f = sign * 2.0 ** (s - E)
        for k, c in v.items():
            diff[k] = diff.get(k, 0j) + c * f
    dev = max((abs(c) for c in diff.values()), default=0.0)
    # entries of each v lie in [1, 2) at the top, so 2**E is the largest term size
    return ExtReal(dev)


# convergence monitoring


@dataclass(frozen=True)
class NeumannReport:
    lam: complex
    kind: str
    terms_used: int
    residual_trace: tuple
    partial_trace: tuple
    verdict: Verdict
    witness: dict | None = None
    notes: tuple = ()
    verdicts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "lambda": [self.lam.real, self.lam.imag],
            "kind": self.kind,
            "terms_used": self.terms_used,
            "verdict": self.verdict.value,
            "verdicts": {k: v.value for k, v in self.verdicts.items()},
            "residual_trace": [[n, v.value] for n, v in self.residual_trace],
            "partial_trace": [[n, v.value] for n, v in self.partial_trace],
            "witness": self.witness,
            "notes": list(self.notes),
        }


def merge_reports(a: NeumannReport, b: NeumannReport) -> NeumannReport:
    """Combine per-kind verdicts of two reports for the same lambda."""
    if a.lam != b.lam:
        raise ValueError("reports for different lambda")
    verdicts = dict(a.verdicts)
    verdicts.update(b.verdicts)
    rank = {Verdict.DIVERGED: 2, Verdict.INCONCLUSIVE: 1, Verdict.CONVERGED: 0}
    first, second = sorted((a, b), key=lambda r: (rank[r.verdict], r.kind), reverse=True)
    return NeumannReport(a.lam, "+".join(sorted(verdicts)), max(a.terms_used, b.terms_used),
                         first.residual_trace, first.partial_trace, first.verdict,
                         first.witness or second.witness, first.notes + second.notes,
                         dict(sorted(verdicts.items())))


def _strictly_growing(vals: list[ExtReal]) -> bool:
    if len(vals) < 2 or vals[0].is_zero:
        return False
    return all(b >= a for a, b in zip(vals, vals[1:])) and vals[-1] > vals[0]


def _judge(inc: list[ExtReal], ps: list[ExtReal] | None) -> tuple[Verdict, str]:
    """Verdict from the increment trace and the partial-sum trace."""
    N = len(inc)
    q = max(N // 4, 2)
    if any(v.is_infinite for v in inc):
        return Verdict.DIVERGED, "an increment has infinite seminorm"
    tail = inc[-q:]
    nondecreasing = all(b.log2 >= a.log2 - 1e-12 for a, b in zip(tail, tail[1:])) and not tail[0].is_zero
    if nondecreasing and ps is not None and _strictly_growing(ps[-q:]):
        return Verdict.DIVERGED, "partial sums grow monotonically over the final quarter with non-decaying increments"
    if ps is None and _strictly_growing(tail):
        return Verdict.DIVERGED, "increments grow monotonically over the final quarter"
    ref = max(ps[-1], ExtReal(1e-300)) if ps is not None else max(max(inc), ExtReal(1e-300))
    if inc[-1].is_zero or inc[-1] <= ref * ExtReal(CONVERGED_TOL):
        return Verdict.CONVERGED, "final increment below 1e-12 relative"
    bound = ExtReal(ESCAPE) * max(ExtReal(1.0), ps[0] if ps else inc[0])
    if ps is not None and ps[-1] > bound:
        return Verdict.DIVERGED, "partial-sum seminorm passed the escape bound"
    if ps is None and inc[-1] > bound:
        return Verdict.DIVERGED, "increment seminorm passed the escape bound"
    return Verdict.INCONCLUSIVE, "increments neither vanished nor grew"


_RANK = {Verdict.DIVERGED: 2, Verdict.INCONCLUSIVE: 1, Verdict.CONVERGED: 0}


def _pick(results):
    """Worst (verdict, ...) tuple: Diverged before Inconclusive before Converged."""
    return max(results, key=lambda r: (_RANK[r[0]], r[2][-1][1].log2 if r[2] and not r[2][-1][1].is_zero else -math.inf))


def _trace(vals, start=0):
    return tuple((n, v) for n, v in enumerate(vals, start=start))


def _support_trace(partials_scaled) -> list[int]:
    """Number of coordinates of each partial sum at least half the first peak."""
    first = next(((v, s) for v, s in partials_scaled if v), None)
    if first is None:
        return [0] * len(partials_scaled)
    level = math.log2(0.5 * first[0].max_abs()) + first[1]
    return [sum(1 for c in v.values() if math.log2(abs(c)) + s >= level) if v else 0 for v, s in partials_scaled]


def _pointwise(T, lam, space, probes, depth, level):
    sems = _sup_set(space.family, level) if space.topology == "coordinate" else [space.norm]
    results = []
    completeness = None
    for x in probes:
        inc_rows, partials_scaled = [], []
        acc = (SparseVector(), -math.inf)
        for i, v, s in power_iterates(T, x, depth):
            term = _neumann_term(v, s, i, lam) if v else (v, -math.inf)
            inc_rows.append(term)
            if v:
                acc = _add_scaled(acc, term)
            partials_scaled.append(acc)
        for p in sems:
            inc = [p(v) * ExtReal.from_log2(s) if v else ZERO for v, s in inc_rows]
            ps = [p(v) * ExtReal.from_log2(s) if v else ZERO for v, s in partials_scaled]
            verdict, why = _judge(inc, ps)
            results.append((verdict, why, _trace(inc), _trace(ps), {"probe": repr(x), "seminorm": p.label}))
        if not space.sequentially_complete and space.topology == "coordinate" and completeness is None:
            completeness = _completeness_witness(space, x, partials_scaled, depth)
    best = _pick(results)
    if completeness is not None and best[0] is not Verdict.DIVERGED:
        return completeness
    return best


def _completeness_witness(space, x, partials_scaled, depth):
    """Coordinatewise limit leaving a non-complete space."""
    q = max((depth + 1) // 4, 2)
    if space.membership == "null":
        counts = _support_trace(partials_scaled)
        tail = counts[-q:]
        if all(b >= a for a, b in zip(tail, tail[1:])) and tail[-1] > tail[0]:
            return (Verdict.DIVERGED,
                    "coordinatewise limit is not a null sequence: the number of coordinates of size >= delta "
                    "grows monotonically",
                    _trace([ExtReal(float(c)) for c in counts]),
                    _trace([ExtReal(float(c)) for c in counts]),
                    {"probe": repr(x), "coordinate_trace": counts,
                     "newest_coordinates": [max(v.support) if v else 0 for v, _ in partials_scaled[-5:]]})
    if space.membership == "bounded":
        sups = [ExtReal.from_log2(s) * ExtReal(v.max_abs()) if v else ZERO for v, s in partials_scaled]
        if _strictly_growing(sups[-q:]) and sups[-1] > ExtReal(ESCAPE) * max(ExtReal(1.0), sups[0]):
            return (Verdict.DIVERGED, "coordinatewise limit is unbounded", _trace(sups), _trace(sups),
                    {"probe": repr(x), "sup_trace_last": sups[-1].value})
    return None


def _row_tables(T, lam, targets, depth):
    """Scaled rows of the increments T^n/lam^(n+1) and of the partial sums R_{lam,n}."""
    inc_tables, ps_tables = [], []
    acc = {j: (SparseVector(), -math.inf) for j in targets}
    for n, rows in power_rows(T, sorted(targets), depth):
        inc = {}
        for j, (r, s) in rows.items():
            term = _neumann_term(r, s, n, lam) if r else (r, -math.inf)
            inc[j] = term
            if r:
                acc[j] = _add_scaled(acc[j], term)
        inc_tables.append(inc)
        ps_tables.append(dict(acc))
    return inc_tables, ps_tables


def _mixed_traces(T, lam, p, q, depth, cache):
    tg = targets_of(T, q)
    if p.weighted_sup and tg is not None:
        key = (tuple(sorted(tg)), depth)
        if key not in cache:
            cache[key] = _row_tables(T, lam, tg, depth)
        inc_t, ps_t = cache[key]
        inc = [mixed_from_rows(rows, p, q, tg) for rows in inc_t]
        ps = [mixed_from_rows(rows, p, q, tg) for rows in ps_t]
        return inc, ps, True
    # no finite row description: increments from closed forms or samples,
    # partial sums bounded below by p(R_n x) / q(x) over unit-vector probes
    inc, exact = [], True
    lg = math.log2(abs(lam))
    for n in range(depth + 1):
        v = mixed_seminorm(power_operator(T, n), p, q, trials=40, seed=n)
        exact &= v.certainty.value == "exact"
        inc.append(v.value * ExtReal.from_log2(-(n + 1) * lg))
    return inc, _probe_partials(T, lam, p, q, depth), exact


def _probe_partials(T, lam, p, q, depth, count: int = 8):
    """Lower bounds max_x p(R_{lam,n} x) / q(x) over the probes e_1..e_count."""
    best = [ZERO] * (depth + 1)
    for k in range(1, count + 1):
        x = SparseVector({k: 1.0})
        qx = q(x)
        if not qx > 0 or not math.isfinite(qx):
            continue
        acc = (SparseVector(), -math.inf)
        for i, v, s in power_iterates(T, x, depth):
            if v:
                acc = _add_scaled(acc, _neumann_term(v, s, i, lam))
            a, sa = acc
            val = p(a) * ExtReal.from_log2(sa - math.log2(qx)) if a else ZERO
            if val > best[i]:
                best[i] = val
    return best if not best[-1].is_zero else None


def _operator_kind(kind, T, lam, space, aux, depth, level):
    cache: dict = {}
    notes = []
    nb_struct = _nb_structure(T, space)
    if space.topology == "normed":
        pairs = [(space.norm, space.norm)]
    elif kind == "bb":
        boxes = (aux if aux is not None else space.bounded).enumerate(level)
        qs = [FiniteMax([j]) for j in sorted(nb_struct[1])] if nb_struct else _sup_set(space.family, level)
        pairs = [(b, q) for b in boxes for q in qs]
    elif kind == "c":
        qs = _sup_set(space.family, level)
        K = T.read_bound()
        reach = max([level] + ([K] if K is not None else []))
        p = space.family.cofinal(reach + (2 if K is not None else level))[-1]
        pairs = [(p, q) for q in qs]
    elif kind == "nn":
        fams = aux if aux is not None else [space.family]
        options = []
        for fam in fams:
            res = []
            chain = [FiniteMax(nb_struct[0] | nb_struct[1])] if nb_struct and aux is None else nn_chain(T, fam, level)
            for p in chain:
                inc, ps, _ = _mixed_traces(T, lam, p, p, depth, cache)
                v, why = _judge(inc, ps)
                res.append((v, why, _trace(inc), _trace(ps or []), {"seminorm": p.label, "family": fam.label}))
            options.append(_pick(res))
        return min(options, key=lambda r: _RANK[r[0]]), notes
    else:  # nb
        p = aux if aux is not None else (FiniteMax(nb_struct[0]) if nb_struct else space.family.cofinal(level)[-1])
        qs = _sup_set(space.family, 2 * level)
        pairs = [(p, q) for q in qs]
    res = []
    for p, q in pairs:
        inc, ps, exact = _mixed_traces(T, lam, p, q, depth, cache)
        if not exact:
            notes.append(f"m_{{{p.label},{q.label}}} sampled")
        v, why = _judge(inc, ps)
        wit = {"seminorm_pair": [p.label, q.label]}
        if v is Verdict.DIVERGED and kind == "bb":
            wit["extreme_point"] = _extreme_point(T, lam, p, q, depth)
        res.append((v, why, _trace(inc), _trace(ps or []), wit))
    return _pick(res), notes


def _extreme_point(T, lam, box, q, depth):
    """Box extreme point aligned with the last partial-sum row that q reads."""
    tg = targets_of(T, q) or frozenset([1])
    j = min(tg)
    _, ps_t = _row_tables(T, lam, [j], depth)
    r, _ = ps_t[-1][j]
    out = {}
    for k, c in sorted(r.items())[:20]:
        lw = box.log2_weight(k)
        if lw is None or c == 0:
            continue
        out[k] = [(-lw), cmath.phase(c.conjugate())]
    return {"row": j, "coordinates": {str(k): {"log2_bound": v[0], "phase": v[1]} for k, v in out.items()}}


def converge_monitor(T, lam, kind: str = "l", space: SequenceSpace | None = None, probes=None,
                     depth: int = 200, level: int = 4, aux=None) -> NeumannReport:
    """Monitor the Neumann series of T at lam in one topology.

    ``kind`` is one of "l" (pointwise), "bb", "c", "nn", "nb", or "all".
    Objects that carry their own monitor (the rotation on step functions)
    are delegated to it.
    """
    if hasattr(T, "neumann_monitor"):
        return T.neumann_monitor(lam, depth=depth)
    lam = _check_lambda(lam)
    space = space or all_sequences()
    if kind == "all":
        reports = [converge_monitor(T, lam, k, space, probes, depth, level, None) for k in KINDS]
        out = reports[0]
        for r in reports[1:]:
            out = merge_reports(out, r)
        return out
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    notes: list[str] = []
    if kind == "l":
        if probes is None:
            probes = [SparseVector.unit(k) for k in range(1, (space.dimension or level) + 1)]
        verdict, why, inc, ps, wit = _pointwise(T, lam, space, probes, depth, level)
    else:
        (verdict, why, inc, ps, wit), notes = _operator_kind(kind, T, lam, space, aux, depth, level)
    notes = [why] + notes
    return NeumannReport(lam, kind, depth + 1, inc, ps, verdict,
                         wit if verdict is Verdict.DIVERGED else None, tuple(notes), {kind: verdict})


# resolvent-set probes


@dataclass(frozen=True)
class SpectrumMembership:
    lam: complex
    resolvent: dict
    reasons: dict

    def in_spectrum(self, kind: str) -> bool:
        return not self.resolvent[kind]

    def to_dict(self) -> dict:
        return {"lambda": [self.lam.real, self.lam.imag],
                "resolvent": {k: self.resolvent[k] for k in KINDS},
                "reasons": {k: self.reasons[k] for k in KINDS}}


def _membership(lam, flags: dict, reasons: dict) -> SpectrumMembership:
    # resolvent sets shrink along l, bb, c, nn, nb
    for a, b in zip(KINDS, KINDS[1:]):
        if flags[b] and not flags[a]:
            raise AssertionError(f"lambda in rho^{b} but not rho^{a}")
    return SpectrumMembership(lam, dict(flags), dict(reasons))


def _all(lam, value: bool, why: str) -> SpectrumMembership:
    return _membership(lam, {k: value for k in KINDS}, {k: why for k in KINDS})


def _from_classification(lam, R: Operator, S_nb: Operator | None, space, level=6) -> SpectrumMembership:
    """rho^class membership of an existing inverse R; S_nb is R - alpha I."""
    rep = classify_boundedness(R, space, level)
    flags, reasons = {"l": True}, {"l": "lambda I - T is bijective on the space"}
    for kind, cls in (("bb", "bb"), ("c", "continuous"), ("nn", "nn")):
        flags[kind] = rep[cls] is ClassVerdict.YES
        reasons[kind] = f"R is {'' if flags[kind] else 'not '}{cls}-bounded: {rep.evidence.get(cls, '')}"
        if rep[cls] is ClassVerdict.UNKNOWN:
            raise NoClosedForm(f"cannot decide {cls}-boundedness of the resolvent")
    if S_nb is None:
        flags["nb"], reasons["nb"] = False, "no decomposition R = alpha I + S with S nb-bounded"
    else:
        rs = classify_boundedness(S_nb, space, level)
        if rs["nb"] is ClassVerdict.UNKNOWN:
            raise NoClosedForm("cannot decide nb-boundedness of R - alpha I")
        flags["nb"] = rs["nb"] is ClassVerdict.YES and flags["nn"]
        reasons["nb"] = f"R - alpha I: {rs.evidence.get('nb', '')}"
    return _membership(lam, flags, reasons)


def _diag_distance(d: Diagonal, lam: complex, dim: int | None, cap: int = 1_000_000):
    """(inf_k |lam - d(k)|, whether lam equals some d(k))."""
    if dim is not None:
        vals = [abs(lam - d.d(k)) for k in range(1, dim + 1)]
        return min(vals), min(vals) == 0
    if d.support is not None:
        vals = [abs(lam - d.d(k)) for k in d.support] + [abs(lam)]
        return min(vals), min(vals) == 0
    if d.period is not None:
        vals = [abs(lam - d.d(k)) for k in range(1, d.period + 1)]
        return min(vals), min(vals) == 0
    if d.monotone_from is not None and d.positive and d.limit is not None:
        L = float(abs(d.limit))
        head = [abs(lam - d.d(k)) for k in range(1, d.monotone_from + 1)]
        hit = min(head) == 0
        # beyond monotone_from the entries decrease from d(m) towards L
        x, y = lam.real, lam.imag
        k = d.monotone_from
        best = min(head)
        if x <= L:
            best = min(best, math.hypot(L - x, y))
        else:
            while k < cap and d.d(k).real > x:
                k += 1
            if k >= cap:
                raise NoClosedForm("monotone search did not reach lambda")
            for kk in (k - 1, k):
                if kk >= 1:
                    dist = abs(lam - d.d(kk))
                    best = min(best, dist)
                    hit |= dist == 0
        return best, hit
    raise NoClosedForm(f"no closed-form distance from lambda to the entries of {d.label}")


def _diag_probe(d: Diagonal, lam: complex, space: SequenceSpace) -> SpectrumMembership:
    dist, eigen = _diag_distance(d, lam, space.dimension)
    if eigen:
        return _all(lam, False, "lambda is a diagonal entry, so lambda I - T is not injective")
    needs_bounded = space.membership in ("bounded", "null", "finite") or space.topology == "normed"
    if dist == 0 and needs_bounded:
        return _all(lam, False, "entries 1/(lambda - d(k)) are unbounded, so the inverse does not map the space "
                                "into itself and is unbounded on the unit box")
    sup = None if dist == 0 else 1.0 / dist
    g = lambda k, d=d, lam=lam: 1.0 / (lam - d.d(k))
    c = d.eventually_constant()
    period = d.period
    R = Diagonal(g, sup=sup, period=period, constant=None if c is None else 1.0 / (lam - c),
                 name=f"R({lam:g})")
    if space.topology == "normed":
        S = R
    elif c is not None:
        # R = alpha I + (finitely supported diagonal)
        alpha = 1.0 / (lam - c)
        ent = {k: g(k) - alpha for k in d.support} if d.support is not None else {}
        S = Diagonal.finite(ent, name="R - alpha I")
    else:
        # R - alpha I keeps infinitely many nonzero entries for every alpha
        S = Diagonal(g, sup=sup, name="R - alpha I")
    return _from_classification(lam, R, S, space)


def _finite_rank_probe(T: FiniteRank, lam: complex, space: SequenceSpace) -> SpectrumMembership:
    if space.dimension is not None:
        return _matrix_probe(T, lam, space)
    if lam == 0:
        return _all(lam, False, "T has infinite-dimensional kernel, so lambda = 0 is an eigenvalue")
    M = T.gram()
    n = M.shape[0]
    A = lam * np.eye(n) - M
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= 1e-12 * max(1.0, sv[0]):
        return _all(lam, False, "lambda is an eigenvalue of the finite compression <f_i, y_k>")
    C = np.linalg.inv(A)
    # (lam - T)^{-1} = (1/lam)(I + Y (lam - M)^{-1} F)
    vecs = tuple(sum((T.vectors[k].scale(C[k, i] / lam) for k in range(n)), SparseVector()) for i in range(n))
    S = FiniteRank(T.functionals, vecs, name="finite part of R")
    R = Sum((Scale(1.0 / lam, identity()), S))
    return _from_classification(lam, R, S, space)


def _matrix_probe(T: Operator, lam: complex, space: SequenceSpace) -> SpectrumMembership:
    D = space.dimension
    A = np.array([[T.apply(SparseVector.unit(k)).coeff(j) for k in range(1, D + 1)] for j in range(1, D + 1)])
    B = lam * np.eye(D) - A
    sv = np.linalg.svd(B, compute_uv=False)
    if sv[-1] <= 1e-12 * max(1.0, sv[0]):
        return _all(lam, False, "lambda I - T is singular")
    R = FiniteRank.from_matrix(np.linalg.inv(B), name="R")
    return _from_classification(lam, R, R, space)


def _log2_row_terms(T: WeightedShift, lam: complex, j: int, count: int):
    """log2 |coefficient of x_{j + i c} in (R x)_j| for i < count."""
    c = T.offset
    out = []
    for i in range(count):
        lg, _ = T.log2_power_coefficient(i, j + i * c, j)
        out.append(lg - (i + 1) * math.log2(abs(lam)))
    return out


def _shift_probe(T: WeightedShift, lam: complex, space: SequenceSpace, rows: int = 4, count: int = 200):
    if space.topology != "coordinate" or space.dimension is not None:
        raise NoClosedForm("weighted shifts are analysed on coordinate topologies only")
    if T.offset < 0:
        if space.membership != "all":
            raise NoClosedForm("forward shifts are analysed on the space of all sequences only")
        if lam == 0:
            return _all(lam, False, "lambda I - T = -T is not surjective (e_1 is not in the range)")
        why = "lower-triangular inverse with finitely supported rows"
        return _membership(lam, {"l": True, "bb": True, "c": True, "nn": True, "nb": False},
                           {"l": why, "bb": why + " is continuous", "c": why + " is continuous",
                            "nn": why + "; windows {1..m} are invariant",
                            "nb": "R - alpha I reads infinitely many coordinates for every alpha"})
    if lam == 0:
        return _all(lam, False, "T e_1 = 0, so T is not injective")
    if space.membership == "all":
        return _all(lam, False, "the recursion x_{k+c} = lambda x_k / w(k+c) gives a kernel vector of lambda I - T")
    table = [_log2_row_terms(T, lam, j, count) for j in range(1, rows + 1)]
    slopes = [(t[-1] - t[len(t) // 2]) / (len(t) - 1 - len(t) // 2) for t in table]
    if max(slopes) > -1e-6:
        if min(slopes) > 1e-6 or (space.membership == "bounded" and max(abs(s) for s in slopes) <= 1e-6):
            # kernel recursion x_{1+ic} ~ 2**(-term_i) stays in the space
            return _all(lam, False, "the kernel recursion x_{k+c} = lambda x_k / w(k+c) stays bounded, "
                                    "so lambda is an eigenvalue")
        raise NoClosedForm("resolvent rows neither decay nor grow; no closed-form decision")
    # rows of R are absolutely summable uniformly on bounded sequences and the
    # kernel recursion grows like 1 / (row terms), so lambda I - T is bijective
    head = table[0]
    witness = {"row": 1, "log2_box_bounds": [-t for t in head[:8]]}
    why_bb = ("the box with bounds b(1 + i c) = 1 / |coefficient| is bounded, and on it (R x)_1 "
              "has partial sums i + 1, which are unbounded")
    return _membership(lam, {"l": True, "bb": False, "c": False, "nn": False, "nb": False},
                       {"l": f"resolvent rows decay (row 1 term {count}: 2**{head[-1]:.0f}); the kernel "
                             "recursion is unbounded",
                        "bb": why_bb + f"; {witness}",
                        "c": "rows of R are infinitely supported, so no cylinder controls (Rx)_1",
                        "nn": "R is not continuous", "nb": "R is not continuous"})


def spectrum_probe(T: Operator, lam, space: SequenceSpace | None = None) -> SpectrumMembership:
    """Membership of lam in the five resolvent sets, for kinds with closed-form inverses."""
    lam = as_scalar(lam)
    space = space or all_sequences()
    f = 1.0 + 0j
    while isinstance(T, Scale):
        f *= T.factor
        T = T.operand
    if f == 0:
        if lam == 0:
            return _all(lam, False, "the zero operator is not invertible")
        return _membership(lam, {k: True for k in KINDS}, {k: "R = I / lambda" for k in KINDS})
    lam_base = lam / f
    if space.dimension is not None:
        return _rescale(_matrix_probe(T, lam_base, space), lam)
    if isinstance(T, Diagonal):
        return _rescale(_diag_probe(T, lam_base, space), lam)
    if isinstance(T, FiniteRank):
        return _rescale(_finite_rank_probe(T, lam_base, space), lam)
    if isinstance(T, WeightedShift):
        return _rescale(_shift_probe(T, lam_base, space), lam)
    raise NoClosedForm(f"no resolvent analysis for {T.label}")


def _rescale(m: SpectrumMembership, lam: complex) -> SpectrumMembership:
    # (lam - fT)^{-1} = (1/f)(lam/f - T)^{-1}, so class memberships agree
    return SpectrumMembership(lam, m.resolvent, m.reasons)


def truncated_solve_evidence(T: Operator, lam, sizes=(20, 40, 80), y: SparseVector | None = None) -> dict:
    """Solve (lam - T_N) x = y on leading blocks and report the stability of x_1..x_5.

    The default right-hand side is the constant sequence 1.
    """
    lam = as_scalar(lam)
    sols, resid = [], []
    for N in sizes:
        A = np.array([[T.apply(SparseVector.unit(k)).coeff(j) for k in range(1, N + 1)] for j in range(1, N + 1)])
        b = np.ones(N, dtype=complex) if y is None else y.to_dense(N)
        x = np.linalg.solve(lam * np.eye(N) - A, b)
        sols.append(x[:5])
        resid.append(float(np.abs((lam * np.eye(N) - A) @ x - b).max()))
    drift = float(max(np.abs(sols[i] - sols[-1]).max() for i in range(len(sols))))
    return {"sizes": list(sizes), "residuals": resid, "leading_drift": drift,
            "leading": [[float(v.real), float(v.imag)] for v in sols[-1]]}
