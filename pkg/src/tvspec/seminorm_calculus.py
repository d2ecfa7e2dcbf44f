"""Mixed operator seminorms m_{p,q}(S) = sup { q(Sx) : p(x) <= 1 }.

Two independent routes are provided.  The exact route reads the rows of S
through ``pullback`` and decides dependencies: if a row that q looks at has a
nonzero entry on a coordinate that p does not control, the value is infinite;
otherwise it is a weighted sum of absolute row entries.  The sampled route
only uses ``apply`` on random, growth and extreme-point probes and returns a
lower bound.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedCombination
from .operators import Diagonal, Operator, Product, Scale, WeightedShift
from .spaces import (
    ExtReal,
    GraphNorm,
    INFINITY,
    Seminorm,
    SparseVector,
    WeightedSup,
    ZERO,
    log2_abs,
    logsumexp2,
)

ESCAPE = 1e12


class Certainty(enum.Enum):
    EXACT = "exact"
    LOWER_BOUND = "lower_bound"


@dataclass(frozen=True)
class MixedSeminormValue:
    value: ExtReal
    certainty: Certainty
    witness: SparseVector | None = None


def row_value(row: SparseVector, log2_scale: float, p: Seminorm) -> ExtReal:
    """sup_{p(x) <= 1} |<row, x>| * 2**log2_scale for a weighted-sup p."""
    if not row:
        return ZERO
    logs = []
    plain = True
    for k, c in row.items():
        lw = p.log2_weight(k)
        if lw is None:
            return INFINITY
        if lw != 0.0:
            plain = False
        logs.append(log2_abs(c) - lw)
    if plain and -1000 < log2_scale < 1000 and log2_scale == int(log2_scale):
        total = math.fsum(abs(c) for c in row.values())
        if total < 2.0 ** (1000 - abs(log2_scale)):
            return ExtReal(math.ldexp(total, int(log2_scale)))
    return ExtReal.from_log2(logsumexp2(logs) + log2_scale)


def targets_of(S: Operator | None, q: Seminorm) -> frozenset | None:
    """Coordinates that q(Sx) can depend on, when finitely many."""
    if not q.weighted_sup:
        return None
    win = q.window
    rng = S.range_support() if S is not None else None
    if win is None:
        return rng
    if rng is not None:
        return win & rng
    return win


def mixed_from_rows(rows: dict, p: Seminorm, q: Seminorm, targets=None) -> ExtReal:
    """Exact m_{p,q} from a table {j: (row_j, log2_scale)} covering q's targets."""
    if targets is None:
        targets = q.window
    best = ZERO
    for j in sorted(targets):
        lq = q.log2_weight(j)
        if lq is None or j not in rows:
            continue
        r, s = rows[j]
        v = row_value(r, s, p)
        if v.is_infinite:
            return INFINITY
        if lq != 0.0:
            v = v * ExtReal.from_log2(lq)
        if v > best:
            best = v
    return best


def is_plain_sup(p: Seminorm) -> bool:
    return isinstance(p, WeightedSup) and p.window is None and p.weight is None


def _diag_part(S: Operator):
    """(factor, Diagonal) when S is a scaled diagonal, else None."""
    f = 1.0 + 0j
    while isinstance(S, Scale):
        f *= S.factor
        S = S.operand
    if isinstance(S, Diagonal):
        return f, S
    return None


def _closed_form(S: Operator, p: Seminorm, q: Seminorm) -> ExtReal | None:
    part = _diag_part(S)
    if part is None:
        f, base = 1.0 + 0j, S
        while isinstance(base, Scale):
            f *= base.factor
            base = base.operand
        if isinstance(base, WeightedShift) and is_plain_sup(p) and is_plain_sup(q):
            sup = base.exact_sup()
            if sup is not None:
                # each output coordinate is a single weighted input coordinate
                return ExtReal(abs(f) * sup)
        return None
    f, d = part
    sup = d.exact_sup()
    if sup is None:
        return None
    if is_plain_sup(p) and is_plain_sup(q):
        return ExtReal(abs(f) * sup)
    if (isinstance(p, GraphNorm) and isinstance(q, GraphNorm) and p.level == q.level
            and _diag_part(p.operator) is not None and is_plain_sup(p.base) and is_plain_sup(q.base)
            and p.operator is q.operator):
        # diagonal S commutes with diagonal T, so ||S x||_n <= sup|s| ||x||_n,
        # with equality approached along unit vectors
        return ExtReal(abs(f) * sup)
    return None


def mixed_seminorm(S: Operator, p: Seminorm, q: Seminorm, *, trials: int = 200, seed: int = 0,
                   allow_sampling: bool = True) -> MixedSeminormValue:
    closed = _closed_form(S, p, q)
    if closed is not None:
        return MixedSeminormValue(closed, Certainty.EXACT)
    if p.weighted_sup:
        targets = targets_of(S, q)
        if targets is not None:
            rows = {j: (S.pullback(SparseVector.unit(j)), 0.0) for j in targets}
            return MixedSeminormValue(mixed_from_rows(rows, p, q, targets), Certainty.EXACT)
    if not allow_sampling:
        raise UnsupportedCombination(f"no exact path for m_{{{p.label},{q.label}}}({S.label})")
    v, w = _sampled(S, p, q, trials, seed, "ball")
    return MixedSeminormValue(v, Certainty.LOWER_BOUND, w)


def operator_seminorm(S: Operator, p: Seminorm, **kw) -> MixedSeminormValue:
    return mixed_seminorm(S, p, p, **kw)


def sampled_sup_oracle(S: Operator, p: Seminorm, q: Seminorm, trials: int = 500, seed: int = 0,
                       constraint: str = "ball") -> ExtReal:
    """Lower bound for m_{p,q}(S) from probes, using only S.apply.

    ``constraint`` selects the probe set: "ball" samples {p <= 1} and
    "sphere" samples {p = 1}.  Escape past 1e12 is reported as INFINITY.
    """
    return _sampled(S, p, q, trials, seed, constraint)[0]


def _candidates(S: Operator, p: Seminorm, q: Seminorm) -> list[int]:
    pool: set[int] = set()
    for sem in (p, q):
        if sem.weighted_sup and sem.window is not None:
            pool |= set(sem.window)
    cols = S.column_support()
    if cols is not None:
        pool |= set(cols)
    top = max(pool, default=0)
    pool |= set(range(1, max(top, 8) + 5))
    return sorted(pool)


def _sampled(S, p, q, trials, seed, constraint):
    rng = np.random.default_rng(seed)
    cand = _candidates(S, p, q)
    best, witness = ZERO, None

    def consider(x):
        nonlocal best, witness
        px = p(x)
        if px.is_zero:
            if q(S.apply(x)).is_zero:
                return False
            best, witness = INFINITY, x
            return True
        if px.is_infinite:
            return False
        if constraint == "sphere" or px > ExtReal(1.0):
            x = x.scale(1.0 / px.value) if px.value < math.inf else x
            px = p(x)
        val = q(S.apply(x))
        if val.value > ESCAPE:
            best, witness = INFINITY, x
            return True
        if val > best:
            best, witness = val, x
        return False

    cols = {i: S.apply(SparseVector.unit(i)) for i in cand}
    # growth probes along coordinates p does not see
    for i in cand:
        e = SparseVector.unit(i)
        if p(e).is_zero and not q(cols[i]).is_zero:
            for t in (1.0, 1e4, 1e8, 1e13):
                if consider(e.scale(t)):
                    return best, witness
    # extreme points aligned with the entries q reads
    tq = targets_of(S, q)
    if tq is None:
        tq = sorted({k for c in cols.values() for k in c.support})
    for j in sorted(tq):
        ent = {}
        for i in cand:
            c = cols[i].coeff(j)
            if c == 0:
                continue
            ph = c.conjugate() / abs(c)
            if p.weighted_sup:
                lw = p.log2_weight(i)
                if lw is None or lw < -1000 or lw > 1000:
                    continue
                ent[i] = ph * 2.0 ** (-lw)
            else:
                ent[i] = ph
        if ent:
            consider(SparseVector(ent))
    for i in cand:
        consider(SparseVector.unit(i))
    for _ in range(trials):
        size = int(rng.integers(1, min(len(cand), 6) + 1))
        idx = rng.choice(cand, size=size, replace=False)
        vals = rng.normal(size=size) + 1j * rng.normal(size=size)
        x = SparseVector({int(i): complex(v) for i, v in zip(idx, vals)})
        if constraint == "ball" and x:
            x = x.scale(rng.uniform(0.05, 1.0))
        if x and consider(x):
            break
    return best, witness


def power_operator(T: Operator, n: int) -> Operator:
    """T^n, kept diagonal (with its structure) when T is a scaled diagonal."""
    part = _diag_part(T)
    if part is not None:
        f, d = part
        sup = d.exact_sup()
        dn = Diagonal(lambda k: (f * d.d(k)) ** n, sup=None if sup is None else (abs(f) * sup) ** n,
                      support=d.support, name=f"({d.label})^{n}")
        return dn
    if n == 0:
        from .operators import identity

        return identity()
    if isinstance(T, WeightedShift) and n > 1:
        c = T.offset
        if T.weight is None:
            return WeightedShift(n * c, name=f"({T.label})^{n}")
        # e_k -> w(k) w(k-c) ... w(k-(n-1)c) e_{k-nc}
        return WeightedShift(n * c, lambda k, T=T, c=c, n=n: math.prod(T.w(k - i * c) for i in range(n)),
                             name=f"({T.label})^{n}")
    return Product((T,) * n) if n > 1 else T
