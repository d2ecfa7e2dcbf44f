"""Spectral radii r_l <= r_bb <= r_c <= r_nn <= r_nb from seminorm formulas.

Every radius is a limsup of n-th roots.  ``limsup_root`` turns a finite
sequence into a bracket, and ``estimate_radius`` evaluates the quantifier
structure of each radius over an enumeration of seminorms.  A sup over a
finite subset certifies a lower bound and an inf over finitely many
candidates certifies an upper bound; the estimate records which side holds.
Closed forms (diagonals with a known sup, pure shifts on coordinate
topologies) collapse both sides.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InsufficientData, NoClosedForm, NonCommuting
from .operators import Diagonal, Operator, Scale, WeightedShift, _renormalize, power_iterates, power_rows
from .seminorm_calculus import (
    Certainty,
    is_plain_sup,
    mixed_from_rows,
    mixed_seminorm,
    power_operator,
    targets_of,
)
from .spaces import (
    ExtReal,
    FiniteMax,
    INFINITY,
    Coordinate,
    CoordinateFamily,
    SeminormFamily,
    SequenceSpace,
    SparseVector,
    ZERO,
    all_sequences,
)

KINDS = ("l", "bb", "c", "nn", "nb")
_ORDER = {k: i for i, k in enumerate(KINDS)}
MIN_TERMS = 8


@dataclass(frozen=True)
class RootBracket:
    lower: ExtReal
    upper: ExtReal
    diverging: bool = False
    method: str = "log-fit"

    @property
    def width(self) -> float:
        if self.upper.is_infinite:
            return math.inf
        return self.upper.value - self.lower.value

    def contains(self, r: float, tol: float = 0.0) -> bool:
        return self.lower.value - tol <= r <= self.upper.value + tol


def _as_log2(t) -> list[float]:
    out = []
    for v in t:
        if isinstance(v, ExtReal):
            out.append(v.log2)
        else:
            v = float(v)
            if v < 0 or math.isnan(v):
                raise ValueError("sequence terms must be nonnegative")
            if 0 < v < sys.float_info.min:
                # subnormal: too few significant bits to fit against, so skip it
                out.append(math.nan)
            else:
                out.append(math.log2(v) if v > 0 else -math.inf)
    return out


def _lsq(cols: list[np.ndarray], y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    return coef, y - a @ coef


def _window_points(y: list[float], start: int) -> tuple[np.ndarray, np.ndarray]:
    ns = np.arange(start, len(y) + 1, dtype=float)
    ys = np.array(y[start - 1:], dtype=float)
    keep = np.isfinite(ys)
    return ns[keep], ys[keep]


def _fit(cols, ys):
    coef, res = _lsq(cols, ys)
    return float(coef[0]), float(np.max(np.abs(res), initial=0.0))


def _slope(ns, ys, model) -> tuple[float, float] | None:
    """Fitted growth rate (log2) and an uncertainty for it.

    The uncertainty is the chord bound: if the data stay within d of a line,
    the slope is known to within 2d / span.  A log2 n term is added to the
    model only when it explains the data markedly better, since it is nearly
    collinear with n over a short window.
    """
    if len(ns) < 2:
        return None
    span = max(ns[-1] - ns[0], 1.0)
    ones = np.ones_like(ns)
    if model == "log-fit":
        s, d = _fit([ns, ones], ys)
        if len(ns) >= 4:
            s3, d3 = _fit([ns, ones, np.log2(ns)], ys)
            if d3 < 0.5 * d:
                s, d = s3, d3
    elif model == "ratio":
        # successive differences D_n = a + b log2(1 + 1/n) + c/n^2
        consec = np.diff(ns) == 1
        dd = np.diff(ys)[consec]
        m = ns[:-1][consec]
        if len(dd) < 2:
            return None
        s, d = _fit([np.ones_like(m)], dd)
        if len(dd) >= 4:
            s3, d3 = _fit([np.ones_like(m), np.log2(1.0 + 1.0 / m), 1.0 / m ** 2], dd)
            if d3 < 0.5 * d:
                s, d = s3, d3
        # a bounded wobble of size d in the differences moves the mean rate by d / sqrt(count)
        return s, 3.0 * d / math.sqrt(len(dd)) + 1e-12 * max(1.0, abs(s))
    elif model == "root":
        # n-th roots rho_n = a + b log2(n)/n + c/n
        rho = ys / ns
        s, d = _fit([ones, 1.0 / ns], rho)
        if len(ns) >= 4:
            s3, d3 = _fit([ones, np.log2(ns) / ns, 1.0 / ns], rho)
            if d3 < 0.5 * d:
                s, d = s3, d3
        d *= ns[-1]
    else:
        raise ValueError(model)
    return s, 2.0 * d / span + 1e-12 * max(1.0, abs(s))


def _bracket(t, model: str) -> RootBracket:
    y = _as_log2(t)
    n = len(y)
    if n < MIN_TERMS:
        raise InsufficientData(f"need at least {MIN_TERMS} terms, got {n}")
    half, quarter = (n + 1) // 2, (3 * n + 3) // 4
    tail = y[half - 1:]
    last_q = y[quarter - 1:]
    if all(v == -math.inf for v in y):
        return RootBracket(ZERO, ZERO, False, model)
    if all(v == math.inf for v in last_q):
        return RootBracket(INFINITY, INFINITY, True, model)
    if all(v == -math.inf for v in last_q):
        # eventually zero
        return RootBracket(ZERO, ZERO, False, model)
    any_inf = any(v == math.inf for v in tail)
    fits = []
    for start in (half, quarter):
        ns, ys = _window_points(y, start)
        got = _slope(ns, ys, model)
        if got is not None:
            fits.append(got)
    diverging = False
    if not fits:
        roots = [v / (i + 1) for i, v in enumerate(y) if math.isfinite(v) and i + 1 >= half]
        roots = roots or [v / (i + 1) for i, v in enumerate(y) if math.isfinite(v)]
        if not roots:
            raise InsufficientData("no term with a usable magnitude")
        lo = hi = max(roots)
    else:
        # each window gives an interval; both should hold, so intersect them
        lo = max(s - u for s, u in fits)
        hi = min(s + u for s, u in fits)
        if lo > hi:
            # the windows disagree; a clearly steeper late window means the
            # roots are still climbing
            if fits[-1][0] - fits[0][0] > 0.05 + 3 * max(u for _, u in fits):
                diverging = True
            lo = min(s - u for s, u in fits)
            hi = max(s + u for s, u in fits)
    lower = ExtReal.from_log2(lo)
    upper = INFINITY if (any_inf or diverging) else ExtReal.from_log2(hi)
    return RootBracket(lower, upper, diverging or any_inf, model)


def limsup_root(t: Sequence) -> RootBracket:
    """Bracket for limsup t_n^(1/n) from t_1..t_N (N >= 8).

    The growth rate is the slope of log2 t_n against n in a fit that also
    carries a log2 n term, so polynomial factors n^a do not bias it.  Fits on
    the last half and the last quarter are combined, widened by the residual
    spread.  Any infinite tail term makes the upper end INFINITY.
    """
    return _bracket(t, "log-fit")


def inf_nu_vanishing(t: Sequence) -> RootBracket:
    """Bracket for inf { nu : t_n / nu^n -> 0 }, from the ratio test."""
    return _bracket(t, "ratio")


def inf_nu_bounded(t: Sequence) -> RootBracket:
    """Bracket for inf { nu : t_n / nu^n bounded }, from extrapolated n-th roots."""
    return _bracket(t, "root")


@dataclass(frozen=True)
class RadiusEstimate:
    kind: str
    lower: ExtReal
    upper: ExtReal
    iterates: tuple
    method: str
    certified: str  # "lower", "upper", "both" or "none"
    notes: tuple = ()

    @property
    def certified_lower(self) -> ExtReal | None:
        return self.lower if self.certified in ("lower", "both") else None

    @property
    def certified_upper(self) -> ExtReal | None:
        return self.upper if self.certified in ("upper", "both") else None

    @property
    def width(self) -> float:
        if self.upper.is_infinite:
            return 0.0 if self.lower.is_infinite else math.inf
        return self.upper.value - self.lower.value

    def contains(self, r: float, tol: float = 0.0) -> bool:
        return self.lower.value - tol <= r <= self.upper.value + tol

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "lower": self.lower,
            "upper": self.upper,
            "certified": self.certified,
            "method": self.method,
            "iterates": [list(p) for p in self.iterates],
            "notes": list(self.notes),
        }


# closed forms


def _unscale(T: Operator):
    f = 1.0
    while isinstance(T, Scale):
        f *= abs(T.factor)
        T = T.operand
    return f, T


def closed_form_radius(kind: str, T: Operator, space: SequenceSpace) -> tuple[float, str] | None:
    """Exact radius for diagonals with known sup and pure shifts, else None."""
    f, base = _unscale(T)
    if f == 0:
        return 0.0, "zero operator"
    if isinstance(base, Diagonal):
        if space.dimension is not None:
            s = max(abs(base.d(k)) for k in range(1, space.dimension + 1))
        else:
            s = base.exact_sup()
        if s is None:
            return None
        s *= f
        if space.topology == "coordinate" and kind == "nb" and base.support is None and s > 0:
            # no finite set of coordinates controls all of T^n x
            return math.inf, "diagonal with infinite support is not nb-bounded on any power"
        return s, "sup of diagonal entries"
    if (isinstance(base, WeightedShift) and base.weight is None and space.topology == "normed"
            and space.dimension is None and is_plain_sup(space.norm)):
        # ||T^n|| = 1, and T^n fixes the constant sequence (backward) or is an isometry (forward)
        return f, "unweighted shift on the sup-normed space"
    if isinstance(base, WeightedShift) and space.topology == "coordinate" and space.dimension is None:
        if base.offset < 0:
            return 0.0, "every coordinate of T^n x vanishes for large n"
        if base.offset > 0 and kind in ("c", "nn", "nb"):
            return math.inf, "row supports of T^n escape every finite window"
    return None


# numeric evaluation


def _seq_from_rows(table, p, q, targets):
    return [mixed_from_rows(rows, p, q, targets) for _, rows in table[1:]]


def _row_table(T, targets, depth):
    return list(power_rows(T, sorted(targets), depth))


def _power_seq(T, p, q, depth, table_cache):
    """t_n = m_{p,q}(T^n) for n = 1..depth, with its certainty."""
    tg = targets_of(T, q)
    if p.weighted_sup and tg is not None:
        key = (id(T), depth, tuple(sorted(tg)))
        if key not in table_cache:
            table_cache[key] = _row_table(T, tg, depth)
        return _seq_from_rows(table_cache[key], p, q, tg), True
    seq, exact = [], True
    for n in range(1, depth + 1):
        v = mixed_seminorm(power_operator(T, n), p, q, trials=40, seed=n)
        exact &= v.certainty is Certainty.EXACT
        seq.append(v.value)
    return seq, exact


def _iterates(seq) -> tuple:
    out = []
    for n, v in enumerate(seq, start=1):
        out.append((n, v.root(n)))
    return tuple(out)


def _worse(a: RootBracket, b: RootBracket) -> bool:
    return (a.upper, a.lower) > (b.upper, b.lower)


def _sup_set(family, level):
    """Seminorms enough for a sup: finite maxima add nothing over single coordinates."""
    sems = family.enumerate(level)
    coords = [s for s in sems if isinstance(s, Coordinate)]
    return coords or sems


def nn_chain(T: Operator, family, level: int) -> list:
    """Cofinal chain used as a candidate base for nn-boundedness.

    When rows of T read only coordinates <= max(j, K), the windows {1..m}
    with m >= K form a base of neighbourhoods, so smaller windows are dropped.
    """
    K = T.read_bound()
    if isinstance(family, CoordinateFamily) and K is not None and K > 1:
        return [FiniteMax(range(1, m + 1)) for m in range(K, K + max(level, 1))]
    return family.cofinal(level)


def _nb_structure(T: Operator, space: SequenceSpace):
    if space.topology != "coordinate":
        return None
    F, G = T.column_support(), T.range_support()
    if F is None or G is None:
        return None
    return F, G


def estimate_radius(kind: str, T: Operator, space: SequenceSpace | None = None, aux=None,
                    depth: int = 50, level: int = 4, cache: dict | None = None,
                    closed_form: bool = True) -> RadiusEstimate:
    """Estimate one of the five radii.

    ``aux`` depends on the kind: probe vectors for "l" (default e_1..e_level),
    a bounded-set family for "bb" (default the space's), and a list of
    candidate generating families for "nn" (default the space's family).
    ``cache`` may be shared between calls on the same operator and depth.
    With ``closed_form=False`` only the numeric bracket is returned.
    """
    kind = kind.lower()
    if kind not in KINDS:
        raise ValueError(f"unknown radius kind {kind!r}")
    if depth < MIN_TERMS:
        raise InsufficientData(f"depth must be >= {MIN_TERMS}")
    space = space or all_sequences()
    numeric = _numeric(kind, T, space, aux, depth, level, {} if cache is None else cache)
    closed = closed_form_radius(kind, T, space) if closed_form else None
    if closed is None:
        return numeric
    value, why = closed
    v = ExtReal(value)
    return RadiusEstimate(kind, v, v, numeric.iterates, f"closed-form: {why}", "both",
                          numeric.notes + (f"numeric bracket [{numeric.lower!r}, {numeric.upper!r}]",))


def _numeric(kind, T, space, aux, depth, level, cache) -> RadiusEstimate:
    notes: list[str] = []
    banach_fd = space.topology == "normed" and space.dimension is not None
    nb_struct = _nb_structure(T, space)
    truncated = False

    def worst(pairs):
        best = None
        for br, seq in pairs:
            if best is None or _worse(br, best[0]):
                best = (br, seq)
        return best

    if kind == "l":
        probes = aux if aux is not None else [SparseVector.unit(k) for k in range(1, (space.dimension or level) + 1)]
        sems = _sup_set(space.family, level)
        pairs = []
        for x in probes:
            its = list(power_iterates(T, x, depth))[1:]
            for p in sems:
                seq = [p(v) * ExtReal.from_log2(s) if v else ZERO for _, v, s in its]
                pairs.append((limsup_root(seq), seq))
        br, seq = worst(pairs)
        cert = "both" if banach_fd and aux is None else "lower"
        method = f"sup over {len(probes)} probes x {len(sems)} seminorms"
    elif kind == "bb":
        bounded = aux if aux is not None else space.bounded
        boxes = bounded.enumerate(level)
        if nb_struct is not None:
            qs = [Coordinate(j) for j in sorted(nb_struct[1])] or [Coordinate(1)]
        else:
            qs = _sup_set(space.family, level)
        pairs = []
        for b in boxes:
            for q in qs:
                seq, exact = _power_seq(T, b, q, depth, cache)
                truncated |= not exact
                pairs.append((limsup_root(seq), seq))
        br, seq = worst(pairs)
        cert = "both" if (banach_fd or nb_struct is not None) else "lower"
        method = f"sup over {len(boxes)} bounded sets x {len(qs)} seminorms"
    elif kind == "c":
        if nb_struct is not None:
            F, G = nb_struct
            qs = [Coordinate(j) for j in sorted(G)] or [Coordinate(1)]
            chain = [FiniteMax(F)]
            inner_exact = True
        else:
            qs = _sup_set(space.family, level)
            K = T.read_bound()
            reach = max([level] + ([K] if K is not None else []))
            chain = space.family.cofinal(reach + (2 if K is not None else level))
            inner_exact = K is not None and space.topology == "coordinate"
        pairs = []
        for q in qs:
            inner = None
            for p in chain[-1:]:
                seq, exact = _power_seq(T, p, q, depth, cache)
                truncated |= not exact
                br_ = limsup_root(seq)
                if inner is None or _worse(inner[0], br_):
                    inner = (br_, seq)
            pairs.append(inner)
        br, seq = worst(pairs)
        if banach_fd or nb_struct is not None:
            cert = "both"
        else:
            cert = "lower" if inner_exact else "none"
        method = f"sup over {len(qs)} seminorms of inf over a cofinal chain"
    elif kind == "nn":
        if nb_struct is not None:
            F, G = nb_struct
            fams = [[FiniteMax(F | G)]]
        else:
            cands = aux if aux is not None else [space.family]
            fams = [nn_chain(T, fam, level) for fam in cands]
        options = []
        for chain in fams:
            pairs = []
            for p in chain:
                seq, exact = _power_seq(T, p, p, depth, cache)
                truncated |= not exact
                pairs.append((limsup_root(seq), seq))
            options.append(worst(pairs))
        br, seq = min(options, key=lambda o: (o[0].upper, o[0].lower))
        finite = nb_struct is not None or all(
            getattr(f, "finite", False) or _graph_exact(T, f) for f in (aux if aux is not None else [space.family]))
        if banach_fd or nb_struct is not None:
            cert = "both"
        else:
            cert = "upper" if finite else "none"
        method = f"inf over {len(fams)} candidate families of sup over each"
    else:  # nb
        if nb_struct is not None:
            F, G = nb_struct
            chain = [FiniteMax(F)]
            qs = [Coordinate(j) for j in sorted(G)] or [Coordinate(1)]
        else:
            chain = space.family.cofinal(level)
            qs = _sup_set(space.family, 2 * level if space.topology == "coordinate" else level)
        options = []
        for p in chain:
            pairs = []
            for q in qs:
                seq, exact = _power_seq(T, p, q, depth, cache)
                truncated |= not exact
                pairs.append((limsup_root(seq), seq))
            options.append(worst(pairs))
        br, seq = min(options, key=lambda o: (o[0].upper, o[0].lower))
        cert = "both" if (banach_fd or nb_struct is not None) else "none"
        method = f"inf over {len(chain)} neighbourhoods of sup over {len(qs)} seminorms"
    if truncated:
        notes.append("some seminorm values are sampled lower bounds")
        cert = {"both": "lower", "upper": "none"}.get(cert, cert)
    if br.diverging:
        notes.append("root sequence still increasing; upper end left open")
    return RadiusEstimate(kind, br.lower, br.upper, _iterates(seq), method, cert, tuple(notes))


def _graph_exact(T, fam) -> bool:
    from .spaces import GraphFamily

    if not isinstance(fam, GraphFamily):
        return False
    f, base = _unscale(T)
    return isinstance(base, Diagonal) and base.exact_sup() is not None


def estimate_all(T: Operator, space: SequenceSpace | None = None, depth: int = 50, level: int = 4,
                 aux: dict | None = None) -> dict[str, RadiusEstimate]:
    aux = aux or {}
    cache: dict = {}
    return {k: estimate_radius(k, T, space, aux.get(k), depth, level, cache) for k in KINDS}


@dataclass(frozen=True)
class OrderingReport:
    ok: bool
    violations: tuple
    checked_pairs: int


def verify_ordering(estimates: dict, rtol: float = 1e-9, atol: float = 1e-12) -> OrderingReport:
    """No certified lower bound of a smaller radius may exceed a certified
    upper bound of a larger one."""
    kinds = sorted(estimates, key=lambda k: _ORDER[k])
    bad, checked = [], 0
    for i, a in enumerate(kinds):
        lo = estimates[a].certified_lower
        if lo is None:
            continue
        for b in kinds[i + 1:]:
            hi = estimates[b].certified_upper
            if hi is None:
                continue
            checked += 1
            if hi.is_infinite:
                continue
            if lo.is_infinite or lo.value > hi.value * (1 + rtol) + atol:
                bad.append((a, b, lo, hi))
    return OrderingReport(not bad, tuple(bad), checked)


def _commutes(S: Operator, T: Operator, probes=20) -> bool:
    for k in range(1, probes + 1):
        e = SparseVector.unit(k)
        d = S.apply(T.apply(e)) - T.apply(S.apply(e))
        scale = max(S.apply(T.apply(e)).max_abs(), 1.0)
        if d.max_abs() > 1e-12 * scale:
            return False
    return True


def radius_arithmetic_check(S: Operator, T: Operator, space: SequenceSpace | None = None) -> dict:
    """Check r_c(ST) <= r_c(S) r_c(T) and r_c(S+T) <= r_c(S) + r_c(T) for diagonals."""
    space = space or all_sequences()
    fs, sb = _unscale(S)
    ft, tb = _unscale(T)
    if not isinstance(sb, Diagonal) or not isinstance(tb, Diagonal):
        if not _commutes(S, T):
            raise NonCommuting("S and T do not commute on unit probes")
        raise NoClosedForm("arithmetic check needs diagonal operators")
    if not _commutes(S, T):
        raise NonCommuting("S and T do not commute on unit probes")

    def rc(op):
        cf = closed_form_radius("c", op, space)
        return None if cf is None else cf[0]

    S_d = sb if fs == 1 else Diagonal(lambda k: fs * sb.d(k), support=sb.support, period=sb.period,
                                      monotone_from=sb.monotone_from, name=S.label)
    T_d = tb if ft == 1 else Diagonal(lambda k: ft * tb.d(k), support=tb.support, period=tb.period,
                                      monotone_from=tb.monotone_from, name=T.label)
    rs, rt = rc(S), rc(T)
    prod, total = rc(S_d.times(T_d)), rc(S_d.plus(T_d))
    out = {"r_S": rs, "r_T": rt, "r_ST": prod, "r_S_plus_T": total}
    out["product_ok"] = None if None in (rs, rt, prod) else prod <= rs * rt * (1 + 1e-12) + 1e-300
    out["sum_ok"] = None if None in (rs, rt, total) else total <= (rs + rt) * (1 + 1e-12) + 1e-300
    return out


def fast_null_check(T: Operator, x_seq: Callable[[int], object], depth: int = 100,
                    alphas=(2.0, 10.0), space: SequenceSpace | None = None) -> dict:
    """Check that alpha^n T^n x_n -> 0 whenever (x_n) is fast null.

    ``x_seq(n)`` returns a SparseVector or a pair (vector, log2 scale).
    """
    space = space or all_sequences()
    rc = estimate_radius("c", T, space, depth=max(depth, MIN_TERMS))
    if rc.upper.is_infinite:
        return {"precondition": False, "reason": "r_c is not known to be finite", "result": None}

    def item(n):
        got = x_seq(n)
        if isinstance(got, tuple):
            return got
        return got, 0.0

    def decays(logs):
        tail = logs[3 * len(logs) // 4:]
        finite = [v for v in tail if v > -math.inf]
        if not finite:
            return True
        return finite[-1] < -20 and finite[-1] <= max(finite)

    pre, res = {}, {}
    for a in alphas:
        la = math.log2(a)
        xs_logs, ys_logs = [], []
        for n in range(1, depth + 1):
            x, s = item(n)
            mx = x.max_abs()
            xs_logs.append(math.log2(mx) + s + n * la if mx > 0 else -math.inf)
            v = x
            sc = s
            for _ in range(n):
                if not v:
                    break
                v, sc = _renormalize(T.apply(v), sc)
            m = v.max_abs()
            ys_logs.append(math.log2(m) + sc + n * la if m > 0 else -math.inf)
        pre[a] = decays(xs_logs)
        res[a] = decays(ys_logs)
    if not all(pre.values()):
        return {"precondition": False, "reason": "x_n is not fast null", "per_alpha": pre, "result": None}
    return {"precondition": True, "per_alpha": res, "result": all(res.values())}
