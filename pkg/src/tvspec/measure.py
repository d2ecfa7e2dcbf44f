"""Rotation of the circle acting on step functions, with convergence in measure.

Functions are nonnegative step functions on the circle [0, 1), stored as
breakpoints and log2 values, so that values like 2**(s_n) with large s_n
never overflow.  The rotation (Tf)(t) = f(t - alpha) moves breakpoints and
leaves values alone, hence preserves the measure of every superlevel set.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import NoCover
from .spaces import ExtReal, logsumexp2

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
COVER_SLACK = 1e-12
COVER_CAP = 10**6


@dataclass(frozen=True)
class StepFunction:
    """Value 2**log2_values[i] on [breakpoints[i], breakpoints[i+1]), the last
    interval wrapping around to breakpoints[0] + 1.  -inf encodes the value 0."""

    breakpoints: tuple
    log2_values: tuple

    def __post_init__(self):
        b = self.breakpoints
        if len(b) != len(self.log2_values) or not b:
            raise ValueError("need one value per breakpoint")
        if any(not (0.0 <= x < 1.0) for x in b):
            raise ValueError("breakpoints must lie in [0, 1)")
        if any(y <= x for x, y in zip(b, b[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def indicator(cls, a: float, b: float) -> "StepFunction":
        """Indicator of the arc [a, b) (mod 1), 0 < b - a < 1."""
        a, b = a % 1.0, b % 1.0
        if a < b:
            pts = [(a, 0.0), (b, -math.inf)]
        else:
            pts = [(b, -math.inf), (a, 0.0)]
        if pts[0][0] != 0.0:
            pts.insert(0, (0.0, pts[-1][1]))
        return cls(tuple(p for p, _ in pts), tuple(v for _, v in pts))

    def lengths(self) -> list[float]:
        b = self.breakpoints
        return [(b[i + 1] if i + 1 < len(b) else b[0] + 1.0) - b[i] for i in range(len(b))]

    def log2_at(self, t: float) -> float:
        t %= 1.0
        i = bisect.bisect_right(self.breakpoints, t) - 1
        return self.log2_values[i]  # i = -1 wraps to the last interval

    def measure_where(self, pred) -> float:
        """Lebesgue measure of the union of intervals whose log2 value satisfies pred."""
        return math.fsum(l for l, v in zip(self.lengths(), self.log2_values) if pred(v))

    def superlevel(self, log2_level: float, strict: bool = True) -> float:
        if strict:
            return self.measure_where(lambda v: v > log2_level)
        return self.measure_where(lambda v: v >= log2_level)


@dataclass(frozen=True)
class RotationOperator:
    """(Tf)(t) = f(t - alpha) on the circle."""

    alpha: float = GOLDEN

    @property
    def label(self):
        return f"rotation({self.alpha:.17g})"

    def apply(self, f: StepFunction) -> StepFunction:
        return rotate_apply(self, f, 1)

    def neumann_monitor(self, lam, depth: int = 200):
        return rotation_neumann_monitor(self, lam, depth)


def rotate_apply(T: RotationOperator, f: StepFunction, k: int) -> StepFunction:
    """T^k f: breakpoints moved by k * alpha (mod 1), values unchanged."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return f
    shift = math.fmod(k * T.alpha, 1.0)
    moved = sorted(((b + shift) % 1.0, v) for b, v in zip(f.breakpoints, f.log2_values))
    pts = [p for p, _ in moved]
    vals = [v for _, v in moved]
    if pts[0] != 0.0:
        # the interval containing 0 carries the value of the last moved breakpoint
        pts.insert(0, 0.0)
        vals.insert(0, vals[-1])
    # merge breakpoints that collapsed onto each other
    out_p, out_v = [pts[0]], [vals[0]]
    for p, v in zip(pts[1:], vals[1:]):
        if p == out_p[-1]:
            out_v[-1] = v
        else:
            out_p.append(p)
            out_v.append(v)
    return StepFunction(tuple(out_p), tuple(out_v))


# covering the circle by rotated arcs


def _arc_slack(k: int) -> float:
    return COVER_SLACK + k * 1e-16


def covering_count(alpha: float, n: int, cap: int = COVER_CAP) -> int:
    """Smallest M such that the arcs [k alpha, k alpha + 1/n], k = 1..M, cover the circle.

    The arcs cover exactly when every circular gap between consecutive start
    points is at most 1/n; the number of longer gaps is kept up to date as
    start points are inserted.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 1
    reach = 1.0 / n
    pts: list[float] = []
    bad = 0
    first = None
    for k in range(1, cap + 1):
        p = math.fmod(k * alpha, 1.0)
        slack = _arc_slack(k)
        if first is None:
            first = p
            pts.append(p)
            bad = 1  # a single point leaves one gap of length 1 > 1/n
            continue
        i = bisect.bisect_left(pts, p)
        if (i < len(pts) and abs(pts[i] - p) <= 1e-15) or (i > 0 and abs(pts[i - 1] - p) <= 1e-15):
            if abs(p - first) <= 1e-15:
                raise NoCover(f"orbit of alpha = {alpha!r} is periodic with period {k - 1}; arcs never cover")
            continue
        prev = pts[i - 1] if i > 0 else pts[-1] - 1.0
        nxt = pts[i] if i < len(pts) else pts[0] + 1.0
        old = nxt - prev
        bad -= old > reach + slack
        bad += (p - prev) > reach + slack
        bad += (nxt - p) > reach + slack
        pts.insert(i, p)
        if bad == 0:
            return k
    raise NoCover(f"no cover within {cap} arcs for n = {n}")


def coverage_gap(alpha: float, n: int, M: int) -> float:
    """Largest uncovered length left by the arcs [k alpha, k alpha + 1/n], k = 1..M.

    An independent sort-and-sweep over the arc union, used to certify
    covering_count.
    """
    arcs = []
    for k in range(1, M + 1):
        a = math.fmod(k * alpha, 1.0)
        b = a + 1.0 / n + _arc_slack(k)
        if b >= 1.0:
            arcs.append((a, 1.0))
            arcs.append((0.0, b - 1.0))
        else:
            arcs.append((a, b))
    arcs.sort()
    covered_to, gap = 0.0, 0.0
    for a, b in arcs:
        if a > covered_to:
            gap = max(gap, a - covered_to)
        covered_to = max(covered_to, b)
    return max(gap, 1.0 - covered_to)


# the divergent Neumann series


@dataclass(frozen=True)
class BlockCertificate:
    n: int
    first: int
    last: int
    measure_at_least_one: float
    min_term_measure: float
    arc_length: float

    @property
    def ok(self) -> bool:
        return self.measure_at_least_one >= 1 - 1e-9 and self.min_term_measure >= self.arc_length - 1e-12

    def to_dict(self) -> dict:
        return {"n": self.n, "first": self.first, "last": self.last,
                "measure_at_least_one": self.measure_at_least_one,
                "min_term_measure": self.min_term_measure, "arc_length": self.arc_length, "ok": self.ok}


def _counterexample_h(s: Sequence[int], n_max: int, log2_base: float) -> StepFunction:
    """h = base**(s_n) on (1/(n+1), 1/n] for n < n_max, and base**(s_(n_max)) on (0, 1/n_max].

    Truncating at n_max keeps h >= base**(s_n) on (0, 1/n] for every n <= n_max,
    which is all the blocks up to n_max use.
    """
    pts = [(0.0, s[n_max] * log2_base)]
    for n in range(n_max - 1, 0, -1):
        pts.append((1.0 / (n + 1), s[n] * log2_base))
    return StepFunction(tuple(p for p, _ in pts), tuple(v for _, v in pts))


def _block_sum_measure(T: RotationOperator, h: StepFunction, ks: range, log2_nu: float) -> float:
    """Measure of {sum_{k in ks} T^k h / nu^k >= 1}, on a common refinement of breakpoints."""
    shifted = [rotate_apply(T, h, k) for k in ks]
    cuts = sorted({0.0, *(b for f in shifted for b in f.breakpoints)})
    total = []
    for i, a in enumerate(cuts):
        b = cuts[i + 1] if i + 1 < len(cuts) else 1.0
        if b <= a:
            continue
        mid = 0.5 * (a + b)
        lg = logsumexp2([f.log2_at(mid) - k * log2_nu for f, k in zip(shifted, ks)])
        if lg >= 0.0:
            total.append(b - a)
    return math.fsum(total)


def build_counterexample(alpha: float = GOLDEN, n_max: int = 4, nu: float = 2.0):
    """Construct h and certify the blocks sum_{s_(n-1) < k <= s_n} T^k h / nu^k >= 1 a.e.

    Returns (h, s, certificates).
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    T = RotationOperator(alpha)
    Ms = [covering_count(alpha, n) for n in range(1, n_max + 1)]
    s = [0]
    for m in Ms:
        s.append(s[-1] + m)
    log2_nu = math.log2(nu)
    h = _counterexample_h(s, n_max, log2_nu)
    certs = []
    for n in range(1, n_max + 1):
        ks = range(s[n - 1] + 1, s[n] + 1)
        full = _block_sum_measure(T, h, ks, log2_nu)
        # each term is >= 1 on an arc of length 1/n
        per = min(rotate_apply(T, h, k).superlevel(k * log2_nu, strict=False) for k in ks)
        certs.append(BlockCertificate(n, ks.start, ks.stop - 1, full, per, 1.0 / n))
    return h, tuple(s), tuple(certs)


def rotation_neumann_monitor(T: RotationOperator, lam, depth: int = 200, n_max: int = 4):
    """Neumann series of the rotation at lam, applied to the block counterexample h.

    Increments T^k h / lam^(k+1) have superlevel sets {>= 1/|lam|} of measure
    at least 1/n for s_(n-1) < k <= s_n, and whole blocks sum to at least 1
    almost everywhere, so the partial sums are not Cauchy in measure.
    """
    from .neumann import NeumannReport, Verdict

    lam = complex(lam)
    nu = abs(lam)
    if nu <= 0:
        raise ValueError("lambda must be nonzero")
    h, s, certs = build_counterexample(T.alpha, n_max, nu)
    last = min(s[-1], depth)
    trace = []
    for k in range(0, last + 1):
        f = rotate_apply(T, h, k)
        # measure of {|T^k h / lam^(k+1)| >= 1/|lam|} = measure of {h >= nu^k}
        trace.append((k, ExtReal(f.superlevel(k * math.log2(nu), strict=False))))
    ok = all(c.ok for c in certs) and s[-1] <= depth
    verdict = Verdict.DIVERGED if ok else Verdict.INCONCLUSIVE
    witness = {"h_breakpoints": list(h.breakpoints), "h_log2_values": list(h.log2_values),
               "s": list(s), "blocks": [c.to_dict() for c in certs]} if ok else None
    return NeumannReport(lam, "measure", last + 1, tuple(trace), (), verdict, witness,
                         ("block sums of increments stay >= 1 on almost all of the circle",),
                         {"measure": verdict})


@dataclass(frozen=True)
class RotationRadiusReport:
    invariance_error: float
    lower_probe: dict
    upper_probe: dict
    radii: dict

    def to_dict(self) -> dict:
        return {"invariance_error": self.invariance_error, "below_one": self.lower_probe,
                "above_one": self.upper_probe, "radii": self.radii}


def measure_radius_check(T: RotationOperator, depth: int = 200) -> RotationRadiusReport:
    """Certify r_l = r_bb = r_c = r_nn = 1 for the rotation.

    Upper end: the neighbourhoods {f : m(|f| > eps) < delta} are mapped into
    themselves because superlevel measures are rotation invariant, so T is
    nn-bounded with constant 1 and r_nn <= 1.  Lower end: for the indicator
    of [0, 1/2) and nu < 1, m(|T^n f / nu^n| > 1) = 1/2 for every n, so
    T^n f / nu^n does not tend to 0 and r_l >= 1.
    """
    f = StepFunction.indicator(0.0, 0.5)
    samples = [f, StepFunction((0.0, 0.2, 0.7), (1.0, -3.0, 5.0)), StepFunction((0.0, 0.5), (10.0, 0.0))]
    err = 0.0
    for g in samples:
        for k in (1, 2, 7, 50, depth):
            gk = rotate_apply(T, g, k)
            for lvl in sorted(set(g.log2_values)) + [-1.0, 2.0]:
                if math.isfinite(lvl):
                    err = max(err, abs(gk.superlevel(lvl) - g.superlevel(lvl)))
    below = {}
    for nu in (0.5, 0.9, 0.99):
        ms = [rotate_apply(T, f, n).superlevel(n * math.log2(nu)) for n in range(1, depth + 1)]
        below[str(nu)] = {"min_measure": min(ms), "max_measure": max(ms)}
    above = {}
    eps = 1e-3
    for nu in (2.0, 1.1):
        ms = [rotate_apply(T, f, n).superlevel(math.log2(eps) + n * math.log2(nu)) for n in range(1, depth + 1)]
        above[str(nu)] = {"last_measure": ms[-1]}
    invariant = err <= 1e-12
    r_l_lower = 1.0 if all(v["min_measure"] >= 0.5 - 1e-12 for v in below.values()) else None
    r_nn_upper = 1.0 if invariant else None
    radii = {}
    if r_l_lower == 1.0 and r_nn_upper == 1.0:
        for k in ("l", "bb", "c", "nn"):
            radii[k] = {"lower": 1.0, "upper": 1.0}
        radii["nb"] = {"lower": 1.0, "upper": None}
    return RotationRadiusReport(err, below, above, radii)
