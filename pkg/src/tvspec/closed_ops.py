"""A closed diagonal operator on a sup-normed space and its core domain.

The domain D of all powers carries the graph norms
||x||_n = sum_{k<=n} ||T^k x||.  For a diagonal T with real nondecreasing
unbounded entries every quantity in the resolvent bounds is available in
closed form, and finitely supported probes lie in D automatically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NoClosedForm, NonCommuting, SpectrumLambda
from .operators import Diagonal, Operator, Scale
from .radii import _commutes, estimate_radius, limsup_root
from .spaces import (
    ExtReal,
    GraphFamily,
    GraphNorm,
    SequenceSpace,
    SparseVector,
    WeightedSup,
    as_scalar,
)


@dataclass(frozen=True, eq=False)
class ClosedOperatorModel:
    T: Diagonal
    base_norm: WeightedSup
    graph_family: GraphFamily
    search_cap: int = 10_000_000

    @classmethod
    def diagonal(cls, d: Callable[[int], float] = float, name: str = "k") -> "ClosedOperatorModel":
        """Model for T e_k = d(k) e_k with d real, nondecreasing and unbounded."""
        T = Diagonal(lambda k: as_scalar(d(k)), name=f"diag({name})")
        base = WeightedSup(None, None, "sup")
        return cls(T, base, GraphFamily(operator=T, base=base))

    def graph_norm(self, n: int) -> GraphNorm:
        return GraphNorm(n, self.T, self.base_norm)

    @property
    def space(self) -> SequenceSpace:
        return SequenceSpace("D(T^inf)", "graph", self.graph_family, self.graph_family, "finite", None, True)

    def distance(self, lam) -> float:
        """inf_k |lam - d(k)|, found by walking to where d(k) passes Re(lam)."""
        lam = as_scalar(lam)
        d = self.T.d
        k = 1
        while d(k).real < lam.real:
            k += 1
            if k > self.search_cap:
                raise NoClosedForm("diagonal entries did not reach Re(lambda)")
        cands = [abs(lam - d(k))] + ([abs(lam - d(k - 1))] if k > 1 else [])
        return min(cands)

    def resolvent(self, lam) -> Diagonal:
        lam = as_scalar(lam)
        dist = self.distance(lam)
        if dist == 0:
            raise SpectrumLambda(f"lambda = {lam} is a diagonal entry of T")
        d = self.T.d
        return Diagonal(lambda k: 1.0 / (lam - d(k)), sup=1.0 / dist, name=f"R({lam:g})")


def mu(lam, k: int) -> float:
    """1 + |lam| + ... + |lam|^k (zero for k < 0)."""
    a = abs(lam)
    return math.fsum(a ** i for i in range(k + 1)) if k >= 0 else 0.0


def resolvent_constant(lam, n: int, r_norm: float) -> float:
    """C_n = mu_n ||R|| + mu_(n-1), which dominates every coefficient in the
    expansion of ||R x||_n over ||x||, ||Tx||, ..., ||T^(n-1) x||."""
    return mu(lam, n) * r_norm + mu(lam, n - 1)


def default_probes(count: int = 100, seed: int = 0, width: int = 30) -> list[SparseVector]:
    rng = np.random.default_rng(seed)
    out = [SparseVector.unit(k) for k in range(1, min(count, 10) + 1)]
    while len(out) < count:
        size = int(rng.integers(1, 6))
        idx = rng.choice(np.arange(1, width + 1), size=size, replace=False)
        vals = rng.normal(size=size) + 1j * rng.normal(size=size)
        out.append(SparseVector({int(i): complex(v) for i, v in zip(idx, vals)}))
    return out


@dataclass(frozen=True)
class ResolventBoundReport:
    lam: complex
    n: int
    r_norm: float
    constant: float
    worst_ratio: float
    violations: int
    probes: int

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {"lambda": [self.lam.real, self.lam.imag], "n": self.n, "resolvent_norm": self.r_norm,
                "C_n": self.constant, "worst_ratio": self.worst_ratio, "violations": self.violations,
                "probes": self.probes, "ok": self.ok}


def resolvent_bound_check(model: ClosedOperatorModel, lam, n: int, probes=None) -> ResolventBoundReport:
    """Check ||R(lam; T) x||_n <= C_n ||x||_(n-1) on probes."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lam = as_scalar(lam)
    R = model.resolvent(lam)
    r_norm = R.exact_sup()
    C = resolvent_constant(lam, n, r_norm)
    hi, lo = model.graph_norm(n), model.graph_norm(n - 1)
    probes = default_probes() if probes is None else probes
    worst, bad = 0.0, 0
    for x in probes:
        lhs = hi(R.apply(x)).value
        rhs = lo(x).value
        if rhs == 0:
            if lhs != 0:
                bad += 1
            continue
        ratio = lhs / rhs
        worst = max(worst, ratio)
        if lhs > C * rhs * (1 + 1e-12):
            bad += 1
    return ResolventBoundReport(lam, n, r_norm, C, worst, bad, len(probes))


def _diag_sup(S: Operator) -> float | None:
    f = 1.0
    while isinstance(S, Scale):
        f *= abs(S.factor)
        S = S.operand
    if isinstance(S, Diagonal):
        s = S.exact_sup()
        return None if s is None else f * s
    return None


def restricted_radius_check(model: ClosedOperatorModel, S: Operator | None = None, lam=None,
                            depth: int = 60, level: int = 4, probes=None) -> dict:
    """Compare radii of a bounded commuting S (or of R(lam; T)) on D with r in the base norm.

    For S: r_nn(S on D) from the graph family must not exceed r(S).  For
    R = R(lam; T): r_nb(R on D) is bounded through
    m(R^n) <= M_k ||R||^(n-k) with M_k = C_1 ... C_k, and must not exceed r(R).
    """
    out: dict = {}
    if S is not None:
        if not _commutes(S, model.T):
            raise NonCommuting(f"{S.label} does not commute with {model.T.label} on probes")
        rS = _diag_sup(S)
        if rS is None:
            raise NoClosedForm("r(S) needs a diagonal with known sup")
        est = estimate_radius("nn", S, model.space, aux=[model.graph_family], depth=depth, level=level,
                              closed_form=False)
        up = est.upper.value
        out["S"] = {"r_base": rS, "graph_nn_lower": est.lower.value, "graph_nn_upper": up,
                    "certified": est.certified, "ok": up <= rS + est.width + 1e-9}
    if lam is not None:
        lam = as_scalar(lam)
        R = model.resolvent(lam)
        rR = R.exact_sup()
        Ms, acc = [], 1.0
        for k in range(0, level + 1):
            if k > 0:
                acc *= resolvent_constant(lam, k, rR)
            Ms.append(acc)
        brackets = []
        for k, M in enumerate(Ms):
            # the first k terms do not change the limsup of the n-th root
            seq = [ExtReal.from_log2(math.log2(M) + max(n - k, 0) * math.log2(rR)) for n in range(1, depth + 1)]
            brackets.append(limsup_root(seq))
        upper = max(b.upper for b in brackets).value
        width = max(b.width for b in brackets)
        # the bound itself, checked on probes: ||R^n x||_k <= M_k ||R^(n-k) x||
        probes = default_probes(20, seed=1) if probes is None else probes
        worst = 0.0
        for k, M in enumerate(Ms):
            g = model.graph_norm(k)
            for n in (k, k + 3):
                for x in probes:
                    y = x
                    for _ in range(n - k):
                        y = R.apply(y)
                    rhs = M * model.base_norm(y).value
                    z = y
                    for _ in range(k):
                        z = R.apply(z)
                    lhs = g(z).value
                    if rhs > 0:
                        worst = max(worst, lhs / rhs)
        out["R"] = {"lambda": [lam.real, lam.imag], "r_base": rR, "M": Ms, "graph_nb_upper": upper,
                    "bracket_width": width, "worst_bound_ratio": worst,
                    "ok": upper <= rR + width + 1e-9 and worst <= 1 + 1e-12}
    return out
