"""Spectral radius against spectrum for compact operators.

Two certifiable kinds are handled: diagonals whose entries tend to 0, and
finite-rank operators.  The spectrum is read from leading truncations (a
dense eigensolve, checked against roots of the characteristic polynomial),
plus the sup of the diagonal tail beyond the truncation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import classify_boundedness
from .errors import InvalidOperator
from .operators import Diagonal, FiniteRank, Operator
from .radii import KINDS, estimate_all
from .spaces import SequenceSpace, SparseVector, all_sequences, sup_normed

MAX_DIM = 512


@dataclass(frozen=True, eq=False)
class CompactModel:
    K: Operator
    dim: int = 32

    def __post_init__(self):
        if self.dim > MAX_DIM:
            raise ValueError(f"truncation dimension must be <= {MAX_DIM}")
        if isinstance(self.K, Diagonal):
            if not diagonal_tends_to_zero(self.K):
                raise InvalidOperator(f"{self.K.label}: entries do not tend to 0 on tail samples")
        elif not isinstance(self.K, FiniteRank):
            raise InvalidOperator("compact models are diagonals tending to 0 or finite-rank operators")

    @property
    def kind(self) -> str:
        return "diagonal" if isinstance(self.K, Diagonal) else "finite-rank"

    def default_space(self) -> SequenceSpace:
        # a diagonal with infinite support is compact for the sup norm; a
        # finite-rank operator is compact already for coordinatewise convergence
        return sup_normed() if self.kind == "diagonal" else all_sequences()


def diagonal_tends_to_zero(d: Diagonal) -> bool:
    if d.support is not None:
        return True
    if d.limit is not None:
        return d.limit == 0
    samples = [abs(d.d(2 ** j)) for j in range(10, 31, 4)]
    return all(b <= a for a, b in zip(samples, samples[1:])) and samples[-1] <= 1e-3 * max(samples[0], 1e-300)


def leading_block(K: Operator, dim: int) -> np.ndarray:
    """A[j-1, k-1] = coefficient of e_j in K e_k for j, k <= dim."""
    A = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim + 1):
        for j, c in K.apply(SparseVector.unit(k)).items():
            if j <= dim:
                A[j - 1, k - 1] = c
    return A


def spectrum_of_truncation(model: CompactModel, dim: int | None = None) -> list[complex]:
    D = model.dim if dim is None else dim
    if D > MAX_DIM:
        raise ValueError(f"truncation dimension must be <= {MAX_DIM}")
    if isinstance(model.K, Diagonal):
        return [complex(model.K.d(k)) for k in range(1, D + 1)]
    return [complex(v) for v in np.linalg.eigvals(leading_block(model.K, D))]


def charpoly(A: np.ndarray) -> np.ndarray:
    """Coefficients of det(t I - A), highest degree first (Faddeev-LeVerrier)."""
    n = A.shape[0]
    coeffs = [1.0 + 0j]
    M = np.zeros_like(A, dtype=complex)
    I = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        M = A @ M + coeffs[-1] * I
        coeffs.append(-np.trace(A @ M) / k)
    return np.array(coeffs)


def charpoly_roots(A: np.ndarray) -> np.ndarray:
    """Eigenvalues as roots of the characteristic polynomial (companion-matrix solve)."""
    if A.shape[0] == 0:
        return np.array([], dtype=complex)
    return np.roots(charpoly(A))


def tail_sup(d: Diagonal, dim: int) -> float:
    """sup_{k > dim} |d(k)|."""
    if d.support is not None:
        return max((abs(d.d(k)) for k in d.support if k > dim), default=0.0)
    if d.monotone_from is not None and d.monotone_from <= dim + 1:
        return abs(d.d(dim + 1))
    s = d.exact_sup()
    if s is None:
        raise InvalidOperator(f"{d.label}: no bound for the tail beyond {dim}")
    return s


def spectral_bound(model: CompactModel) -> dict:
    """|sigma(K)| from truncations of growing size (and the diagonal tail)."""
    sizes = [D for D in (4, 8, 16, 32, 64, 128, 256, 512) if D < model.dim] + [model.dim]
    trace = []
    for D in sizes:
        eig = spectrum_of_truncation(model, D)
        trace.append((D, max((abs(v) for v in eig), default=0.0)))
    value = trace[-1][1]
    tail = 0.0
    if isinstance(model.K, Diagonal):
        tail = tail_sup(model.K, model.dim)
        value = max(value, tail)
    return {"value": value, "truncations": trace, "tail_sup": tail}


@dataclass(frozen=True)
class CompactReport:
    radius_lower: float
    radius_upper: float
    spectrum_abs: float
    width: float
    ok: bool
    collapsed: bool
    bb_bounded: str
    details: dict

    def to_dict(self) -> dict:
        return {"radius": [self.radius_lower, self.radius_upper], "spectrum_abs": self.spectrum_abs,
                "width": self.width, "ok": self.ok, "collapsed": self.collapsed,
                "bb_bounded": self.bb_bounded, **self.details}


def compact_radius_equality(model: CompactModel, space: SequenceSpace | None = None, depth: int = 60,
                            level: int = 4) -> CompactReport:
    space = space or model.default_space()
    ests = estimate_all(model.K, space, depth=depth, level=level)
    lows = [ests[k].lower.value for k in KINDS]
    ups = [ests[k].upper.value for k in KINDS]
    lo, hi = max(lows), min(ups)
    collapsed = max(ups) - min(lows) <= max(e.width for e in ests.values()) + 1e-6
    sb = spectral_bound(model)
    sigma = sb["value"]
    width = max(hi - lo, 0.0)
    ok = lo - width - 1e-6 <= sigma <= hi + width + 1e-6
    bb = classify_boundedness(model.K, space)["bb"].value
    return CompactReport(lo, hi, sigma, width, ok and collapsed, collapsed, bb,
                         {"radii": {k: ests[k].to_dict() for k in KINDS}, "spectrum": sb,
                          "space": space.name})
