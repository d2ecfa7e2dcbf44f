"""Boundedness classes nb, nn, continuous and bb for sequence-space operators.

On a coordinate topology every operator built here has finitely supported
rows, which settles continuity (and hence bb-boundedness) for all seminorms
at once.  The stronger classes are decided from structure: a known read
bound gives windows {1..m} that T maps into multiples of themselves, and a
finite column support gives a cylinder neighbourhood with bounded image.
Refutations carry a concrete witness.  On a normed space all four classes
are the same statement, that the operator norm is finite.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionFailed, TVSError
from .operators import Operator
from .seminorm_calculus import Certainty, mixed_seminorm, operator_seminorm
from .spaces import Coordinate, FiniteMax, SequenceSpace, SparseVector, all_sequences

CLASSES = ("nb", "nn", "continuous", "bb")


class Verdict(str, enum.Enum):
    YES = "Yes"
    NO = "No"
    UNKNOWN = "Unknown"


class HierarchyViolation(TVSError):
    """A stronger class was affirmed while a weaker one was refuted."""


@dataclass(frozen=True)
class ClassificationReport:
    verdicts: dict
    evidence: dict = field(default_factory=dict)

    def __post_init__(self):
        v = self.verdicts
        for i, strong in enumerate(CLASSES):
            for weak in CLASSES[i + 1:]:
                if v[strong] is Verdict.YES and v[weak] is Verdict.NO:
                    raise HierarchyViolation(f"{strong} is Yes but {weak} is No")

    def __getitem__(self, cls: str) -> Verdict:
        return self.verdicts[cls]

    def to_dict(self) -> dict:
        return {c: {"verdict": self.verdicts[c].value, "evidence": self.evidence.get(c, "")} for c in CLASSES}


def _propagate(verdicts: dict, evidence: dict) -> None:
    """Spread Yes downward and No upward along nb => nn => continuous => bb."""
    for i, c in enumerate(CLASSES):
        if verdicts[c] is Verdict.YES:
            for weak in CLASSES[i + 1:]:
                if verdicts[weak] is Verdict.UNKNOWN:
                    verdicts[weak] = Verdict.YES
                    evidence[weak] = f"implied by {c}"
    for i in range(len(CLASSES) - 1, -1, -1):
        c = CLASSES[i]
        if verdicts[c] is Verdict.NO:
            for strong in CLASSES[:i]:
                if verdicts[strong] is Verdict.UNKNOWN:
                    verdicts[strong] = Verdict.NO
                    evidence[strong] = f"{c} fails"


def _unread_coordinate(T: Operator, window: frozenset, search: int) -> tuple[int, int] | None:
    """(row j, coordinate k) with k outside the window and row j of T reading k."""
    for j in range(1, search + 1):
        r = T.pullback(SparseVector.unit(j))
        for k in r.support:
            if k not in window:
                return j, k
    return None


def classify_boundedness(T: Operator, space: SequenceSpace | None = None, level: int = 6) -> ClassificationReport:
    space = space or all_sequences()
    if space.topology == "normed":
        return _classify_normed(T, space)
    return _classify_coordinate(T, space, level)


def _classify_normed(T: Operator, space: SequenceSpace) -> ClassificationReport:
    norm = space.norm
    v = operator_seminorm(T, norm)
    if v.value.is_infinite:
        verdict = Verdict.NO
        ev = f"operator norm is infinite (probe {v.witness!r})" if v.witness is not None else "operator norm is infinite"
    elif v.certainty is Certainty.EXACT:
        verdict = Verdict.YES
        ev = f"operator norm {v.value!r}"
    else:
        verdict = Verdict.UNKNOWN
        ev = f"sampled operator norm lower bound {v.value!r}"
    return ClassificationReport({c: verdict for c in CLASSES},
                                {c: ev + "; a norm ball is a bounded neighbourhood, so all classes coincide"
                                 for c in CLASSES})


def _classify_coordinate(T: Operator, space: SequenceSpace, level: int) -> ClassificationReport:
    verdicts = {c: Verdict.UNKNOWN for c in CLASSES}
    evidence: dict = {}

    # continuity: each coordinate of Tx is a finite combination of coordinates
    rows = {j: T.pullback(SparseVector.unit(j)) for j in range(1, level + 1)}
    for j, r in rows.items():
        m = mixed_seminorm(T, FiniteMax(r.support), Coordinate(j), allow_sampling=False)
        if m.value.is_infinite:  # cannot happen for finitely supported rows
            raise TVSError("row check failed")
    verdicts["continuous"] = Verdict.YES
    evidence["continuous"] = ("rows of T are finitely supported; |(Tx)_j| <= m * max over the row support, "
                              f"checked for j <= {level}")

    # nn-boundedness
    K = T.read_bound()
    if K is not None:
        m = max(K, 1)
        val = operator_seminorm(T, FiniteMax(range(1, m + 1)), allow_sampling=False).value
        verdicts["nn"] = Verdict.YES
        evidence["nn"] = (f"row j reads only coordinates <= max(j, {K}), so every window {{1..m}} with m >= {m} "
                          f"is mapped into a multiple of itself (m={m}: factor {val!r})")
    elif T.escapes() and space.dimension is None:
        verdicts["nn"] = Verdict.NO
        evidence["nn"] = ("rows of T^n move to ever higher coordinates: a base of neighbourhoods with "
                          "T(U) in c U would produce a bounded neighbourhood, and the space has none")

    # nb-boundedness
    F = T.column_support()
    if F is not None:
        G = T.range_support()
        p = FiniteMax(F)
        verdicts["nb"] = Verdict.YES
        evidence["nb"] = (f"Tx depends only on coordinates {sorted(F)}; the image of {{{p.label} <= 1}} "
                          f"is bounded" + (f" and lies in span e_{sorted(G)}" if G is not None else ""))
    elif T.infinite_columns():
        window = frozenset(range(1, level + 1))
        hit = _unread_coordinate(T, window, 8 * level + 8)
        verdicts["nb"] = Verdict.NO
        if hit is not None:
            j, k = hit
            evidence["nb"] = (f"T reads infinitely many coordinates; e.g. for the cylinder on {{1..{level}}}, "
                              f"coordinate {k} is free and (Tx)_{j} depends on it, so the image is unbounded")
        else:
            evidence["nb"] = "T reads infinitely many coordinates, so no cylinder has a bounded image"

    _propagate(verdicts, evidence)
    return ClassificationReport(verdicts, evidence)


# finite-rank consequence of nb-boundedness in a weak topology


@dataclass(frozen=True)
class FiniteRankBound:
    bound: int
    rank: int
    factor_residual: float
    phi: np.ndarray
    ok: bool


def _rref(a: np.ndarray, tol: float) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form with partial pivoting; returns (R, pivot columns)."""
    r = np.array(a, dtype=complex)
    rows, cols = r.shape
    scale = max(np.abs(r).max(initial=0.0), 1.0)
    pivots: list[int] = []
    i = 0
    for j in range(cols):
        if i == rows:
            break
        p = i + int(np.argmax(np.abs(r[i:, j])))
        if abs(r[p, j]) <= tol * scale:
            r[i:, j] = 0
            continue
        r[[i, p]] = r[[p, i]]
        r[i] /= r[i, j]
        for k in range(rows):
            if k != i and r[k, j] != 0:
                r[k] -= r[k, j] * r[i]
        pivots.append(j)
        i += 1
    return r, pivots


def matrix_rank(a: np.ndarray, tol: float = 1e-10) -> int:
    return len(_rref(a, tol)[1]) if a.size else 0


def kernel_basis(a: np.ndarray, tol: float = 1e-10) -> list[np.ndarray]:
    """Basis of {z : a z = 0}, one vector per free column."""
    r, piv = _rref(a, tol)
    n = a.shape[1]
    out = []
    for free in range(n):
        if free in piv:
            continue
        z = np.zeros(n, dtype=complex)
        z[free] = 1.0
        for row, pc in enumerate(piv):
            z[pc] = -r[row, free]
        out.append(z)
    return out


def finite_rank_bound(functionals: list[SparseVector], T: Operator, dim: int, tol: float = 1e-10) -> FiniteRankBound:
    """Check that T factors through x -> (f_1(x), ..., f_n(x)) on C^dim.

    T must vanish on the joint kernel of the functionals; then T = phi o pi
    with pi(x) = (f_i(x))_i, and the rank of T on the first ``dim``
    coordinates is at most n.
    """
    n = len(functionals)
    F = np.array([[f.coeff(k) for k in range(1, dim + 1)] for f in functionals], dtype=complex).reshape(n, dim)
    cols = [T.apply(SparseVector.unit(k)) for k in range(1, dim + 1)]
    out_idx = sorted(set().union(*(c.support for c in cols)))
    where = {j: i for i, j in enumerate(out_idx)}
    TD = np.zeros((len(out_idx), dim), dtype=complex)
    for k, c in enumerate(cols):
        for j, v in c.items():
            TD[where[j], k] = v
    scale = max(np.abs(TD).max(initial=0.0), 1.0)
    for z in (kernel_basis(F, tol) if n else [np.eye(dim, dtype=complex)[k] for k in range(dim)]):
        x = SparseVector.from_dense(z)
        tx = T.apply(x)
        if tx.max_abs() > tol * scale * max(np.abs(z).max(), 1.0):
            raise PreconditionFailed(f"f_i(x) = 0 for all i but Tx = {tx!r} is nonzero", probe=x)
    rank = matrix_rank(TD, tol)
    if n:
        phi = np.linalg.lstsq(F.T, TD.T, rcond=None)[0].T
        resid = float(np.abs(phi @ F - TD).max(initial=0.0)) / scale
    else:
        phi = np.zeros((len(out_idx), 0))
        resid = float(np.abs(TD).max(initial=0.0))
    return FiniteRankBound(n, rank, resid, phi, rank <= n and resid <= 1e-8)
