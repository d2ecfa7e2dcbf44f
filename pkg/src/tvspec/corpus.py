"""A reproducible corpus of operators on sequence spaces for property checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import (
    Diagonal,
    FiniteRank,
    Operator,
    WeightedShift,
    banded,
    decay_weighted_shift,
    forward_shift,
    identity,
    left_shift,
)
from .spaces import (
    BoxFamily,
    MinkowskiOfBox,
    SequenceSpace,
    SparseVector,
    all_sequences,
    finite_dimensional,
    sup_normed,
)


@dataclass(frozen=True, eq=False)
class CorpusEntry:
    name: str
    operator: Operator
    space: SequenceSpace
    family: str


def harmonic() -> Diagonal:
    return Diagonal(lambda k: 1.0 / k, monotone_from=1, positive=True, limit=0.0, name="diag(1/k)")


def geometric(ratio: float = 0.5) -> Diagonal:
    return Diagonal(lambda k, r=ratio: r ** k, monotone_from=1, positive=ratio > 0, limit=0.0,
                    name=f"diag({ratio:g}^k)")


def one_plus_harmonic() -> Diagonal:
    return Diagonal(lambda k: 1.0 + 1.0 / k, monotone_from=1, positive=True, limit=1.0, name="diag(1+1/k)")


def random_finite_rank(rng: np.random.Generator, rank: int, width: int, scale: float = 1.0,
                       name: str = "finite-rank") -> FiniteRank:
    fs, ys = [], []
    for _ in range(rank):
        fs.append(SparseVector({k: complex(rng.normal()) for k in range(1, width + 1)}))
        ys.append(SparseVector({k: complex(scale * rng.normal()) for k in range(1, width + 1)}))
    return FiniteRank(tuple(fs), tuple(ys), name=name)


def build_corpus(seed: int = 0) -> list[CorpusEntry]:
    rng = np.random.default_rng(seed)
    RN, linf = all_sequences(), sup_normed()
    out: list[CorpusEntry] = []

    def add(name, op, space, fam):
        out.append(CorpusEntry(name, op, space, fam))

    # diagonals
    for c in (0.5, 2.0, -1.5, 1j, 0.0):
        add(f"const({c})", Diagonal.constant_value(c), RN, "diagonal")
    add("periodic(1,-0.5,0.25)", Diagonal.periodic([1.0, -0.5, 0.25]), RN, "diagonal")
    add("periodic(2i,0.3)", Diagonal.periodic([2j, 0.3]), linf, "diagonal")
    add("finite{1:3,4:-1}", Diagonal.finite({1: 3.0, 4: -1.0}), RN, "diagonal")
    add("finite{2:0.5}", Diagonal.finite({2: 0.5}), RN, "diagonal")
    add("1/k", harmonic(), RN, "diagonal")
    add("1/k (sup)", harmonic(), linf, "diagonal")
    add("2^-k", geometric(0.5), RN, "diagonal")
    add("2^-k (sup)", geometric(0.5), linf, "diagonal")
    add("(-0.8)^k (sup)", geometric(-0.8), linf, "diagonal")
    add("1+1/k", one_plus_harmonic(), RN, "diagonal")
    add("1+1/k (sup)", one_plus_harmonic(), linf, "diagonal")
    add("I", identity(), RN, "diagonal")
    # shifts
    add("left", left_shift(), RN, "shift")
    add("forward", forward_shift(), RN, "shift")
    add("left(2)", WeightedShift(2), RN, "shift")
    add("forward 0.5", WeightedShift(-1, lambda k: 0.5, sup=0.5, name="forward*0.5"), RN, "shift")
    add("forward 1/k", WeightedShift(-1, lambda k: 1.0 / k, sup=1.0, name="forward*(1/k)"), RN, "shift")
    add("left 1/k", WeightedShift(1, lambda k: 1.0 / k, sup=1.0, name="left*(1/k)"), RN, "shift")
    add("decay shift", decay_weighted_shift(), RN, "shift")
    add("left (sup)", left_shift(), linf, "shift")
    add("forward 0.5 (sup)", WeightedShift(-1, lambda k: 0.5, sup=0.5, name="forward*0.5"), linf, "shift")
    # finite rank on all sequences
    for i in range(8):
        rank = 1 + i % 3
        add(f"finite-rank#{i}", random_finite_rank(rng, rank, 3 + i % 4, 0.6, f"finite-rank#{i}"), RN, "finite-rank")
    add("nilpotent e1(x)e2", FiniteRank((SparseVector.unit(2),), (SparseVector.unit(1),), "e1(x)e2"), RN,
        "finite-rank")
    # dense matrices on a single-norm space
    for i in range(8):
        D = 3 + i % 3
        add(f"matrix#{i}", FiniteRank.from_matrix(rng.normal(size=(D, D)) / np.sqrt(D), name=f"matrix#{i}"),
            finite_dimensional(D), "matrix")
    # sums and products
    add("1/k + forward", harmonic() + forward_shift(), RN, "sum")
    add("0.5 + finite-rank", Diagonal.constant_value(0.5) + random_finite_rank(rng, 2, 4, 0.3), RN, "sum")
    add("2^-k + nilpotent", geometric(0.5) + FiniteRank((SparseVector.unit(3),), (SparseVector.unit(1),)), RN,
        "sum")
    add("forward*0.5 + 0.25", WeightedShift(-1, lambda k: 0.5) + Diagonal.constant_value(0.25), RN, "sum")
    add("banded lower", banded({0: lambda k: 0.3, -1: lambda k: 0.2, -2: lambda k: 0.1}, "banded-lower"), RN, "sum")
    add("3*(1/k)", 3.0 * harmonic(), RN, "sum")
    add("-(forward)", -forward_shift(), RN, "sum")
    add("1/k @ forward", harmonic() @ forward_shift(), RN, "product")
    add("forward @ 2^-k", forward_shift() @ geometric(0.5), RN, "product")
    add("left @ forward", left_shift() @ forward_shift(), RN, "product")
    add("finite-rank @ 0.5", random_finite_rank(rng, 2, 3, 0.5) @ Diagonal.constant_value(0.5), RN, "product")
    add("left + 0.5", left_shift() + Diagonal.constant_value(0.5), RN, "sum")
    add("decay shift + 1/k", decay_weighted_shift() + harmonic(), RN, "sum")
    return out


LAMBDA_GRID = (2.0, -1.5, 1.5j, 0.5 + 0.5j, 1.0, -0.25, 0.3j, 3.0 - 1.0j, 0.75)


def probe_vectors(count: int = 20, seed: int = 0, width: int = 12) -> list[SparseVector]:
    rng = np.random.default_rng(seed)
    out = [SparseVector.unit(k) for k in range(1, 6)]
    while len(out) < count:
        size = int(rng.integers(1, 5))
        idx = rng.choice(np.arange(1, width + 1), size=size, replace=False)
        vals = rng.normal(size=size) + 1j * rng.normal(size=size)
        out.append(SparseVector({int(i): complex(v) for i, v in zip(idx, vals)}))
    return out


def superexponential_box() -> BoxFamily:
    """The single bounded set {x : |x_k| <= (2k)^(2k)}."""
    box = MinkowskiOfBox(_superexp_log2_bound, "box(2k)^(2k)")
    return BoxFamily(boxes=(box,))


def _superexp_log2_bound(k: int) -> float:
    return 2 * k * math.log2(2 * k) if k > 0 else 0.0
