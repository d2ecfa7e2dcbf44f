"""Scalars, extended reals, sparse sequences, seminorms and seminorm families.

Classes
-------
ExtReal         nonnegative real or infinity, stored with its base-2 logarithm
SparseVector    finitely supported sequence indexed from 1
Coordinate, FiniteMax, WeightedSup, MinkowskiOfBox, GraphNorm
                seminorm kinds
CoordinateFamily, NormFamily, BoxFamily, GraphFamily, ExplicitFamily
                enumerable seminorm families
SequenceSpace   a sequence space together with its topology description
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .errors import DomainError, InvalidIndex, NonFiniteScalar

_MAX_EXP = 1023.0


def as_scalar(c) -> complex:
    """Coerce to a finite complex scalar."""
    z = complex(c)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise NonFiniteScalar(f"non-finite scalar {c!r}")
    return z


def logaddexp2(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    if a == math.inf or b == math.inf:
        return math.inf
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log2(1.0 + 2.0 ** (lo - hi))


def logsumexp2(values: Iterable[float]) -> float:
    vals = [v for v in values if v != -math.inf]
    if not vals:
        return -math.inf
    hi = max(vals)
    if hi == math.inf:
        return math.inf
    return hi + math.log2(math.fsum(2.0 ** (v - hi) for v in vals))


@functools.total_ordering
class ExtReal:
    """A value in [0, inf].

    The float value is kept exactly when it is representable; the base-2
    logarithm carries magnitudes outside the double range.  ``INFINITY`` is
    the only instance with ``log2 == inf``.
    """

    __slots__ = ("_value", "_log2")

    def __init__(self, value: float = 0.0):
        v = float(value)
        if math.isnan(v) or v < 0:
            raise ValueError(f"ExtReal must be nonnegative, got {value!r}")
        self._value = v
        self._log2 = math.log2(v) if 0 < v < math.inf else (-math.inf if v == 0 else math.inf)

    @classmethod
    def from_log2(cls, lg: float) -> "ExtReal":
        if math.isnan(lg):
            raise ValueError("log2 magnitude is NaN")
        lg = float(lg)
        out = cls.__new__(cls)
        out._log2 = lg
        if lg == -math.inf:
            out._value = 0.0
        elif lg == math.inf:
            out._value = math.inf
        elif lg > _MAX_EXP:
            out._value = math.inf
        else:
            out._value = 2.0 ** lg
        return out

    @property
    def value(self) -> float:
        """Float value; huge finite magnitudes overflow to ``inf`` here."""
        return self._value

    @property
    def log2(self) -> float:
        return self._log2

    @property
    def is_infinite(self) -> bool:
        return self._log2 == math.inf

    @property
    def is_zero(self) -> bool:
        return self._log2 == -math.inf

    def _exact(self) -> bool:
        return self._value != math.inf or self.is_infinite

    def __float__(self) -> float:
        return self._value

    def __add__(self, other) -> "ExtReal":
        other = _ext(other)
        if self._exact() and other._exact():
            s = self._value + other._value
            if s != math.inf or self.is_infinite or other.is_infinite:
                return ExtReal(s)
        return ExtReal.from_log2(logaddexp2(self._log2, other._log2))

    __radd__ = __add__

    def __mul__(self, other) -> "ExtReal":
        other = _ext(other)
        if self.is_zero or other.is_zero:
            if self.is_infinite or other.is_infinite:
                raise ValueError("0 * INFINITY is undefined")
            return ZERO
        if self._exact() and other._exact():
            p = self._value * other._value
            if 0 < p < math.inf or self.is_infinite or other.is_infinite:
                return ExtReal(p)
        return ExtReal.from_log2(self._log2 + other._log2)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExtReal":
        other = _ext(other)
        if other.is_zero:
            raise ZeroDivisionError("division of ExtReal by zero")
        if other.is_infinite:
            if self.is_infinite:
                raise ValueError("INFINITY / INFINITY is undefined")
            return ZERO
        if self._exact() and other._value != math.inf:
            q = self._value / other._value
            if 0 < q < math.inf or self.is_zero or self.is_infinite:
                return ExtReal(q)
        return ExtReal.from_log2(self._log2 - other._log2)

    def root(self, n: int) -> "ExtReal":
        """n-th root, n >= 1."""
        if n < 1:
            raise ValueError("root order must be >= 1")
        if self.is_zero or self.is_infinite or n == 1:
            return self
        return ExtReal.from_log2(self._log2 / n)

    def __eq__(self, other) -> bool:
        try:
            other = _ext(other)
        except (TypeError, ValueError):
            return NotImplemented
        if self._exact() and other._exact():
            return self._value == other._value
        return self._log2 == other._log2

    def __lt__(self, other) -> bool:
        other = _ext(other)
        if self._exact() and other._exact() and not (self._value == other._value == math.inf):
            return self._value < other._value
        return self._log2 < other._log2

    def __hash__(self) -> int:
        return hash(self._log2)

    def __repr__(self) -> str:
        if self.is_infinite:
            return "INFINITY"
        if self._value == math.inf:
            return f"ExtReal(2**{self._log2!r})"
        return f"ExtReal({self._value!r})"


def _ext(x) -> ExtReal:
    if isinstance(x, ExtReal):
        return x
    return ExtReal(x)


ZERO = ExtReal(0.0)
ONE = ExtReal(1.0)
INFINITY = ExtReal(math.inf)


def ext_max(values: Iterable[ExtReal]) -> ExtReal:
    out = ZERO
    for v in values:
        if v > out:
            out = v
    return out


class SparseVector(Mapping):
    """A finitely supported sequence x = (x_1, x_2, ...).

    Zero entries are never stored.  Instances are immutable.
    """

    __slots__ = ("_data",)

    def __init__(self, entries: Mapping[int, complex] | Iterable[tuple[int, complex]] | None = None):
        data: dict[int, complex] = {}
        if entries is not None:
            items = entries.items() if isinstance(entries, Mapping) else entries
            for k, c in items:
                if isinstance(k, bool) or not isinstance(k, int):
                    if isinstance(k, float) and k.is_integer():
                        k = int(k)
                    else:
                        raise InvalidIndex(f"index must be an integer, got {k!r}")
                if k < 1:
                    raise InvalidIndex(f"index must be >= 1, got {k}")
                z = as_scalar(c)
                if z != 0:
                    data[k] = data.get(k, 0j) + z
                    if data[k] == 0:
                        del data[k]
        object.__setattr__(self, "_data", dict(sorted(data.items())))

    def __setattr__(self, name, value):
        raise AttributeError("SparseVector is immutable")

    @classmethod
    def unit(cls, k: int, c: complex = 1.0) -> "SparseVector":
        return cls({k: c})

    @classmethod
    def _trusted(cls, data: dict[int, complex]) -> "SparseVector":
        out = cls.__new__(cls)
        object.__setattr__(out, "_data", {k: v for k, v in sorted(data.items()) if v != 0})
        return out

    def __getitem__(self, k: int) -> complex:
        return self._data[k]

    def coeff(self, k: int) -> complex:
        return self._data.get(k, 0j)

    def __iter__(self):
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self._data)

    def max_abs(self) -> float:
        return max((abs(c) for c in self._data.values()), default=0.0)

    def __add__(self, other: "SparseVector") -> "SparseVector":
        data = dict(self._data)
        for k, c in other._data.items():
            data[k] = data.get(k, 0j) + c
        return SparseVector._trusted(data)

    def __neg__(self) -> "SparseVector":
        return SparseVector._trusted({k: -c for k, c in self._data.items()})

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        return self + (-other)

    def scale(self, c) -> "SparseVector":
        c = as_scalar(c)
        if c == 0:
            return SparseVector()
        return SparseVector._trusted({k: c * v for k, v in self._data.items()})

    def __mul__(self, c) -> "SparseVector":
        return self.scale(c)

    __rmul__ = __mul__

    def to_dense(self, dim: int):
        import numpy as np

        out = np.zeros(dim, dtype=complex)
        for k, c in self._data.items():
            if k <= dim:
                out[k - 1] = c
        return out

    @classmethod
    def from_dense(cls, arr) -> "SparseVector":
        return cls({i + 1: complex(c) for i, c in enumerate(arr)})

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self._data == other._data

    def __hash__(self) -> int:
        return hash(tuple(self._data.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {_fmt_c(c)}" for k, c in self._data.items())
        return f"SparseVector({{{inner}}})"


def _fmt_c(c: complex) -> str:
    return repr(c.real) if c.imag == 0 else repr(c)


def log2_abs(c: complex) -> float:
    a = abs(c)
    return math.log2(a) if a > 0 else -math.inf


def phase(c: complex) -> complex:
    a = abs(c)
    return c / a if a > 0 else 1.0 + 0j


# Seminorms
#
# Every kind except GraphNorm is a weighted supremum
#     p(x) = sup_{k in W} w_k |x_k|
# over a window W (finite set, or all indices), with w_k > 0.  Coordinates
# outside W are uncontrolled.  The exact mixed-seminorm path relies on this.


class Seminorm:
    label: str = "seminorm"
    weighted_sup: bool = False

    def __call__(self, x: SparseVector) -> ExtReal:
        raise NotImplementedError

    # weighted-sup interface
    @property
    def window(self) -> frozenset[int] | None:
        raise NotImplementedError

    def log2_weight(self, k: int) -> float | None:
        raise NotImplementedError

    def controls(self, k: int) -> bool:
        return self.log2_weight(k) is not None


def _weighted_sup_eval(p: Seminorm, x: SparseVector) -> ExtReal:
    best = ZERO
    for k, c in x.items():
        lw = p.log2_weight(k)
        if lw is None:
            continue
        if lw == 0.0:
            v = ExtReal(abs(c))
        else:
            v = ExtReal.from_log2(log2_abs(c) + lw)
        if v > best:
            best = v
    return best


@dataclass(frozen=True)
class Coordinate(Seminorm):
    index: int
    weighted_sup = True

    def __post_init__(self):
        if self.index < 1:
            raise InvalidIndex(f"coordinate index must be >= 1, got {self.index}")

    @property
    def label(self) -> str:
        return f"p{self.index}"

    @property
    def window(self):
        return frozenset((self.index,))

    def log2_weight(self, k):
        return 0.0 if k == self.index else None

    def __call__(self, x):
        return ExtReal(abs(x.coeff(self.index)))


@dataclass(frozen=True)
class FiniteMax(Seminorm):
    """max of |x_k| over a finite index set; the empty set gives the zero seminorm."""

    indices: frozenset
    weighted_sup = True

    def __init__(self, indices: Iterable[int]):
        idx = frozenset(int(i) for i in indices)
        if any(i < 1 for i in idx):
            raise InvalidIndex("indices must be >= 1")
        object.__setattr__(self, "indices", idx)

    @property
    def label(self) -> str:
        return "max(" + ",".join(f"p{i}" for i in sorted(self.indices)) + ")"

    @property
    def window(self):
        return self.indices

    def log2_weight(self, k):
        return 0.0 if k in self.indices else None

    def __call__(self, x):
        return _weighted_sup_eval(self, x)


@dataclass(frozen=True, eq=False)
class WeightedSup(Seminorm):
    """sup_{k in window} w(k) |x_k|.  ``window=None`` means every index."""

    window_set: frozenset | None = None
    weight: Callable[[int], float] | None = None
    name: str = "sup"
    weighted_sup = True

    @property
    def label(self):
        return self.name

    @property
    def window(self):
        return self.window_set

    def log2_weight(self, k):
        if self.window_set is not None and k not in self.window_set:
            return None
        if self.weight is None:
            return 0.0
        w = float(self.weight(k))
        if not w > 0:
            raise DomainError(f"weight must be positive at {k}")
        return math.log2(w)

    def __call__(self, x):
        return _weighted_sup_eval(self, x)


@dataclass(frozen=True, eq=False)
class MinkowskiOfBox(Seminorm):
    """Minkowski functional of the box {x : |x_k| <= b(k) for all k}.

    The bound is supplied through ``log2_bound(k) = log2 b(k)`` so that boxes
    like b(k) = (2k)^(2k) stay representable.
    """

    log2_bound: Callable[[int], float]
    name: str = "box"
    weighted_sup = True

    @classmethod
    def from_bound(cls, bound: Callable[[int], float], name: str = "box") -> "MinkowskiOfBox":
        return cls(lambda k: math.log2(bound(k)), name)

    @property
    def label(self):
        return self.name

    @property
    def window(self):
        return None

    def log2_weight(self, k):
        return -float(self.log2_bound(k))

    def __call__(self, x):
        return _weighted_sup_eval(self, x)


@dataclass(frozen=True, eq=False)
class GraphNorm(Seminorm):
    """sum_{k=0..level} base(T^k x)."""

    level: int
    operator: object
    base: Seminorm

    @property
    def label(self):
        return f"graph{self.level}"

    def __call__(self, x):
        total = ZERO
        y = x
        for k in range(self.level + 1):
            if k > 0:
                try:
                    y = self.operator.apply(y)
                except DomainError:
                    raise
                except Exception as exc:  # an operator that cannot act on x
                    raise DomainError(f"T^{k} x is undefined: {exc}") from exc
            total = total + self.base(y)
        return total


# Families


class SeminormFamily:
    """An enumerable family of seminorms.

    ``role`` is "generating" for a family defining the topology and
    "bounded" for a family of Minkowski functionals of bounded sets.
    ``enumerate(L)`` is always a prefix of ``enumerate(L + 1)``.
    """

    role: str = "generating"
    directed: bool = False
    finite: bool = False
    label: str = "family"

    def enumerate(self, level: int) -> list[Seminorm]:
        raise NotImplementedError

    def cofinal(self, level: int) -> list[Seminorm]:
        """An increasing chain whose members dominate every enumerated seminorm."""
        return self.enumerate(level)


@dataclass(frozen=True)
class CoordinateFamily(SeminormFamily):
    directed: bool = False
    role: str = "generating"

    @property
    def label(self):
        return "coordinates" + ("(directed)" if self.directed else "")

    def enumerate(self, level):
        out: list[Seminorm] = []
        for m in range(1, max(level, 0) + 1):
            out.append(Coordinate(m))
            if self.directed:
                for r in range(1, m):
                    for rest in itertools.combinations(range(1, m), r):
                        out.append(FiniteMax(rest + (m,)))
        return out

    def cofinal(self, level):
        return [FiniteMax(range(1, m + 1)) for m in range(1, max(level, 0) + 1)]


@dataclass(frozen=True, eq=False)
class NormFamily(SeminormFamily):
    norm: Seminorm = None
    role: str = "generating"
    finite = True
    directed = True

    @property
    def label(self):
        return f"norm[{self.norm.label}]"

    def enumerate(self, level):
        return [self.norm] if level >= 1 else []


@dataclass(frozen=True, eq=False)
class BoxFamily(SeminormFamily):
    boxes: tuple = ()
    role: str = "bounded"

    @property
    def label(self):
        return "boxes"

    @classmethod
    def polynomial(cls) -> "BoxFamily":
        """Boxes |x_k| <= (k+1)^m for m = 0, 1, 2, ..."""
        return _PolynomialBoxes()

    def enumerate(self, level):
        return list(self.boxes[: max(level, 0)])


class _PolynomialBoxes(BoxFamily):
    def __init__(self):
        object.__setattr__(self, "boxes", ())
        object.__setattr__(self, "role", "bounded")

    def enumerate(self, level):
        return [
            MinkowskiOfBox(functools.partial(_poly_log2_bound, m), f"box(k+1)^{m}")
            for m in range(max(level, 0))
        ]


def _poly_log2_bound(m: int, k: int) -> float:
    return m * math.log2(k + 1)


@dataclass(frozen=True, eq=False)
class GraphFamily(SeminormFamily):
    operator: object = None
    base: Seminorm = None
    directed = True

    @property
    def label(self):
        return "graph-norms"

    def enumerate(self, level):
        return [GraphNorm(j, self.operator, self.base) for j in range(max(level, 0))]


@dataclass(frozen=True, eq=False)
class ExplicitFamily(SeminormFamily):
    seminorms: tuple = ()
    role: str = "generating"
    name: str = "explicit"

    @property
    def label(self):
        return self.name

    @property
    def finite(self):
        return True

    def enumerate(self, level):
        return list(self.seminorms[: max(level, 0)])


def family_enumerate(family: SeminormFamily, level: int) -> list[Seminorm]:
    return family.enumerate(level)


def eval_seminorm(p: Seminorm, x: SparseVector) -> ExtReal:
    return p(x)


# Spaces


@dataclass(frozen=True, eq=False)
class SequenceSpace:
    """A space of sequences with a seminorm description of its topology.

    ``topology`` is "coordinate" (coordinatewise convergence) or "normed"
    (one norm, hence locally bounded).  ``membership`` names which sequences
    belong to the space: "all", "bounded", "null" or "finite" (C^dimension).
    """

    name: str
    topology: str
    family: SeminormFamily
    bounded: SeminormFamily
    membership: str = "all"
    dimension: int | None = None
    sequentially_complete: bool = True
    notes: dict = field(default_factory=dict)

    @property
    def locally_bounded(self) -> bool:
        return self.topology == "normed"

    @property
    def norm(self) -> Seminorm | None:
        if isinstance(self.family, NormFamily):
            return self.family.norm
        return None


def all_sequences() -> SequenceSpace:
    return SequenceSpace("R^N", "coordinate", CoordinateFamily(directed=True),
                         BoxFamily.polynomial(), "all", None, True)


def bounded_sequences_coordinatewise() -> SequenceSpace:
    # coordinatewise limits of bounded sequences need not be bounded
    return SequenceSpace("l_inf(coordinatewise)", "coordinate", CoordinateFamily(directed=True),
                         BoxFamily.polynomial(), "bounded", None, False)


def null_sequences_coordinatewise() -> SequenceSpace:
    return SequenceSpace("c0(coordinatewise)", "coordinate", CoordinateFamily(directed=True),
                         BoxFamily.polynomial(), "null", None, False)


def sup_normed() -> SequenceSpace:
    norm = WeightedSup(None, None, "sup")
    return SequenceSpace("l_inf", "normed", NormFamily(norm), NormFamily(norm, role="bounded"),
                         "bounded", None, True)


def finite_dimensional(dim: int) -> SequenceSpace:
    norm = FiniteMax(range(1, dim + 1))
    return SequenceSpace(f"C^{dim}", "normed", NormFamily(norm), NormFamily(norm, role="bounded"),
                         "finite", dim, True)

