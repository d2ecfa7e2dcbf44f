"""Structured linear operators on sequence spaces.

Every operator acts on finitely supported sequences through ``apply`` and
on finitely supported functionals through ``pullback`` (f -> f o T).  The
convention for a weighted shift with offset c is  e_k -> w(k) e_{k-c},  so
offset +1 is the left shift and offset -1 the forward shift.

Structural facts used by the exact paths elsewhere:

read_bound()      K such that row j of T reads only indices <= max(j, K),
                  or None when no such K is known
escapes()         True when the row support of T^n at any fixed coordinate
                  leaves every finite window as n grows
column_support()  finite set F with Tx depending only on x_F, or None
range_support()   finite set G containing the support of every Tx, or None
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import DomainError, InvalidIndex, InvalidOperator
from .spaces import SparseVector, as_scalar, log2_abs, phase


def _checked(c, where) -> complex:
    z = complex(c)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidOperator(f"non-finite coefficient at {where}")
    return z


class Operator:
    label = "T"

    def apply(self, x: SparseVector) -> SparseVector:
        raise NotImplementedError

    def pullback(self, f: SparseVector) -> SparseVector:
        raise NotImplementedError

    def read_bound(self) -> int | None:
        return None

    def escapes(self) -> bool:
        return False

    def column_support(self) -> frozenset | None:
        return None

    def range_support(self) -> frozenset | None:
        return None

    def infinite_columns(self) -> bool:
        """True when Tx is known to depend on infinitely many coordinates."""
        return False

    def log2_power_coefficient(self, n: int, i: int, j: int) -> tuple[float, complex]:
        """(log2 |c|, phase of c) for the coefficient c of e_j in T^n e_i."""
        vec, scale = SparseVector.unit(i), 0.0
        for _ in range(n):
            vec, scale = _renormalize(self.apply(vec), scale)
            if not vec:
                return -math.inf, 1.0 + 0j
        c = vec.coeff(j)
        if c == 0:
            return -math.inf, 1.0 + 0j
        return log2_abs(c) + scale, phase(c)

    def __call__(self, x: SparseVector) -> SparseVector:
        return self.apply(x)

    def __add__(self, other: "Operator") -> "Operator":
        return Sum((self, other))

    def __sub__(self, other: "Operator") -> "Operator":
        return Sum((self, Scale(-1.0, other)))

    def __neg__(self) -> "Operator":
        return Scale(-1.0, self)

    def __matmul__(self, other: "Operator") -> "Operator":
        return Product((self, other))

    def __rmul__(self, c) -> "Operator":
        return Scale(c, self)

    def __repr__(self):
        return f"<{type(self).__name__} {self.label}>"


@dataclass(frozen=True, eq=False, repr=False)
class WeightedShift(Operator):
    """e_k -> w(k) e_{k-c}.

    ``log2_weight`` may be given to keep large products exact in log form.
    The weights are assumed nonzero at every k with k - c >= 1.  ``sup``
    optionally declares sup_k |w(k)|.
    """

    offset: int
    weight: Callable[[int], complex] | None = None
    log2_weight: Callable[[int], float] | None = None
    name: str = ""
    sup: float | None = None

    def exact_sup(self) -> float | None:
        return 1.0 if self.weight is None else self.sup

    @property
    def label(self):
        if self.name:
            return self.name
        return {1: "left-shift", -1: "forward-shift"}.get(self.offset, f"shift({self.offset})")

    def w(self, k: int) -> complex:
        if self.weight is None:
            return 1.0 + 0j
        return _checked(self.weight(k), f"weight({k})")

    def _log2_w(self, k: int) -> float:
        if self.log2_weight is not None:
            return float(self.log2_weight(k))
        return log2_abs(self.w(k))

    def _phase_w(self, k: int) -> complex:
        if self.weight is None:
            return 1.0 + 0j
        if self.log2_weight is not None:
            # weights given in log form are taken positive unless weight() says otherwise
            try:
                return phase(self.w(k))
            except (OverflowError, InvalidOperator):
                return 1.0 + 0j
        return phase(self.w(k))

    def apply(self, x):
        out: dict[int, complex] = {}
        for k, c in x.items():
            t = k - self.offset
            if t >= 1:
                out[t] = out.get(t, 0j) + self.w(k) * c
        return SparseVector._trusted(out)

    def pullback(self, f):
        out: dict[int, complex] = {}
        for j, c in f.items():
            k = j + self.offset
            if k >= 1:
                out[k] = out.get(k, 0j) + c * self.w(k)
        return SparseVector._trusted(out)

    def read_bound(self):
        return 0 if self.offset <= 0 else None

    def escapes(self):
        return self.offset > 0

    def infinite_columns(self):
        return True

    def log2_power_coefficient(self, n, i, j):
        if n == 0:
            return (0.0, 1.0 + 0j) if i == j else (-math.inf, 1.0 + 0j)
        if j != i - n * self.offset or j < 1:
            return -math.inf, 1.0 + 0j
        lg, ph = 0.0, 1.0 + 0j
        for m in range(n):
            k = i - m * self.offset
            lw = self._log2_w(k)
            if lw == -math.inf:
                return -math.inf, 1.0 + 0j
            lg += lw
            ph *= self._phase_w(k)
        return lg, ph


@dataclass(frozen=True, eq=False, repr=False)
class Diagonal(Operator):
    """e_k -> d(k) e_k.

    Optional structure makes sup_k |d(k)| exactly available:
    ``sup`` declares it outright, ``support`` restricts d to a finite set,
    ``period`` says d(k) = d(k + period), ``monotone_from`` says |d(k)| is
    non-increasing for k >= monotone_from, ``positive`` that every d(k) is
    real and nonnegative, ``limit`` the limit of d(k).  Without ``support`` the entries
    are assumed nonzero and not eventually constant unless ``constant`` is set.
    """

    weight: Callable[[int], complex]
    sup: float | None = None
    support: frozenset | None = None
    period: int | None = None
    monotone_from: int | None = None
    constant: complex | None = None
    positive: bool = False
    limit: complex | None = None
    name: str = "diag"

    @property
    def label(self):
        return self.name

    @classmethod
    def constant_value(cls, c, name=None) -> "Diagonal":
        c = as_scalar(c)
        return cls(lambda k, c=c: c, sup=abs(c), period=1, constant=c,
                   positive=c.imag == 0 and c.real >= 0, name=name or f"{_short(c)}*I")

    @classmethod
    def periodic(cls, values: Sequence[complex], name=None) -> "Diagonal":
        vals = tuple(as_scalar(v) for v in values)
        m = len(vals)
        return cls(lambda k, vals=vals, m=m: vals[(k - 1) % m], sup=max(abs(v) for v in vals),
                   period=m, constant=vals[0] if len(set(vals)) == 1 else None,
                   name=name or "diag-periodic(" + ",".join(_short(v) for v in vals) + ")")

    @classmethod
    def finite(cls, entries: dict, name=None) -> "Diagonal":
        ent = {int(k): as_scalar(v) for k, v in entries.items() if v != 0}
        return cls(lambda k, ent=ent: ent.get(k, 0j), support=frozenset(ent),
                   name=name or "diag-finite")

    def d(self, k: int) -> complex:
        if self.support is not None and k not in self.support:
            return 0j
        return _checked(self.weight(k), f"d({k})")

    def exact_sup(self) -> float | None:
        if self.support is not None:
            return max((abs(self.d(k)) for k in self.support), default=0.0)
        if self.period is not None:
            return max(abs(self.d(k)) for k in range(1, self.period + 1))
        if self.monotone_from is not None:
            return max(abs(self.d(k)) for k in range(1, self.monotone_from + 1))
        return self.sup

    def eventually_constant(self) -> complex | None:
        """The eventual value of d, when it is known to exist."""
        if self.support is not None:
            return 0j
        return self.constant

    def apply(self, x):
        out = {}
        for k, c in x.items():
            v = self.d(k) * c
            if v != 0:
                out[k] = v
        return SparseVector._trusted(out)

    pullback = apply

    def read_bound(self):
        return 0

    def column_support(self):
        return self.support

    def range_support(self):
        return self.support

    def infinite_columns(self):
        return self.support is None and self.constant != 0

    def log2_power_coefficient(self, n, i, j):
        if i != j:
            return -math.inf, 1.0 + 0j
        if n == 0:
            return 0.0, 1.0 + 0j
        c = self.d(i)
        return n * log2_abs(c), phase(c) ** n

    def _mono(self):
        if self.monotone_from is not None:
            return self.monotone_from
        if self.period == 1:
            return 1
        return None

    def times(self, other: "Diagonal") -> "Diagonal":
        """Entrywise product, keeping whatever structure survives."""
        a, b = self, other
        ma, mb = a._mono(), b._mono()
        mono = max(ma, mb) if ma is not None and mb is not None else None
        const = a.constant * b.constant if a.constant is not None and b.constant is not None else None
        return Diagonal(lambda k: a.d(k) * b.d(k), support=_meet(a.support, b.support),
                        period=_lcm(a.period, b.period), monotone_from=mono, constant=const,
                        positive=a.positive and b.positive, name=f"({a.label})*({b.label})")

    def plus(self, other: "Diagonal") -> "Diagonal":
        a, b = self, other
        support = None
        if a.support is not None and b.support is not None:
            support = frozenset(k for k in a.support | b.support if a.d(k) + b.d(k) != 0)
        mono = None
        ma, mb = a._mono(), b._mono()
        if a.positive and b.positive and ma is not None and mb is not None:
            mono = max(ma, mb)
        const = a.constant + b.constant if a.constant is not None and b.constant is not None else None
        return Diagonal(lambda k: a.d(k) + b.d(k), support=support, period=_lcm(a.period, b.period),
                        monotone_from=mono, constant=const, positive=a.positive and b.positive,
                        name=f"({a.label})+({b.label})")


def _meet(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a & b


def _lcm(a, b):
    if a is None or b is None:
        return None
    return a * b // math.gcd(a, b)


def _short(c: complex) -> str:
    c = complex(c)
    if c.imag == 0:
        r = c.real
        return str(int(r)) if r.is_integer() else f"{r:g}"
    return f"{c:g}"


def identity() -> Diagonal:
    return Diagonal.constant_value(1.0, name="I")


def left_shift() -> WeightedShift:
    return WeightedShift(1)


def forward_shift() -> WeightedShift:
    return WeightedShift(-1)


def _decay_log2_weight(k: int) -> float:
    if k <= 1:
        return -math.inf
    return (k - 1) * math.log2(k - 1) - k * math.log2(k)


def decay_weighted_shift() -> WeightedShift:
    """Left shift with weights (k-1)^(k-1) / k^k, so T^n e_k = (k-n)^(k-n)/k^k e_{k-n}."""
    return WeightedShift(1, lambda k: 2.0 ** _decay_log2_weight(k) if k > 1 else 0.0,
                         _decay_log2_weight, name="decay-weighted-shift")


@dataclass(frozen=True, eq=False, repr=False)
class FiniteRank(Operator):
    """x -> sum_i <f_i, x> y_i  with finitely supported f_i and y_i."""

    functionals: tuple
    vectors: tuple
    name: str = "finite-rank"

    def __post_init__(self):
        if len(self.functionals) != len(self.vectors):
            raise InvalidOperator("need as many functionals as vectors")
        object.__setattr__(self, "functionals", tuple(SparseVector(f) for f in self.functionals))
        object.__setattr__(self, "vectors", tuple(SparseVector(y) for y in self.vectors))

    @property
    def label(self):
        return self.name

    @classmethod
    def from_matrix(cls, a, name="matrix") -> "FiniteRank":
        """The operator acting as the matrix ``a`` on coordinates 1..d."""
        a = np.asarray(a, dtype=complex)
        rows, cols = a.shape
        fs = [SparseVector.unit(j + 1) for j in range(cols)]
        ys = [SparseVector.from_dense(a[:, j]) for j in range(cols)]
        return cls(tuple(fs), tuple(ys), name=name)

    def _dense(self):
        """Functionals and vectors as extended-precision arrays over their supports."""
        cached = self.__dict__.get("_dense_cache")
        if cached is None:
            def table(vs):
                idx = sorted(frozenset().union(*(v.support for v in vs)))
                a = np.array([[v.coeff(k) for k in idx] for v in vs], dtype=np.clongdouble).reshape(len(vs), len(idx))
                return tuple(idx), a
            cached = (table(self.functionals), table(self.vectors))
            object.__setattr__(self, "_dense_cache", cached)
        return cached

    def _through(self, x, first, second) -> SparseVector:
        """sum_i <first_i, x> second_i, rounded to double once per coordinate."""
        (idx_a, A), (idx_b, B) = first, second
        xv = np.array([x.coeff(k) for k in idx_a], dtype=np.clongdouble)
        if not xv.any():
            return SparseVector()
        out = ((A @ xv) @ B).astype(complex)
        return SparseVector._trusted({k: complex(c) for k, c in zip(idx_b, out) if c != 0})

    @staticmethod
    def _combine(coeffs, vecs) -> SparseVector:
        parts: dict[int, list] = {}
        for s, y in zip(coeffs, vecs):
            if s != 0:
                for k, c in y.items():
                    parts.setdefault(k, []).append((s, c))
        out = {k: accurate_dot(ts) for k, ts in parts.items()}
        return SparseVector._trusted({k: c for k, c in out.items() if c != 0})

    def apply(self, x):
        if EXTENDED:
            F, Y = self._dense()
            return self._through(x, F, Y)
        return self._combine([pair(f, x) for f in self.functionals], self.vectors)

    def pullback(self, f):
        if EXTENDED:
            F, Y = self._dense()
            return self._through(f, Y, F)
        return self._combine([pair(f, y) for y in self.vectors], self.functionals)

    def column_support(self):
        return frozenset().union(*(f.support for f in self.functionals))

    def range_support(self):
        return frozenset().union(*(y.support for y in self.vectors))

    def read_bound(self):
        return max(self.column_support(), default=0)

    def gram(self):
        """M[i, k] = <f_i, y_k>; the nonzero spectrum of T is that of M."""
        n = len(self.functionals)
        m = np.zeros((n, n), dtype=complex)
        for i, f in enumerate(self.functionals):
            for k, y in enumerate(self.vectors):
                m[i, k] = pair(f, y)
        return m


_SPLIT = 134217729.0  # 2**27 + 1

# finite-rank operators accumulate in extended precision where the platform
# has it (x87 80-bit or quad), else in correctly rounded float sums
EXTENDED = np.finfo(np.longdouble).eps < 1e-18


def _two_product(a: float, b: float) -> tuple[float, float]:
    """(p, e) with p = fl(a * b) and p + e = a * b exactly (Dekker splitting)."""
    p = a * b
    if not math.isfinite(p) or abs(a) > 1e290 or abs(b) > 1e290:
        return p, 0.0
    t = _SPLIT * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLIT * b
    bh = t - (t - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def accurate_dot(terms) -> complex:
    """sum a * b over complex pairs (a, b), correctly rounded in each component.

    Products are split exactly into two floats and the parts are summed with
    math.fsum, so cancellation among the terms costs no accuracy.
    """
    terms = [(a, b) for a, b in terms if a != 0 and b != 0]
    if not terms:
        return 0j
    if len(terms) == 1:
        a, b = complex(terms[0][0]), complex(terms[0][1])
        if not (a.real and a.imag and b.real and b.imag):
            return a * b  # one product per component: already correctly rounded
    re: list[float] = []
    im: list[float] = []
    for c, v in terms:
        for x, y, out, sign in ((c.real, v.real, re, 1.0), (c.imag, v.imag, re, -1.0),
                                (c.real, v.imag, im, 1.0), (c.imag, v.real, im, 1.0)):
            if x and y:
                hi, lo = _two_product(x, y)
                out.append(sign * hi)
                out.append(sign * lo)
    return complex(math.fsum(re), math.fsum(im))


def pair(f: SparseVector, x: SparseVector) -> complex:
    """Bilinear pairing sum_k f_k x_k, accurate in each component.

    Powers of finite-rank operators repeat this pairing many times, and
    cancellation in a plain float sum would compound over the iterates.
    """
    if len(f) > len(x):
        f, x = x, f
    return accurate_dot((c, x.coeff(k)) for k, c in f.items())


@dataclass(frozen=True, eq=False, repr=False)
class Sum(Operator):
    terms: tuple

    def __post_init__(self):
        if not self.terms:
            raise InvalidOperator("empty sum")

    @property
    def label(self):
        return "(" + " + ".join(t.label for t in self.terms) + ")"

    def apply(self, x):
        out = SparseVector()
        for t in self.terms:
            out = out + t.apply(x)
        return out

    def pullback(self, f):
        out = SparseVector()
        for t in self.terms:
            out = out + t.pullback(f)
        return out

    def read_bound(self):
        ks = [t.read_bound() for t in self.terms]
        return None if any(k is None for k in ks) else max(ks)

    def column_support(self):
        sets = [t.column_support() for t in self.terms]
        return None if any(s is None for s in sets) else frozenset().union(*sets)

    def range_support(self):
        sets = [t.range_support() for t in self.terms]
        return None if any(s is None for s in sets) else frozenset().union(*sets)


@dataclass(frozen=True, eq=False, repr=False)
class Product(Operator):
    """Composition; ``Product((A, B))`` maps x to A(B(x))."""

    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise InvalidOperator("empty product")

    @property
    def label(self):
        return "·".join(f.label for f in self.factors)

    def apply(self, x):
        for f in reversed(self.factors):
            x = f.apply(x)
        return x

    def pullback(self, g):
        for f in self.factors:
            g = f.pullback(g)
        return g

    def read_bound(self):
        ks = [f.read_bound() for f in self.factors]
        return None if any(k is None for k in ks) else max(ks)

    def escapes(self):
        return all(f.escapes() for f in self.factors)

    def column_support(self):
        # the rightmost factor with a known column support F bounds what is
        # read: T x depends on (B x)_F, and rows of B are finitely supported
        fs = self.factors
        for i in range(len(fs) - 1, -1, -1):
            cols = fs[i].column_support()
            if cols is None:
                continue
            right = fs[i + 1:]
            for f in right:
                cols = frozenset().union(*(f.pullback(SparseVector.unit(j)).support for j in cols))
            return cols
        return None

    def range_support(self):
        fs = self.factors
        for i, f in enumerate(fs):
            rng = f.range_support()
            if rng is None:
                continue
            for g in reversed(fs[:i]):
                rng = frozenset().union(*(g.apply(SparseVector.unit(k)).support for k in rng))
            return rng
        return None


@dataclass(frozen=True, eq=False, repr=False)
class Scale(Operator):
    factor: complex
    operand: Operator

    def __post_init__(self):
        object.__setattr__(self, "factor", as_scalar(self.factor))

    @property
    def label(self):
        return f"{_short(self.factor)}*{self.operand.label}"

    def apply(self, x):
        return self.operand.apply(x).scale(self.factor)

    def pullback(self, f):
        return self.operand.pullback(f).scale(self.factor)

    def read_bound(self):
        return 0 if self.factor == 0 else self.operand.read_bound()

    def escapes(self):
        return self.factor != 0 and self.operand.escapes()

    def infinite_columns(self):
        return self.factor != 0 and self.operand.infinite_columns()

    def column_support(self):
        return frozenset() if self.factor == 0 else self.operand.column_support()

    def range_support(self):
        return frozenset() if self.factor == 0 else self.operand.range_support()

    def log2_power_coefficient(self, n, i, j):
        lg, ph = self.operand.log2_power_coefficient(n, i, j)
        if lg == -math.inf:
            return lg, ph
        if self.factor == 0:
            return (-math.inf, 1.0 + 0j) if n > 0 else (lg, ph)
        return lg + n * log2_abs(self.factor), ph * phase(self.factor) ** n


def banded(offsets: dict, name: str = "banded") -> Operator:
    """Sum of weighted shifts, one per offset; offset 0 is a diagonal band."""
    terms = []
    for c, w in sorted(offsets.items()):
        if c == 0:
            terms.append(Diagonal(w, name=f"band0"))
        else:
            terms.append(WeightedShift(int(c), w, name=f"band{c}"))
    if len(terms) == 1:
        return terms[0]
    return Sum(tuple(terms))


# Power iteration in scaled form.  A pair (v, s) stands for v * 2**s with the
# largest entry of v in [1, 2); scaling by powers of two is exact.


def _renormalize(v: SparseVector, s: float) -> tuple[SparseVector, float]:
    m = v.max_abs()
    if m == 0:
        return v, -math.inf
    e = math.floor(math.log2(m))
    if e == 0:
        return v, s
    return SparseVector._trusted({k: math.ldexp(1.0, -e) * c for k, c in v.items()}), s + e


def scaled(v: SparseVector) -> tuple[SparseVector, float]:
    return _renormalize(v, 0.0)


def power_iterates(op: Operator, x: SparseVector, depth: int) -> Iterator[tuple[int, SparseVector, float]]:
    """Yield (n, v, s) with T^n x = v * 2**s for n = 0..depth."""
    v, s = scaled(x)
    yield 0, v, s
    for n in range(1, depth + 1):
        if v:
            v, s = _renormalize(op.apply(v), s)
        yield n, v, s


def power_rows(op: Operator, rows: Sequence[int], depth: int) -> Iterator[tuple[int, dict]]:
    """Yield (n, {j: (r, s)}) where r * 2**s is row j of T^n, for n = 0..depth."""
    cur = {j: (SparseVector.unit(j), 0.0) for j in rows}
    yield 0, dict(cur)
    for n in range(1, depth + 1):
        nxt = {}
        for j, (r, s) in cur.items():
            nxt[j] = _renormalize(op.pullback(r), s) if r else (r, s)
        cur = nxt
        yield n, dict(cur)


def power_coefficient(op: Operator, n: int, i: int, j: int) -> complex:
    """Coefficient of e_j in T^n e_i (log-magnitude evaluation, then exponentiated)."""
    if n < 0:
        raise DomainError("negative power")
    if i < 1 or j < 1:
        raise InvalidIndex("indices must be >= 1")
    lg, ph = op.log2_power_coefficient(n, i, j)
    if lg == -math.inf:
        return 0j
    if lg > 1023.5:
        raise OverflowError(f"|coefficient| = 2**{lg:.1f} is not representable; use log2_power_coefficient")
    return ph * 2.0 ** lg


def apply(op: Operator, x: SparseVector) -> SparseVector:
    return op.apply(x)


def column(op: Operator, i: int) -> SparseVector:
    return op.apply(SparseVector.unit(i))


def row(op: Operator, j: int) -> SparseVector:
    return op.pullback(SparseVector.unit(j))
