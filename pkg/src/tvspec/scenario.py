"""Declarative scenario files (YAML) and their translation into model objects.

Grammar, schema ``tvspec-scenario/1``::

    schema: tvspec-scenario/1
    name: <text>
    seed: <int>                  # default 0
    depth: <int>                 # default 50
    level: <int>                 # default 4
    space:
      kind: all-sequences | bounded-sequences | null-sequences | sup-norm | finite
      dimension: <int>           # finite only
      complete: <bool>           # optional, declared sequential completeness
      locally_bounded: <bool>    # optional, must agree with the kind
    operator: <operator>
    tasks: [<task>, ...]

An operator is a mapping with a ``kind``:

    identity | zero
    diagonal  rule: constant (value) | periodic (values) | finite (entries)
                    | harmonic | geometric (ratio) | one-plus-harmonic
    shift     offset: <int> (1 reads the next coordinate, -1 moves forward)
              weights: unit | constant (value) | harmonic | decay
    finite-rank  functionals: [{k: v}], vectors: [{k: v}]
    matrix    rows: [[...], ...]
    sum       terms: [<operator>, ...]
    product   factors: [<operator>, ...]      # applied right to left
    scale     factor: <scalar>, operand: <operator>
    rotation  alpha: <float>                  # circle rotation, measure topology

Scalars are numbers or strings such as "0.5+0.5j".  A task is either the
word ``classify`` or a one-key mapping:

    classify: {expect: {nn: No, ...}}
    radii:    {kinds: [l, bb, ...], box: polynomial | superexponential,
               probes: <int>, expect: {<kind>: <value>}, tol: <float>}
    neumann:  {lambdas: [...], kind: l | bb | c | nn | nb | all,
               probes: <int>, expect: <verdict>}
    spectrum: {lambdas: [...], expect: {<kind>: in | out}}
    gallery:  <registered example id>
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import corpus
from .errors import ConfigError
from .measure import GOLDEN, RotationOperator
from .operators import Diagonal, FiniteRank, Operator, Product, Scale, Sum, WeightedShift, decay_weighted_shift
from .radii import KINDS
from .spaces import (
    SequenceSpace,
    SparseVector,
    all_sequences,
    bounded_sequences_coordinatewise,
    finite_dimensional,
    null_sequences_coordinatewise,
    sup_normed,
)

SCHEMA = "tvspec-scenario/1"
TASKS = ("classify", "radii", "neumann", "spectrum", "gallery")
SPACE_KINDS = {
    "all-sequences": all_sequences,
    "bounded-sequences": bounded_sequences_coordinatewise,
    "null-sequences": null_sequences_coordinatewise,
    "sup-norm": sup_normed,
}


@dataclass
class Scenario:
    name: str
    space_spec: dict
    operator_spec: dict | None
    tasks: list
    seed: int = 0
    depth: int = 50
    level: int = 4
    source: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict, repr=False)

    def echo(self) -> dict:
        return {"schema": SCHEMA, "name": self.name, "seed": self.seed, "depth": self.depth,
                "level": self.level, "space": self.space_spec, "operator": self.operator_spec,
                "tasks": self.tasks}


# YAML with line numbers


def _walk(loader, node, path, lines):
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = loader.construct_object(k)
            out[key] = _walk(loader, v, path + (key,), lines)
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_walk(loader, v, path + (i,), lines) for i, v in enumerate(node.value)]
    return loader.construct_object(node)


def parse_text(text: str) -> tuple[dict, dict]:
    """Parse YAML into plain data plus a map from key paths to line numbers."""
    loader = yaml.SafeLoader(text)
    try:
        node = loader.get_single_node()
        if node is None:
            raise ConfigError("empty scenario", 1)
        lines: dict = {}
        data = _walk(loader, node, (), lines)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigError(f"malformed YAML: {getattr(e, 'problem', e)}",
                          mark.line + 1 if mark is not None else None) from e
    finally:
        loader.dispose()
    if not isinstance(data, dict):
        raise ConfigError("a scenario must be a mapping", 1)
    return data, lines


class _Ctx:
    def __init__(self, lines: dict):
        self.lines = lines

    def fail(self, path: tuple, message: str):
        line = None
        p = path
        while line is None and p:
            line = self.lines.get(p)
            p = p[:-1]
        name = ".".join(str(x) for x in path) or None
        raise ConfigError(message, line if line is not None else self.lines.get(()), name)

    def get(self, d: dict, path: tuple, key, typ, default=..., choices=None):
        if not isinstance(d, dict):
            self.fail(path, "expected a mapping")
        if key not in d:
            if default is ...:
                self.fail(path + (key,), "missing required field")
            return default
        v = d[key]
        if typ is float and isinstance(v, int) and not isinstance(v, bool):
            v = float(v)
        if typ is not None and not isinstance(v, typ) or (typ is int and isinstance(v, bool)):
            self.fail(path + (key,), f"expected {getattr(typ, '__name__', typ)}, got {type(v).__name__}")
        if choices is not None and v not in choices:
            self.fail(path + (key,), f"must be one of {', '.join(map(str, choices))}")
        return v

    def scalar(self, v, path) -> complex:
        if isinstance(v, bool):
            self.fail(path, "expected a number")
        if isinstance(v, (int, float)):
            return complex(v)
        if isinstance(v, str):
            try:
                return complex(v.replace(" ", ""))
            except ValueError:
                pass
        self.fail(path, f"cannot read {v!r} as a scalar")

    def vector(self, v, path) -> SparseVector:
        if not isinstance(v, dict) or not v:
            self.fail(path, "expected a nonempty mapping index -> value")
        out = {}
        for k, c in v.items():
            if not isinstance(k, int) or isinstance(k, bool) or k < 1:
                self.fail(path + (k,), "indices are integers >= 1")
            out[k] = self.scalar(c, path + (k,))
        return SparseVector(out)


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read scenario file: {e}") from e
    return parse_scenario(text)


def parse_scenario(text: str) -> Scenario:
    data, lines = parse_text(text)
    ctx = _Ctx(lines)
    schema = ctx.get(data, (), "schema", str)
    if schema != SCHEMA:
        ctx.fail(("schema",), f"unsupported schema {schema!r}, expected {SCHEMA!r}")
    known = {"schema", "name", "seed", "depth", "level", "space", "operator", "tasks"}
    for k in data:
        if k not in known:
            ctx.fail((k,), "unknown field")
    name = ctx.get(data, (), "name", str, "unnamed")
    seed = ctx.get(data, (), "seed", int, 0)
    depth = ctx.get(data, (), "depth", int, 50)
    level = ctx.get(data, (), "level", int, 4)
    if depth < 8:
        ctx.fail(("depth",), "depth must be >= 8")
    if level < 1:
        ctx.fail(("level",), "level must be >= 1")
    space = ctx.get(data, (), "space", dict, {"kind": "all-sequences"})
    op = ctx.get(data, (), "operator", dict, None)
    tasks = ctx.get(data, (), "tasks", list, [])
    sc = Scenario(name, space, op, tasks, seed, depth, level, data, lines)
    # validate eagerly so errors point at the file before anything runs
    build_space(sc)
    if op is not None:
        build_operator(sc)
    for i, t in enumerate(tasks):
        task_kind(ctx, t, ("tasks", i))
        if task_needs_operator(t) and op is None:
            ctx.fail(("tasks", i), "this task needs an operator")
    return sc


def scenario_from_dict(data: dict) -> Scenario:
    return parse_scenario(yaml.safe_dump(data, sort_keys=False))


# spaces


def build_space(sc: Scenario) -> SequenceSpace:
    ctx = _Ctx(sc.lines)
    d, path = sc.space_spec, ("space",)
    kind = ctx.get(d, path, "kind", str, choices=tuple(SPACE_KINDS) + ("finite",))
    for k in d:
        if k not in ("kind", "dimension", "complete", "locally_bounded"):
            ctx.fail(path + (k,), "unknown field")
    if kind == "finite":
        dim = ctx.get(d, path, "dimension", int)
        if dim < 1:
            ctx.fail(path + ("dimension",), "dimension must be >= 1")
        space = finite_dimensional(dim)
    else:
        if "dimension" in d:
            ctx.fail(path + ("dimension",), "only finite spaces take a dimension")
        space = SPACE_KINDS[kind]()
    lb = ctx.get(d, path, "locally_bounded", bool, None)
    if lb is not None and lb != (space.topology == "normed"):
        ctx.fail(path + ("locally_bounded",),
                 f"the {kind} space is {'' if space.topology == 'normed' else 'not '}locally bounded")
    complete = ctx.get(d, path, "complete", bool, None)
    if complete is not None and complete != space.sequentially_complete:
        space = dataclasses.replace(space, sequentially_complete=complete)
    return space


# operators


def build_operator(sc: Scenario):
    return _operator(_Ctx(sc.lines), sc.operator_spec, ("operator",), sc.seed)


def _operator(ctx: _Ctx, d, path, seed):
    kind = ctx.get(d, path, "kind", str, choices=(
        "identity", "zero", "diagonal", "shift", "finite-rank", "matrix", "sum", "product", "scale", "rotation"))
    if kind == "identity":
        return Diagonal.constant_value(1.0, name="I")
    if kind == "zero":
        return Diagonal.constant_value(0.0, name="0")
    if kind == "diagonal":
        return _diagonal(ctx, d, path)
    if kind == "shift":
        return _shift(ctx, d, path)
    if kind == "finite-rank":
        fs = ctx.get(d, path, "functionals", list)
        ys = ctx.get(d, path, "vectors", list)
        if len(fs) != len(ys) or not fs:
            ctx.fail(path + ("vectors",), "need as many vectors as functionals, at least one")
        return FiniteRank(tuple(ctx.vector(f, path + ("functionals", i)) for i, f in enumerate(fs)),
                          tuple(ctx.vector(y, path + ("vectors", i)) for i, y in enumerate(ys)))
    if kind == "matrix":
        rows = ctx.get(d, path, "rows", list)
        n = len(rows)
        if not n or any(not isinstance(r, list) or len(r) != n for r in rows):
            ctx.fail(path + ("rows",), "rows must form a nonempty square matrix")
        a = np.array([[ctx.scalar(v, path + ("rows", i, j)) for j, v in enumerate(r)]
                      for i, r in enumerate(rows)])
        return FiniteRank.from_matrix(a)
    if kind in ("sum", "product"):
        key = "terms" if kind == "sum" else "factors"
        items = ctx.get(d, path, key, list)
        if len(items) < 2:
            ctx.fail(path + (key,), "need at least two operands")
        ops = [_operator(ctx, t, path + (key, i), seed) for i, t in enumerate(items)]
        if any(isinstance(o, RotationOperator) for o in ops):
            ctx.fail(path + (key,), "the rotation cannot be combined with sequence operators")
        out = ops[0]
        for o in ops[1:]:
            out = Sum((out, o)) if kind == "sum" else Product((out, o))
        return out
    if kind == "scale":
        f = ctx.scalar(ctx.get(d, path, "factor", None), path + ("factor",))
        inner = _operator(ctx, ctx.get(d, path, "operand", dict), path + ("operand",), seed)
        if isinstance(inner, RotationOperator):
            ctx.fail(path + ("operand",), "the rotation cannot be scaled")
        return Scale(f, inner)
    alpha = ctx.get(d, path, "alpha", float, GOLDEN)
    return RotationOperator(alpha)


def _diagonal(ctx, d, path) -> Diagonal:
    rule = ctx.get(d, path, "rule", str,
                   choices=("constant", "periodic", "finite", "harmonic", "geometric", "one-plus-harmonic"))
    if rule == "constant":
        return Diagonal.constant_value(ctx.scalar(ctx.get(d, path, "value", None), path + ("value",)))
    if rule == "periodic":
        vals = ctx.get(d, path, "values", list)
        if not vals:
            ctx.fail(path + ("values",), "need at least one value")
        return Diagonal.periodic([ctx.scalar(v, path + ("values", i)) for i, v in enumerate(vals)])
    if rule == "finite":
        v = ctx.vector(ctx.get(d, path, "entries", dict), path + ("entries",))
        return Diagonal.finite(dict(v.items()))
    if rule == "harmonic":
        return corpus.harmonic()
    if rule == "one-plus-harmonic":
        return corpus.one_plus_harmonic()
    r = ctx.get(d, path, "ratio", float)
    if not 0 < abs(r) < 1:
        ctx.fail(path + ("ratio",), "ratio must satisfy 0 < |ratio| < 1")
    return corpus.geometric(r)


def _shift(ctx, d, path) -> WeightedShift:
    offset = ctx.get(d, path, "offset", int)
    if offset == 0:
        ctx.fail(path + ("offset",), "offset must be nonzero")
    weights = ctx.get(d, path, "weights", str, "unit", choices=("unit", "constant", "harmonic", "decay"))
    if weights == "unit":
        return WeightedShift(offset)
    if weights == "constant":
        c = ctx.scalar(ctx.get(d, path, "value", None), path + ("value",))
        return WeightedShift(offset, lambda k, c=c: c, sup=abs(c), name=f"shift({offset})*{c:g}")
    if weights == "harmonic":
        return WeightedShift(offset, lambda k: 1.0 / k, sup=1.0, name=f"shift({offset})*(1/k)")
    if offset != 1:
        ctx.fail(path + ("offset",), "decay weights are defined for offset 1")
    return decay_weighted_shift()


# tasks


def task_kind(ctx: _Ctx, t, path) -> str:
    if t == "classify":
        return "classify"
    if not isinstance(t, dict) or len(t) != 1:
        ctx.fail(path, f"a task is 'classify' or a one-key mapping with key in {', '.join(TASKS)}")
    (k, v), = t.items()
    if k not in TASKS:
        ctx.fail(path + (k,), f"unknown task, expected one of {', '.join(TASKS)}")
    if k == "gallery":
        from .gallery import REGISTRY
        if v not in REGISTRY:
            ctx.fail(path + (k,), f"unknown gallery id {v!r}")
        return k
    if v is None:
        v = {}
    if not isinstance(v, dict):
        ctx.fail(path + (k,), "task options must be a mapping")
    allowed = {"classify": {"expect"},
               "radii": {"kinds", "box", "probes", "expect", "tol"},
               "neumann": {"lambdas", "kind", "probes", "expect"},
               "spectrum": {"lambdas", "expect"}}[k]
    for key in v:
        if key not in allowed:
            ctx.fail(path + (k, key), "unknown option")
    if k == "classify" and "expect" in v:
        e = ctx.get(v, path + (k,), "expect", dict)
        for c, verdict in e.items():
            if c not in ("nb", "nn", "continuous", "bb") or verdict not in ("Yes", "No", "Unknown"):
                ctx.fail(path + (k, "expect", c), "expect maps nb/nn/continuous/bb to Yes/No/Unknown")
    if k == "radii":
        for i, kind in enumerate(ctx.get(v, path + (k,), "kinds", list, list(KINDS))):
            if kind not in KINDS:
                ctx.fail(path + (k, "kinds", i), f"radius kind must be one of {', '.join(KINDS)}")
        ctx.get(v, path + (k,), "box", str, "polynomial", choices=("polynomial", "superexponential"))
        ctx.get(v, path + (k,), "probes", int, 4)
        ctx.get(v, path + (k,), "tol", float, 1e-6)
        for kind, val in ctx.get(v, path + (k,), "expect", dict, {}).items():
            if kind not in KINDS or isinstance(val, bool) or not isinstance(val, (int, float)):
                ctx.fail(path + (k, "expect", kind), "expect maps a radius kind to a number")
    if k in ("neumann", "spectrum"):
        lams = ctx.get(v, path + (k,), "lambdas", list)
        if not lams:
            ctx.fail(path + (k, "lambdas"), "need at least one lambda")
        for i, lam in enumerate(lams):
            ctx.scalar(lam, path + (k, "lambdas", i))
    if k == "neumann":
        ctx.get(v, path + (k,), "kind", str, "l", choices=KINDS + ("all",))
        ctx.get(v, path + (k,), "probes", int, 4)
        ctx.get(v, path + (k,), "expect", str, None, choices=(None, "Converged", "Diverged", "Inconclusive"))
    if k == "spectrum":
        for kind, where in ctx.get(v, path + (k,), "expect", dict, {}).items():
            if kind not in KINDS or where not in ("in", "out"):
                ctx.fail(path + (k, "expect", kind), "expect maps a kind to 'in' or 'out' of the spectrum")
    return k


def task_needs_operator(t) -> bool:
    return not (isinstance(t, dict) and "gallery" in t)


def task_options(t) -> tuple[str, object]:
    if t == "classify":
        return "classify", {}
    (k, v), = t.items()
    return k, ({} if v is None else v)
