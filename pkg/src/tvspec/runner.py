"""Execute scenarios and assemble ordered, deterministic reports."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor

from . import corpus
from .classify import CLASSES, classify_boundedness
from .errors import TVSError
from .gallery import REGISTRY, run_example
from .measure import RotationOperator, measure_radius_check
from .neumann import Verdict, converge_monitor, residual_identity_check, spectrum_probe
from .radii import KINDS, estimate_radius, verify_ordering
from .report import REPORT_SCHEMA
from .scenario import Scenario, build_operator, build_space, task_options
from .spaces import BoxFamily, SparseVector, as_scalar

RESIDUAL_TOL = 1e-12


def _lam_key(lam: complex) -> str:
    return f"{lam.real:g}{lam.imag:+g}i"


def _classify(T, space, opts, sc):
    out = {"summary": [], "failures": []}
    if isinstance(T, RotationOperator):
        out["failures"].append("classification needs an operator on a sequence space")
        return out
    rep = classify_boundedness(T, space, sc.level)
    out["classification"] = rep.to_dict()
    out["summary"].append("verdicts " + ", ".join(f"{c}={rep[c].value}" for c in CLASSES))
    for c, v in opts.get("expect", {}).items():
        if rep[c].value != v:
            out["failures"].append(f"{c}: expected {v}, got {rep[c].value}")
    return out


def _radii(T, space, opts, sc):
    out = {"summary": [], "failures": []}
    kinds = opts.get("kinds", list(KINDS))
    expect, tol = opts.get("expect", {}), opts.get("tol", 1e-6)
    if isinstance(T, RotationOperator):
        rep = measure_radius_check(T, depth=max(sc.depth, 50))
        out["rotation"] = rep.to_dict()
        for k in kinds:
            r = rep.radii.get(k)
            if r is None:
                out["failures"].append(f"r_{k}: no certificate")
                continue
            out["summary"].append(f"r_{k} in [{r['lower']}, {r['upper']}]")
            if k in expect and not (r["lower"] - tol <= expect[k] <= (r["upper"] if r["upper"] is not None
                                                                      else float("inf")) + tol):
                out["failures"].append(f"r_{k}: expected {expect[k]}")
        return out
    aux = {"l": [SparseVector.unit(k) for k in range(1, opts.get("probes", sc.level) + 1)]}
    if opts.get("box") == "superexponential":
        aux["bb"] = corpus.superexponential_box()
    else:
        aux["bb"] = BoxFamily.polynomial()
    cache: dict = {}
    ests = {k: estimate_radius(k, T, space, aux.get(k), sc.depth, sc.level, cache) for k in kinds}
    out["radii"] = {k: e.to_dict() for k, e in ests.items()}
    order = verify_ordering(ests)
    out["ordering_ok"] = order.ok
    if not order.ok:
        out["failures"].append(f"radius ordering violated: {order.violations}")
    for k, e in ests.items():
        out["summary"].append(f"r_{k} in [{e.lower.value:.12g}, {e.upper.value:.12g}] ({e.certified} certified)")
        if k in expect and not e.contains(expect[k], tol):
            out["failures"].append(f"r_{k}: [{e.lower.value}, {e.upper.value}] does not contain {expect[k]}")
    return out


def _neumann(T, space, opts, sc):
    out = {"summary": [], "failures": [], "neumann": []}
    kind = opts.get("kind", "l")
    nprobes = opts.get("probes", sc.level)
    probes = [SparseVector.unit(k) for k in range(1, nprobes + 1)]
    expect = opts.get("expect")
    rotation = isinstance(T, RotationOperator)
    radius = {}
    if not rotation and space.sequentially_complete:
        for k in (KINDS if kind == "all" else (kind,)):
            radius[k] = estimate_radius(k, T, space, probes if k == "l" else None, sc.depth, sc.level)
    residuals = []
    for lam in opts["lambdas"]:
        lam = as_scalar(lam)
        rep = converge_monitor(T, lam, kind, space, probes, sc.depth, sc.level)
        out["neumann"].append(rep.to_dict())
        out["summary"].append(f"lambda={_lam_key(lam)}: {rep.verdict.value}")
        if expect is not None and rep.verdict.value != expect:
            out["failures"].append(f"lambda={_lam_key(lam)}: expected {expect}, got {rep.verdict.value}")
        for k, est in radius.items():
            up = est.certified_upper
            if up is not None and abs(lam) > up.value and rep.verdicts.get(k) is Verdict.DIVERGED:
                out["failures"].append(f"lambda={_lam_key(lam)}: diverged in {k} although |lambda| > r_{k} <= "
                                       f"{up.value} on a sequentially complete space")
        if not rotation and lam != 0:
            dev = max(residual_identity_check(T, lam, min(sc.depth, 60), x).value for x in probes)
            residuals.append([_lam_key(lam), dev])
            if dev > RESIDUAL_TOL:
                out["failures"].append(f"lambda={_lam_key(lam)}: residual identity off by {dev:.3g}")
    if residuals:
        out["residual_identity"] = residuals
    return out


def _spectrum(T, space, opts, sc):
    out = {"summary": [], "failures": [], "spectrum": []}
    expect = opts.get("expect", {})
    for lam in opts["lambdas"]:
        lam = as_scalar(lam)
        m = spectrum_probe(T, lam, space)
        out["spectrum"].append(m.to_dict())
        inside = [k for k in KINDS if m.in_spectrum(k)]
        out["summary"].append(f"lambda={_lam_key(lam)}: in sigma^" + (",".join(inside) if inside else "none"))
        for k, where in expect.items():
            if m.in_spectrum(k) != (where == "in"):
                out["failures"].append(f"lambda={_lam_key(lam)}: expected {where} sigma^{k}")
    return out


_RUNNERS = {"classify": _classify, "radii": _radii, "neumann": _neumann, "spectrum": _spectrum}


def _run_task(sc: Scenario, task, T, space) -> tuple[dict, float]:
    t0 = time.perf_counter()
    kind, opts = task_options(task)
    if kind == "gallery":
        res = run_example(opts, sc.depth, sc.level, sc.seed)
    else:
        try:
            res = _RUNNERS[kind](T, space, opts, sc)
        except TVSError as e:
            res = {"summary": [], "failures": [f"{type(e).__name__}: {e}"]}
        res = {"task": kind, "options": opts, **res}
        res["passed"] = not res["failures"]
    return res, time.perf_counter() - t0


def run_scenario(sc: Scenario, workers: int = 4) -> dict:
    """Run every task of a scenario; results keep the declared task order."""
    t0 = time.perf_counter()
    space = build_space(sc)
    T = build_operator(sc) if sc.operator_spec is not None else None
    if workers > 1 and len(sc.tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(lambda t: _run_task(sc, t, T, space), sc.tasks))
    else:
        done = [_run_task(sc, t, T, space) for t in sc.tasks]
    tasks = [r for r, _ in done]
    return {"schema": REPORT_SCHEMA, "scenario": sc.echo(), "tasks": tasks,
            "passed": all(t["passed"] for t in tasks),
            "timing": {"tasks": [dt for _, dt in done], "total": time.perf_counter() - t0}}


def gallery_scenario(depth: int = 50, level: int = 4, seed: int = 0, ids=None) -> Scenario:
    ids = list(REGISTRY) if ids is None else list(ids)
    return Scenario("gallery", {"kind": "all-sequences"}, None, [{"gallery": i} for i in ids], seed, depth, level)

