"""Fixtures, seeded random ensembles and the suite runner."""
from __future__ import annotations

import dataclasses
import datetime as _dt
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels
from . import checks
from . import rng as rng_mod
from .errors import DomainError, HypothesisError
from .matcore import as_symmetric
from .quad import default_rule, gauss_legendre
from .scalarfn import ScalarFunction, get_function, polynomial

SCHEMA_VERSION = 1


def paper_counterexample() -> tuple[np.ndarray, np.ndarray, ScalarFunction]:
    """The 2x2 pair and t^3 for which the operator chain fails."""
    a = as_symmetric([[2.0, 1.0], [1.0, 1.0]], name="A")
    b = as_symmetric([[1.0, 0.0], [0.0, 0.0]], name="B")
    return a, b, get_function("cube")


def random_orthogonal(dim: int, gen: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix from the QR factors of a Gaussian matrix."""
    q, r = np.linalg.qr(gen.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def random_symmetric(dim: int, spectrum_window: Sequence[float],
                     seed: Union[int, np.random.Generator], *, signed: bool = False) -> np.ndarray:
    """Symmetric matrix with eigenvalues uniform in the window, in a Haar-random basis.

    With ``signed=True`` each eigenvalue gets a random sign, so the window
    bounds the spectrum of ``|A|`` instead.
    """
    lo, hi = (float(v) for v in spectrum_window)
    if dim < 1:
        raise ValueError("dim must be at least 1")
    if not lo < hi:
        raise ValueError(f"invalid spectrum window ({lo}, {hi})")
    gen = seed if isinstance(seed, np.random.Generator) else np.random.Generator(np.random.Philox(seed))
    eig = gen.uniform(lo, hi, dim)
    if signed:
        eig = eig * gen.choice([-1.0, 1.0], dim)
    q = random_orthogonal(dim, gen)
    return as_symmetric((q * eig) @ q.T)


# -- suite ------------------------------------------------------------------------

DEFAULT_PAIRS = {
    "t21": [("cube", "cube"), ("cube", "square"), ("exp", "square")],
    "cor22": [("square", "square"), ("cube", "cube"), ("exp", "square")],
    "reverse": [("cube", "cube"), ("cube", "square")],
}
DEFAULT_SINGLES = {
    "hh": ["square", "power1.5", "inv"],
    "norm": ["square", "exp"],
    "nabla": ["square"],
    "grad": ["square", "cube", "exp"],
}


@dataclass
class SuiteConfig:
    seed: int = 42
    dims: list = field(default_factory=lambda: [2, 3, 4, 8])
    instances_per_checker: int = 500
    function_names: Optional[list] = None
    spectrum_window: tuple = (0.5, 2.5)
    node_count: int = 32
    tolerance: float = 1e-8
    restarts: int = 16
    alphas: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    reverse_alphas: list = field(default_factory=lambda: [1.0, 2.0])
    lambdas: list = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    checkers: list = field(default_factory=lambda: list(checks.THEOREMS))
    function_windows: dict = field(default_factory=dict)
    custom_functions: dict = field(default_factory=dict)

    def __post_init__(self):
        self.spectrum_window = tuple(float(v) for v in self.spectrum_window)
        self.dims = [int(d) for d in self.dims]
        if not self.dims or any(d < 1 for d in self.dims):
            raise ValueError("dims must be a non-empty list of positive integers")
        if self.instances_per_checker < 1:
            raise ValueError("instances_per_checker must be at least 1")
        lo, hi = self.spectrum_window
        if not lo < hi:
            raise ValueError(f"spectrum_window needs lo < hi, got {self.spectrum_window}")
        if self.node_count < 2:
            raise ValueError("node_count must be at least 2")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        unknown = set(self.checkers) - set(checks.THEOREMS)
        if unknown:
            raise ValueError(f"unknown checkers: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, obj: dict) -> "SuiteConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        extra = set(obj) - names
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**obj)

    @classmethod
    def from_json(cls, path) -> "SuiteConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["spectrum_window"] = list(self.spectrum_window)
        return d


def _resolver(config: SuiteConfig):
    custom = {name: polynomial(coeffs, name=name) for name, coeffs in config.custom_functions.items()}

    def resolve(name):
        return custom[name] if name in custom else get_function(name)

    return resolve


def build_plan(config: SuiteConfig) -> list[dict]:
    """Expand the config into checker combinations, in a fixed order."""
    names = config.function_names
    plan = []
    for checker in checks.THEOREMS:
        if checker not in config.checkers:
            continue
        if checker in DEFAULT_SINGLES:
            fs = list(names) if names is not None else DEFAULT_SINGLES[checker]
            if checker == "nabla":
                for f in fs:
                    for lam in config.lambdas:
                        plan.append({"checker": checker, "f": f, "lambda": float(lam)})
            elif checker == "norm":
                for f in fs:
                    for alpha in config.alphas:
                        plan.append({"checker": checker, "f": f, "alpha": float(alpha)})
            else:
                for f in fs:
                    plan.append({"checker": checker, "f": f})
        else:
            pairs = DEFAULT_PAIRS[checker]
            if names is not None:
                pairs = [p for p in pairs if set(p) <= set(names)]
            if checker == "cor22":
                for f, g in pairs:
                    plan.append({"checker": checker, "f": f, "g": g})
            else:
                alphas = config.reverse_alphas if checker == "reverse" else config.alphas
                for f, g in pairs:
                    for alpha in alphas:
                        plan.append({"checker": checker, "f": f, "g": g, "alpha": float(alpha)})
    for entry in plan:
        entry["label"] = "|".join(f"{k}={entry[k]}" for k in sorted(entry))
    return plan


def _window_for(config: SuiteConfig, entry: dict):
    for key in ("f", "g"):
        if key in entry and entry[key] in config.function_windows:
            return tuple(config.function_windows[entry[key]])
    return config.spectrum_window


def run_instance(entry: dict, a, b, config: SuiteConfig, resolve, rule, seed: int):
    checker = entry["checker"]
    f = resolve(entry["f"])
    tol = config.tolerance
    if checker == "hh":
        return checks.check_hh_chain(f, a, b, rule, tol)
    if checker == "t21":
        return checks.check_theorem21(f, resolve(entry["g"]), entry["alpha"], a, b, rule, tol)
    if checker == "cor22":
        return checks.check_corollary22(f, resolve(entry["g"]), a, b, rule, tol)
    if checker == "norm":
        return checks.check_norm_chain(f, a, b, entry["alpha"], rule, tol)
    if checker == "nabla":
        return checks.check_weighted_nabla(f, a, b, entry["lambda"], rule, tol)
    if checker == "reverse":
        return checks.check_reverse(f, resolve(entry["g"]), entry["alpha"], a, b, rule, tol)
    if checker == "grad":
        return checks.check_gradient_refinements(f, a, b, rule, config.restarts, tol, seed)
    raise ValueError(f"unknown checker {checker!r}")


def instance_matrices(config: SuiteConfig, entry: dict, index: int):
    dim = config.dims[index % len(config.dims)]
    gen = rng_mod.stream(config.seed, entry["label"], index)
    window = _window_for(config, entry)
    signed = entry["checker"] == "norm"
    a = random_symmetric(dim, window, gen, signed=signed)
    b = random_symmetric(dim, window, gen, signed=signed)
    return a, b


def counterexample_report(tol: float = checks.DEFAULT_TOL) -> dict:
    a, b, f = paper_counterexample()
    rep = checks.check_hh_chain(f, a, b, gauss_legendre(), tol)
    relations = [link.relation for link in rep.links]
    return {
        "expected_violation": True,
        "reproduced": relations == ["Incomparable", "Incomparable"],
        "relations": relations,
        "report": rep.to_dict(),
    }


def run_suite(config: SuiteConfig) -> dict:
    """Run every planned checker over its seeded ensemble plus the 2x2 fixture.

    Instances whose hypotheses fail the probes are tallied as exploratory
    and never affect ``overall``.
    """
    resolve = _resolver(config)
    t_start = time.perf_counter()
    timing = {}
    results = []
    overall = True
    for entry in build_plan(config):
        t0 = time.perf_counter()
        f = resolve(entry["f"])
        rule = default_rule(f, config.node_count)
        tally = {"combo": {k: v for k, v in entry.items() if k != "label"},
                 "instances": 0, "passed": 0, "failed": 0, "exploratory": 0,
                 "exploratory_failed": 0, "errors": 0, "worst_margin": None,
                 "worst_digest": None, "failures": [], "warnings": []}
        for i in range(config.instances_per_checker):
            a, b = instance_matrices(config, entry, i)
            tally["instances"] += 1
            try:
                rep = run_instance(entry, a, b, config, resolve, rule, config.seed + i)
            except (HypothesisError, DomainError) as exc:
                tally["errors"] += 1
                if len(tally["warnings"]) < 5:
                    tally["warnings"].append(f"instance {i}: {exc}")
                continue
            margin = rep.worst_margin
            if tally["worst_margin"] is None or margin < tally["worst_margin"]:
                tally["worst_margin"] = margin
                tally["worst_digest"] = rep.inputs_digest
            if not rep.hypotheses_met:
                tally["exploratory"] += 1
                if not rep.overall:
                    tally["exploratory_failed"] += 1
                for w in rep.warnings:
                    if w not in tally["warnings"] and len(tally["warnings"]) < 5:
                        tally["warnings"].append(w)
            elif rep.overall:
                tally["passed"] += 1
            else:
                tally["failed"] += 1
                if len(tally["failures"]) < 5:
                    tally["failures"].append({"instance": i, "digest": rep.inputs_digest,
                                              "margin": margin})
        tally["ok"] = tally["failed"] == 0 and tally["errors"] == 0
        overall = overall and tally["ok"]
        results.append(tally)
        timing[entry["label"]] = time.perf_counter() - t0
    t0 = time.perf_counter()
    counter = counterexample_report(config.tolerance)
    timing["counterexample"] = time.perf_counter() - t0
    timing["total"] = time.perf_counter() - t_start
    return {
        "schema": SCHEMA_VERSION,
        "backend": _kernels.BACKEND,
        "config": config.to_dict(),
        "results": results,
        "counterexample": counter,
        "overall": overall,
        "timing": timing,
    }


def strip_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def save_report(report: dict, runs_dir="runs") -> Path:
    """Write the report to ``runs_dir`` under a new name; never overwrites."""
    runs = Path(runs_dir)
    runs.mkdir(parents=True, exist_ok=True)
    stamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    seed = report["config"]["seed"]
    path = runs / f"seed{seed}-{stamp}.json"
    k = 1
    while path.exists():
        path = runs / f"seed{seed}-{stamp}-{k}.json"
        k += 1
    path.write_text(dumps_report(report) + "\n")
    return path
