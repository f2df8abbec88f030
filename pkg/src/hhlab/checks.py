"""One checker per inequality chain, each returning an ``InequalityReport``.

Every link is a required ``lhs <= rhs``.  For operator links the defect
``rhs - lhs`` is diagonalized and the link holds when its smallest
eigenvalue is at least ``-tol * max(1, ||lhs||, ||rhs||)``; scalar links
use ``tol`` as an absolute slack.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bounds import (BoundConstants, alpha_constant, beta_constant, delta_refinement,
                     xi_refinement)
from .errors import HypothesisError
from .matcore import (absolute_value, apply_function, as_symmetric, eigvals, loewner_compare,
                      operator_norm, spectral_bounds)
from .quad import (QuadratureRule, default_rule, midpoint_error_estimate, segment_integral,
                   weighted_nabla_integral)
from .scalarfn import Convexity, get_function, probe_convexity, probe_increasing, probe_nonnegative

DEFAULT_TOL = 1e-8
THEOREMS = ("hh", "t21", "cor22", "norm", "nabla", "reverse", "grad")


@dataclass(frozen=True)
class Link:
    lhs_label: str
    rhs_label: str
    relation_required: str
    min_eig_of_defect: float
    holds: bool
    tolerance: float
    relation: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "lhs_label": self.lhs_label,
            "rhs_label": self.rhs_label,
            "relation_required": self.relation_required,
            "min_eig_of_defect": self.min_eig_of_defect,
            "holds": self.holds,
            "tolerance": self.tolerance,
            "relation": self.relation,
        }


@dataclass(frozen=True)
class InequalityReport:
    theorem_id: str
    links: list
    constants_used: list
    inputs_digest: str
    warnings: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def overall(self) -> bool:
        return all(link.holds for link in self.links)

    @property
    def worst_margin(self) -> float:
        return min(link.min_eig_of_defect for link in self.links)

    @property
    def hypotheses_met(self) -> bool:
        return not self.warnings

    def to_dict(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "links": [link.to_dict() for link in self.links],
            "constants_used": [c.to_dict() for c in self.constants_used],
            "inputs_digest": self.inputs_digest,
            "overall": self.overall,
            "warnings": list(self.warnings),
            "diagnostics": self.diagnostics,
        }


def inputs_digest(matrices, **params) -> str:
    """SHA-256 over matrix bytes (float64, little endian) and sorted parameters."""
    h = hashlib.sha256()
    for mat in matrices:
        arr = np.ascontiguousarray(mat, dtype="<f8")
        h.update(str(arr.shape).encode())
        h.update(arr.tobytes())
    h.update(json.dumps(params, sort_keys=True, default=str).encode())
    return h.hexdigest()


def operator_link(lhs, rhs, lhs_label, rhs_label, tol=DEFAULT_TOL) -> Link:
    lhs = as_symmetric(lhs, name=lhs_label)
    rhs = as_symmetric(rhs, name=rhs_label)
    scale = max(1.0, operator_norm(lhs), operator_norm(rhs))
    used = tol * scale
    min_eig = float(eigvals(rhs - lhs)[0])
    relation = loewner_compare(lhs, rhs, tol).relation.value
    return Link(lhs_label, rhs_label, "<=", min_eig, min_eig >= -used, used, relation)


def scalar_link(lhs: float, rhs: float, lhs_label, rhs_label, tol=DEFAULT_TOL) -> Link:
    defect = float(rhs) - float(lhs)
    return Link(lhs_label, rhs_label, "<=", defect, defect >= -tol, tol, None)


def _pair(a, b):
    a = as_symmetric(a, name="A")
    b = as_symmetric(b, name="B")
    if a.shape != b.shape:
        raise ValueError(f"A and B differ in shape: {a.shape} vs {b.shape}")
    return a, b


def _interval(f, g, matrices):
    """Spectral interval [m, M]; widened slightly when degenerate so chords exist."""
    m, M = spectral_bounds(matrices)
    if M - m < 1e-9 * max(1.0, abs(m)):
        pad = 1e-6 * max(1.0, abs(m))
        hi = M + pad
        if all(fn.domain.contains(hi) for fn in (f, g)):
            M = hi
        else:
            m = m - pad
    return m, M


def _convexity_warnings(warnings, m, M, *fns):
    for fn in fns:
        probe = probe_convexity(fn, m, M)
        if probe.verdict is not Convexity.CONVEX:
            warnings.append(f"{fn.name} failed the convexity probe on [{m:.6g}, {M:.6g}] "
                            f"(witness {probe.witness})")


def _quad_diag(f, a, b, rule) -> dict:
    if rule.kind.startswith("midpoint-"):
        return {"rule": rule.describe(), "quadrature_error": midpoint_error_estimate(f, a, b, rule)}
    return {"rule": rule.describe()}


def check_hh_chain(f, a, b, rule: Optional[QuadratureRule] = None,
                   tol: float = DEFAULT_TOL) -> InequalityReport:
    """f((A+B)/2) <= integral of f((1-t)A+tB) <= (f(A)+f(B))/2."""
    f = get_function(f)
    a, b = _pair(a, b)
    rule = rule or default_rule(f)
    mid = apply_function(0.5 * (a + b), f)
    integral = segment_integral(f, a, b, rule)
    ends = 0.5 * (apply_function(a, f) + apply_function(b, f))
    warnings = []
    if f.convexity is not Convexity.OPERATOR_CONVEX:
        warnings.append(f"{f.name} is not marked operator convex; violations are informative")
    links = [
        operator_link(mid, integral, "f((A+B)/2)", "int f((1-t)A+tB) dt", tol),
        operator_link(integral, ends, "int f((1-t)A+tB) dt", "(f(A)+f(B))/2", tol),
    ]
    diag = _quad_diag(f, a, b, rule)
    diag["terms"] = {"midpoint": mid.tolist(), "integral": integral.tolist(),
                     "endpoint_mean": ends.tolist()}
    return InequalityReport("hh", links, [], inputs_digest([a, b], f=f.name, rule=rule.kind, tol=tol),
                            warnings, diag)


def check_theorem21(f, g, alpha: float, a, b, rule: Optional[QuadratureRule] = None,
                    tol: float = DEFAULT_TOL) -> InequalityReport:
    """integral of f((1-t)A+tB) <= beta I + alpha (g(A)+g(B))/2."""
    f, g = get_function(f), get_function(g)
    a, b = _pair(a, b)
    if alpha < 0:
        raise HypothesisError(f"alpha must be nonnegative, got {alpha}")
    rule = rule or default_rule(f)
    m, M = _interval(f, g, [a, b])
    warnings = []
    _convexity_warnings(warnings, m, M, f, g)
    beta = beta_constant(f, g, alpha, m, M)
    integral = segment_integral(f, a, b, rule)
    n = a.shape[0]
    rhs = beta.value * np.eye(n) + alpha * 0.5 * (apply_function(a, g) + apply_function(b, g))
    links = [operator_link(integral, rhs, "int f((1-t)A+tB) dt", "beta I + alpha (g(A)+g(B))/2", tol)]
    digest = inputs_digest([a, b], f=f.name, g=g.name, alpha=alpha, rule=rule.kind, tol=tol)
    return InequalityReport("t21", links, [beta], digest, warnings,
                            {**_quad_diag(f, a, b, rule), "m": m, "M": M})


def check_corollary22(f, g, a, b, rule: Optional[QuadratureRule] = None,
                      tol: float = DEFAULT_TOL) -> InequalityReport:
    """Multiplicative and additive forms with alpha from the chord/g ratio.

    Also records the scalar link beta(f, g, alpha) <= 0 that makes the
    multiplicative form follow from the additive one.
    """
    f, g = get_function(f), get_function(g)
    a, b = _pair(a, b)
    rule = rule or default_rule(f)
    m, M = _interval(f, g, [a, b])
    warnings = []
    _convexity_warnings(warnings, m, M, f, g)
    alpha = alpha_constant(f, g, m, M)
    beta_at_alpha = beta_constant(f, g, alpha.value, m, M)
    beta_one = beta_constant(f, g, 1.0, m, M)
    integral = segment_integral(f, a, b, rule)
    g_mean = 0.5 * (apply_function(a, g) + apply_function(b, g))
    n = a.shape[0]
    links = [
        operator_link(integral, alpha.value * g_mean, "int f((1-t)A+tB) dt", "alpha (g(A)+g(B))/2", tol),
        operator_link(integral, beta_one.value * np.eye(n) + g_mean,
                      "int f((1-t)A+tB) dt", "beta I + (g(A)+g(B))/2", tol),
        scalar_link(beta_at_alpha.value, 0.0, "beta(f, g, alpha)", "0", tol),
    ]
    digest = inputs_digest([a, b], f=f.name, g=g.name, rule=rule.kind, tol=tol)
    return InequalityReport("cor22", links, [alpha, beta_at_alpha, beta_one], digest, warnings,
                            {**_quad_diag(f, a, b, rule), "m": m, "M": M})


def check_norm_chain(f, a, b, alpha: Optional[float] = 1.0, rule: Optional[QuadratureRule] = None,
                     tol: float = DEFAULT_TOL) -> InequalityReport:
    """f(||(A+B)/2||) <= ||int f((1-t)|A|+t|B|) dt|| <= beta + alpha ||(f(|A|)+f(|B|))/2||.

    ``alpha=None`` takes alpha from ``alpha_constant(f, f, m, M)``.
    """
    f = get_function(f)
    a, b = _pair(a, b)
    rule = rule or default_rule(f)
    abs_a, abs_b = absolute_value(a), absolute_value(b)
    m, M = _interval(f, f, [abs_a, abs_b])
    warnings = []
    _convexity_warnings(warnings, m, M, f)
    if not probe_increasing(f, m, M):
        warnings.append(f"{f.name} is not increasing on [{m:.6g}, {M:.6g}]")
    if not probe_nonnegative(f, m, M):
        warnings.append(f"{f.name} is negative somewhere on [{m:.6g}, {M:.6g}]")
    constants = []
    if alpha is None:
        alpha_c = alpha_constant(f, f, m, M)
        constants.append(alpha_c)
        alpha = alpha_c.value
    if alpha < 0:
        raise HypothesisError(f"alpha must be nonnegative, got {alpha}")
    beta = beta_constant(f, f, alpha, m, M)
    constants.append(beta)
    first = float(f(operator_norm(0.5 * (a + b))))
    middle = operator_norm(segment_integral(f, abs_a, abs_b, rule))
    last = beta.value + alpha * operator_norm(0.5 * (apply_function(abs_a, f) + apply_function(abs_b, f)))
    links = [
        scalar_link(first, middle, "f(||(A+B)/2||)", "||int f((1-t)|A|+t|B|) dt||", tol),
        scalar_link(middle, last, "||int f((1-t)|A|+t|B|) dt||", "beta + alpha ||(f(|A|)+f(|B|))/2||", tol),
    ]
    digest = inputs_digest([a, b], f=f.name, alpha=alpha, rule=rule.kind, tol=tol)
    return InequalityReport("norm", links, constants, digest, warnings,
                            {"rule": rule.describe(), "m": m, "M": M,
                             "values": [first, middle, last]})


def check_weighted_nabla(f, a, b, lam: float, rule: Optional[QuadratureRule] = None,
                         tol: float = DEFAULT_TOL) -> InequalityReport:
    """f(A nabla_lam B) <= weighted double mean <= f(A) nabla_lam f(B)."""
    f = get_function(f)
    a, b = _pair(a, b)
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    rule = rule or default_rule(f)
    warnings = []
    if f.convexity is not Convexity.OPERATOR_CONVEX:
        warnings.append(f"{f.name} is not marked operator convex; violations are informative")
    left = apply_function((1.0 - lam) * a + lam * b, f)
    middle = weighted_nabla_integral(f, a, b, lam, rule)
    right = (1.0 - lam) * apply_function(a, f) + lam * apply_function(b, f)
    links = [
        operator_link(left, middle, "f(A nabla B)", "weighted double mean", tol),
        operator_link(middle, right, "weighted double mean", "f(A) nabla f(B)", tol),
    ]
    diag = {"rule": rule.describe(), "lambda": lam}
    if lam == 0.5:
        diag["half_identity_residual"] = operator_norm(middle - segment_integral(f, a, b, rule))
    digest = inputs_digest([a, b], f=f.name, lam=lam, rule=rule.kind, tol=tol)
    return InequalityReport("nabla", links, [], digest, warnings, diag)


def check_reverse(f, g, alpha: float, a, b, rule: Optional[QuadratureRule] = None,
                  tol: float = DEFAULT_TOL) -> InequalityReport:
    """integral f <= beta I + alpha g((A+B)/2)  and  (f(A)+f(B))/2 <= beta I + alpha integral g."""
    f, g = get_function(f), get_function(g)
    a, b = _pair(a, b)
    if alpha < 0:
        raise HypothesisError(f"alpha must be nonnegative, got {alpha}")
    rule = rule or default_rule(f)
    m, M = _interval(f, g, [a, b])
    warnings = []
    _convexity_warnings(warnings, m, M, f)
    beta = beta_constant(f, g, alpha, m, M)
    n = a.shape[0]
    f_int = segment_integral(f, a, b, rule)
    g_int = segment_integral(g, a, b, rule)
    f_mean = 0.5 * (apply_function(a, f) + apply_function(b, f))
    g_mid = apply_function(0.5 * (a + b), g)
    links = [
        operator_link(f_int, beta.value * np.eye(n) + alpha * g_mid,
                      "int f((1-t)A+tB) dt", "beta I + alpha g((A+B)/2)", tol),
        operator_link(f_mean, beta.value * np.eye(n) + alpha * g_int,
                      "(f(A)+f(B))/2", "beta I + alpha int g((1-t)A+tB) dt", tol),
    ]
    diag = {**_quad_diag(f, a, b, rule), "m": m, "M": M,
            "note": "g is only required continuous on [m, M]"}
    digest = inputs_digest([a, b], f=f.name, g=g.name, alpha=alpha, rule=rule.kind, tol=tol)
    return InequalityReport("reverse", links, [beta], digest, warnings, diag)


def check_gradient_refinements(f, a, b, rule: Optional[QuadratureRule] = None,
                               restarts: int = 16, tol: float = DEFAULT_TOL,
                               seed: int = 0) -> InequalityReport:
    """f((A+B)/2) <= integral + delta I  and  integral <= (f(A)+f(B))/2 + xi I."""
    f = get_function(f)
    if not f.has_derivative:
        raise ValueError(f"function {f.name!r} has no derivative")
    a, b = _pair(a, b)
    rule = rule or default_rule(f)
    warnings = []
    m, M = _interval(f, f, [a, b])
    _convexity_warnings(warnings, m, M, f)
    delta = delta_refinement(f, a, b, restarts=restarts, seed=seed)
    xi = xi_refinement(f, a, b, rule, restarts, seed=seed)
    n = a.shape[0]
    mid = apply_function(0.5 * (a + b), f)
    integral = segment_integral(f, a, b, rule)
    ends = 0.5 * (apply_function(a, f) + apply_function(b, f))
    links = [
        operator_link(mid, integral + delta.value * np.eye(n),
                      "f((A+B)/2)", "int f((1-v)A+vB) dv + delta I", tol),
        operator_link(integral, ends + xi.value * np.eye(n),
                      "int f((1-v)A+vB) dv", "(f(A)+f(B))/2 + xi I", tol),
    ]
    # smallest constants that would have sufficed
    delta_needed = max(0.0, float(eigvals(mid - integral)[-1]))
    xi_needed = max(0.0, float(eigvals(integral - ends)[-1]))
    diag = {"rule": rule.describe(), "delta_needed": delta_needed, "xi_needed": xi_needed,
            "delta_slack": delta.value - delta_needed, "xi_slack": xi.value - xi_needed,
            "xi_node_sup_bound": xi.details["node_sup_bound"]}
    digest = inputs_digest([a, b], f=f.name, rule=rule.kind, restarts=restarts, seed=seed, tol=tol)
    return InequalityReport("grad", links, [delta, xi], digest, warnings, diag)
