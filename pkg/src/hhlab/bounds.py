"""Bound constants for the convex (not operator convex) Hermite-Hadamard inequalities.

``beta_constant`` and ``alpha_constant`` are scalar maximizations over the
spectral interval [m, M].  ``delta_refinement`` and ``xi_refinement`` are
suprema over unit vectors of covariance-type gaps

    <T f'(T) x, x> - <f'(T) x, x> <T x, x>

at T = (A+B)/2 and averaged along the segment (1-v)A + vB respectively.
All reported values are objective values at an explicit witness, hence
valid lower bounds on the true supremum.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels
from . import rng as rng_mod
from .errors import HypothesisError
from .matcore import (admit_spectrum, as_symmetric, eigh_stack, spectral_calculus,
                      spectral_decompose)
from .quad import QuadratureRule, default_rule, segment_points
from .scalarfn import ScalarFunction, chord_coefficients, get_function

GRID_POINTS = 10_000
DEFAULT_RESTARTS = 16
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class BoundKind(str, enum.Enum):
    BETA = "Beta"
    ALPHA = "Alpha"
    DELTA = "Delta"
    XI = "Xi"


@dataclass(frozen=True)
class BoundConstants:
    kind: BoundKind
    value: float
    witness: object
    method: str
    certified_lower: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        wit = self.witness
        if isinstance(wit, np.ndarray):
            wit = wit.tolist()
        return {
            "kind": self.kind.value,
            "value": self.value,
            "witness": wit,
            "method": self.method,
            "certified_lower": self.certified_lower,
            "details": self.details,
        }


# -- one-dimensional maximization -----------------------------------------------

def golden_section_max(fun: Callable[[float], float], lo: float, hi: float,
                       xtol: float = 1e-12, max_iter: int = 300):
    """Maximize a unimodal ``fun`` on [lo, hi]; returns (x, fun(x)).

    The endpoints are evaluated too, so monotone objectives land exactly
    on the boundary.
    """
    a, b = float(lo), float(hi)
    tol = xtol * max(1.0, abs(a), abs(b))
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = fun(x1), fun(x2)
    it = 0
    while b - a > tol and it < max_iter:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = fun(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = fun(x1)
        it += 1
    cands = [(f1, x1), (f2, x2), (fun(lo), float(lo)), (fun(hi), float(hi))]
    fx, x = max(cands, key=lambda c: c[0])
    return x, fx


def grid_refine_max(fun_vec: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                    points: int = GRID_POINTS):
    """Dense grid, then a parabolic step and golden search in the best cell pair."""
    x = np.linspace(lo, hi, points)
    y = fun_vec(x)
    i = int(np.argmax(y))
    best_x, best_y = float(x[i]), float(y[i])

    def scalar(t):
        return float(fun_vec(np.array([t]))[0])

    if 0 < i < points - 1:
        x0, x1, x2 = x[i - 1], x[i], x[i + 1]
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        denom = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
        if denom != 0.0:
            xp = x1 - 0.5 * ((x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)) / denom
            if x0 < xp < x2:
                yp = scalar(xp)
                if yp > best_y:
                    best_x, best_y = float(xp), yp
        xg, yg = golden_section_max(scalar, x0, x2)
        if yg > best_y:
            best_x, best_y = xg, yg
    return best_x, best_y


def _interval(f: ScalarFunction, g: ScalarFunction, m: float, M: float):
    m, M = float(m), float(M)
    if not m < M:
        raise ValueError(f"need m < M, got m={m}, M={M}")
    for fn in (f, g):
        fn.domain.admit(np.array([m, M]), label=f"interval endpoint for {fn.name}")
    return m, M


def beta_constant(f, g, alpha: float, m: float, M: float, *, method: str = "auto",
                  grid_points: int = GRID_POINTS) -> BoundConstants:
    """max over [m, M] of a_f x + b_f - alpha g(x).

    With convex ``g`` and ``alpha >= 0`` the objective is concave and golden
    section is used; otherwise a dense grid with local refinement.
    """
    f, g = get_function(f), get_function(g)
    alpha = float(alpha)
    if alpha < 0:
        raise HypothesisError(f"alpha must be nonnegative, got {alpha}")
    m, M = _interval(f, g, m, M)
    chord = chord_coefficients(f, m, M)

    def obj_vec(x):
        return chord.a_f * x + chord.b_f - alpha * g.values(x)

    if method == "auto":
        method = "golden-section" if g.convexity.is_convex else "grid+refine"
    if method == "golden-section":
        x, val = golden_section_max(lambda t: float(obj_vec(np.array(t))), m, M)
    elif method == "grid+refine":
        x, val = grid_refine_max(obj_vec, m, M, grid_points)
    else:
        raise ValueError(f"unknown method {method!r}")
    return BoundConstants(
        BoundKind.BETA, float(val), float(x), method, float(val),
        {"alpha": alpha, "m": m, "M": M, "a_f": chord.a_f, "b_f": chord.b_f,
         "f": f.name, "g": g.name},
    )


def alpha_constant(f, g, m: float, M: float, *, grid_points: int = GRID_POINTS) -> BoundConstants:
    """max over [m, M] of (a_f x + b_f) / g(x); requires g > 0 there."""
    f, g = get_function(f), get_function(g)
    m, M = _interval(f, g, m, M)
    grid = np.linspace(m, M, grid_points)
    gv = g.values(grid)
    if np.any(gv <= 0.0):
        bad = float(grid[np.argmin(gv)])
        raise HypothesisError(f"g={g.name} is not positive on [{m}, {M}] (g({bad:g}) <= 0)")
    chord = chord_coefficients(f, m, M)

    def ratio(x):
        return (chord.a_f * x + chord.b_f) / g.values(x)

    x, val = grid_refine_max(ratio, m, M, grid_points)
    return BoundConstants(
        BoundKind.ALPHA, float(val), float(x), "grid+refine", float(val),
        {"m": m, "M": M, "a_f": chord.a_f, "b_f": chord.b_f, "f": f.name, "g": g.name},
    )


# -- covariance gaps ----------------------------------------------------------------

def _derivative_required(f: ScalarFunction):
    if not f.has_derivative:
        raise ValueError(f"function {f.name!r} has no derivative")


def covariance_gap(f, a, x) -> float:
    """<A f'(A) x, x> - <A x, x> <f'(A) x, x> for a unit vector x."""
    f = get_function(f)
    _derivative_required(f)
    x = np.asarray(x, dtype=np.float64)
    if abs(np.linalg.norm(x) - 1.0) > 1e-10:
        raise ValueError(f"x must be a unit vector (norm {np.linalg.norm(x)!r})")
    dec = spectral_decompose(a)
    lam = admit_spectrum(f, dec.eigenvalues)
    d = f.deriv_values(lam)
    p = (dec.eigenvectors.T @ x) ** 2
    return float(np.dot(lam * d, p) - np.dot(d, p) * np.dot(lam, p))


def _cov_objective(lam, d, p):
    return np.dot(lam * d, p) - np.dot(d, p) * np.dot(lam, p)


def simplex_gap_max(lam: np.ndarray, d: np.ndarray):
    """Maximize sum(lam d p) - (d.p)(lam.p) over the probability simplex.

    The quadratic part -(d.p)(lam.p) is a product of two linear forms.  On
    a face of dimension >= 2 it is therefore a saddle, unless d is affine in
    lam on that face, where the objective is a scaled variance of lam and
    peaks on an edge.  So vertices and two-point supports (closed form,
    weight 1/2) already attain the maximum.  Three-point faces are still
    solved through their KKT system as a cheap cross-check.

    Returns (value, p).
    """
    lam = np.asarray(lam, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    n = lam.size
    best_p = np.zeros(n)
    best_p[0] = 1.0
    best = float(_cov_objective(lam, d, best_p))
    if n < 2:
        return best, best_p

    # two-point supports: w(1-w) (d_i - d_j)(lam_i - lam_j), peak at w = 1/2
    i, j = np.triu_indices(n, k=1)
    prod = (d[i] - d[j]) * (lam[i] - lam[j])
    k = int(np.argmax(prod))
    if prod[k] > 0.0:
        p = np.zeros(n)
        p[i[k]] = p[j[k]] = 0.5
        val = float(_cov_objective(lam, d, p))
        if val > best:
            best, best_p = val, p

    if n >= 3:
        trip = np.array(list(itertools.combinations(range(n), 3)), dtype=np.intp)
        ls, ds = lam[trip], d[trip]
        # stationarity on the face: (d_r lam_s + lam_r d_s) p_s + mu = lam_r d_r, sum p = 1
        kkt = np.zeros((trip.shape[0], 4, 4))
        kkt[:, :3, :3] = ds[:, :, None] * ls[:, None, :] + ls[:, :, None] * ds[:, None, :]
        kkt[:, :3, 3] = 1.0
        kkt[:, 3, :3] = 1.0
        rhs = np.zeros((trip.shape[0], 4))
        rhs[:, :3] = ls * ds
        rhs[:, 3] = 1.0
        scale = max(1.0, float(np.max(np.abs(kkt))))
        det = np.linalg.det(kkt)
        ok = np.abs(det) > 1e-12 * scale ** 3
        if np.any(ok):
            sol = np.linalg.solve(kkt[ok], rhs[ok][..., None])[..., 0]
            ps = sol[:, :3]
            feas = np.all(ps >= -1e-12, axis=1)
            if np.any(feas):
                ps = np.clip(ps[feas], 0.0, None)
                ps /= ps.sum(axis=1, keepdims=True)
                lf, df = ls[ok][feas], ds[ok][feas]
                vals = (np.sum(lf * df * ps, axis=1)
                        - np.sum(df * ps, axis=1) * np.sum(lf * ps, axis=1))
                t = int(np.argmax(vals))
                if vals[t] > best:
                    p = np.zeros(n)
                    p[trip[ok][feas][t]] = ps[t]
                    val = float(_cov_objective(lam, d, p))
                    if val > best:
                        best, best_p = val, p
    return best, best_p


def _random_starts(n: int, restarts: int, seed: int, label: str) -> np.ndarray:
    rows = [rng_mod.stream(seed, label, r).standard_normal(n) for r in range(restarts)]
    return np.array(rows).reshape(restarts, n)


def _ascent_step(q_stack, t_stack) -> float:
    # inverse of a crude bound on the Hessian scale of the quartic objective
    q = float(np.max(np.abs(q_stack)))
    t = float(np.max(np.abs(t_stack)))
    n = q_stack.shape[-1]
    return 1.0 / (1.0 + 3.0 * n * q * t)


def delta_refinement(f, a, b, *, restarts: int = DEFAULT_RESTARTS, seed: int = 0) -> BoundConstants:
    """sup over unit x of the covariance gap of C = (A+B)/2.

    All three quadratic forms commute with C, so in C's eigenbasis the gap
    depends on x only through p_i = x_i^2.  The simplex problem is solved
    by face enumeration, then polished by sphere ascent from the face
    optimum and ``restarts`` random starts.
    """
    f = get_function(f)
    _derivative_required(f)
    if restarts < 0:
        raise ValueError("restarts must be nonnegative")
    a = as_symmetric(a, name="A")
    b = as_symmetric(b, name="B")
    dec = spectral_decompose(0.5 * (a + b))
    lam = admit_spectrum(f, dec.eigenvalues)
    d = f.deriv_values(lam)
    face_val, p = simplex_gap_max(lam, d)
    starts = [np.sqrt(p)]
    if restarts:
        starts.extend(_random_starts(lam.size, restarts, seed, "delta"))
    q_stack = np.diag(d)[None]
    t_stack = np.diag(lam)[None]
    y, vals, gnorm = _kernels.gap_ascent(np.diag(lam * d), q_stack, t_stack, np.ones(1),
                                         np.array(starts), _ascent_step(q_stack, t_stack))
    k = int(np.argmax(vals))
    if vals[k] > face_val:
        value, y_best = float(vals[k]), y[k]
    else:
        value, y_best = face_val, np.sqrt(p)
    return BoundConstants(
        BoundKind.DELTA, value, dec.eigenvectors @ y_best, "simplex-faces+sphere-ascent", value,
        {"face_value": face_val, "restarts": restarts, "seed": seed,
         "max_tangent_grad": float(np.max(gnorm)), "f": f.name},
    )


def xi_refinement(f, a, b, rule: Optional[QuadratureRule] = None, restarts: int = DEFAULT_RESTARTS,
                  *, seed: int = 0) -> BoundConstants:
    """sup over unit x of the quadrature-averaged covariance gap along (1-v)A + vB.

    No common eigenbasis exists across v, so the quartic objective is
    maximized by sphere ascent started from the face-optimal vectors of
    (A+B)/2, A, B and a few nodes, plus ``restarts`` random starts.  The
    weighted node-wise suprema bound the result from above; that bound is
    recorded in ``details["node_sup_bound"]``.
    """
    f = get_function(f)
    _derivative_required(f)
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    a = as_symmetric(a, name="A")
    b = as_symmetric(b, name="B")
    rule = rule or default_rule(f)
    w_nodes = rule.weights
    lam, vecs = eigh_stack(segment_points(a, b, rule.nodes))
    lam = admit_spectrum(f, lam)
    d = f.deriv_values(lam)
    q_stack = spectral_calculus(lam, vecs, d)
    t_stack = spectral_calculus(lam, vecs, lam)
    p_bar = np.tensordot(w_nodes, spectral_calculus(lam, vecs, lam * d), axes=1)
    p_bar = 0.5 * (p_bar + p_bar.T)

    node_sups = np.empty(len(rule))
    node_wit = []
    for k in range(len(rule)):
        val, p = simplex_gap_max(lam[k], d[k])
        node_sups[k] = val
        node_wit.append(vecs[k] @ np.sqrt(p))
    upper = float(np.dot(w_nodes, node_sups))

    starts = []
    for mat in (0.5 * (a + b), a, b):
        dec = spectral_decompose(mat)
        lm = admit_spectrum(f, dec.eigenvalues)
        _, p = simplex_gap_max(lm, f.deriv_values(lm))
        starts.append(dec.eigenvectors @ np.sqrt(p))
    last = len(rule) - 1
    for k in sorted({0, last // 2, last, int(np.argmax(w_nodes * node_sups))}):
        starts.append(node_wit[k])
    starts.extend(_random_starts(a.shape[0], restarts, seed, "xi"))
    starts = np.array(starts)

    x, vals, gnorm = _kernels.gap_ascent(p_bar, q_stack, t_stack, w_nodes, starts,
                                         _ascent_step(q_stack, t_stack))
    k = int(np.argmax(vals))
    value = float(vals[k])
    return BoundConstants(
        BoundKind.XI, value, x[k], "sphere-ascent", value,
        {"restarts": restarts, "seed": seed, "starts": int(starts.shape[0]),
         "max_tangent_grad": float(np.max(gnorm)), "node_sup_bound": upper,
         "rule": rule.describe(), "f": f.name},
    )
