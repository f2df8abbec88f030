"""Scalar functions with derivatives, domains and declared convexity class."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError


class Convexity(str, enum.Enum):
    CONVEX = "Convex"
    OPERATOR_CONVEX = "OperatorConvex"
    CONCAVE = "Concave"
    NEITHER = "Neither"
    UNVERIFIED = "Unverified"

    @property
    def is_convex(self) -> bool:
        return self in (Convexity.CONVEX, Convexity.OPERATOR_CONVEX)


@dataclass(frozen=True)
class Interval:
    lo: float = -math.inf
    hi: float = math.inf
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty interval ({self.lo}, {self.hi})")

    def contains(self, x: float) -> bool:
        if self.lo_open or math.isinf(self.lo):
            ok_lo = x > self.lo
        else:
            ok_lo = x >= self.lo
        if self.hi_open or math.isinf(self.hi):
            ok_hi = x < self.hi
        else:
            ok_hi = x <= self.hi
        return bool(ok_lo and ok_hi)

    def admit(self, values, slack: float = 0.0, label: str = "value") -> np.ndarray:
        """Return ``values`` if inside the interval.

        Values within ``slack`` outside a *closed* finite endpoint are clamped
        onto it; open endpoints are never approached by clamping.
        """
        x = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(x)):
            raise DomainError(f"non-finite {label}")
        if np.isfinite(self.lo):
            if self.lo_open:
                bad = x <= self.lo
            else:
                bad = x < self.lo - slack
            if np.any(bad):
                raise DomainError(f"{label} {float(x[bad].min())!r} is outside {self}")
            if not self.lo_open and np.any(x < self.lo):
                x = np.maximum(x, self.lo)
        if np.isfinite(self.hi):
            if self.hi_open:
                bad = x >= self.hi
            else:
                bad = x > self.hi + slack
            if np.any(bad):
                raise DomainError(f"{label} {float(x[bad].max())!r} is outside {self}")
            if not self.hi_open and np.any(x > self.hi):
                x = np.minimum(x, self.hi)
        return x

    def __str__(self):
        left = "(" if (self.lo_open or math.isinf(self.lo)) else "["
        right = ")" if (self.hi_open or math.isinf(self.hi)) else "]"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"

    def to_dict(self) -> dict:
        return {"lo": _jsonable(self.lo), "hi": _jsonable(self.hi),
                "lo_open": self.lo_open, "hi_open": self.hi_open}


REALS = Interval()
NONNEG = Interval(0.0, math.inf)
POSITIVE = Interval(0.0, math.inf, lo_open=True)


@dataclass(frozen=True)
class ScalarFunction:
    """A real function of one variable, vectorized over numpy arrays.

    ``func`` and ``deriv`` are applied elementwise without domain checks;
    calling the object itself checks the domain first.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    deriv: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    domain: Interval = REALS
    convexity: Convexity = Convexity.UNVERIFIED
    smooth: bool = True

    @property
    def has_derivative(self) -> bool:
        return self.deriv is not None

    def values(self, x) -> np.ndarray:
        return np.asarray(self.func(np.asarray(x, dtype=np.float64)), dtype=np.float64)

    def deriv_values(self, x) -> np.ndarray:
        if self.deriv is None:
            raise ValueError(f"function {self.name!r} has no derivative")
        return np.asarray(self.deriv(np.asarray(x, dtype=np.float64)), dtype=np.float64)

    def __call__(self, x):
        arr = self.domain.admit(x, label=f"argument of {self.name}")
        out = self.values(arr)
        return float(out) if out.ndim == 0 else out

    def derivative(self, x):
        arr = self.domain.admit(x, label=f"argument of {self.name}'")
        out = self.deriv_values(arr)
        return float(out) if out.ndim == 0 else out

    def describe(self) -> dict:
        return {"name": self.name, "domain": self.domain.to_dict(),
                "convexity": self.convexity.value, "smooth": self.smooth,
                "has_derivative": self.has_derivative}


def _jsonable(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


# -- catalog ------------------------------------------------------------------

def power(p: float) -> ScalarFunction:
    """t -> t**p on [0, inf) (open at 0 for negative p)."""
    p = float(p)
    if p == 2.0:
        return _CATALOG["square"]
    if 1.0 <= p <= 2.0 or -1.0 <= p < 0.0:
        cls = Convexity.OPERATOR_CONVEX
    elif p > 2.0 or p < -1.0:
        cls = Convexity.CONVEX
    elif p == 0.0:
        cls = Convexity.OPERATOR_CONVEX
    else:
        cls = Convexity.CONCAVE
    dom = POSITIVE if p < 0 else NONNEG
    return ScalarFunction(
        f"power{p:g}",
        lambda t: np.power(t, p),
        lambda t: p * np.power(t, p - 1.0),
        dom,
        cls,
    )


def polynomial(coeffs: Sequence[float], name: Optional[str] = None) -> ScalarFunction:
    """Polynomial with coefficients in increasing degree order."""
    poly = np.polynomial.Polynomial(np.asarray(coeffs, dtype=np.float64))
    dpoly = poly.deriv()
    label = name or "poly:" + ",".join(f"{c:g}" for c in poly.coef)
    return ScalarFunction(label, poly, dpoly, REALS, Convexity.UNVERIFIED)


def _build_catalog() -> dict[str, ScalarFunction]:
    oc, cv = Convexity.OPERATOR_CONVEX, Convexity.CONVEX
    entries = [
        ScalarFunction("identity", lambda t: t * 1.0, lambda t: np.ones_like(t), REALS, oc),
        ScalarFunction("one", lambda t: np.ones_like(t), lambda t: np.zeros_like(t), REALS, oc),
        ScalarFunction("square", lambda t: t * t, lambda t: 2.0 * t, REALS, oc),
        ScalarFunction("power1.5", lambda t: t * np.sqrt(t), lambda t: 1.5 * np.sqrt(t), NONNEG, oc),
        ScalarFunction("inv", lambda t: 1.0 / t, lambda t: -1.0 / (t * t), POSITIVE, oc),
        ScalarFunction("neglog", lambda t: -np.log(t), lambda t: -1.0 / t, POSITIVE, oc),
        # t^3 is convex only on [0, inf); the domain is cut there
        ScalarFunction("cube", lambda t: t * t * t, lambda t: 3.0 * t * t, NONNEG, cv),
        ScalarFunction("quartic", lambda t: (t * t) ** 2, lambda t: 4.0 * t ** 3, REALS, cv),
        ScalarFunction("exp", np.exp, np.exp, REALS, cv),
        ScalarFunction("abs", np.abs, None, REALS, cv, smooth=False),
        ScalarFunction("sqrt", np.sqrt, lambda t: 0.5 / np.sqrt(t), NONNEG, Convexity.CONCAVE),
        ScalarFunction("sin", np.sin, np.cos, REALS, Convexity.NEITHER),
    ]
    return {f.name: f for f in entries}


_CATALOG = _build_catalog()


def builtin_catalog() -> list[ScalarFunction]:
    return list(_CATALOG.values())


def get_function(name) -> ScalarFunction:
    """Look up a catalog entry; also accepts ``power:<p>`` and ``poly:c0,c1,...``."""
    if isinstance(name, ScalarFunction):
        return name
    key = str(name).strip()
    if key in _CATALOG:
        return _CATALOG[key]
    if key.startswith("power:"):
        return power(float(key.split(":", 1)[1]))
    if key.startswith("poly:"):
        body = key.split(":", 1)[1]
        return polynomial([float(c) for c in body.split(",") if c.strip()])
    raise ValueError(f"unknown function {key!r}; known: {', '.join(sorted(_CATALOG))}")


def function_from_config(spec) -> ScalarFunction:
    """A catalog name, or ``{"name": ..., "poly": [c0, c1, ...]}``."""
    if isinstance(spec, str):
        return get_function(spec)
    if isinstance(spec, dict) and "poly" in spec:
        return polynomial(spec["poly"], name=spec.get("name"))
    if isinstance(spec, dict) and "name" in spec:
        return get_function(spec["name"])
    raise ValueError(f"cannot build a function from {spec!r}")


# -- chords and probes ----------------------------------------------------------

@dataclass(frozen=True)
class ChordCoefficients:
    a_f: float
    b_f: float
    m: float
    M: float

    def __call__(self, x):
        return self.a_f * np.asarray(x, dtype=np.float64) + self.b_f


def chord_coefficients(f: ScalarFunction, m: float, M: float) -> ChordCoefficients:
    """Slope and intercept of the secant of ``f`` through ``m`` and ``M``."""
    f = get_function(f)
    m, M = float(m), float(M)
    if not m < M:
        raise ValueError(f"chord needs m < M, got m={m}, M={M}")
    fm, fM = f(m), f(M)
    width = M - m
    return ChordCoefficients((fM - fm) / width, (M * fm - m * fM) / width, m, M)


@dataclass(frozen=True)
class ConvexityProbe:
    verdict: Convexity
    witness: Optional[tuple[float, float]] = None
    excess: float = 0.0


def _probe_grid(f, m, M, grid_points):
    if grid_points < 3:
        raise ValueError("grid_points must be at least 3")
    if not m < M:
        raise ValueError(f"probe needs m < M, got m={m}, M={M}")
    f = get_function(f)
    f.domain.admit(np.array([m, M]), label=f"probe endpoint for {f.name}")
    x = np.linspace(m, M, grid_points)
    return f, x, f.values(x)


def probe_convexity(f: ScalarFunction, m: float, M: float, grid_points: int = 101) -> ConvexityProbe:
    """Midpoint convexity test over every pair of a uniform grid on [m, M]."""
    f, x, fx = _probe_grid(f, m, M, grid_points)
    mid = f.values(0.5 * (x[:, None] + x[None, :]))
    avg = 0.5 * (fx[:, None] + fx[None, :])
    excess = mid - avg
    tol = 1e-9 * max(1.0, float(np.max(np.abs(fx))))
    i, j = np.unravel_index(int(np.argmax(excess)), excess.shape)
    worst = float(excess[i, j])
    if worst <= tol:
        return ConvexityProbe(Convexity.CONVEX, None, worst)
    lo, hi = sorted((float(x[i]), float(x[j])))
    return ConvexityProbe(Convexity.NEITHER, (lo, hi), worst)


def probe_increasing(f: ScalarFunction, m: float, M: float, grid_points: int = 101) -> bool:
    f, _, fx = _probe_grid(f, m, M, grid_points)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(fx))))
    return bool(np.all(np.diff(fx) >= -tol))


def probe_nonnegative(f: ScalarFunction, m: float, M: float, grid_points: int = 101) -> bool:
    _, _, fx = _probe_grid(f, m, M, grid_points)
    return bool(np.all(fx >= 0.0))
