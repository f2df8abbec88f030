"""Dense real symmetric matrices: spectra, functional calculus, Loewner order."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ConvergenceError, DimensionError, DomainError

ASYMMETRY_TOL = 1e-8
LOEWNER_TOL = 1e-9


def as_symmetric(a, *, name: str = "matrix") -> np.ndarray:
    """Validate and symmetrize ``a`` into a read-only float64 array.

    Asymmetry above ``1e-8 * max(1, max|a|)`` is rejected rather than repaired.
    """
    arr = np.array(a, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(arr))))
    asym = float(np.max(np.abs(arr - arr.T)))
    if asym > ASYMMETRY_TOL * scale:
        raise ValueError(f"{name} is not symmetric (max |a_ij - a_ji| = {asym:.3e})")
    out = 0.5 * (arr + arr.T)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.T


def _decompose_stack(stack: np.ndarray, names=None):
    w, v, sweeps, resid, ok = _kernels.jacobi_eigh_batch(stack)
    if not np.all(ok):
        bad = int(np.nonzero(~ok)[0][0])
        label = names[bad] if names is not None else f"stack[{bad}]"
        raise ConvergenceError(
            f"Jacobi iteration did not converge for {label} after "
            f"{_kernels.JACOBI_MAX_SWEEPS} sweeps (off-diagonal residual "
            f"{resid[bad]:.3e}); matrix:\n{np.array2string(stack[bad], precision=6)}"
        )
    return w, v, sweeps


def spectral_decompose(a) -> SpectralDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvectors by cyclic Jacobi."""
    a = as_symmetric(a)
    w, v, sweeps = _decompose_stack(a[None], names=["input matrix"])
    return SpectralDecomposition(w[0], v[0], int(sweeps[0]))


def eigh_stack(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Jacobi decomposition of a ``(k, n, n)`` stack of symmetric matrices."""
    stack = np.asarray(stack, dtype=np.float64)
    w, v, _ = _decompose_stack(stack)
    return w, v


def _spectral_slack(eigs: np.ndarray) -> float:
    return 1e-12 * max(1.0, float(np.max(np.abs(eigs))) if eigs.size else 1.0)


def admit_spectrum(f, eigs: np.ndarray) -> np.ndarray:
    """Check that eigenvalues lie in ``f``'s domain, clamping roundoff at closed ends."""
    return f.domain.admit(eigs, slack=_spectral_slack(eigs), label=f"eigenvalue for {f.name}")


def _resolve(f):
    if isinstance(f, str):
        from .scalarfn import get_function

        return get_function(f)
    return f


def apply_function(a, f, *, derivative: bool = False) -> np.ndarray:
    """f(A) = U f(Lambda) U^T.  With ``derivative=True`` computes f'(A)."""
    f = _resolve(f)
    dec = spectral_decompose(a)
    return _calculus(dec.eigenvalues[None], dec.eigenvectors[None], f, derivative)[0]


def apply_function_stack(stack: np.ndarray, f, *, derivative: bool = False) -> np.ndarray:
    f = _resolve(f)
    w, v = eigh_stack(stack)
    return _calculus(w, v, f, derivative)


def _calculus(w, v, f, derivative=False):
    w = admit_spectrum(f, w)
    fw = f.deriv_values(w) if derivative else f.values(w)
    out = (v * fw[:, None, :]) @ v.transpose(0, 2, 1)
    return 0.5 * (out + out.transpose(0, 2, 1))


def spectral_calculus(w: np.ndarray, v: np.ndarray, fw: np.ndarray) -> np.ndarray:
    """Rebuild ``U diag(fw) U^T`` for stacked eigenpairs (no domain checks)."""
    out = (v * fw[..., None, :]) @ np.swapaxes(v, -1, -2)
    return 0.5 * (out + np.swapaxes(out, -1, -2))


class Relation(str, enum.Enum):
    LESS_EQUAL = "LessEqual"
    GREATER_EQUAL = "GreaterEqual"
    EQUAL = "Equal"
    INCOMPARABLE = "Incomparable"


@dataclass(frozen=True)
class LoewnerVerdict:
    relation: Relation
    min_eig_of_difference: float
    max_eig_of_difference: float
    tolerance_used: float


def eigvals(a) -> np.ndarray:
    return spectral_decompose(a).eigenvalues


def operator_norm(a) -> float:
    """Largest absolute eigenvalue."""
    w = eigvals(a)
    return float(max(abs(w[0]), abs(w[-1])))


def loewner_compare(a, b, tol: float = LOEWNER_TOL) -> LoewnerVerdict:
    """Relation of ``a`` to ``b`` from the spectrum of ``b - a``.

    The tolerance is scaled by ``max(1, ||a||, ||b||)``.
    """
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    a = as_symmetric(a, name="lhs")
    b = as_symmetric(b, name="rhs")
    if a.shape != b.shape:
        raise DimensionError(f"cannot compare {a.shape} with {b.shape}")
    scale = max(1.0, operator_norm(a), operator_norm(b))
    used = tol * scale
    w = eigvals(b - a)
    lo, hi = float(w[0]), float(w[-1])
    if lo >= -used and hi <= used:
        rel = Relation.EQUAL
    elif lo >= -used:
        rel = Relation.LESS_EQUAL
    elif hi <= used:
        rel = Relation.GREATER_EQUAL
    else:
        rel = Relation.INCOMPARABLE
    return LoewnerVerdict(rel, lo, hi, used)


def absolute_value(a) -> np.ndarray:
    """|A| = (A^T A)^{1/2}, computed as U |Lambda| U^T."""
    dec = spectral_decompose(a)
    return spectral_calculus(dec.eigenvalues, dec.eigenvectors, np.abs(dec.eigenvalues))


def spectral_bounds(matrices: Sequence) -> tuple[float, float]:
    """Smallest and largest eigenvalue over a collection of matrices."""
    if len(matrices) == 0:
        raise ValueError("spectral_bounds needs at least one matrix")
    lo, hi = math.inf, -math.inf
    for mat in matrices:
        w = eigvals(mat)
        lo = min(lo, float(w[0]))
        hi = max(hi, float(w[-1]))
    return lo, hi


def quadratic_form(a, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(x @ np.asarray(a) @ x)


# -- matrix JSON files ------------------------------------------------------

def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict) or "dim" not in obj or "rows" not in obj:
        raise ValueError('matrix JSON must be an object with "dim" and "rows"')
    dim = obj["dim"]
    rows = obj["rows"]
    if not isinstance(dim, int) or dim < 1:
        raise ValueError(f"invalid dim {dim!r}")
    if len(rows) != dim or any(len(r) != dim for r in rows):
        raise DimensionError(f"rows do not form a {dim}x{dim} matrix")
    try:
        arr = np.array(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"matrix entries must be numbers: {exc}") from None
    return as_symmetric(arr)


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=np.float64)
    return {"dim": int(a.shape[0]), "rows": a.tolist()}


def read_matrix(path) -> np.ndarray:
    with open(Path(path)) as fh:
        obj = json.load(fh, parse_constant=_reject_constant)
    return matrix_from_json(obj)


def write_matrix(path, a) -> None:
    with open(Path(path), "w") as fh:
        json.dump(matrix_to_json(a), fh)
        fh.write("\n")


def _reject_constant(token):
    raise ValueError(f"non-finite value {token} in matrix file")


__all__ = [
    "SpectralDecomposition",
    "LoewnerVerdict",
    "Relation",
    "DomainError",
    "as_symmetric",
    "spectral_decompose",
    "eigh_stack",
    "apply_function",
    "apply_function_stack",
    "spectral_calculus",
    "loewner_compare",
    "operator_norm",
    "absolute_value",
    "spectral_bounds",
    "quadratic_form",
    "read_matrix",
    "write_matrix",
    "matrix_from_json",
    "matrix_to_json",
]
