"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time from ``HHLAB_BACKEND``
(``numba`` by default, ``numpy`` to force the fallback). Both
implementations stay importable so they can be compared directly.
"""
import math
import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_requested = os.environ.get("HHLAB_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"HHLAB_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
BACKEND = "numba" if (HAVE_NUMBA and _requested == "numba") else "numpy"

JACOBI_REL_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100

# tau beyond this would overflow tau*tau; the rotation angle is then ~1/(2 tau)
_TAU_BIG = 1e150


def _maybe_njit(fn):
    if HAVE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


# ---------------------------------------------------------------------------
# numba path: one matrix at a time, explicit loops
# ---------------------------------------------------------------------------

@_maybe_njit
def _rotation_scalar(app, aqq, apq):
    tau = (aqq - app) / (2.0 * apq)
    if abs(tau) > _TAU_BIG:
        t = 0.5 / tau
    else:
        sgn = 1.0 if tau >= 0.0 else -1.0
        t = sgn / (abs(tau) + math.sqrt(1.0 + tau * tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    return c, t * c


@_maybe_njit
def _offdiag_norm(m):
    n = m.shape[0]
    acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += m[i, j] * m[i, j]
    return math.sqrt(acc)


@_maybe_njit
def _frobenius(m):
    n = m.shape[0]
    acc = 0.0
    for i in range(n):
        for j in range(n):
            acc += m[i, j] * m[i, j]
    return math.sqrt(acc)


@_maybe_njit
def _jacobi_batch_loops(stack, rel_tol, max_sweeps):
    k = stack.shape[0]
    n = stack.shape[1]
    w = np.empty((k, n))
    v = np.empty((k, n, n))
    sweeps = np.zeros(k, dtype=np.int64)
    resid = np.empty(k)
    converged = np.zeros(k, dtype=np.bool_)
    for b in range(k):
        m = stack[b].copy()
        u = np.eye(n)
        thresh = rel_tol * _frobenius(m)
        off = _offdiag_norm(m)
        s = 0
        while off > thresh and s < max_sweeps:
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = m[p, q]
                    if apq == 0.0:
                        continue
                    c, sn = _rotation_scalar(m[p, p], m[q, q], apq)
                    for r in range(n):
                        x = m[r, p]
                        y = m[r, q]
                        m[r, p] = c * x - sn * y
                        m[r, q] = sn * x + c * y
                    for r in range(n):
                        x = m[p, r]
                        y = m[q, r]
                        m[p, r] = c * x - sn * y
                        m[q, r] = sn * x + c * y
                    m[p, q] = 0.0
                    m[q, p] = 0.0
                    for r in range(n):
                        x = u[r, p]
                        y = u[r, q]
                        u[r, p] = c * x - sn * y
                        u[r, q] = sn * x + c * y
            s += 1
            off = _offdiag_norm(m)
        d = np.empty(n)
        for i in range(n):
            d[i] = m[i, i]
        order = np.argsort(d, kind="mergesort")
        for i in range(n):
            w[b, i] = d[order[i]]
            for r in range(n):
                v[b, r, i] = u[r, order[i]]
        sweeps[b] = s
        resid[b] = off
        converged[b] = off <= thresh
    return w, v, sweeps, resid, converged


def jacobi_eigh_numba(stack, rel_tol=JACOBI_REL_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    if not HAVE_NUMBA:  # pragma: no cover
        raise RuntimeError("numba is not available")
    stack = np.ascontiguousarray(stack, dtype=np.float64)
    return _jacobi_batch_loops(stack, float(rel_tol), int(max_sweeps))


# ---------------------------------------------------------------------------
# numpy path: the same sweep order, vectorized across the batch
# ---------------------------------------------------------------------------

def _rotation_vec(app, aqq, apq):
    tau = (aqq - app) / (2.0 * apq)
    big = np.abs(tau) > _TAU_BIG
    safe = np.where(big, 0.0, tau)
    sgn = np.where(safe >= 0.0, 1.0, -1.0)
    t = np.where(big, 0.5 / np.where(big, tau, 1.0),
                 sgn / (np.abs(safe) + np.sqrt(1.0 + safe * safe)))
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c, t * c


def _offdiag_norm_vec(m):
    n = m.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt(np.sum((m * m)[:, mask], axis=-1))


def jacobi_eigh_numpy(stack, rel_tol=JACOBI_REL_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    m = np.array(stack, dtype=np.float64, copy=True)
    k, n, _ = m.shape
    u = np.broadcast_to(np.eye(n), (k, n, n)).copy()
    thresh = rel_tol * np.sqrt(np.sum(m * m, axis=(1, 2)))
    off = _offdiag_norm_vec(m)
    sweeps = np.zeros(k, dtype=np.int64)
    active = off > thresh
    while active.any():
        live = active & (sweeps < max_sweeps)
        if not live.any():
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                idx = np.nonzero(live & (m[:, p, q] != 0.0))[0]
                if idx.size == 0:
                    continue
                sub = m[idx]
                c, s = _rotation_vec(sub[:, p, p], sub[:, q, q], sub[:, p, q])
                cc = c[:, None]
                ss = s[:, None]
                x = sub[:, :, p].copy()
                y = sub[:, :, q]
                sub[:, :, p] = cc * x - ss * y
                sub[:, :, q] = ss * x + cc * y
                x = sub[:, p, :].copy()
                y = sub[:, q, :]
                sub[:, p, :] = cc * x - ss * y
                sub[:, q, :] = ss * x + cc * y
                sub[:, p, q] = 0.0
                sub[:, q, p] = 0.0
                m[idx] = sub
                usub = u[idx]
                x = usub[:, :, p].copy()
                y = usub[:, :, q]
                usub[:, :, p] = cc * x - ss * y
                usub[:, :, q] = ss * x + cc * y
                u[idx] = usub
        sweeps[live] += 1
        off = np.where(live, _offdiag_norm_vec(m), off)
        active = off > thresh
    d = np.diagonal(m, axis1=1, axis2=2)
    order = np.argsort(d, axis=1, kind="stable")
    w = np.take_along_axis(d, order, axis=1)
    v = np.take_along_axis(u, order[:, None, :], axis=2)
    return w, v, sweeps, off, off <= thresh


def jacobi_eigh_batch(stack, rel_tol=JACOBI_REL_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi eigendecomposition of a stack of symmetric matrices.

    Returns ``(w, v, sweeps, residual, converged)`` with eigenvalues
    ascending along the last axis of ``w`` and matching eigenvector
    columns in ``v``. Convergence means the off-diagonal Frobenius norm
    fell to ``rel_tol`` times the Frobenius norm of the input.
    """
    if BACKEND == "numba":
        return jacobi_eigh_numba(stack, rel_tol, max_sweeps)
    return jacobi_eigh_numpy(stack, rel_tol, max_sweeps)


# ---------------------------------------------------------------------------
# sphere ascent for  x'Px - sum_k w_k (x'Q_k x)(x'T_k x)
# ---------------------------------------------------------------------------

ASCENT_MAX_ITER = 2000
ASCENT_GTOL = 1e-10
ASCENT_MIN_STEP = 1e-15
ASCENT_GROW = 1.2


@_maybe_njit
def _gap_value_grad(p_mat, q_stack, t_stack, w, x, grad):
    n = x.shape[0]
    kk = q_stack.shape[0]
    val = 0.0
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += p_mat[i, j] * x[j]
        grad[i] = 2.0 * acc
        val += x[i] * acc
    qx = np.empty(n)
    tx = np.empty(n)
    for k in range(kk):
        qv = 0.0
        tv = 0.0
        for i in range(n):
            aq = 0.0
            at = 0.0
            for j in range(n):
                aq += q_stack[k, i, j] * x[j]
                at += t_stack[k, i, j] * x[j]
            qx[i] = aq
            tx[i] = at
            qv += x[i] * aq
            tv += x[i] * at
        val -= w[k] * qv * tv
        for i in range(n):
            grad[i] -= 2.0 * w[k] * (tv * qx[i] + qv * tx[i])
    return val


@_maybe_njit
def _gap_ascent_loops(p_mat, q_stack, t_stack, w, starts, step0, max_iter, gtol, min_step, grow):
    r_count = starts.shape[0]
    n = starts.shape[1]
    xs = np.empty((r_count, n))
    vals = np.empty(r_count)
    gnorms = np.empty(r_count)
    g = np.empty(n)
    gn = np.empty(n)
    xn = np.empty(n)
    for r in range(r_count):
        x = starts[r].copy()
        nrm = math.sqrt(np.sum(x * x))
        for i in range(n):
            x[i] /= nrm
        f = _gap_value_grad(p_mat, q_stack, t_stack, w, x, g)
        eta = step0
        gnorm = 0.0
        for _ in range(max_iter):
            dot = 0.0
            for i in range(n):
                dot += g[i] * x[i]
            gnorm = 0.0
            for i in range(n):
                gnorm += (g[i] - dot * x[i]) ** 2
            gnorm = math.sqrt(gnorm)
            if gnorm < gtol * max(1.0, abs(f)) or eta < min_step:
                break
            nrm = 0.0
            for i in range(n):
                xn[i] = x[i] + eta * (g[i] - dot * x[i])
                nrm += xn[i] * xn[i]
            nrm = math.sqrt(nrm)
            for i in range(n):
                xn[i] /= nrm
            fn = _gap_value_grad(p_mat, q_stack, t_stack, w, xn, gn)
            if fn > f:
                for i in range(n):
                    x[i] = xn[i]
                    g[i] = gn[i]
                f = fn
                eta *= grow
            else:
                eta *= 0.5
        xs[r] = x
        vals[r] = f
        gnorms[r] = gnorm
    return xs, vals, gnorms


def gap_ascent_numba(p_mat, q_stack, t_stack, w, starts, step0, max_iter=ASCENT_MAX_ITER,
                     gtol=ASCENT_GTOL, min_step=ASCENT_MIN_STEP, grow=ASCENT_GROW):
    if not HAVE_NUMBA:  # pragma: no cover
        raise RuntimeError("numba is not available")
    c = np.ascontiguousarray
    return _gap_ascent_loops(c(p_mat, dtype=np.float64), c(q_stack, dtype=np.float64),
                             c(t_stack, dtype=np.float64), c(w, dtype=np.float64),
                             c(starts, dtype=np.float64), float(step0), int(max_iter),
                             float(gtol), float(min_step), float(grow))


def _gap_value_grad_vec(p_mat, q_stack, t_stack, w, x):
    qx = np.einsum("kij,rj->rki", q_stack, x)
    tx = np.einsum("kij,rj->rki", t_stack, x)
    qv = np.einsum("rki,ri->rk", qx, x)
    tv = np.einsum("rki,ri->rk", tx, x)
    px = np.einsum("ij,rj->ri", p_mat, x)
    val = np.einsum("ri,ri->r", px, x) - np.einsum("k,rk,rk->r", w, qv, tv)
    grad = 2.0 * px - 2.0 * (np.einsum("k,rk,rki->ri", w, tv, qx)
                             + np.einsum("k,rk,rki->ri", w, qv, tx))
    return val, grad


def gap_ascent_numpy(p_mat, q_stack, t_stack, w, starts, step0, max_iter=ASCENT_MAX_ITER,
                     gtol=ASCENT_GTOL, min_step=ASCENT_MIN_STEP, grow=ASCENT_GROW):
    x = np.array(starts, dtype=np.float64)
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    f, g = _gap_value_grad_vec(p_mat, q_stack, t_stack, w, x)
    eta = np.full(x.shape[0], float(step0))
    gnorm = np.zeros(x.shape[0])
    for _ in range(max_iter):
        gp = g - np.sum(g * x, axis=1, keepdims=True) * x
        gnorm = np.linalg.norm(gp, axis=1)
        active = (gnorm >= gtol * np.maximum(1.0, np.abs(f))) & (eta >= min_step)
        if not active.any():
            break
        xn = x + eta[:, None] * gp
        xn /= np.linalg.norm(xn, axis=1, keepdims=True)
        fn, gn = _gap_value_grad_vec(p_mat, q_stack, t_stack, w, xn)
        acc = active & (fn > f)
        x = np.where(acc[:, None], xn, x)
        f = np.where(acc, fn, f)
        g = np.where(acc[:, None], gn, g)
        eta = np.where(acc, grow * eta, np.where(active, 0.5 * eta, eta))
    return x, f, gnorm


def gap_ascent(p_mat, q_stack, t_stack, w, starts, step0, **kw):
    """Projected gradient ascent on the unit sphere, one independent run per start row.

    Maximizes ``x'Px - sum_k w_k (x'Q_k x)(x'T_k x)``.  A step along the
    tangential gradient is accepted only if it increases the objective
    (step grows by ``grow``), otherwise halved.  A run stops when the
    tangential gradient drops below ``gtol * max(1, |f|)`` or the step
    underflows ``min_step``.  Returns ``(x, values, tangential_grad_norms)``.
    """
    if BACKEND == "numba":
        return gap_ascent_numba(p_mat, q_stack, t_stack, w, starts, step0, **kw)
    return gap_ascent_numpy(p_mat, q_stack, t_stack, w, starts, step0, **kw)
