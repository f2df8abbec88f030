"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_backends.py [--reps 5]

Both paths are imported directly, so HHLAB_BACKEND does not matter here.
"""
import argparse
from timeit import repeat

import numpy as np

from hhlab import _kernels as k
from hhlab.bounds import _ascent_step
from hhlab.harness import random_symmetric


def _stack(n, dim, seed=0):
    gen = np.random.Generator(np.random.Philox(seed))
    return np.stack([random_symmetric(dim, (-2.0, 2.0), gen) for _ in range(n)])


def _gap_problem(dim, starts, seed=1):
    gen = np.random.Generator(np.random.Philox(seed))
    mats = [random_symmetric(dim, (0.5, 2.5), gen) for _ in range(6)]
    p_mat = mats[0] @ mats[1] + mats[1] @ mats[0]
    q_stack, t_stack = np.stack(mats[2:4]), np.stack(mats[4:6])
    w = np.array([0.5, 0.5])
    x0 = gen.standard_normal((starts, dim))
    x0 /= np.linalg.norm(x0, axis=1, keepdims=True)
    return p_mat, q_stack, t_stack, w, x0, _ascent_step(q_stack, t_stack)


def best(fn, reps):
    return min(repeat(fn, number=1, repeat=reps))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()
    if not k.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    print(f"{'kernel':<28}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for dim, n in [(2, 256), (4, 256), (8, 256), (16, 64), (32, 16)]:
        stack = _stack(n, dim)
        k.jacobi_eigh_numba(stack[:1])  # compile outside the timer
        w1, v1, *_ = k.jacobi_eigh_numba(stack)
        w2, v2, *_ = k.jacobi_eigh_numpy(stack)
        assert np.array_equal(w1, w2) and np.array_equal(v1, v2)
        t_nb = best(lambda: k.jacobi_eigh_numba(stack), args.reps)
        t_np = best(lambda: k.jacobi_eigh_numpy(stack), args.reps)
        print(f"{f'jacobi n={dim} x{n}':<28}{1e3 * t_nb:>12.2f}{1e3 * t_np:>12.2f}{t_np / t_nb:>10.1f}")

    for dim in (2, 4, 8):
        prob = _gap_problem(dim, starts=24)
        k.gap_ascent_numba(*prob)
        x1, f1, _ = k.gap_ascent_numba(*prob)
        x2, f2, _ = k.gap_ascent_numpy(*prob)
        assert np.allclose(f1, f2, atol=1e-10)
        t_nb = best(lambda: k.gap_ascent_numba(*prob), args.reps)
        t_np = best(lambda: k.gap_ascent_numpy(*prob), args.reps)
        print(f"{f'sphere ascent n={dim} x24':<28}{1e3 * t_nb:>12.2f}{1e3 * t_np:>12.2f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
