"""Derive the cached trig1d optimum constants.

Dense grid search (1e6 points on [-1, 3]) to bracket the global maximum of

    f(x) = cos(2x + 3pi/2) + sin(6x + 3pi/2),

then bisection on the derivative

    f'(x) = -2 sin(2x + 3pi/2) + 6 cos(6x + 3pi/2)

down to machine precision. f has period pi, so the window [-1, 3] contains
the maximizer exactly once. The printed values are frozen in
optpost.objectives as TRIG1D_ARGMAX / TRIG1D_MAX.

Run: python demos/derive_trig1d_optimum.py
"""

import numpy as np


def f(x):
    return np.cos(2.0 * x + 1.5 * np.pi) + np.sin(6.0 * x + 1.5 * np.pi)


def fprime(x):
    return -2.0 * np.sin(2.0 * x + 1.5 * np.pi) + 6.0 * np.cos(6.0 * x + 1.5 * np.pi)


def main():
    grid = np.linspace(-1.0, 3.0, 1_000_000)
    best = int(np.argmax(f(grid)))
    lo, hi = grid[best - 1], grid[best + 1]
    assert fprime(lo) > 0 > fprime(hi), "grid neighbors must bracket the root"

    # bisection on f' converges to the stationary point under the max
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if fprime(mid) > 0:
            lo = mid
        else:
            hi = mid

    x_star = float(0.5 * (lo + hi))
    print(f"TRIG1D_ARGMAX = {x_star!r}")
    print(f"TRIG1D_MAX = {float(f(x_star))!r}")


if __name__ == "__main__":
    main()
