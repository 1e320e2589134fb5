"""Synthetic lattice landscapes with brute-force minima."""
import itertools
import math


def bowl(z):
    """Diagonal valley with its minimum at (5, 5) on a 6x6 lattice."""
    return (z[0] - 5) ** 2 + (z[1] - 5) ** 2 + 0.5 * (z[0] - z[1]) ** 2


def lattice(shape):
    return list(itertools.product(*[range(1, s + 1) for s in shape]))


def brute_minimum(fn, shape):
    pts = [z for z in lattice(shape) if math.isfinite(fn(z))]
    best = min(pts, key=lambda z: (fn(z), z))
    return best, fn(best)


def random_lnat_convex(rng, n):
    """Sum of univariate convex terms in each z_i and each z_i - z_j.

    Such functions are integrally convex, so every i-local minimum is global.
    """
    centers = [rng.uniform(0.5, 6.5) for _ in range(n)]
    weights = [rng.uniform(0.2, 3.0) for _ in range(n)]
    pairs = [(i, j, rng.uniform(0, 2.0), rng.uniform(-2, 2)) for i in range(n) for j in range(i + 1, n)]
    quartic = [rng.uniform(0, 0.05) for _ in range(n)]

    def f(z):
        v = sum(w * (zi - c) ** 2 + q * (zi - c) ** 4
                for zi, c, w, q in zip(z, centers, weights, quartic))
        v += sum(w * abs(z[i] - z[j] - off) for i, j, w, off in pairs)
        return v

    return f


def random_separable_convex(rng, n):
    """Separable convex landscape: a convex quadratic per coordinate."""
    centers = [rng.uniform(0.5, 6.5) for _ in range(n)]
    weights = [rng.uniform(0.1, 5.0) for _ in range(n)]
    shift = rng.uniform(-10, 10)
    return lambda z: shift + sum(w * (zi - c) ** 2 for zi, c, w in zip(z, centers, weights))
