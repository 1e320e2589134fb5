"""Random expression graphs with safe domains, shared by several test modules."""
import numpy as np

from ldsda import expr as ex


def random_graph(rng, n_vars=3, depth=4):
    """Random DAG over ``n_vars`` variables whose value is defined everywhere.

    ln and division only see arguments bounded away from zero, and exp sees
    a squashed argument, so values stay moderate on [-2, 2]^n.
    """
    xs = [ex.Expr.variable(i, f"x{i}") for i in range(n_vars)]
    pool = list(xs)

    def pick():
        return pool[rng.integers(len(pool))]

    for _ in range(depth * 2):
        a, b = pick(), pick()
        kind = rng.integers(9)
        if kind == 0:
            node = a + b
        elif kind == 1:
            node = a - b
        elif kind == 2:
            node = a * b
        elif kind == 3:
            node = a / (1.5 + b * b)
        elif kind == 4:
            node = ex.exp(0.3 * a / (1.0 + a * a))
        elif kind == 5:
            node = ex.ln(1.0 + a * a)
        elif kind == 6:
            node = a ** int(rng.integers(0, 4))
        elif kind == 7:
            node = -a
        else:
            node = float(rng.uniform(-2, 2)) * a + float(rng.uniform(-1, 1))
        pool.append(node)
    return pool[-1]


def central_difference(e, x, step=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(len(x)):
        up, dn = x.copy(), x.copy()
        up[i] += step
        dn[i] -= step
        g[i] = (ex.evaluate(e, up) - ex.evaluate(e, dn)) / (2 * step)
    return g


def richardson_difference(e, x, step=1e-3):
    """Central differences at ``step`` and ``step / 2`` combined to cancel the h^2 term."""
    coarse = central_difference(e, x, step)
    fine = central_difference(e, x, step / 2)
    return (4 * fine - coarse) / 3


def relative_error(g, ref):
    return float(np.max(np.abs(g - ref)) / max(float(np.max(np.abs(ref))), 1e-9))
