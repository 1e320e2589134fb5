"""Small builders shared by the test modules."""
from ldsda.expr import Expr
from ldsda.subproblem import Nlp


def make_nlp(bounds, objective, eq=(), ineq=(), init=None):
    """An Nlp over variables ``x0..x{n-1}`` with the given ``(lb, ub)`` pairs."""
    n = len(bounds)
    return Nlp(
        names=[f"x{i}" for i in range(n)],
        lb=[b[0] for b in bounds],
        ub=[b[1] for b in bounds],
        init=list(init) if init is not None else [None] * n,
        objective=objective,
        eq=list(eq),
        ineq=list(ineq),
        eq_labels=[f"e{k}" for k in range(len(eq))],
        ineq_labels=[f"g{k}" for k in range(len(ineq))],
    )


def xs(n):
    return [Expr.variable(i) for i in range(n)]
