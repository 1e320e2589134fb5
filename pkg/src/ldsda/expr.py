"""Immutable expression graphs over indexed continuous variables.

Nodes are built with ordinary Python operators::

    x, y = Expr.variable(0, "x"), Expr.variable(1, "y")
    e = 2 * x * y + exp(x) - ln(y)

Besides point evaluation the module provides exact reverse-mode first
derivatives, natural interval extensions, and a code generator that turns a
batch of expressions into one straight-line Python function. The generated
function is what the NLP solver calls in its inner loop.
"""
import math
from numbers import Real

import numpy as np

from .errors import DomainError, UnboundVariable
from .interval import EMPTY, Interval

CONST = "const"
VAR = "var"
NEG = "neg"
EXP = "exp"
LN = "ln"
ADD = "add"
SUB = "sub"
MUL = "mul"
DIV = "div"
POW = "pow"

UNARY = (NEG, EXP, LN, POW)
BINARY = (ADD, SUB, MUL, DIV)
_SYMBOL = {ADD: "+", SUB: "-", MUL: "*", DIV: "/"}


class Expr:
    """A node of an expression DAG.

    ``value`` holds the constant for ``const`` nodes, the variable index for
    ``var`` nodes and the integer exponent for ``pow`` nodes.
    """

    __slots__ = ("op", "args", "value", "name")

    def __init__(self, op, args=(), value=None, name=None):
        self.op = op
        self.args = tuple(args)
        self.value = value
        self.name = name

    @classmethod
    def constant(cls, v):
        return cls(CONST, (), float(v))

    @classmethod
    def variable(cls, index, name=None):
        if not isinstance(index, int) or index < 0:
            raise ValueError(f"variable index must be a non-negative int, got {index!r}")
        return cls(VAR, (), index, name)

    @property
    def index(self):
        if self.op != VAR:
            raise AttributeError("only variable nodes have an index")
        return self.value

    def __setattr__(self, key, val):
        if hasattr(self, "name") and key != "name":
            raise AttributeError("Expr nodes are immutable")
        object.__setattr__(self, key, val)

    # operators -----------------------------------------------------------

    def __add__(self, other):
        return Expr(ADD, (self, as_expr(other)))

    def __radd__(self, other):
        return Expr(ADD, (as_expr(other), self))

    def __sub__(self, other):
        return Expr(SUB, (self, as_expr(other)))

    def __rsub__(self, other):
        return Expr(SUB, (as_expr(other), self))

    def __mul__(self, other):
        return Expr(MUL, (self, as_expr(other)))

    def __rmul__(self, other):
        return Expr(MUL, (as_expr(other), self))

    def __truediv__(self, other):
        return Expr(DIV, (self, as_expr(other)))

    def __rtruediv__(self, other):
        return Expr(DIV, (as_expr(other), self))

    def __neg__(self):
        return Expr(NEG, (self,))

    def __pos__(self):
        return self

    def __pow__(self, n):
        if isinstance(n, bool) or not isinstance(n, int):
            if isinstance(n, float) and n.is_integer():
                n = int(n)
            else:
                raise TypeError("exponents must be integers; write exp(y * ln(x)) instead")
        return Expr(POW, (self,), n)

    def __bool__(self):
        raise TypeError("an Expr has no truth value; use le()/eq() to build constraints")

    def __repr__(self):
        return f"Expr({to_string(self)})"

    def __str__(self):
        return to_string(self)


def as_expr(v):
    if isinstance(v, Expr):
        return v
    if isinstance(v, Real) and not isinstance(v, bool):
        return Expr.constant(v)
    raise TypeError(f"cannot use {type(v).__name__} in an expression")


def exp(e):
    return Expr(EXP, (as_expr(e),))


def ln(e):
    return Expr(LN, (as_expr(e),))


def quicksum(terms):
    """Sum of an iterable of expressions as a balanced tree (keeps depth logarithmic)."""
    terms = [as_expr(t) for t in terms]
    if not terms:
        return Expr.constant(0.0)
    while len(terms) > 1:
        paired = [terms[i] + terms[i + 1] for i in range(0, len(terms) - 1, 2)]
        if len(terms) % 2:
            paired.append(terms[-1])
        terms = paired
    return terms[0]


# traversal -----------------------------------------------------------------

def postorder(roots):
    """Unique nodes reachable from ``roots``, children before parents."""
    if isinstance(roots, Expr):
        roots = (roots,)
    seen = set()
    order = []
    for root in roots:
        if id(root) in seen:
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for child in reversed(node.args):
                if id(child) not in seen:
                    stack.append((child, False))
    return order


def variables(e):
    """Sorted tuple of variable indices referenced by ``e``."""
    return tuple(sorted({n.value for n in postorder(e) if n.op == VAR}))


def to_string(e):
    memo = {}
    for node in postorder(e):
        if node.op == CONST:
            s = repr(node.value)
        elif node.op == VAR:
            s = node.name or f"x[{node.value}]"
        elif node.op == NEG:
            s = f"-({memo[id(node.args[0])]})"
        elif node.op in (EXP, LN):
            s = f"{node.op}({memo[id(node.args[0])]})"
        elif node.op == POW:
            s = f"({memo[id(node.args[0])]})**{node.value}"
        else:
            a, b = (memo[id(c)] for c in node.args)
            s = f"({a} {_SYMBOL[node.op]} {b})"
        memo[id(node)] = s
    return memo[id(e)]


# point evaluation ------------------------------------------------------------

def _lookup(point, i):
    try:
        v = point[i]
    except (IndexError, KeyError):
        raise UnboundVariable(f"no value for variable {i}") from None
    if v is None:
        raise UnboundVariable(f"no value for variable {i}")
    return float(v)


def _checked_exp(a):
    try:
        return math.exp(a)
    except OverflowError:
        return math.inf


def _checked_ln(a):
    if not a > 0.0:
        raise DomainError(f"ln of non-positive value {a!r}")
    return math.log(a)


def _checked_div(a, b):
    if b == 0.0:
        raise DomainError("division by zero")
    return a / b


def _checked_pow(a, n):
    if n < 0 and a == 0.0:
        raise DomainError("zero raised to a negative power")
    try:
        return a ** n
    except OverflowError:
        return math.copysign(math.inf, a) if n % 2 else math.inf


def _forward(order, point):
    vals = {}
    for node in order:
        op = node.op
        if op == CONST:
            v = node.value
        elif op == VAR:
            v = _lookup(point, node.value)
        else:
            a = vals[id(node.args[0])]
            if op == NEG:
                v = -a
            elif op == EXP:
                v = _checked_exp(a)
            elif op == LN:
                v = _checked_ln(a)
            elif op == POW:
                v = _checked_pow(a, node.value)
            else:
                b = vals[id(node.args[1])]
                if op == ADD:
                    v = a + b
                elif op == SUB:
                    v = a - b
                elif op == MUL:
                    v = a * b
                else:
                    v = _checked_div(a, b)
        vals[id(node)] = v
    return vals


def evaluate(e, point):
    """Value of ``e`` at ``point`` (a sequence or mapping indexed by variable)."""
    order = postorder(e)
    return _forward(order, point)[id(e)]


def gradient(e, point, n=None):
    """Exact first derivatives of ``e`` by reverse accumulation.

    Parameters
    ----------
    e : Expr
    point : sequence of float
        Values indexed by variable.
    n : int, optional
        Length of the returned vector; defaults to ``len(point)``.

    Returns
    -------
    numpy.ndarray
    """
    order = postorder(e)
    vals = _forward(order, point)
    n = len(point) if n is None else n
    grad = np.zeros(n)
    adj = {id(e): 1.0}
    for node in reversed(order):
        a_node = adj.get(id(node))
        if a_node is None or a_node == 0.0:
            continue
        op = node.op
        if op == CONST:
            continue
        if op == VAR:
            grad[node.value] += a_node
            continue
        child = node.args[0]
        av = vals[id(child)]
        if op == NEG:
            _acc(adj, child, -a_node)
        elif op == EXP:
            _acc(adj, child, a_node * vals[id(node)])
        elif op == LN:
            _acc(adj, child, a_node / av)
        elif op == POW:
            k = node.value
            if k != 0:
                _acc(adj, child, a_node * k * _checked_pow(av, k - 1))
        else:
            other = node.args[1]
            bv = vals[id(other)]
            if op == ADD:
                _acc(adj, child, a_node)
                _acc(adj, other, a_node)
            elif op == SUB:
                _acc(adj, child, a_node)
                _acc(adj, other, -a_node)
            elif op == MUL:
                _acc(adj, child, a_node * bv)
                _acc(adj, other, a_node * av)
            else:
                _acc(adj, child, a_node / bv)
                _acc(adj, other, -a_node * av / (bv * bv))
    return grad


def _acc(adj, node, v):
    adj[id(node)] = adj.get(id(node), 0.0) + v


# interval evaluation -------------------------------------------------------------

def interval_nodes(order, box):
    """Forward interval pass; returns ``{id(node): Interval}`` for every node in ``order``."""
    ivs = {}
    for node in order:
        op = node.op
        if op == CONST:
            iv = Interval(node.value, node.value)
        elif op == VAR:
            try:
                iv = box[node.value]
            except (IndexError, KeyError):
                raise UnboundVariable(f"no interval for variable {node.value}") from None
        else:
            a = ivs[id(node.args[0])]
            if op == NEG:
                iv = -a
            elif op == EXP:
                iv = a.exp()
            elif op == LN:
                iv = a.log()
            elif op == POW:
                iv = a ** node.value
            else:
                b = ivs[id(node.args[1])]
                if op == ADD:
                    iv = a + b
                elif op == SUB:
                    iv = a - b
                elif op == MUL:
                    iv = a * b
                else:
                    iv = a / b
        if iv.is_empty:
            iv = EMPTY
        ivs[id(node)] = iv
    return ivs


def interval_eval(e, box):
    """Natural interval extension of ``e`` over ``box`` (one Interval per variable)."""
    return interval_nodes(postorder(e), box)[id(e)]


# code generation -----------------------------------------------------------------

class CompiledBatch:
    """Values and sparse gradients of several expressions from one generated function.

    Attributes
    ----------
    rows, cols : numpy.ndarray
        Sparsity pattern of the stacked gradients: entry ``k`` of the returned
        gradient values is d(root ``rows[k]``)/d(x[``cols[k]``]).
    """

    def __init__(self, roots, source, fn, rows, cols):
        self.roots = tuple(roots)
        self.source = source
        self._fn = fn
        self.rows = np.asarray(rows, dtype=np.intp)
        self.cols = np.asarray(cols, dtype=np.intp)

    def __call__(self, x):
        """Return ``(values, gradient_values)`` as float arrays."""
        if isinstance(x, np.ndarray):
            x = x.tolist()
        vals, grads = self._fn(x)
        return np.array(vals, dtype=float), np.array(grads, dtype=float)

    def values(self, x):
        return self(x)[0]


def compile_batch(roots):
    """Generate one Python function computing every root and its gradient.

    Shared subexpressions (by object identity) are computed once.
    """
    roots = [as_expr(r) for r in roots]
    order = postorder(roots)
    names = {}
    lines = ["def _batch(x):"]
    for k, node in enumerate(order):
        name = f"v{k}"
        names[id(node)] = name
        op = node.op
        if op == CONST:
            rhs = repr(node.value)
        elif op == VAR:
            rhs = f"x[{node.value}]"
        else:
            a = names[id(node.args[0])]
            if op == NEG:
                rhs = f"-{a}"
            elif op == EXP:
                rhs = f"_exp({a})"
            elif op == LN:
                rhs = f"_ln({a})"
            elif op == POW:
                rhs = f"_pow({a}, {node.value})"
            else:
                b = names[id(node.args[1])]
                if op == DIV:
                    rhs = f"_div({a}, {b})"
                else:
                    rhs = f"{a} {_SYMBOL[op]} {b}"
        lines.append(f"    {name} = {rhs}")

    rows, cols, grad_names = [], [], []
    for r, root in enumerate(roots):
        sub = postorder(root)
        adj = {}
        counter = [0]

        def contribute(node, term):
            if node.op == CONST:
                return
            key = id(node)
            if key in adj:
                lines.append(f"    {adj[key]} += {term}")
            else:
                name = f"a{r}_{counter[0]}"
                counter[0] += 1
                adj[key] = name
                lines.append(f"    {name} = {term}")

        contribute(root, "1.0")
        var_adj = {}
        for node in reversed(sub):
            key = id(node)
            if key not in adj:
                continue
            an = adj[key]
            op = node.op
            if op == VAR:
                var_adj.setdefault(node.value, []).append(an)
                continue
            if op == CONST:
                continue
            a = node.args[0]
            av = names[id(a)]
            if op == NEG:
                contribute(a, f"-{an}")
            elif op == EXP:
                contribute(a, f"{an} * {names[key]}")
            elif op == LN:
                contribute(a, f"{an} / {av}")
            elif op == POW:
                k = node.value
                if k != 0:
                    contribute(a, f"{an} * {k} * _pow({av}, {k - 1})")
            else:
                b = node.args[1]
                bv = names[id(b)]
                if op == ADD:
                    contribute(a, an)
                    contribute(b, an)
                elif op == SUB:
                    contribute(a, an)
                    contribute(b, f"-{an}")
                elif op == MUL:
                    contribute(a, f"{an} * {bv}")
                    contribute(b, f"{an} * {av}")
                else:
                    contribute(a, f"{an} / {bv}")
                    contribute(b, f"-{an} * {av} / ({bv} * {bv})")
        for idx in sorted(var_adj):
            rows.append(r)
            cols.append(idx)
            grad_names.append(" + ".join(var_adj[idx]))

    values = ", ".join(names[id(r)] for r in roots)
    grads = ", ".join(grad_names)
    lines.append(f"    return ({values},), ({grads}{',' if grad_names else ''})")
    source = "\n".join(lines)
    namespace = {
        "_exp": _checked_exp,
        "_ln": _checked_ln,
        "_div": _checked_div,
        "_pow": _checked_pow,
    }
    exec(compile(source, "<ldsda-batch>", "exec"), namespace)
    return CompiledBatch(roots, source, namespace["_batch"], rows, cols)


# serialization ----------------------------------------------------------------------

def to_data(e):
    """Nested-list form of ``e`` (shared nodes are duplicated)."""
    op = e.op
    if op == CONST:
        return [CONST, e.value]
    if op == VAR:
        return [VAR, e.value] if e.name is None else [VAR, e.value, e.name]
    if op == POW:
        return [POW, to_data(e.args[0]), e.value]
    return [op] + [to_data(a) for a in e.args]


def from_data(data, var_nodes=None):
    """Inverse of :func:`to_data`; ``var_nodes`` maps indices to existing variable nodes."""
    op = data[0]
    if op == CONST:
        return Expr.constant(data[1])
    if op == VAR:
        if var_nodes is not None and data[1] in var_nodes:
            return var_nodes[data[1]]
        return Expr.variable(data[1], data[2] if len(data) > 2 else None)
    if op == POW:
        return Expr(POW, (from_data(data[1], var_nodes),), int(data[2]))
    if op in (NEG, EXP, LN):
        return Expr(op, (from_data(data[1], var_nodes),))
    if op in BINARY:
        return Expr(op, (from_data(data[1], var_nodes), from_data(data[2], var_nodes)))
    raise ValueError(f"unknown expression op {op!r}")
