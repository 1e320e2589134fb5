"""Propositional logic over model Booleans.

Propositions are small immutable trees (``BoolRef``, ``Not``, ``And``, ``Or``,
``Xor``, ``Implies``, ``Iff``, ``Exactly``). :func:`propagate` compiles them to
clauses plus cardinality rows and runs unit propagation to a fixpoint;
:func:`check` evaluates them directly on a complete assignment.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import IncompleteAssignment


class Prop:
    """Base class for proposition nodes; supports ``~``, ``&``, ``|`` and ``^``."""

    __slots__ = ()

    def __invert__(self):
        return Not(self)

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __xor__(self, other):
        return Xor(self, other)


class BoolRef(Prop):
    """Reference to a Boolean by index. :class:`~ldsda.model.BooleanVar` subclasses this."""

    __slots__ = ("index", "name")

    def __init__(self, index, name=None):
        self.index = index
        self.name = name

    def __repr__(self):
        return self.name or f"Y[{self.index}]"


class Not(Prop):
    __slots__ = ("arg",)

    def __init__(self, arg):
        self.arg = arg

    def __repr__(self):
        return f"~{self.arg!r}"


class _Nary(Prop):
    __slots__ = ("args",)

    def __init__(self, *args):
        if len(args) == 1 and not isinstance(args[0], Prop):
            args = tuple(args[0])
        if not args:
            raise ValueError(f"{type(self).__name__} needs at least one argument")
        self.args = tuple(args)

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(map(repr, self.args))})"


class And(_Nary):
    __slots__ = ()


class Or(_Nary):
    __slots__ = ()


class Xor(_Nary):
    """Odd parity; with two arguments this is the usual exclusive or."""

    __slots__ = ()


class Implies(Prop):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a = a
        self.b = b

    def __repr__(self):
        return f"({self.a!r} => {self.b!r})"


class Iff(Prop):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a = a
        self.b = b

    def __repr__(self):
        return f"({self.a!r} <=> {self.b!r})"


class Exactly(Prop):
    __slots__ = ("m", "args")

    def __init__(self, m, args):
        self.m = int(m)
        self.args = tuple(args)

    def __repr__(self):
        return f"Exactly({self.m}, [{', '.join(map(repr, self.args))}])"


def children(p):
    if isinstance(p, BoolRef):
        return ()
    if isinstance(p, Not):
        return (p.arg,)
    if isinstance(p, (Implies, Iff)):
        return (p.a, p.b)
    return p.args


def booleans_in(p):
    """Set of Boolean indices referenced by proposition ``p``."""
    out = set()
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, BoolRef):
            out.add(q.index)
        else:
            stack.extend(children(q))
    return out


def iter_props(p):
    stack = [p]
    while stack:
        q = stack.pop()
        yield q
        if not isinstance(q, BoolRef):
            stack.extend(children(q))


def evaluate_prop(p, values):
    """Two-valued evaluation; ``values[i]`` gives the truth value of Boolean ``i``."""
    if isinstance(p, BoolRef):
        v = values[p.index]
        if v is None:
            raise IncompleteAssignment(f"{p!r} is unassigned")
        return bool(v)
    if isinstance(p, Not):
        return not evaluate_prop(p.arg, values)
    if isinstance(p, And):
        return all([evaluate_prop(a, values) for a in p.args])
    if isinstance(p, Or):
        return any([evaluate_prop(a, values) for a in p.args])
    if isinstance(p, Xor):
        return sum(evaluate_prop(a, values) for a in p.args) % 2 == 1
    if isinstance(p, Implies):
        a = evaluate_prop(p.a, values)
        b = evaluate_prop(p.b, values)
        return (not a) or b
    if isinstance(p, Iff):
        return evaluate_prop(p.a, values) == evaluate_prop(p.b, values)
    if isinstance(p, Exactly):
        return sum(evaluate_prop(a, values) for a in p.args) == p.m
    raise TypeError(f"not a proposition: {p!r}")


def check(props, assignment):
    """True iff every proposition holds under a complete assignment.

    Raises
    ------
    IncompleteAssignment
        If a referenced Boolean is unassigned (``None``).
    """
    return all([evaluate_prop(p, assignment) for p in props])


# propagation -----------------------------------------------------------------

@dataclass(frozen=True)
class Completed:
    assignment: Tuple[bool, ...]


@dataclass(frozen=True)
class Conflict:
    witness: Prop
    witness_index: int


@dataclass(frozen=True)
class Residual:
    assignment: Tuple[Optional[bool], ...]
    undecided: Tuple[int, ...]


class _Compiled:
    """Clauses and cardinality rows in integer-literal form (``+v+1`` / ``-(v+1)``)."""

    def __init__(self, n_bool):
        self.n_vars = n_bool
        # each row: ("clause", lits, src) or ("card", out_lit_or_0, m, lits, src)
        self.rows = []

    def _new(self):
        self.n_vars += 1
        return self.n_vars

    def _clause(self, lits, src):
        self.rows.append(("clause", tuple(lits), src))

    def lit(self, p, src):
        if isinstance(p, BoolRef):
            return p.index + 1
        if isinstance(p, Not):
            return -self.lit(p.arg, src)
        if isinstance(p, Implies):
            return self.lit(Or(Not(p.a), p.b), src)
        if isinstance(p, And):
            ls = [self.lit(a, src) for a in p.args]
            t = self._new()
            for l in ls:
                self._clause((-t, l), src)
            self._clause([t] + [-l for l in ls], src)
            return t
        if isinstance(p, Or):
            ls = [self.lit(a, src) for a in p.args]
            t = self._new()
            self._clause([-t] + ls, src)
            for l in ls:
                self._clause((t, -l), src)
            return t
        if isinstance(p, Iff):
            return self._xor2(self.lit(p.a, src), -self.lit(p.b, src), src)
        if isinstance(p, Xor):
            ls = [self.lit(a, src) for a in p.args]
            acc = ls[0]
            for l in ls[1:]:
                acc = self._xor2(acc, l, src)
            return acc
        if isinstance(p, Exactly):
            ls = [self.lit(a, src) for a in p.args]
            t = self._new()
            self.rows.append(("card", t, p.m, tuple(ls), src))
            return t
        raise TypeError(f"not a proposition: {p!r}")

    def _xor2(self, a, b, src):
        t = self._new()
        self._clause((-t, a, b), src)
        self._clause((-t, -a, -b), src)
        self._clause((t, -a, b), src)
        self._clause((t, a, -b), src)
        return t

    def assert_true(self, p, src):
        if isinstance(p, And):
            for a in p.args:
                self.assert_true(a, src)
        elif isinstance(p, Or):
            self._clause([self.lit(a, src) for a in p.args], src)
        elif isinstance(p, Implies):
            self._clause((-self.lit(p.a, src), self.lit(p.b, src)), src)
        elif isinstance(p, Iff):
            a, b = self.lit(p.a, src), self.lit(p.b, src)
            self._clause((-a, b), src)
            self._clause((a, -b), src)
        elif isinstance(p, Exactly):
            self.rows.append(("card", 0, p.m, tuple(self.lit(a, src) for a in p.args), src))
        else:
            self._clause((self.lit(p, src),), src)


def compile_props(props, n_bool):
    comp = _Compiled(n_bool)
    for k, p in enumerate(props):
        comp.assert_true(p, k)
    return comp


def _lit_value(vals, lit):
    v = vals[abs(lit) - 1]
    if v is None:
        return None
    return v if lit > 0 else not v


def propagate(props, assignment):
    """Unit propagation of ``props`` starting from a partial assignment.

    Parameters
    ----------
    props : sequence of Prop
    assignment : sequence of bool or None
        One entry per model Boolean; ``None`` means unknown.

    Returns
    -------
    Completed, Conflict or Residual
        ``Conflict`` names one violated proposition. ``Residual`` lists the
        Booleans the fixpoint could not decide.
    """
    props = list(props)
    n_bool = len(assignment)
    for p in props:
        for i in booleans_in(p):
            if i >= n_bool:
                raise IndexError(f"proposition references Boolean {i} beyond assignment length {n_bool}")
    comp = compile_props(props, n_bool)
    vals = [None if v is None else bool(v) for v in assignment] + [None] * (comp.n_vars - n_bool)

    occurs = [[] for _ in range(comp.n_vars)]
    for r, row in enumerate(comp.rows):
        lits = row[1] if row[0] == "clause" else row[3] + ((row[1],) if row[1] else ())
        for l in lits:
            occurs[abs(l) - 1].append(r)

    queue = list(range(len(comp.rows)))
    queued = [True] * len(comp.rows)

    def assign(lit):
        v = abs(lit) - 1
        vals[v] = lit > 0
        for r in occurs[v]:
            if not queued[r]:
                queued[r] = True
                queue.append(r)

    head = 0
    while head < len(queue):
        r = queue[head]
        head += 1
        queued[r] = False
        row = comp.rows[r]
        if row[0] == "clause":
            lits, src = row[1], row[2]
            unknown = None
            n_unknown = 0
            satisfied = False
            for l in lits:
                lv = _lit_value(vals, l)
                if lv is True:
                    satisfied = True
                    break
                if lv is None:
                    n_unknown += 1
                    unknown = l
            if satisfied:
                continue
            if n_unknown == 0:
                return Conflict(props[src], src)
            if n_unknown == 1:
                assign(unknown)
            continue

        _, out, m, lits, src = row
        n_true = n_unknown = 0
        for l in lits:
            lv = _lit_value(vals, l)
            if lv is True:
                n_true += 1
            elif lv is None:
                n_unknown += 1
        t = True if out == 0 else _lit_value(vals, out)
        if t is True:
            if n_true > m or n_true + n_unknown < m:
                return Conflict(props[src], src)
            if n_unknown:
                if n_true == m:
                    for l in lits:
                        if _lit_value(vals, l) is None:
                            assign(-l)
                elif n_true + n_unknown == m:
                    for l in lits:
                        if _lit_value(vals, l) is None:
                            assign(l)
        elif t is False:
            if n_unknown == 0 and n_true == m:
                return Conflict(props[src], src)
            if n_unknown == 1:
                free = next(l for l in lits if _lit_value(vals, l) is None)
                if n_true == m:
                    assign(free)
                elif n_true == m - 1:
                    assign(-free)
        else:
            if n_unknown == 0:
                assign(out if n_true == m else -out)
            elif n_true > m or n_true + n_unknown < m:
                assign(-out)

    model_vals = tuple(vals[:n_bool])
    undecided = tuple(i for i, v in enumerate(model_vals) if v is None)
    if undecided:
        return Residual(model_vals, undecided)
    return Completed(model_vals)


def to_data(p):
    if isinstance(p, BoolRef):
        return ["bool", p.index]
    if isinstance(p, Not):
        return ["not", to_data(p.arg)]
    if isinstance(p, (Implies, Iff)):
        return [type(p).__name__.lower(), to_data(p.a), to_data(p.b)]
    if isinstance(p, Exactly):
        return ["exactly", p.m, [to_data(a) for a in p.args]]
    return [type(p).__name__.lower()] + [to_data(a) for a in p.args]


def from_data(data, refs):
    """Inverse of :func:`to_data`; ``refs[i]`` is the Boolean handle for index ``i``."""
    tag = data[0]
    if tag == "bool":
        return refs[data[1]]
    if tag == "not":
        return Not(from_data(data[1], refs))
    if tag == "implies":
        return Implies(from_data(data[1], refs), from_data(data[2], refs))
    if tag == "iff":
        return Iff(from_data(data[1], refs), from_data(data[2], refs))
    if tag == "exactly":
        return Exactly(data[1], [from_data(a, refs) for a in data[2]])
    cls = {"and": And, "or": Or, "xor": Xor}[tag]
    return cls(*[from_data(a, refs) for a in data[1:]])
