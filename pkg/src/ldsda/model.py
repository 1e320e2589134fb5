"""Declarative GDP models.

A :class:`Model` holds bounded continuous variables, Booleans, global
constraints, disjunctions of Boolean-guarded constraint blocks and logic
propositions over the Booleans. Only minimization is supported; negate the
objective to maximize.

Example
-------
>>> m = Model()
>>> x = m.add_continuous("x", 0, 10)
>>> y1, y2 = m.add_boolean("y1"), m.add_boolean("y2")
>>> d = m.add_disjunction([Disjunct(y1, [le(x - 2)]), Disjunct(y2, [ge(x - 5)])])
>>> m.set_objective(x)
>>> validate(m).ok
True
"""
import math
from dataclasses import dataclass, field
from typing import List, Optional

from . import expr as ex
from . import logic
from .errors import ArityTooSmall, DuplicateName, ModelFrozen, UndeclaredVariable

LE = "le"
EQ = "eq"


@dataclass
class ContinuousVar:
    name: str
    lb: float
    ub: float
    init: Optional[float] = None
    index: int = -1


class BooleanVar(logic.BoolRef):
    """A model Boolean; usable directly inside propositions."""

    __slots__ = ("fixed",)

    def __init__(self, index, name, fixed=None):
        super().__init__(index, name)
        self.fixed = fixed


@dataclass(frozen=True)
class Constraint:
    """``body <= 0`` (relation ``"le"``) or ``body == 0`` (relation ``"eq"``)."""

    body: ex.Expr
    relation: str = LE
    label: Optional[str] = None

    def __post_init__(self):
        if self.relation not in (LE, EQ):
            raise ValueError(f"relation must be 'le' or 'eq', got {self.relation!r}")
        object.__setattr__(self, "body", ex.as_expr(self.body))


def le(lhs, rhs=0.0, label=None):
    return Constraint(ex.as_expr(lhs) - rhs if _nonzero(rhs) else ex.as_expr(lhs), LE, label)


def ge(lhs, rhs=0.0, label=None):
    return Constraint(ex.as_expr(rhs) - lhs if _nonzero(rhs) else -ex.as_expr(lhs), LE, label)


def eq(lhs, rhs=0.0, label=None):
    return Constraint(ex.as_expr(lhs) - rhs if _nonzero(rhs) else ex.as_expr(lhs), EQ, label)


def _nonzero(v):
    return isinstance(v, ex.Expr) or v != 0


@dataclass
class Disjunct:
    indicator: BooleanVar
    constraints: List[Constraint] = field(default_factory=list)
    name: Optional[str] = None


@dataclass
class Disjunction:
    disjuncts: List[Disjunct]
    name: str
    exactly: logic.Exactly = None

    @property
    def indicators(self):
        return [d.indicator for d in self.disjuncts]


class Model:
    def __init__(self, name="model"):
        self.name = name
        self.continuous = []
        self.booleans = []
        self.constraints = []
        self.disjunctions = []
        self.props = []
        self.objective = None
        self.frozen = False
        self._var_nodes = []
        self._names = set()

    # builders ---------------------------------------------------------------

    def _check_open(self):
        if self.frozen:
            raise ModelFrozen(f"model {self.name!r} is frozen")

    def _claim(self, name):
        if name in self._names:
            raise DuplicateName(name)
        self._names.add(name)

    def add_continuous(self, name, lb, ub, init=None):
        """Declare ``lb <= name <= ub`` and return its expression node."""
        self._check_open()
        self._claim(name)
        index = len(self.continuous)
        self.continuous.append(ContinuousVar(name, float(lb), float(ub), init, index))
        node = ex.Expr.variable(index, name)
        self._var_nodes.append(node)
        return node

    def add_boolean(self, name, fixed=None):
        self._check_open()
        self._claim(name)
        b = BooleanVar(len(self.booleans), name, fixed)
        self.booleans.append(b)
        return b

    def var(self, key):
        """Expression node for a continuous variable, by index or name."""
        if isinstance(key, str):
            for v in self.continuous:
                if v.name == key:
                    return self._var_nodes[v.index]
            raise UndeclaredVariable(key)
        return self._var_nodes[key]

    def boolean(self, name):
        for b in self.booleans:
            if b.name == name:
                return b
        raise UndeclaredVariable(name)

    def _check_expr(self, e):
        n = len(self.continuous)
        for i in ex.variables(e):
            if i >= n:
                raise UndeclaredVariable(f"variable index {i} is not declared")

    def _check_prop(self, p):
        for i in logic.booleans_in(p):
            if i >= len(self.booleans):
                raise UndeclaredVariable(f"Boolean index {i} is not declared")

    def add_global_constraint(self, c, label=None):
        self._check_open()
        if label is not None:
            c = Constraint(c.body, c.relation, label)
        self._check_expr(c.body)
        self.constraints.append(c)
        return len(self.constraints) - 1

    def add_disjunction(self, disjuncts, name=None):
        """Register a disjunction and its implicit ``Exactly(1, indicators)``."""
        self._check_open()
        disjuncts = list(disjuncts)
        if len(disjuncts) < 2:
            raise ArityTooSmall(f"a disjunction needs at least 2 disjuncts, got {len(disjuncts)}")
        name = name or f"disjunction{len(self.disjunctions)}"
        self._claim(name)
        for d in disjuncts:
            self._check_prop(d.indicator)
            for c in d.constraints:
                self._check_expr(c.body)
        dj = Disjunction(disjuncts, name, logic.Exactly(1, [d.indicator for d in disjuncts]))
        self.disjunctions.append(dj)
        return dj

    def remove_disjunction(self, dj):
        self._check_open()
        kept = [d for d in self.disjunctions if d is not dj]
        if len(kept) == len(self.disjunctions):
            raise ValueError(f"disjunction {dj.name!r} is not part of this model")
        self.disjunctions = kept
        self._names.discard(dj.name)

    def add_logic_prop(self, p):
        self._check_open()
        self._check_prop(p)
        self.props.append(p)
        return len(self.props) - 1

    def set_objective(self, e):
        self._check_open()
        e = ex.as_expr(e)
        self._check_expr(e)
        self.objective = e

    def freeze(self):
        self.frozen = True
        return self

    # queries -----------------------------------------------------------------

    def all_propositions(self):
        """User propositions followed by one implicit Exactly per disjunction."""
        return list(self.props) + [d.exactly for d in self.disjunctions]

    def bounds(self):
        return [(v.lb, v.ub) for v in self.continuous]

    # serialization -------------------------------------------------------------

    def to_data(self):
        def con(c):
            return {"body": ex.to_data(c.body), "relation": c.relation, "label": c.label}

        return {
            "name": self.name,
            "continuous": [
                {"name": v.name, "lb": v.lb, "ub": v.ub, "init": v.init} for v in self.continuous
            ],
            "booleans": [{"name": b.name, "fixed": b.fixed} for b in self.booleans],
            "constraints": [con(c) for c in self.constraints],
            "disjunctions": [
                {
                    "name": dj.name,
                    "disjuncts": [
                        {"indicator": d.indicator.index, "name": d.name,
                         "constraints": [con(c) for c in d.constraints]}
                        for d in dj.disjuncts
                    ],
                }
                for dj in self.disjunctions
            ],
            "props": [logic.to_data(p) for p in self.props],
            "objective": None if self.objective is None else ex.to_data(self.objective),
        }

    @classmethod
    def from_data(cls, data):
        m = cls(data["name"])
        for v in data["continuous"]:
            m.add_continuous(v["name"], v["lb"], v["ub"], v["init"])
        for b in data["booleans"]:
            m.add_boolean(b["name"], b["fixed"])
        nodes = dict(enumerate(m._var_nodes))

        def con(c):
            return Constraint(ex.from_data(c["body"], nodes), c["relation"], c["label"])

        for c in data["constraints"]:
            m.add_global_constraint(con(c))
        for dj in data["disjunctions"]:
            m.add_disjunction(
                [Disjunct(m.booleans[d["indicator"]], [con(c) for c in d["constraints"]], d["name"])
                 for d in dj["disjuncts"]],
                dj["name"],
            )
        for p in data["props"]:
            m.add_logic_prop(logic.from_data(p, m.booleans))
        if data["objective"] is not None:
            m.set_objective(ex.from_data(data["objective"], nodes))
        return m


# validation ------------------------------------------------------------------

@dataclass(frozen=True)
class Issue:
    code: str
    entity: str
    message: str


@dataclass
class ValidationReport:
    issues: List[Issue] = field(default_factory=list)

    @property
    def ok(self):
        return not self.issues

    def codes(self):
        return [i.code for i in self.issues]

    def __bool__(self):
        return self.ok


def validate(m):
    """Check the structural rules every solvable model must satisfy."""
    issues = []
    for v in m.continuous:
        if not (math.isfinite(v.lb) and math.isfinite(v.ub)):
            issues.append(Issue("NonFiniteBound", v.name, f"bounds [{v.lb}, {v.ub}] must be finite"))
        elif v.lb > v.ub:
            issues.append(Issue("BoundsReversed", v.name, f"lower bound {v.lb} exceeds upper bound {v.ub}"))

    owner = {}
    for dj in m.disjunctions:
        for pos, d in enumerate(dj.disjuncts):
            i = d.indicator.index
            where = f"{dj.name}[{pos}]"
            if i in owner:
                issues.append(Issue("SharedIndicator", d.indicator.name,
                                    f"indicator of both {owner[i]} and {where}"))
            else:
                owner[i] = where

    for k, p in enumerate(m.all_propositions()):
        for q in logic.iter_props(p):
            if isinstance(q, logic.Exactly) and not 1 <= q.m <= len(q.args):
                issues.append(Issue("ExactlyArity", f"prop{k}",
                                    f"Exactly({q.m}, ...) over {len(q.args)} arguments"))
        bad = [i for i in logic.booleans_in(p) if i >= len(m.booleans)]
        if bad:
            issues.append(Issue("UndeclaredBoolean", f"prop{k}", f"unknown Boolean indices {bad}"))

    n = len(m.continuous)
    if m.objective is None:
        issues.append(Issue("MissingObjective", m.name, "no objective set"))
    elif any(i >= n for i in ex.variables(m.objective)):
        issues.append(Issue("UndeclaredVariable", "objective", "objective references undeclared variables"))
    return ValidationReport(issues)
