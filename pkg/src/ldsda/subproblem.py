"""Reduced fixed subproblems: fix the external Booleans, propagate the rest,
and keep only global constraints plus those of True disjuncts."""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from . import expr as ex
from . import logic
from .errors import UnresolvedBooleans
from .model import EQ
from .reformulate import fix_booleans


@dataclass(frozen=True)
class Source:
    """Where an Nlp row came from: ``kind`` is "global", "disjunct" or "logic"."""

    kind: str
    owner: Optional[str] = None
    position: Optional[int] = None


@dataclass
class Nlp:
    names: List[str]
    lb: List[float]
    ub: List[float]
    init: List[Optional[float]]
    objective: ex.Expr
    eq: List[ex.Expr] = field(default_factory=list)
    ineq: List[ex.Expr] = field(default_factory=list)
    eq_labels: List[Optional[str]] = field(default_factory=list)
    ineq_labels: List[Optional[str]] = field(default_factory=list)
    eq_sources: List[Source] = field(default_factory=list)
    ineq_sources: List[Source] = field(default_factory=list)
    inactive: Tuple[int, ...] = ()
    assignment: Tuple[bool, ...] = ()
    point: Tuple[int, ...] = ()

    @property
    def n(self):
        return len(self.names)

    def add(self, body, relation, label, source):
        if relation == EQ:
            self.eq.append(body)
            self.eq_labels.append(label)
            self.eq_sources.append(source)
        else:
            self.ineq.append(body)
            self.ineq_labels.append(label)
            self.ineq_sources.append(source)


@dataclass(frozen=True)
class LogicallyInfeasible:
    witness: logic.Prop
    point: Tuple[int, ...] = ()


def resolve(m, specs, z):
    """Propagate the Boolean fixing of ``z``; returns a logic outcome."""
    assignment = [b.fixed for b in m.booleans]
    for i, v in fix_booleans(specs, z).items():
        if assignment[i] is not None and assignment[i] != v:
            # a user-fixed Boolean disagrees with the lattice point; let
            # propagation report the clash through a unit proposition
            return logic.Conflict(m.booleans[i] if assignment[i] else logic.Not(m.booleans[i]), -1)
        assignment[i] = v
    return logic.propagate(m.all_propositions(), assignment)


def _empty_nlp(m, z):
    return Nlp(
        names=[v.name for v in m.continuous],
        lb=[v.lb for v in m.continuous],
        ub=[v.ub for v in m.continuous],
        init=[v.init for v in m.continuous],
        objective=m.objective if m.objective is not None else ex.Expr.constant(0.0),
        point=tuple(z),
    )


def build(m, specs, z, use_logic_pruning=True):
    """Build the subproblem for lattice point ``z``.

    Returns :class:`Nlp`, or :class:`LogicallyInfeasible` when the fixed
    Booleans contradict the logic. With ``use_logic_pruning=False`` a
    contradiction instead yields an Nlp holding one unsatisfiable row
    (``1 = 0``), so infeasibility is left for a solver or FBBT to find.

    Raises
    ------
    UnresolvedBooleans
        If propagation cannot decide every Boolean.
    OutOfBounds
        If ``z`` lies outside the lattice box.
    """
    z = tuple(int(v) for v in z)
    outcome = resolve(m, specs, z)
    if isinstance(outcome, logic.Residual):
        raise UnresolvedBooleans([m.booleans[i].name for i in outcome.undecided])

    nlp = _empty_nlp(m, z)
    for k, c in enumerate(m.constraints):
        nlp.add(c.body, c.relation, c.label, Source("global", None, k))

    if isinstance(outcome, logic.Conflict):
        if use_logic_pruning:
            return LogicallyInfeasible(outcome.witness, z)
        nlp.add(ex.Expr.constant(1.0), EQ, f"logic: {outcome.witness!r}", Source("logic"))
        nlp.inactive = _inactive(nlp, m)
        return nlp

    values = outcome.assignment
    nlp.assignment = values
    for dj in m.disjunctions:
        for pos, d in enumerate(dj.disjuncts):
            if values[d.indicator.index]:
                for c in d.constraints:
                    nlp.add(c.body, c.relation, c.label, Source("disjunct", dj.name, pos))
    nlp.inactive = _inactive(nlp, m)
    return nlp


def _inactive(nlp, m):
    used = set(ex.variables(nlp.objective))
    for e in nlp.eq + nlp.ineq:
        used.update(ex.variables(e))
    return tuple(i for i in range(len(m.continuous)) if i not in used)


def count_constraints(nlp):
    """``(equalities, inequalities)``."""
    return len(nlp.eq), len(nlp.ineq)
