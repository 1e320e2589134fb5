"""Feasibility-based bounds tightening for infeasibility detection.

Each pass walks every constraint: a forward interval sweep encloses the body,
the enclosure is tested against the relation (with ``slack``), and a backward
sweep through add, subtract, multiply, negate and variable nodes narrows the
variable box. Other node kinds only take part in the forward sweep.
"""
import math
from dataclasses import dataclass
from typing import Tuple

from . import expr as ex
from .interval import INF, Interval


@dataclass(frozen=True)
class Tightened:
    box: Tuple[Interval, ...]


@dataclass(frozen=True)
class ProvenInfeasible:
    witness: str
    box: Tuple[Interval, ...] = ()


def _widen(iv, slack):
    if iv.is_empty or slack == 0.0:
        return iv
    return Interval(iv.lo - slack * (1.0 + abs(iv.lo)) if math.isfinite(iv.lo) else iv.lo,
                    iv.hi + slack * (1.0 + abs(iv.hi)) if math.isfinite(iv.hi) else iv.hi)


def _backward(order, ivs, root_target):
    """Narrow node enclosures top-down; returns ``{var index: Interval}`` or ``None`` if empty."""
    target = {id(order[-1]): root_target}
    var_hits = {}
    for node in reversed(order):
        t = target.get(id(node))
        if t is None:
            continue
        cur = ivs[id(node)].intersect(t)
        if cur.is_empty:
            return None
        ivs[id(node)] = cur
        op = node.op
        if op == ex.VAR:
            prev = var_hits.get(node.value)
            var_hits[node.value] = cur if prev is None else prev.intersect(cur)
            continue
        if op == ex.NEG:
            _push(target, node.args[0], -cur)
        elif op in (ex.ADD, ex.SUB, ex.MUL):
            a, b = node.args
            ia, ib = ivs[id(a)], ivs[id(b)]
            if op == ex.ADD:
                _push(target, a, cur - ib)
                _push(target, b, cur - ia)
            elif op == ex.SUB:
                _push(target, a, cur + ib)
                _push(target, b, ia - cur)
            else:
                if a is b:
                    continue
                if not ib.contains_zero():
                    _push(target, a, cur / ib)
                if not ia.contains_zero():
                    _push(target, b, cur / ia)
    return var_hits


def _push(target, node, iv):
    prev = target.get(id(node))
    target[id(node)] = iv if prev is None else prev.intersect(iv)


def tighten(nlp, slack=1e-7, max_iters=10, box=None):
    """Tighten the variable box of ``nlp`` or prove it infeasible.

    Parameters
    ----------
    nlp : Nlp
    slack : float
        Constraint tolerance; a row is declared violated only when its
        enclosure misses the feasible set by more than ``slack``.
    max_iters : int
        Cap on full passes over the constraints.
    box : sequence of Interval, optional
        Starting box; defaults to the Nlp bounds.

    Returns
    -------
    Tightened or ProvenInfeasible
    """
    if slack < 0:
        raise ValueError("slack must be non-negative")
    box = list(box) if box is not None else [Interval(l, u) for l, u in zip(nlp.lb, nlp.ub)]
    for i, iv in enumerate(box):
        if iv.is_empty:
            return ProvenInfeasible(f"bounds of {nlp.names[i]}", tuple(box))

    rows = [(e, True, lab) for e, lab in zip(nlp.eq, nlp.eq_labels)]
    rows += [(e, False, lab) for e, lab in zip(nlp.ineq, nlp.ineq_labels)]
    orders = [ex.postorder(e) for e, _, _ in rows]
    eq_target = Interval(-slack, slack)
    le_target = Interval(-INF, slack)

    for _ in range(max_iters):
        changed = False
        for k, (e, is_eq, label) in enumerate(rows):
            order = orders[k]
            ivs = ex.interval_nodes(order, box)
            enc = ivs[id(e)]
            target = eq_target if is_eq else le_target
            if enc.is_empty or enc.intersect(target).is_empty:
                return ProvenInfeasible(_name(label, is_eq, k), tuple(box))
            hits = _backward(order, ivs, target)
            if hits is None:
                return ProvenInfeasible(_name(label, is_eq, k), tuple(box))
            for i, iv in hits.items():
                new = box[i].intersect(_widen(iv, slack))
                if new.is_empty:
                    return ProvenInfeasible(_name(label, is_eq, k), tuple(box))
                if _shrunk(box[i], new):
                    changed = True
                box[i] = new
        if not changed:
            break
    return Tightened(tuple(box))


def _shrunk(old, new):
    # ignore negligible progress so the loop can reach a fixpoint
    w = old.width()
    if not math.isfinite(w):
        return new.lo != old.lo or new.hi != old.hi
    tol = 1e-9 * max(1.0, w)
    return new.lo > old.lo + tol or new.hi < old.hi - tol


def _name(label, is_eq, k):
    return label or f"{'eq' if is_eq else 'ineq'}[{k}]"
