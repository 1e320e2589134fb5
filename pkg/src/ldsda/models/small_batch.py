"""Small multiproduct batch plant design.

Three stages (mixer, reactor, centrifuge) may each hold 1, 2 or 3 identical
parallel units. Variables are logarithms of unit volume ``v_j``, unit count
``n_j``, batch size ``b_i`` and limiting cycle time ``tl_i``, which makes each
fixed-choice subproblem convex. One disjunction per stage selects the unit
count; in disjunct ``k`` the term ``gamma_kj`` equals ``ln k`` and the other
two terms of that stage are zero.
"""
import math
from dataclasses import dataclass
from typing import Dict, Tuple

from ..errors import InvalidParams
from ..expr import exp, quicksum
from ..model import Disjunct, Model, eq, ge, le
from ..reformulate import auto_detect
from .params import check_known, get_float, get_list

STAGES = ("mixer", "reactor", "centrifuge")
UNIT_OPTIONS = (1, 2, 3)


@dataclass(frozen=True)
class BatchParams:
    """Plant data. ``size[i][j]`` and ``time[i][j]`` are indexed by product, then stage."""

    horizon: float = 6000.0
    demand: Dict[str, float] = None
    alpha: Dict[str, float] = None
    beta: Dict[str, float] = None
    size: Dict[str, Dict[str, float]] = None
    time: Dict[str, Dict[str, float]] = None
    volume_bounds: Tuple[float, float] = (250.0, 2500.0)
    stages: Tuple[str, ...] = STAGES
    unit_options: Tuple[int, ...] = UNIT_OPTIONS

    @property
    def products(self):
        return tuple(self.demand)

    def validate(self):
        if len(self.unit_options) != 3 or tuple(sorted(self.unit_options)) != self.unit_options:
            raise InvalidParams("unit options must be three increasing counts")
        if self.unit_options[0] < 1:
            raise InvalidParams("unit counts must be positive")
        if not self.horizon > 0:
            raise InvalidParams("horizon must be positive")
        lo, hi = self.volume_bounds
        if not 0 < lo < hi:
            raise InvalidParams("volume bounds must satisfy 0 < lower < upper")
        if not self.demand:
            raise InvalidParams("at least one product is required")
        for i in self.products:
            if not self.demand[i] > 0:
                raise InvalidParams(f"demand of {i} must be positive")
            for j in self.stages:
                if not self.size[i][j] > 0 or not self.time[i][j] > 0:
                    raise InvalidParams(f"size and time factors of ({i}, {j}) must be positive")
        for j in self.stages:
            if not self.alpha[j] > 0 or not self.beta[j] > 0:
                raise InvalidParams(f"cost coefficients of {j} must be positive")
        return self

    @classmethod
    def from_mapping(cls, values):
        """Build from a parsed parameter file (see ``data/small_batch.params``)."""
        check_known(values, ("demand", "alpha", "beta", "size", "time"),
                    {"horizon", "products", "stages", "volume_lower", "volume_upper", "unit_options"})
        products = get_list(values, "products")
        stages = tuple(get_list(values, "stages", STAGES))
        options = tuple(int(t) for t in get_list(values, "unit_options", [str(k) for k in UNIT_OPTIONS]))
        p = cls(
            horizon=get_float(values, "horizon"),
            demand={i: get_float(values, f"demand.{i}") for i in products},
            alpha={j: get_float(values, f"alpha.{j}") for j in stages},
            beta={j: get_float(values, f"beta.{j}") for j in stages},
            size={i: {j: get_float(values, f"size.{i}.{j}") for j in stages} for i in products},
            time={i: {j: get_float(values, f"time.{i}.{j}") for j in stages} for i in products},
            volume_bounds=(get_float(values, "volume_lower", 250.0), get_float(values, "volume_upper", 2500.0)),
            stages=stages,
            unit_options=options,
        )
        return p.validate()


def literature_params():
    """The classic two-product, three-stage instance from the batch design literature."""
    return BatchParams(
        horizon=6000.0,
        demand={"A": 200000.0, "B": 150000.0},
        alpha={"mixer": 250.0, "reactor": 500.0, "centrifuge": 340.0},
        beta={"mixer": 0.6, "reactor": 0.6, "centrifuge": 0.6},
        size={"A": {"mixer": 2.0, "reactor": 3.0, "centrifuge": 4.0},
              "B": {"mixer": 4.0, "reactor": 6.0, "centrifuge": 3.0}},
        time={"A": {"mixer": 8.0, "reactor": 20.0, "centrifuge": 4.0},
              "B": {"mixer": 10.0, "reactor": 12.0, "centrifuge": 3.0}},
    )


def synthetic_params():
    """A made-up three-product instance with the same structure."""
    return BatchParams(
        horizon=5000.0,
        demand={"P1": 120000.0, "P2": 90000.0, "P3": 60000.0},
        alpha={"mixer": 300.0, "reactor": 420.0, "centrifuge": 280.0},
        beta={"mixer": 0.55, "reactor": 0.65, "centrifuge": 0.6},
        size={"P1": {"mixer": 2.5, "reactor": 3.5, "centrifuge": 2.0},
              "P2": {"mixer": 3.0, "reactor": 5.0, "centrifuge": 3.5},
              "P3": {"mixer": 4.0, "reactor": 2.5, "centrifuge": 4.5}},
        time={"P1": {"mixer": 6.0, "reactor": 16.0, "centrifuge": 5.0},
              "P2": {"mixer": 9.0, "reactor": 10.0, "centrifuge": 4.0},
              "P3": {"mixer": 7.0, "reactor": 14.0, "centrifuge": 6.0}},
    )


def build_small_batch(p=None):
    """Return ``(model, specs)`` with one external variable per stage."""
    p = (p or literature_params()).validate()
    m = Model("small_batch")
    lo, hi = p.volume_bounds
    kmax = max(p.unit_options)
    v = {j: m.add_continuous(f"v[{j}]", math.log(lo), math.log(hi), math.log(hi)) for j in p.stages}
    n = {j: m.add_continuous(f"n[{j}]", 0.0, math.log(kmax), math.log(kmax)) for j in p.stages}
    b, tl = {}, {}
    for i in p.products:
        # batch-size range taken from the volume range of the most demanding stage
        smax = max(p.size[i].values())
        b_lo, b_hi = math.log(lo) - math.log(smax), math.log(hi) - math.log(smax)
        b[i] = m.add_continuous(f"b[{i}]", b_lo, b_hi, b_hi)
        tmax = max(p.time[i].values())
        t_lo, t_hi = math.log(tmax / kmax), math.log(tmax)
        tl[i] = m.add_continuous(f"tl[{i}]", t_lo, t_hi, t_hi)
    gamma = {(k, j): m.add_continuous(f"gamma[{k},{j}]", 0.0, math.log(kmax), 0.0)
             for j in p.stages for k in p.unit_options}

    for i in p.products:
        for j in p.stages:
            m.add_global_constraint(ge(v[j], math.log(p.size[i][j]) + b[i], f"volume[{i},{j}]"))
            m.add_global_constraint(ge(n[j] + tl[i], math.log(p.time[i][j]), f"cycle[{i},{j}]"))
    # horizon constraint divided through by H
    horizon = quicksum((p.demand[i] / p.horizon) * exp(tl[i] - b[i]) for i in p.products)
    m.add_global_constraint(le(horizon, 1.0, "horizon"))
    for j in p.stages:
        m.add_global_constraint(eq(n[j], quicksum(gamma[k, j] for k in p.unit_options), f"units[{j}]"))

    for j in p.stages:
        disjuncts = []
        for k in p.unit_options:
            y = m.add_boolean(f"Y[{k},{j}]")
            cons = [eq(gamma[k2, j], math.log(k2) if k2 == k else 0.0, f"gamma[{k2},{j}]")
                    for k2 in p.unit_options]
            disjuncts.append(Disjunct(y, cons, f"{k} units in {j}"))
        m.add_disjunction(disjuncts, f"units_in[{j}]")

    m.set_objective(quicksum(p.alpha[j] * exp(n[j] + p.beta[j] * v[j]) for j in p.stages))
    m.freeze()
    return m, auto_detect(m)
