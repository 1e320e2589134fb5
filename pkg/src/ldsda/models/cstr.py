"""Superstructure of reactors in series with one recycle.

Units are numbered from the product end (unit 1) to the feed end (unit R).
Fresh feed always enters unit R; ``YF[n]`` marks the unit holding the
unreacted feed, so units above it are bypasses and units ``1..n`` are CSTRs.
``YR[n]`` places the recycle inlet. The autocatalytic reaction A -> B has
rate ``k c_A c_B``, written in flows as ``r_A Q^2 = -k F_A F_B``.

External variables: ``z1`` is the feed position (the number of reactors)
and ``z2`` the recycle position; logic forces ``z2 <= z1``.
"""
from dataclasses import dataclass

from ..errors import InvalidParams
from ..logic import And, Exactly, Iff, Implies, Not, Or
from ..model import Disjunct, Model, eq
from ..expr import quicksum
from ..reformulate import declare_external
from .params import check_known, get_float, get_int

COMPONENTS = ("A", "B")


@dataclass(frozen=True)
class CstrParams:
    R: int = 5
    k_rate: float = 2.0
    F0_A: float = 1.0
    F0_B: float = 0.0
    QF0: float = 1.0
    spec: float = 0.95
    flow_upper: float = 10.0
    rate_bound: float = 10.0
    volume_upper: float = 100.0

    def validate(self):
        if not isinstance(self.R, int) or self.R < 1:
            raise InvalidParams(f"R must be a positive integer, got {self.R!r}")
        if not self.k_rate > 0:
            raise InvalidParams("rate constant must be positive")
        if self.F0_A < 0 or self.F0_B < 0 or not self.F0_A + self.F0_B > 0:
            raise InvalidParams("feed flows must be non-negative with a positive total")
        if not self.QF0 > 0:
            raise InvalidParams("feed volumetric flow must be positive")
        if not 0 < self.spec < 1:
            raise InvalidParams("product purity must lie strictly between 0 and 1")
        if not (self.flow_upper > 0 and self.rate_bound > 0 and self.volume_upper > 0):
            raise InvalidParams("variable bounds must be positive")
        return self

    @classmethod
    def from_mapping(cls, values, R=None):
        check_known(values, (), {"R", "k_rate", "F0.A", "F0.B", "QF0", "spec",
                                 "flow_upper", "rate_bound", "volume_upper"})
        d = cls()
        p = cls(
            R=R if R is not None else get_int(values, "R", d.R),
            k_rate=get_float(values, "k_rate", d.k_rate),
            F0_A=get_float(values, "F0.A", d.F0_A),
            F0_B=get_float(values, "F0.B", d.F0_B),
            QF0=get_float(values, "QF0", d.QF0),
            spec=get_float(values, "spec", d.spec),
            flow_upper=get_float(values, "flow_upper", d.flow_upper),
            rate_bound=get_float(values, "rate_bound", d.rate_bound),
            volume_upper=get_float(values, "volume_upper", d.volume_upper),
        )
        return p.validate()


def build_cstr(p=None):
    """Return ``(model, [feed_spec, recycle_spec])``."""
    p = (p or CstrParams()).validate()
    R = p.R
    units = range(1, R + 1)
    fu, rb, vu = p.flow_upper, p.rate_bound, p.volume_upper
    m = Model(f"cstr_{R}")

    F = {(i, n): m.add_continuous(f"F[{i},{n}]", 0, fu, 0.5) for n in units for i in COMPONENTS}
    FR = {(i, n): m.add_continuous(f"FR[{i},{n}]", 0, fu, 0.0) for n in units for i in COMPONENTS}
    r = {(i, n): m.add_continuous(f"r[{i},{n}]", -rb, rb, 0.0) for n in units for i in COMPONENTS}
    Q = {n: m.add_continuous(f"Q[{n}]", 0, fu, p.QF0) for n in units}
    QFR = {n: m.add_continuous(f"QFR[{n}]", 0, fu, 0.0) for n in units}
    V = {n: m.add_continuous(f"V[{n}]", 0, vu, 1.0) for n in units}
    c = {n: m.add_continuous(f"c[{n}]", 0, vu, 1.0) for n in units}
    P = {i: m.add_continuous(f"P[{i}]", 0, fu, 0.5) for i in COMPONENTS}
    Rf = {i: m.add_continuous(f"R[{i}]", 0, fu, 0.0) for i in COMPONENTS}
    QP = m.add_continuous("QP", 0, fu, p.QF0)
    QR = m.add_continuous("QR", 0, fu, 0.0)

    YF = [m.add_boolean(f"YF[{n}]") for n in units]
    YR = [m.add_boolean(f"YR[{n}]") for n in units]
    YP = [m.add_boolean(f"YP[{n}]") for n in units]
    NYP = [m.add_boolean(f"not YP[{n}]") for n in units]
    NYR = [m.add_boolean(f"not YR[{n}]") for n in units]

    feed = {"A": p.F0_A, "B": p.F0_B}
    for i in COMPONENTS:
        m.add_global_constraint(eq(feed[i] + FR[i, R] - F[i, R] + r[i, R] * V[R]), f"feed_balance[{i}]")
    m.add_global_constraint(eq(p.QF0 + QFR[R] - Q[R]), "feed_continuity")
    for n in units:
        if n == R:
            continue
        for i in COMPONENTS:
            m.add_global_constraint(eq(F[i, n + 1] + FR[i, n] - F[i, n] + r[i, n] * V[n]),
                                    f"balance[{i},{n}]")
        m.add_global_constraint(eq(Q[n + 1] + QFR[n] - Q[n]), f"continuity[{n}]")
    for i in COMPONENTS:
        m.add_global_constraint(eq(F[i, 1] - P[i] - Rf[i]), f"split_balance[{i}]")
    m.add_global_constraint(eq(Q[1] - QP - QR), "split_continuity")
    for i in COMPONENTS:
        m.add_global_constraint(eq(P[i] * Q[1] - F[i, 1] * QP), f"split_composition[{i}]")
    m.add_global_constraint(eq(p.spec * QP - P["B"]), "purity")
    for n in units:
        if n > 1:
            m.add_global_constraint(eq(V[n] - V[n - 1]), f"equal_volume[{n}]")

    for n in units:
        reactor = [
            eq(r["A", n] * Q[n] ** 2 + p.k_rate * F["A", n] * F["B", n], label=f"rate[{n}]"),
            eq(r["B", n] + r["A", n], label=f"stoichiometry[{n}]"),
            eq(c[n] - V[n], label=f"cost[{n}]"),
        ]
        bypass = [eq(FR[i, n], label=f"no_recycle_flow[{i},{n}]") for i in COMPONENTS]
        bypass += [eq(r[i, n], label=f"no_reaction[{i},{n}]") for i in COMPONENTS]
        bypass += [eq(QFR[n], label=f"no_recycle_volume[{n}]"), eq(c[n], label=f"no_cost[{n}]")]
        m.add_disjunction([Disjunct(YP[n - 1], reactor, f"CSTR {n}"),
                           Disjunct(NYP[n - 1], bypass, f"bypass {n}")], f"unit[{n}]")

        recycle = [eq(FR[i, n] - Rf[i], label=f"recycle_flow[{i},{n}]") for i in COMPONENTS]
        recycle.append(eq(QFR[n] - QR, label=f"recycle_volume[{n}]"))
        closed = [eq(FR[i, n], label=f"closed_flow[{i},{n}]") for i in COMPONENTS]
        closed.append(eq(QFR[n], label=f"closed_volume[{n}]"))
        m.add_disjunction([Disjunct(YR[n - 1], recycle, f"recycle into {n}"),
                           Disjunct(NYR[n - 1], closed, f"no recycle into {n}")], f"recycle[{n}]")

    m.add_logic_prop(Exactly(1, YF))
    m.add_logic_prop(Exactly(1, YR))
    for n in units:
        upstream_clear = And(*[Not(YF[j - 1]) for j in range(1, n + 1)])
        m.add_logic_prop(Iff(YP[n - 1], Or(upstream_clear, YF[n - 1])))
        m.add_logic_prop(Implies(YR[n - 1], YP[n - 1]))

    m.set_objective(quicksum(c[n] for n in units))
    m.freeze()
    specs = [
        declare_external(m, YF, 0, name="reactors"),
        declare_external(m, YR, 1, name="recycle_position"),
    ]
    return m, specs
