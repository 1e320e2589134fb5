"""Local NLP subsolver: augmented Lagrangian with a projected quasi-Newton inner loop.

The outer loop prices equalities ``h(x) = 0`` and inequalities ``g(x) <= 0``
with multipliers and a quadratic penalty. Each augmented Lagrangian is
minimized over the variable bounds by projected Newton steps on the model
``B + rho J'J``: the penalty curvature comes exactly from first derivatives
and ``B`` is a damped BFGS estimate of the remaining Lagrangian curvature. Multipliers follow the
convention ``L = f / s + lam.h + mu.g`` with ``mu >= 0``, where ``s`` is the
objective scale reported with each result.

Any object with ``solve(nlp, init, cfg) -> SubproblemResult`` can stand in for
:class:`AugmentedLagrangian` inside the search.
"""
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import expr as ex
from .errors import DimensionMismatch, DomainError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
SOLVER_ERROR = "solver_error"
# feasible outer iterations allowed without halving the KKT residual
_STALE_OUTER = 8
# optimal results get up to this many extra outer passes aiming at violation <= _POLISH * feas_tol
_POLISH_OUTER = 3
_POLISH = 1e-3


@dataclass(frozen=True)
class SolverConfig:
    feas_tol: float = 1e-7
    kkt_tol: float = 1e-6
    max_outer: int = 60
    max_inner: int = 500
    initial_penalty: float = 10.0
    penalty_growth: float = 10.0
    penalty_cap: float = 1e10
    fallback: bool = True

    def __post_init__(self):
        if self.feas_tol <= 0 or self.kkt_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.penalty_growth <= 1:
            raise ValueError("penalty growth factor must exceed 1")
        if self.initial_penalty <= 0:
            raise ValueError("initial penalty must be positive")


@dataclass(frozen=True)
class WarmStart:
    x: Tuple[float, ...]


@dataclass(frozen=True)
class SubproblemResult:
    status: str
    objective: float = math.inf
    point: Optional[Tuple[float, ...]] = None
    eq_multipliers: Tuple[float, ...] = ()
    ineq_multipliers: Tuple[float, ...] = ()
    violation: float = math.inf
    kkt: float = math.inf
    outer_iterations: int = 0
    message: str = ""
    objective_scale: float = 1.0

    @property
    def optimal(self):
        return self.status == OPTIMAL


@dataclass
class _Problem:
    nlp: object
    batch: ex.CompiledBatch
    n_eq: int
    lb: np.ndarray
    ub: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        self.n = len(self.lb)

    def evaluate(self, x):
        vals, gvals = self.batch(x)
        return vals, gvals

    def dense(self, gvals):
        J = np.zeros((len(self.batch.roots), self.n))
        np.add.at(J, (self.batch.rows, self.batch.cols), gvals)
        return J

    def combine(self, weights, gvals):
        """Gradient of ``sum_k weights[k] * root_k``."""
        w = weights[self.batch.rows] * gvals
        return np.bincount(self.batch.cols, weights=w, minlength=self.n)


def _compile(nlp):
    roots = [nlp.objective] + list(nlp.eq) + list(nlp.ineq)
    return _Problem(nlp, ex.compile_batch(roots), len(nlp.eq),
                    np.asarray(nlp.lb, dtype=float), np.asarray(nlp.ub, dtype=float))


def _violation(h, g):
    v = 0.0
    if h.size:
        v = float(np.max(np.abs(h)))
    if g.size:
        v = max(v, float(np.max(g)), 0.0)
    return v


def _projected_stationarity(x, grad, lb, ub):
    proj = np.clip(x - grad, lb, ub)
    return float(np.max(np.abs(x - proj))) if x.size else 0.0


def _kkt_from_parts(x, grad_l, lb, ub, mu, g, violation):
    stat = _projected_stationarity(x, grad_l, lb, ub)
    comp = float(np.max(np.abs(mu * g))) if g.size else 0.0
    dual = float(np.max(np.maximum(0.0, -mu))) if mu.size else 0.0
    return max(stat, comp, dual, violation)


def kkt_residual(nlp, point, multipliers, objective_scale=1.0):
    """Largest of projected stationarity, complementarity, dual and primal violation.

    Computed with the interpretive reverse-mode gradient, independently of the
    generated code the solver uses.

    Parameters
    ----------
    nlp : Nlp
    point : sequence of float
    multipliers : (eq_multipliers, ineq_multipliers)
        For ``L = f / objective_scale + lam.h + mu.g``.
    """
    x = np.asarray(point, dtype=float)
    lam = np.asarray(multipliers[0], dtype=float)
    mu = np.asarray(multipliers[1], dtype=float)
    n = len(nlp.lb)
    if x.shape != (n,) or lam.shape != (len(nlp.eq),) or mu.shape != (len(nlp.ineq),):
        raise DimensionMismatch(
            f"expected point {n}, eq {len(nlp.eq)}, ineq {len(nlp.ineq)}; got "
            f"{x.shape}, {lam.shape}, {mu.shape}"
        )
    grad = ex.gradient(nlp.objective, x, n) / objective_scale
    h = np.array([ex.evaluate(e, x) for e in nlp.eq])
    g = np.array([ex.evaluate(e, x) for e in nlp.ineq])
    for lam_k, e in zip(lam, nlp.eq):
        if lam_k:
            grad = grad + lam_k * ex.gradient(e, x, n)
    for mu_k, e in zip(mu, nlp.ineq):
        if mu_k:
            grad = grad + mu_k * ex.gradient(e, x, n)
    lb = np.asarray(nlp.lb, dtype=float)
    ub = np.asarray(nlp.ub, dtype=float)
    bound_viol = float(np.max(np.maximum(0.0, np.maximum(lb - x, x - ub)))) if n else 0.0
    return _kkt_from_parts(x, grad, lb, ub, mu, g, max(_violation(h, g), bound_viol))


def default_start(nlp):
    """Initial values where the model gives them, bound midpoints elsewhere."""
    return np.array([
        v if v is not None else 0.5 * (lo + hi)
        for v, lo, hi in zip(nlp.init, nlp.lb, nlp.ub)
    ], dtype=float)


def midpoint(nlp):
    return 0.5 * (np.asarray(nlp.lb, dtype=float) + np.asarray(nlp.ub, dtype=float))


class AugmentedLagrangian:
    """The built-in subsolver."""

    def solve(self, nlp, init=None, cfg=None):
        cfg = cfg or SolverConfig()
        try:
            prob = _compile(nlp)
        except DomainError as err:
            return SubproblemResult(SOLVER_ERROR, message=str(err))
        x0 = default_start(nlp) if init is None else np.asarray(
            init.x if isinstance(init, WarmStart) else init, dtype=float)
        if x0.shape != (prob.n,):
            raise DimensionMismatch(f"warm start has {x0.size} entries, expected {prob.n}")
        result = self._run(prob, x0, cfg)
        if result.status != OPTIMAL and cfg.fallback:
            alt = self._run(prob, midpoint(nlp), cfg)
            # a feasible but non-stationary first run is kept over a failed fallback
            never_feasible = result.status == SOLVER_ERROR and not result.violation <= cfg.feas_tol
            if alt.status == OPTIMAL or (alt.status == INFEASIBLE and never_feasible):
                result = alt
        return result

    def _run(self, prob, x0, cfg):
        try:
            return self._augmented_lagrangian(prob, x0, cfg)
        except (DomainError, FloatingPointError, OverflowError, ValueError) as err:
            return SubproblemResult(SOLVER_ERROR, message=f"numerical failure: {err}")

    def _augmented_lagrangian(self, prob, x0, cfg):
        lb, ub = prob.lb, prob.ub
        x = np.clip(x0, lb, ub)
        m_eq = prob.n_eq
        vals, gvals = prob.evaluate(x)
        if not np.all(np.isfinite(vals)):
            x = np.clip(0.5 * (lb + ub), lb, ub)
            vals, gvals = prob.evaluate(x)
        if not np.all(np.isfinite(vals)):
            return SubproblemResult(SOLVER_ERROR, message="non-finite values at the start point")
        jac0 = prob.dense(gvals)
        scale = max(1.0, float(np.max(np.abs(jac0[0]))) if prob.n else 1.0)
        # row scaling: each constraint divided by its largest initial gradient entry
        rows = np.ones(len(vals))
        if prob.n:
            rows[1:] = 1.0 / np.maximum(1.0, np.max(np.abs(jac0[1:]), axis=1, initial=0.0))
        rows[0] = 1.0 / scale

        lam = np.zeros(m_eq)
        mu = np.zeros(len(vals) - 1 - m_eq)
        rho = cfg.initial_penalty
        prev_viol = math.inf
        best = None
        accepted = None
        polish = 0
        stale = 0

        state = _InnerState(prob, rows, np.eye(prob.n))
        outer = 0
        viol = math.inf
        for outer in range(1, cfg.max_outer + 1):
            x = state.minimize(x, lam, mu, rho, cfg.kkt_tol * 1e-1, cfg.max_inner)
            v, gv = prob.evaluate(x)
            if not np.all(np.isfinite(v)):
                return SubproblemResult(SOLVER_ERROR, outer_iterations=outer,
                                        message="non-finite function values")
            h = v[1:1 + m_eq]
            g = v[1 + m_eq:]
            viol = _violation(h, g)
            sv = v * rows
            lam = lam + rho * sv[1:1 + m_eq]
            mu = np.maximum(0.0, mu + rho * sv[1 + m_eq:])
            if viol <= cfg.feas_tol:
                # multipliers in unscaled-constraint units for L = f / scale + lam.h + mu.g
                cand = [(lam * rows[1:1 + m_eq], mu * rows[1 + m_eq:])]
                cand.append(_least_squares_multipliers(prob, x, gv, g, scale, cfg.feas_tol))
                stale += 1
                for lam_u, mu_u in cand:
                    kkt = _kkt_from_parts(x, _lagrangian_gradient(prob, gv, scale, lam_u, mu_u),
                                          lb, ub, mu_u, g, viol)
                    if best is None or kkt < 0.5 * best[0]:
                        stale = 0
                    if best is None or kkt < best[0]:
                        best = (kkt, x.copy(), float(v[0]), lam_u, mu_u, viol)
                if best[0] <= cfg.kkt_tol:
                    accepted = best
                    polish += 1
                    # a few extra passes sharpen the objective well below the feasibility noise
                    if viol <= _POLISH * cfg.feas_tol or polish > _POLISH_OUTER:
                        break
                    best = None
                    stale = 0
                    continue
                if stale >= _STALE_OUTER:
                    break
            if viol > cfg.feas_tol and viol > 0.25 * prev_viol:
                if rho >= cfg.penalty_cap:
                    if accepted is not None:
                        break
                    return SubproblemResult(INFEASIBLE, violation=viol, outer_iterations=outer,
                                            message="penalty cap reached with constraints violated")
                rho = min(rho * cfg.penalty_growth, cfg.penalty_cap)
            prev_viol = viol
        if accepted is not None:
            kkt, xb, fb, lam_u, mu_u, vb = accepted
            return SubproblemResult(
                OPTIMAL, fb, tuple(float(t) for t in xb),
                tuple(float(t) for t in lam_u), tuple(float(t) for t in mu_u),
                vb, kkt, outer, objective_scale=scale,
            )
        if best is None:
            return SubproblemResult(INFEASIBLE, violation=viol, outer_iterations=outer,
                                    message="outer iterations exhausted with constraints violated")
        return SubproblemResult(SOLVER_ERROR, violation=best[5], kkt=best[0], outer_iterations=outer,
                                message="feasible but KKT tolerance not reached")


class _InnerState:
    """Bound-constrained minimizer of the augmented Lagrangian.

    The BFGS matrix ``B`` survives across outer iterations because the
    Lagrangian curvature changes slowly once the multipliers settle.
    """

    def __init__(self, prob, rows, B):
        self.prob = prob
        self.rows = rows
        self.B = B
        self.fresh = True

    def _eval(self, x, lam, mu, rho):
        try:
            v, gv = self.prob.evaluate(x)
        except DomainError:
            return None
        if not np.all(np.isfinite(v)) or not np.all(np.isfinite(gv)):
            return None
        m_eq = self.prob.n_eq
        sv = v * self.rows
        h = sv[1:1 + m_eq]
        g = sv[1 + m_eq:]
        shifted = np.maximum(0.0, mu + rho * g)
        val = sv[0] + lam @ h + 0.5 * rho * (h @ h) + (shifted @ shifted - mu @ mu) / (2 * rho)
        w = np.concatenate(([1.0], lam + rho * h, shifted)) * self.rows
        return float(val), self.prob.combine(w, gv), gv, w, shifted > 0

    def minimize(self, x, lam, mu, rho, tol, max_iter):
        prob, lb, ub = self.prob, self.prob.lb, self.prob.ub
        m_eq = prob.n_eq
        cur = self._eval(x, lam, mu, rho)
        if cur is None:
            raise DomainError("augmented Lagrangian undefined at the inner start point")
        stalled = False
        for _ in range(max_iter):
            val, grad, gv, w, active = cur
            pg = _projected_stationarity(x, grad, lb, ub)
            if pg <= tol:
                break
            eps = min(1e-8, pg)
            bound = ((x - lb <= eps) & (grad > 0)) | ((ub - x <= eps) & (grad < 0))
            free = ~bound
            J = prob.dense(gv)[1:] * self.rows[1:, None]
            keep = np.concatenate((np.ones(m_eq, dtype=bool), active))
            Jc = J[keep][:, free]
            H = self.B[np.ix_(free, free)] + rho * (Jc.T @ Jc)
            d = np.zeros_like(x)
            d[free] = -_spd_solve(H, grad[free])
            step = self._search(x, d, val, grad, lam, mu, rho)
            if step is None:
                # Newton direction failed; fall back to a scaled projected gradient
                d = -grad / max(1.0, float(np.max(np.abs(grad))))
                step = self._search(x, d, val, grad, lam, mu, rho)
                if step is None:
                    break
            xn, nxt = step
            if float(np.max(np.abs(xn - x))) <= 1e-13 * (1.0 + float(np.max(np.abs(x)))):
                # stalled: restart the curvature estimate once, then give up
                if stalled:
                    break
                stalled = True
                self.B = np.eye(prob.n) * float(np.mean(np.diag(self.B)))
                continue
            stalled = False
            s = xn - x
            y = prob.combine(nxt[3], nxt[2]) - prob.combine(nxt[3], gv)
            self._update(s, y)
            x, cur = xn, nxt
        return x

    def _search(self, x, d, val, grad, lam, mu, rho):
        lb, ub = self.prob.lb, self.prob.ub
        t = 1.0
        for _ in range(40):
            xt = np.clip(x + t * d, lb, ub)
            dec = float(grad @ (xt - x))
            if dec >= 0:
                if not np.any(xt != x):
                    return None
            else:
                nxt = self._eval(xt, lam, mu, rho)
                if nxt is not None and nxt[0] <= val + 1e-4 * dec:
                    return xt, nxt
            t *= 0.5
        return None

    def _update(self, s, y):
        B = self.B
        Bs = B @ s
        sBs = float(s @ Bs)
        sy = float(s @ y)
        if self.fresh and sy > 1e-12:
            # rescale the initial identity to the observed curvature
            self.B = B = np.eye(len(s)) * (float(y @ y) / sy)
            Bs = B @ s
            sBs = float(s @ Bs)
            self.fresh = False
        if sBs <= 1e-16:
            return
        if sy < 0.2 * sBs:
            theta = 0.8 * sBs / (sBs - sy)
            y = theta * y + (1.0 - theta) * Bs
            sy = float(s @ y)
        self.B = B - np.outer(Bs, Bs) / sBs + np.outer(y, y) / sy


def _spd_solve(H, rhs):
    reg = 0.0
    scale = max(1e-12, float(np.max(np.abs(np.diag(H))))) if H.size else 1.0
    for _ in range(12):
        try:
            L = np.linalg.cholesky(H + reg * np.eye(len(H)))
        except np.linalg.LinAlgError:
            reg = max(reg * 10.0, 1e-10 * scale)
            continue
        return np.linalg.solve(L.T, np.linalg.solve(L, rhs))
    return rhs / scale


def _lagrangian_gradient(prob, gv, scale, lam, mu):
    w = np.concatenate(([1.0 / scale], lam, mu))
    return prob.combine(w, gv)


def _least_squares_multipliers(prob, x, gv, g, scale, tol):
    """First-order multiplier estimate over the free variables and near-active rows."""
    J = prob.dense(gv)
    m_eq = prob.n_eq
    width = np.maximum(1.0, np.abs(x))
    free = (x - prob.lb > 1e-9 * width) & (prob.ub - x > 1e-9 * width)
    active = np.flatnonzero(g >= -max(tol, 1e-9)) if g.size else np.array([], dtype=int)
    lam = np.zeros(m_eq)
    mu = np.zeros(len(g))
    for _ in range(len(active) + 1):
        rows = np.concatenate((np.arange(1, 1 + m_eq), 1 + m_eq + active)).astype(int)
        if not rows.size or not free.any():
            break
        A = J[rows][:, free].T
        rhs = -J[0, free] / scale
        sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
        lam = sol[:m_eq]
        mu_act = sol[m_eq:]
        if mu_act.size and mu_act.min() < 0:
            active = active[mu_act >= 0]
            continue
        mu = np.zeros(len(g))
        mu[active] = mu_act
        break
    return lam, mu


def solve(nlp, init=None, cfg=None):
    return AugmentedLagrangian().solve(nlp, init, cfg)
