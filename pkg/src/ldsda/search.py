"""Discrete steepest descent over the external-variable lattice.

The engine only needs an evaluator that screens a lattice point (logic and
bounds checks, no NLP solve) and solves it. :class:`GdpEvaluator` wraps a
model; :class:`FunctionEvaluator` wraps a plain objective table and is what
the synthetic-landscape tests use.

Neighbor directions are enumerated lexicographically with -1 < 0 < 1, so the
distance tie-break in the neighborhood search is deterministic. Neighbor
solves may run on a thread pool; the selection rule is always applied in the
canonical order afterwards, so serial and threaded runs agree.
"""
import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from . import fbbt
from . import nlp as nlpmod
from .errors import BudgetExhausted, InfeasibleStart, OutOfBounds
from .model import Model
from .subproblem import LogicallyInfeasible, build

INF_NORM = "inf"

# point outcomes
OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
SOLVER_ERROR = "solver_error"
LOGIC_INFEASIBLE = "logic_infeasible"
FBBT_INFEASIBLE = "fbbt_infeasible"
OUT_OF_BOX = "out_of_box"
VISITED = "visited"

# search phases
INIT = "init"
NS = "NS"
LS = "LS"

S_LOCAL = "s-local"
I_LOCAL = "i-local"
BUDGET_EXHAUSTED = "budget-exhausted"


def parse_neighborhood(k):
    if k in (2, "2"):
        return 2
    if k in (INF_NORM, "∞", math.inf) or (isinstance(k, str) and k.lower() in ("inf", "infinity")):
        return INF_NORM
    raise ValueError(f"neighborhood must be 2 or inf, got {k!r}")


def neighbors(n, k):
    """Ordered direction list of the k-ball of radius one in dimension ``n``."""
    k = parse_neighborhood(k)
    if k == 2:
        dirs = []
        for d in itertools.product((-1, 0, 1), repeat=n):
            if sum(abs(t) for t in d) == 1:
                dirs.append(d)
        return dirs
    return [d for d in itertools.product((-1, 0, 1), repeat=n) if any(d)]


def relative_improvement(f_ref, f):
    return (f_ref - f) / (abs(f_ref) + 1e-10)


def strictly_improves(f, f_ref, eps):
    if not math.isfinite(f):
        return False
    if not math.isfinite(f_ref):
        return True
    return f < f_ref or relative_improvement(f_ref, f) > eps


@dataclass(frozen=True)
class SearchConfig:
    epsilon: float = 0.0
    use_visited_set: bool = True
    use_domain_check: bool = True
    use_fbbt: bool = True
    use_logic_pruning: bool = True
    use_warm_start: bool = True
    use_distance_tiebreak: bool = True
    max_subproblem_solves: Optional[int] = None
    threads: int = 1
    fbbt_slack: float = 1e-7
    fbbt_max_iters: int = 10
    # relative gap under which two neighbor values count as tied for the distance tie-break
    tie_tolerance: float = 1e-6

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.tie_tolerance < 0:
            raise ValueError("tie_tolerance must be non-negative")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.max_subproblem_solves is not None and self.max_subproblem_solves < 0:
            raise ValueError("max_subproblem_solves must be non-negative")


@dataclass(frozen=True)
class Outcome:
    status: str
    value: float = math.inf
    x: Optional[Tuple[float, ...]] = None
    detail: str = ""

    @property
    def feasible(self):
        return self.status == OPTIMAL


# evaluators -------------------------------------------------------------------

class Evaluator:
    """Interface used by the engine.

    ``shape`` gives the lattice extent per external variable (points are
    1-based). ``screen`` returns ``(outcome_or_None, prepared)``: an Outcome
    when the point is pruned without solving. ``solve`` runs the subproblem.
    """

    shape: Tuple[int, ...] = ()

    def screen(self, z, cfg):
        return None, None

    def solve(self, z, prepared, warm, cfg):
        raise NotImplementedError

    def booleans(self, z):
        return None


class FunctionEvaluator(Evaluator):
    """Lattice landscape given by a Python callable (``+inf`` marks infeasible).

    ``logic_infeasible`` optionally flags points to prune before solving,
    standing in for logic propagation.
    """

    def __init__(self, shape, fn, logic_infeasible=None):
        self.shape = tuple(shape)
        self.fn = fn
        self.logic_infeasible = logic_infeasible

    def screen(self, z, cfg):
        if self.logic_infeasible is not None and self.logic_infeasible(z):
            if cfg.use_logic_pruning:
                return Outcome(LOGIC_INFEASIBLE), None
            return None, "conflict"
        return None, None

    def solve(self, z, prepared, warm, cfg):
        if prepared == "conflict":
            return Outcome(INFEASIBLE, detail="logic conflict")
        v = float(self.fn(tuple(z)))
        if not math.isfinite(v):
            return Outcome(INFEASIBLE)
        return Outcome(OPTIMAL, v, (v,))


class GdpEvaluator(Evaluator):
    """Build, screen and solve reduced subproblems of a GDP model."""

    def __init__(self, model, specs, subsolver=None, solver_config=None):
        self.model = model
        self.specs = list(specs)
        self.shape = tuple(s.size for s in self.specs)
        self.subsolver = subsolver or nlpmod.AugmentedLagrangian()
        self.solver_config = solver_config or nlpmod.SolverConfig()

    def screen(self, z, cfg):
        sub = build(self.model, self.specs, z, use_logic_pruning=cfg.use_logic_pruning)
        if isinstance(sub, LogicallyInfeasible):
            return Outcome(LOGIC_INFEASIBLE, detail=repr(sub.witness)), None
        if cfg.use_fbbt:
            res = fbbt.tighten(sub, cfg.fbbt_slack, cfg.fbbt_max_iters)
            if isinstance(res, fbbt.ProvenInfeasible):
                return Outcome(FBBT_INFEASIBLE, detail=res.witness), None
        return None, sub

    def solve(self, z, prepared, warm, cfg):
        res = self.subsolver.solve(prepared, None if warm is None else nlpmod.WarmStart(warm),
                                   self.solver_config)
        if res.status == nlpmod.OPTIMAL:
            return Outcome(OPTIMAL, res.objective, res.point)
        if res.status == nlpmod.INFEASIBLE:
            return Outcome(INFEASIBLE, detail=res.message)
        return Outcome(SOLVER_ERROR, detail=res.message)

    def booleans(self, z):
        sub = build(self.model, self.specs, z)
        if isinstance(sub, LogicallyInfeasible):
            return None
        return {b.name: bool(v) for b, v in zip(self.model.booleans, sub.assignment)}


def as_evaluator(target, specs=None, subsolver=None, solver_config=None):
    if isinstance(target, Evaluator):
        return target
    if isinstance(target, Model):
        if specs is None:
            raise ValueError("specs are required when searching a Model")
        return GdpEvaluator(target, specs, subsolver, solver_config)
    raise TypeError(f"cannot search over {type(target).__name__}")


# state ----------------------------------------------------------------------------

@dataclass(frozen=True)
class TrajectoryEntry:
    point: Tuple[int, ...]
    phase: str
    status: str
    value: Optional[float]
    accepted: bool = False
    elapsed: float = 0.0


@dataclass
class Stats:
    solves: int = 0
    pruned_visited: int = 0
    pruned_domain: int = 0
    pruned_logic: int = 0
    pruned_fbbt: int = 0
    infeasible: int = 0
    solver_errors: int = 0
    out_of_box: int = 0
    neighborhood_searches: int = 0
    line_search_moves: int = 0


@dataclass
class SearchState:
    z: Tuple[int, ...]
    f: float
    x: Optional[Tuple[float, ...]]
    visited: set = field(default_factory=set)
    trajectory: List[TrajectoryEntry] = field(default_factory=list)
    stats: Stats = field(default_factory=Stats)
    solved: Dict[Tuple[int, ...], Outcome] = field(default_factory=dict)
    started: float = field(default_factory=time.perf_counter)


@dataclass(frozen=True)
class ImprovedTo:
    z: Tuple[int, ...]
    direction: Tuple[int, ...]
    f: float


@dataclass(frozen=True)
class NoImprovement:
    pass


@dataclass(frozen=True)
class MovedTo:
    z: Tuple[int, ...]
    f: float


@dataclass(frozen=True)
class Stopped:
    reason: str


@dataclass(frozen=True)
class SearchResult:
    f: float
    z: Tuple[int, ...]
    x: Optional[Tuple[float, ...]]
    booleans: Optional[Dict[str, bool]]
    certificate: str
    stats: Stats
    trajectory: Tuple[TrajectoryEntry, ...]
    neighborhood: object = INF_NORM


class _Budget(Exception):
    pass


class _Engine:
    """Shared bookkeeping for the search phases."""

    def __init__(self, evaluator, cfg):
        self.ev = evaluator
        self.cfg = cfg
        self.shape = tuple(evaluator.shape)

    def in_box(self, z):
        return all(1 <= zj <= s for zj, s in zip(z, self.shape))

    def log(self, state, z, phase, status, value=None, accepted=False):
        state.trajectory.append(TrajectoryEntry(
            tuple(z), phase, status, value, accepted, time.perf_counter() - state.started))

    def _tally(self, state, outcome):
        s = state.stats
        if outcome.status == LOGIC_INFEASIBLE:
            s.pruned_logic += 1
        elif outcome.status == FBBT_INFEASIBLE:
            s.pruned_fbbt += 1
        elif outcome.status == INFEASIBLE:
            s.infeasible += 1
        elif outcome.status == SOLVER_ERROR:
            s.solver_errors += 1
        elif outcome.status == OUT_OF_BOX:
            s.out_of_box += 1

    def prefilter(self, state, z, phase):
        """Visited/domain/screen checks. Returns ``(outcome, prepared)``.

        ``outcome`` is set when no solve is needed. Visited and out-of-box
        points are logged here; everything else is logged by :meth:`finish`.
        """
        cfg = self.cfg
        if cfg.use_visited_set:
            if z in state.visited:
                state.stats.pruned_visited += 1
                self.log(state, z, phase, VISITED)
                return Outcome(VISITED), None
            state.visited.add(z)
        if not self.in_box(z):
            if cfg.use_domain_check:
                state.stats.pruned_domain += 1
                self.log(state, z, phase, OUT_OF_BOX)
                return Outcome(OUT_OF_BOX), None
            # no subproblem exists outside the box; record it as infeasible
            out = Outcome(OUT_OF_BOX, detail="outside lattice box")
            self._tally(state, out)
            self.log(state, z, phase, OUT_OF_BOX)
            return out, None
        outcome, prepared = self.ev.screen(z, cfg)
        if outcome is not None:
            self._tally(state, outcome)
            self.log(state, z, phase, outcome.status)
            return outcome, None
        return None, prepared

    def reserve(self, state):
        limit = self.cfg.max_subproblem_solves
        if limit is not None and state.stats.solves >= limit:
            raise _Budget()
        state.stats.solves += 1

    def solve_many(self, jobs, warm):
        """Solve ``[(z, prepared)]`` in order; threads when configured."""
        if self.cfg.threads > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=self.cfg.threads) as pool:
                futures = [pool.submit(self.ev.solve, z, p, warm, self.cfg) for z, p in jobs]
                return [f.result() for f in futures]
        return [self.ev.solve(z, p, warm, self.cfg) for z, p in jobs]

    def finish(self, state, z, phase, outcome, accepted=False):
        state.solved[z] = outcome
        self._tally(state, outcome)
        self.log(state, z, phase, outcome.status,
                 outcome.value if outcome.feasible else None, accepted)

    def warm(self, state):
        return state.x if self.cfg.use_warm_start else None


def _point(z, d):
    return tuple(a + b for a, b in zip(z, d))


def _distance(d):
    return math.sqrt(sum(t * t for t in d))


def _neighborhood_search(eng, state, k):
    cfg = eng.cfg
    state.stats.neighborhood_searches += 1
    dirs = neighbors(len(state.z), k)
    planned = []
    for d in dirs:
        alpha = _point(state.z, d)
        outcome, prepared = eng.prefilter(state, alpha, NS)
        planned.append((d, alpha, outcome, prepared))

    jobs = []
    exhausted = False
    for d, alpha, outcome, prepared in planned:
        if outcome is None:
            try:
                eng.reserve(state)
            except _Budget:
                exhausted = True
                break
            jobs.append((alpha, prepared))
    results = iter(eng.solve_many(jobs, eng.warm(state)))

    best = None  # (f, z, d, dist, x)
    n_jobs = len(jobs)
    done = 0
    for d, alpha, outcome, prepared in planned:
        if outcome is not None:
            continue
        if done == n_jobs:
            break
        done += 1
        res = next(results)
        eng.finish(state, alpha, NS, res)
        if not res.feasible:
            continue
        f = res.value
        dist = _distance(d)
        if best is None:
            take = strictly_improves(f, state.f, cfg.epsilon)
        else:
            f_best, dist_best = best[0], best[3]
            if cfg.use_distance_tiebreak:
                gap = relative_improvement(f_best, f)
                tied = gap >= -cfg.tie_tolerance and strictly_improves(f, state.f, cfg.epsilon)
                relaxed = f <= f_best or tied or gap >= cfg.epsilon
                # a clearly better neighbor always wins, even if closer
                take = (relaxed and dist >= dist_best) or gap > cfg.tie_tolerance
            else:
                take = strictly_improves(f, f_best, cfg.epsilon)
        if take:
            best = (f, alpha, d, dist, res.x)
    if exhausted:
        if best is not None:
            _accept(state, best[1], best[0], best[4])
        raise _Budget()
    if best is None:
        return NoImprovement()
    _accept(state, best[1], best[0], best[4])
    _mark_accepted(state, best[1])
    return ImprovedTo(best[1], best[2], best[0])


def _accept(state, z, f, x):
    state.z = z
    state.f = f
    state.x = x


def _mark_accepted(state, z):
    for i in range(len(state.trajectory) - 1, -1, -1):
        e = state.trajectory[i]
        if e.point == z and e.status == OPTIMAL:
            state.trajectory[i] = replace(e, accepted=True)
            return


def _line_search(eng, state, d):
    beta = _point(state.z, d)
    outcome, prepared = eng.prefilter(state, beta, LS)
    if outcome is not None:
        return Stopped(outcome.status)
    eng.reserve(state)
    res = eng.solve_many([(beta, prepared)], eng.warm(state))[0]
    improved = res.feasible and strictly_improves(res.value, state.f, eng.cfg.epsilon)
    eng.finish(state, beta, LS, res, accepted=improved)
    if not res.feasible:
        return Stopped(res.status)
    if not improved:
        return Stopped("no improvement")
    _accept(state, beta, res.value, res.x)
    state.stats.line_search_moves += 1
    return MovedTo(beta, res.value)


def _start(eng, z0):
    z0 = tuple(int(v) for v in z0)
    if len(z0) != len(eng.shape):
        raise OutOfBounds(f"start point {z0} has {len(z0)} components, expected {len(eng.shape)}")
    if not eng.in_box(z0):
        raise OutOfBounds(f"start point {z0} lies outside the lattice box {eng.shape}")
    state = SearchState(z0, math.inf, None)
    state.visited.add(z0)
    outcome, prepared = eng.ev.screen(z0, eng.cfg)
    if outcome is not None:
        eng._tally(state, outcome)
        eng.log(state, z0, INIT, outcome.status)
        raise InfeasibleStart(f"start point {z0} is {outcome.status}: {outcome.detail}")
    try:
        eng.reserve(state)
    except _Budget:
        raise BudgetExhausted("budget allows no subproblem solve") from None
    res = eng.ev.solve(z0, prepared, None, eng.cfg)
    eng.finish(state, z0, INIT, res, accepted=res.feasible)
    if not res.feasible:
        raise InfeasibleStart(f"start point {z0} subproblem is {res.status}: {res.detail}")
    _accept(state, z0, res.value, res.x)
    return state


def neighborhood_search(state, k, cfg, evaluator):
    """One neighborhood search around ``state.z``; updates ``state`` in place."""
    eng = _Engine(evaluator, cfg)
    try:
        return _neighborhood_search(eng, state, k)
    except _Budget:
        raise BudgetExhausted("subproblem budget exhausted", partial=state) from None


def line_search(state, direction, cfg, evaluator):
    """One line-search step from ``state.z`` along ``direction``."""
    if not any(direction):
        raise ValueError("line search direction must be nonzero")
    eng = _Engine(evaluator, cfg)
    try:
        return _line_search(eng, state, tuple(direction))
    except _Budget:
        raise BudgetExhausted("subproblem budget exhausted", partial=state) from None


def ldsda(target, z0, k=INF_NORM, config=None, specs=None, subsolver=None, solver_config=None):
    """Run the discrete steepest descent from ``z0``.

    Parameters
    ----------
    target : Evaluator or Model
        With a Model, ``specs`` (and optionally ``subsolver``,
        ``solver_config``) must be given.
    z0 : sequence of int
        Feasible starting lattice point.
    k : 2 or "inf"
        Neighborhood used by the neighborhood search.

    Returns
    -------
    SearchResult
        ``certificate`` is "s-local" (k=2), "i-local" (k=inf) or
        "budget-exhausted".

    Raises
    ------
    InfeasibleStart
        If the start point's subproblem is infeasible.
    OutOfBounds
        If ``z0`` is outside the lattice box.
    """
    cfg = config or SearchConfig()
    k = parse_neighborhood(k)
    ev = as_evaluator(target, specs, subsolver, solver_config)
    eng = _Engine(ev, cfg)
    state = _start(eng, z0)
    certificate = S_LOCAL if k == 2 else I_LOCAL
    try:
        while True:
            ns = _neighborhood_search(eng, state, k)
            if isinstance(ns, NoImprovement):
                break
            while isinstance(_line_search(eng, state, ns.direction), MovedTo):
                pass
    except _Budget:
        certificate = BUDGET_EXHAUSTED
    return SearchResult(state.f, state.z, state.x, ev.booleans(state.z), certificate,
                        state.stats, tuple(state.trajectory), k)


# enumeration and verification ------------------------------------------------------

@dataclass(frozen=True)
class LatticeRow:
    z: Tuple[int, ...]
    status: str
    value: Optional[float]


def lattice_points(shape):
    return list(itertools.product(*[range(1, s + 1) for s in shape]))


def enumerate_lattice(target, config=None, specs=None, subsolver=None, solver_config=None):
    """Screen and (if not pruned) solve every lattice point once.

    Points are solved cold, i.e. without warm start. Rows come back in
    lexicographic order.

    Raises
    ------
    BudgetExhausted
        With ``partial`` holding the rows finished so far.
    """
    cfg = config or SearchConfig()
    ev = as_evaluator(target, specs, subsolver, solver_config)
    eng = _Engine(ev, cfg)
    rows = {}
    jobs = []
    budget = cfg.max_subproblem_solves
    exhausted = False
    for z in lattice_points(ev.shape):
        outcome, prepared = ev.screen(z, cfg)
        if outcome is not None:
            rows[z] = LatticeRow(z, outcome.status, None)
            continue
        if budget is not None and len(jobs) >= budget:
            exhausted = True
            break
        jobs.append((z, prepared))
    for (z, _), res in zip(jobs, eng.solve_many(jobs, None)):
        rows[z] = LatticeRow(z, res.status, res.value if res.feasible else None)
    table = [rows[z] for z in sorted(rows)]
    if exhausted:
        raise BudgetExhausted("subproblem budget exhausted during enumeration", partial=table)
    return table


def lattice_minimum(table):
    feasible = [r for r in table if r.status == OPTIMAL]
    if not feasible:
        return None
    return min(feasible, key=lambda r: (r.value, r.z))


@dataclass(frozen=True)
class NeighborCheck:
    z: Tuple[int, ...]
    status: str
    value: Optional[float]
    better: bool


def check_neighbors(target, z, k=INF_NORM, config=None, specs=None, subsolver=None,
                    solver_config=None):
    """Solve ``z`` and every in-box, unpruned neighbor in ``N_k(z)``.

    Returns ``(center_outcome, [NeighborCheck])``; neighbors are warm-started
    from the center solution when warm starts are enabled.
    """
    cfg = config or SearchConfig()
    ev = as_evaluator(target, specs, subsolver, solver_config)
    eng = _Engine(ev, cfg)
    z = tuple(int(v) for v in z)
    if not eng.in_box(z):
        raise OutOfBounds(f"point {z} lies outside the lattice box {ev.shape}")
    outcome, prepared = ev.screen(z, cfg)
    if outcome is not None:
        raise InfeasibleStart(f"point {z} is {outcome.status}")
    center = ev.solve(z, prepared, None, cfg)
    if not center.feasible:
        raise InfeasibleStart(f"point {z} subproblem is {center.status}")
    threshold = center.value - max(0.0, cfg.epsilon * abs(center.value))
    checks = []
    jobs = []
    for d in neighbors(len(z), k):
        alpha = _point(z, d)
        if not eng.in_box(alpha):
            continue
        out, prep = ev.screen(alpha, cfg)
        if out is not None:
            checks.append(NeighborCheck(alpha, out.status, None, False))
        else:
            jobs.append((alpha, prep))
            checks.append(None)
    warm = center.x if cfg.use_warm_start else None
    solved = iter(eng.solve_many(jobs, warm))
    out_checks = []
    it_jobs = iter(jobs)
    for c in checks:
        if c is not None:
            out_checks.append(c)
            continue
        alpha, _ = next(it_jobs)
        res = next(solved)
        value = res.value if res.feasible else None
        out_checks.append(NeighborCheck(alpha, res.status, value,
                                        res.feasible and res.value < threshold))
    return center, out_checks


def verify_local(target, z, k=INF_NORM, config=None, specs=None, subsolver=None,
                 solver_config=None):
    """True iff no neighbor in ``N_k(z)`` is feasible with a strictly smaller value."""
    _, checks = check_neighbors(target, z, k, config, specs, subsolver, solver_config)
    return not any(c.better for c in checks)
