"""Local-search drivers: greedy start, squared-weight claw search, circular search,
the w^α search with logarithmic size cap, and the scale-and-truncate wrapper."""
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from circular import ColorCodingParams, build_anchor_maps, find_circular_improvement
from errors import BudgetExceeded, ContractError, InputError, SearchIncomplete
from instance import ClawShaped, ConflictGraph, Solution, as_graph, make_improvement
from oracle import exhaustive_improvement_search
from utils import fmt_fraction, log_cap, stopwatch

logger = logging.getLogger(__name__)

MODES = ("greedy", "squareimp", "logimp", "param")
DEFAULT_CLAW_SEARCH_BUDGET = 10**6


@dataclass(frozen=True)
class SolverConfig:
    mode: str = "squareimp"
    alpha: Fraction = Fraction(2)
    size_cap_factor: Fraction = Fraction(1)
    log_base: int = 2
    scaling_N: Optional[Fraction] = None
    rng_seed: int = 0
    circular: ColorCodingParams = field(default_factory=ColorCodingParams)
    d: Optional[int] = None
    unit: bool = False
    start: Optional[frozenset] = None
    claw_budget: int = DEFAULT_CLAW_SEARCH_BUDGET

    def __post_init__(self):
        if self.mode not in MODES:
            raise InputError(f"mode must be one of {MODES}, got {self.mode!r}")
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "size_cap_factor", Fraction(self.size_cap_factor))
        if self.alpha == 0:
            raise InputError("alpha = 0 is not supported; use unit weights for cardinality")
        if self.size_cap_factor <= 0:
            raise InputError("size cap factor C must be positive")
        if self.log_base < 2:
            raise InputError("log base must be >= 2")
        if self.scaling_N is not None:
            object.__setattr__(self, "scaling_N", Fraction(self.scaling_N))
            if self.scaling_N <= 1:
                raise InputError("scaling parameter N must exceed 1")
        if self.d is not None and self.d < 1:
            raise InputError("claw bound d must be >= 1")
        if self.start is not None:
            object.__setattr__(self, "start", frozenset(self.start))


@dataclass(frozen=True)
class ImprovementRecord:
    kind: str
    size: int
    delta_w2: object  # w² gain; the w^α gain for the parametrized search


@dataclass
class RunTrace:
    algorithm: str
    final: Solution
    iterations: int = 0
    improvements: list = field(default_factory=list)
    scaled: bool = False
    wall_time_ms: float = 0.0
    status: str = "complete"
    notes: list = field(default_factory=list)
    iteration_bound: Optional[int] = None

    def record(self, imp, delta):
        self.iterations += 1
        self.improvements.append(ImprovementRecord(imp.kind.name, imp.size, delta))

    def to_dict(self):
        """JSON-ready form; wall time is left out so repeated runs serialize identically."""
        out = {
            "algorithm": self.algorithm,
            "status": self.status,
            "scaled": self.scaled,
            "iterations": self.iterations,
            "improvements": [
                {"kind": r.kind, "size": r.size, "delta_w2": _fmt_gain(r.delta_w2)} for r in self.improvements
            ],
            "final_members": self.final.sorted_members(),
            "final_weight": fmt_fraction(self.final.total_w),
        }
        if self.iteration_bound is not None:
            out["iteration_bound"] = self.iteration_bound
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _fmt_gain(x):
    return fmt_fraction(x) if isinstance(x, (Fraction, int)) else str(x)


def _start(g, cfg):
    if cfg.start is None:
        return Solution()
    return Solution.from_members(g, cfg.start)


def _apply(g, A, imp, trace, delta):
    if not delta > 0:
        raise ContractError(f"{imp.kind.name} improvement with non-positive gain {delta}")
    A.apply(g, imp)
    trace.record(imp, delta)
    logger.debug("iteration %d: %s |X|=%d gain=%s", trace.iterations, imp.kind.name, imp.size, delta)


def greedy(g: ConflictGraph) -> Solution:
    """Heaviest remaining vertex first (ties: lowest id); the result is maximal."""
    taken, blocked = Solution(), set()
    for v in sorted(range(g.n), key=lambda v: (-g.w(v), v)):
        if v in blocked:
            continue
        taken.add(g, v)
        blocked.add(v)
        blocked.update(g.neighbors(v))
    return taken


def find_claw_improvement(g: ConflictGraph, A, d=None, budget=DEFAULT_CLAW_SEARCH_BUDGET):
    """First claw-shaped improvement in deterministic order, or None.

    Free vertices (no neighbour in A) come first, lowest id first. Then, for each
    centre c ∈ A in id order, independent talon sets T ⊆ N(c) \\ A with
    1 <= |T| <= d-1 are tried in lexicographic order; T improves when
    w²(T) > w²(N(T, A)).
    """
    A = frozenset(A)
    g.check_ids(A)
    d = g.claw_bound() if d is None else d
    for v in range(g.n):
        if v not in A and not g.neighbors(v) & A:
            return make_improvement(g, A, {v}, ClawShaped(None))
    nodes = 0
    chosen = []

    def extend(cands, start, removed, gained):
        nonlocal nodes
        for i in range(start, len(cands)):
            v = cands[i]
            if any(g.adjacent(v, c) for c in chosen):
                continue
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded(f"claw search exceeded {budget} nodes", nodes=nodes)
            chosen.append(v)
            grown = removed | (g.neighbors(v) & A)
            total = gained + g.w2(v)
            if total > g.weight2(grown):
                return tuple(chosen)
            if len(chosen) < d - 1:
                found = extend(cands, i + 1, grown, total)
                if found is not None:
                    return found
            chosen.pop()
        return None

    for c in sorted(A):
        cands = [v for v in g.adjacency[c] if v not in A]
        talons = extend(cands, 0, frozenset(), Fraction(0))
        if talons is not None:
            return make_improvement(g, A, talons, ClawShaped(c))
    return None


def squareimp(g: ConflictGraph, cfg: SolverConfig = SolverConfig()) -> RunTrace:
    """Applies claw-shaped improvements until none is left."""
    A = _start(g, cfg)
    trace = RunTrace("squareimp", A)
    with stopwatch() as clock:
        while True:
            imp = find_claw_improvement(g, A.members, cfg.d, cfg.claw_budget)
            if imp is None:
                break
            _apply(g, A, imp, trace, imp.gain)
    trace.wall_time_ms = clock["ms"]
    logger.info("squareimp: %d iterations, w=%s", trace.iterations, A.total_w)
    return trace


def logimp(g: ConflictGraph, cfg: SolverConfig = SolverConfig()) -> RunTrace:
    """Claw-shaped improvements first; when none is left, one circular improvement."""
    A = _start(g, cfg)
    trace = RunTrace("logimp", A)
    d = g.claw_bound() if cfg.d is None else cfg.d
    if cfg.circular.y_cap < d - 1:
        logger.warning("y_cap=%d is below d-1=%d; circular improvements are restricted", cfg.circular.y_cap, d - 1)
        trace.notes.append(f"y_cap={cfg.circular.y_cap} below d-1={d - 1}; circular search is restricted")
    rng = np.random.default_rng(cfg.rng_seed)
    with stopwatch() as clock:
        while True:
            imp = find_claw_improvement(g, A.members, d, cfg.claw_budget)
            if imp is None:
                maps = build_anchor_maps(g, A.members)
                try:
                    imp = find_circular_improvement(g, A.members, maps, cfg.circular, rng, d)
                except SearchIncomplete as e:
                    trace.status = "incomplete"
                    raise SearchIncomplete(str(e), best=trace, nodes=e.nodes) from e
            if imp is None:
                break
            _apply(g, A, imp, trace, imp.gain)
    trace.wall_time_ms = clock["ms"]
    logger.info("logimp: %d iterations, w=%s", trace.iterations, A.total_w)
    return trace


def parametrized_local_search(obj, cfg: SolverConfig = SolverConfig(mode="param")) -> RunTrace:
    """Improves w^α over independent sets of size at most max(1, floor(C log n)).

    ``obj`` may be a graph or a set system; for a set system n is the number of
    sets and the neighbourhood of X is the sets of A meeting some set of X.
    """
    g = as_graph(obj)
    cap = max(1, log_cap(cfg.size_cap_factor, g.n, cfg.log_base))
    A = _start(g, cfg)
    trace = RunTrace("param", A)
    with stopwatch() as clock:
        while True:
            imp = exhaustive_improvement_search(g, A.members, cfg.alpha, cap)
            if imp is None:
                break
            _apply(g, A, imp, trace, imp.gain)
    trace.wall_time_ms = clock["ms"]
    logger.info("param(alpha=%s, cap=%d): %d iterations, w=%s", cfg.alpha, cap, trace.iterations, A.total_w)
    return trace


def scaled_weights(g: ConflictGraph, N):
    """Scale factor N|V|/w(A') for the greedy solution A', and the floored scaled weights."""
    start = greedy(g)
    factor = Fraction(N) * g.n / start.total_w
    return factor, [math.floor(w * factor) for w in g.weights]


def scale_truncate_run(g: ConflictGraph, cfg: SolverConfig, inner=squareimp) -> RunTrace:
    """Runs ``inner`` on integer weights floor(w·N|V|/w(A')), dropping vertices that floor to 0."""
    N = cfg.scaling_N
    if g.n == 0:
        return RunTrace(inner.__name__, Solution(), scaled=True, iteration_bound=0, notes=["empty instance"])
    factor, floors = scaled_weights(g, N)
    keep = [v for v in range(g.n) if floors[v] >= 1]
    sub, old_ids = g.induced(keep)
    sub = sub.with_weights([floors[v] for v in old_ids])
    start = None
    if cfg.start is not None:
        index = {v: i for i, v in enumerate(old_ids)}
        start = frozenset(index[v] for v in cfg.start if v in index)
    d = g.claw_bound() if cfg.d is None else cfg.d
    inner_trace = inner(sub, replace(cfg, scaling_N=None, start=start, d=d))
    final = Solution.from_members(g, [old_ids[v] for v in inner_trace.final.members])
    bound = math.ceil((d - 1) ** 2 * N**2 * g.n**2)
    trace = replace(inner_trace, final=final, scaled=True, iteration_bound=bound)
    trace.notes = inner_trace.notes + [f"scale factor {fmt_fraction(factor)}, dropped {g.n - len(keep)} vertices"]
    if trace.iterations > bound:
        raise ContractError(f"{trace.iterations} iterations exceed the bound {bound}")
    return trace


def solve(obj, cfg: SolverConfig = SolverConfig()) -> RunTrace:
    """Entry point: runs the configured algorithm on a graph or a set system."""
    g = as_graph(obj)
    if cfg.unit:
        g = g.with_weights([1] * g.n)
    if cfg.mode == "greedy":
        with stopwatch() as clock:
            final = greedy(g)
        return RunTrace("greedy", final, wall_time_ms=clock["ms"])
    if cfg.mode == "param":
        return parametrized_local_search(obj if not cfg.unit else g, cfg)
    inner = squareimp if cfg.mode == "squareimp" else logimp
    if cfg.scaling_N is not None:
        return scale_truncate_run(g, cfg, inner)
    return inner(g, cfg)
