"""Benchmark runner: instance suites x algorithms x seeds, with oracle and certificate columns."""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Literal, Optional, Union

import pandas as pd
from pydantic import BaseModel, Field, ValidationError

from analysis import AnalysisParams, certify_local_optimum
from circular import ColorCodingParams
from data import read_instance
from errors import InputError
from generators import (
    LowerBoundParams,
    berman_tight_packing,
    gen_alternating_cycle,
    gen_berman_tight,
    gen_high_girth_regular,
    gen_incidence_lowerbound,
    gen_random_packing,
)
from instance import as_graph
from oracle import DEFAULT_ORACLE_LIMIT, exact_mwis
from search import SolverConfig, solve
from utils import fmt_fraction, parse_rational, stopwatch

logger = logging.getLogger(__name__)

COLUMNS = ["instance", "algo", "seed", "final_w", "opt_w", "ratio", "iters", "time_ms", "cert"]


# Suite document
class InstanceSpec(BaseModel):
    id: Optional[str] = None
    path: Optional[str] = None
    gen: Optional[Literal["berman", "berman-packing", "cycle", "lowerbound", "random"]] = None
    d: Optional[int] = None
    pairs: Optional[int] = None
    eps: Optional[str] = None
    alpha: Optional[str] = None
    girth: Optional[int] = None
    sets: Optional[int] = None
    k: Optional[int] = None
    universe: Optional[int] = None
    seed: int = 0
    weights: Literal["uniform", "near-unit"] = "uniform"

    def label(self):
        if self.id:
            return self.id
        if self.path:
            return Path(self.path).name
        return f"{self.gen}-{self.seed}"


class AlgorithmSpec(BaseModel):
    algo: Literal["greedy", "squareimp", "logimp", "param"]
    alpha: str = "2"
    cap_c: str = "1"
    scale_n: Optional[str] = None
    unit: bool = False
    start: Optional[Literal["A"]] = None
    cc_mode: Literal["randomized", "exhaustive"] = "randomized"

    def label(self):
        parts = [self.algo]
        if self.algo == "param":
            parts.append(f"a={self.alpha}")
        if self.scale_n:
            parts.append(f"N={self.scale_n}")
        if self.start:
            parts.append(f"start={self.start}")
        return ",".join(parts)


class Suite(BaseModel):
    instances: List[InstanceSpec]
    algorithms: List[AlgorithmSpec]
    seeds: List[int] = Field(default_factory=lambda: [0])
    oracle_limit: int = DEFAULT_ORACLE_LIMIT
    delta: str = "1/2"


def load_suite(source: Union[str, Path, dict]) -> Suite:
    try:
        if isinstance(source, dict):
            return Suite.model_validate(source)
        return Suite.model_validate_json(Path(source).read_text())
    except (OSError, ValidationError) as e:
        raise InputError(f"invalid suite: {e}") from e


def build_instance(spec: InstanceSpec):
    """(instance object, designated A side or None)."""
    if spec.path:
        return read_instance(spec.path), None
    if spec.gen == "berman":
        g, A, _ = gen_berman_tight(spec.d)
        return g, A
    if spec.gen == "berman-packing":
        inst, A, _ = berman_tight_packing(spec.d)
        return inst, A
    if spec.gen == "cycle":
        g, A, _ = gen_alternating_cycle(spec.pairs, spec.d, spec.eps)
        return g, A
    if spec.gen == "lowerbound":
        params = LowerBoundParams(spec.d, spec.alpha or "1", spec.eps, spec.girth)
        H = gen_high_girth_regular(spec.d - 1, spec.girth, spec.seed)
        g, A, _ = gen_incidence_lowerbound(params, H)
        return g, A
    if spec.gen == "random":
        return gen_random_packing(spec.sets, spec.k, spec.universe, spec.weights, spec.seed), None
    raise InputError("instance needs either a path or a generator")


# Report
@dataclass
class BenchRow:
    instance: str
    algo: str
    seed: int
    final_w: Optional[str] = None
    opt_w: Optional[str] = None
    ratio: Optional[str] = None
    iters: Optional[int] = None
    time_ms: Optional[float] = None
    cert: str = "n/a"
    error: Optional[str] = None


@dataclass
class BenchReport:
    rows: List[BenchRow] = field(default_factory=list)

    @property
    def ok(self):
        return all(r.error is None and r.cert in ("pass", "n/a") for r in self.rows)

    def to_frame(self, include_timing=True):
        df = pd.DataFrame([asdict(r) for r in self.rows], columns=COLUMNS + ["error"], dtype=object)
        if not include_timing:
            df["time_ms"] = None
        return df


def _run_row(instance_spec, algo_spec, seed, suite):
    row = BenchRow(instance_spec.label(), algo_spec.label(), seed)
    try:
        obj, side = build_instance(instance_spec)
        g = as_graph(obj)
        cfg = SolverConfig(
            mode=algo_spec.algo,
            alpha=parse_rational(algo_spec.alpha),
            size_cap_factor=parse_rational(algo_spec.cap_c),
            scaling_N=parse_rational(algo_spec.scale_n) if algo_spec.scale_n else None,
            rng_seed=seed,
            unit=algo_spec.unit,
            start=frozenset(side) if algo_spec.start == "A" and side is not None else None,
            circular=ColorCodingParams(mode=algo_spec.cc_mode),
        )
        with stopwatch() as clock:
            trace = solve(obj, cfg)
        row.time_ms = round(clock["ms"], 3)
        row.iters = trace.iterations
        scored = g.with_weights([1] * g.n) if algo_spec.unit else g
        final_w = scored.weight(trace.final.members)
        row.final_w = fmt_fraction(final_w)
        if g.n <= suite.oracle_limit:
            oracle = exact_mwis(scored, limit=suite.oracle_limit)
            row.opt_w = fmt_fraction(oracle.optimum_w)
            if final_w > 0:
                row.ratio = fmt_fraction(oracle.optimum_w / final_w)
            if algo_spec.algo in ("squareimp", "logimp") and not trace.scaled:
                report = certify_local_optimum(
                    scored, trace.final.members, oracle.best.members, AnalysisParams.from_delta(suite.delta)
                )
                row.cert = "pass" if report.passed else "fail"
    except Exception as e:
        logger.warning("bench row %s/%s/%d failed: %s", row.instance, row.algo, seed, e)
        row.error = f"{type(e).__name__}: {e}"
        row.cert = "error"
    logger.info("bench row %s/%s/%d: %s", row.instance, row.algo, seed, row.cert)
    return row


def run_bench(suite: Suite, jobs=1) -> BenchReport:
    """Runs every (instance, algorithm, seed) row; rows come back in suite order whatever ``jobs`` is."""
    tasks = [(i, a, s) for i in suite.instances for a in suite.algorithms for s in suite.seeds]
    if jobs <= 1:
        rows = [_run_row(i, a, s, suite) for i, a, s in tasks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda t: _run_row(*t, suite), tasks))
    return BenchReport(rows)


def emit_report(report: BenchReport, fmt="csv", path=None, include_timing=True):
    """Writes (or returns) the report as CSV with a fixed column order, or as JSON."""
    if fmt == "csv":
        text = report.to_frame(include_timing)[COLUMNS].to_csv(index=False)
    elif fmt == "json":
        rows = [asdict(r) for r in report.rows]
        if not include_timing:
            for r in rows:
                r["time_ms"] = None
        text = json.dumps({"rows": rows}, indent=2) + "\n"
    else:
        raise InputError(f"unknown report format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def report_from_json(text) -> BenchReport:
    try:
        rows = json.loads(text)["rows"]
        return BenchReport([BenchRow(**r) for r in rows])
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"invalid report: {e}") from e
