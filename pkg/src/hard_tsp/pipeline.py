"""Vertex sampling, instance evaluation and the end-to-end hardening pipeline."""

import hashlib
import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import LpLimits, SolveLimits
from .core import EdgeVector, TspInstance
from .errors import HardTspError, IntegralVertexError, IterationCapError, ParameterError
from .ihopt import (DEFAULT_DELTA, DEFAULT_TAU, DEFAULT_TRIANGLE_K, OPTIMAL, HardeningResult, solve_hopt,
                    solve_ihopt, warm_pool)
from .sampler import DEFAULT_BURN_IN, DEFAULT_THIN, HitAndRunChain, MetricPoint
from .sep import SepSolution, solve_sep
from .tsp import solve_exact

logger = logging.getLogger(__name__)

DEFAULT_REPS = 5
DEFAULT_MAX_DRAWS = 100000
MIN_SAMPLING_N = 6
GAP_CAP = 1.5
GAP_TOL = 1e-9


def vertex_key(x: EdgeVector) -> str:
    """SHA-1 of ``x`` rounded to 9 decimals (``-0.0`` folded into ``0.0``)."""
    rounded = np.round(x.values, 9) + 0.0
    return hashlib.sha1(rounded.tobytes()).hexdigest()


@dataclass(frozen=True)
class SampledVertex:
    """A fractional SEP vertex with the cost vector that produced it."""

    source: MetricPoint
    vertex: SepSolution
    key: str
    draws: int


def algorithm1_sample_vertices(n: int, r: int, seed: Optional[int] = None, burn_in: int = DEFAULT_BURN_IN,
                               thin: int = DEFAULT_THIN, max_draws: int = DEFAULT_MAX_DRAWS,
                               lp_limits: Optional[LpLimits] = None) -> List[SampledVertex]:
    """Collect ``r`` distinct fractional SEP vertices from one hit-and-run chain.

    Args:
        n: Node count (at least 6)
        r: Number of vertices
        seed: Chain seed
        burn_in: Steps discarded before the first draw
        thin: Chain steps between draws
        max_draws: Draw cap
        lp_limits: Simplex tolerances for the SEP solves

    Returns:
        ``r`` vertices in discovery order

    Raises:
        ParameterError: If ``r < 1`` or ``n < 6``
        IterationCapError: If ``max_draws`` draws yield fewer than ``r`` vertices
    """
    if r < 1:
        raise ParameterError(f"r must be at least 1, got {r}")
    if n < MIN_SAMPLING_N:
        raise ParameterError(f"SEP has no fractional vertices below n={MIN_SAMPLING_N}, got n={n}")

    chain = HitAndRunChain(n, np.random.default_rng(seed))
    chain.burn(burn_in)
    stream = chain.samples(thin)
    found: List[SampledVertex] = []
    seen = set()
    draws = 0
    while len(found) < r:
        if draws >= max_draws:
            raise IterationCapError(f"{max_draws} draws gave {len(found)} of {r} fractional vertices at n={n}")
        point = next(stream)
        draws += 1
        sol = solve_sep(point.instance(), lp_limits)
        if not sol.fractional:
            continue
        key = vertex_key(sol.x)
        if key in seen:
            continue
        seen.add(key)
        found.append(SampledVertex(point, sol, key, draws))
        logger.info("fractional vertex %d/%d n=%d draws=%d key=%s", len(found), r, n, draws, key[:12])
    return found


@dataclass(frozen=True)
class HardnessProxy:
    """Exact branch-and-bound effort over repeated runs with derived seeds."""

    nodes: Tuple[int, ...]
    runtimes: Tuple[float, ...]

    @property
    def reps(self) -> int:
        return len(self.nodes)

    @property
    def mean_nodes(self) -> float:
        return float(np.mean(self.nodes))

    @property
    def median_nodes(self) -> float:
        return float(np.median(self.nodes))

    @property
    def stddev_nodes(self) -> float:
        return float(np.std(self.nodes, ddof=1)) if self.reps > 1 else 0.0

    @property
    def mean_runtime(self) -> float:
        return float(np.mean(self.runtimes))

    @property
    def median_runtime(self) -> float:
        return float(np.median(self.runtimes))

    @property
    def stddev_runtime(self) -> float:
        return float(np.std(self.runtimes, ddof=1)) if self.reps > 1 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'reps': self.reps,
            'nodes': list(self.nodes),
            'runtimes': list(self.runtimes),
            'mean_nodes': self.mean_nodes,
            'median_nodes': self.median_nodes,
            'stddev_nodes': self.stddev_nodes,
            'mean_runtime': self.mean_runtime,
            'median_runtime': self.median_runtime,
            'stddev_runtime': self.stddev_runtime,
        }


@dataclass(frozen=True)
class EvaluationReport:
    """TOUR, SUBT, their ratio and the hardness proxy of one instance."""

    name: str
    n: int
    tour_value: float
    subt_value: float
    gap: float
    sep_fractional: bool
    hardness: HardnessProxy
    seed: int
    sep_solution: Optional[SepSolution] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'n': self.n,
            'tour': self.tour_value,
            'subt': self.subt_value,
            'gap': self.gap,
            'sep_fractional': self.sep_fractional,
            'hardness': self.hardness.to_dict(),
            'seed': self.seed,
        }


def _tour_value(inst: TspInstance, limits: Optional[SolveLimits], seed: int = 0) -> float:
    result = solve_exact(inst, limits=limits, seed=seed)
    if not result.proven_optimal:
        logger.warning("TOUR of %s not proven within the budget; using the best tour %s",
                       inst.name or "instance", result.value)
    return result.value


def _ratio(tour: float, subt: float) -> float:
    if subt <= 0:
        return 1.0 if tour <= 0 else float("inf")
    return float(tour) / float(subt)


def instance_gap(inst: TspInstance, lp_limits: Optional[LpLimits] = None,
                 limits: Optional[SolveLimits] = None) -> Tuple[float, float, float]:
    """``(TOUR, SUBT, TOUR / SUBT)`` without the hardness proxy.

    TOUR is an upper bound when ``limits`` stop the exact solver early.
    """
    tour = _tour_value(inst, limits)
    subt = solve_sep(inst, lp_limits).value
    return tour, subt, _ratio(tour, subt)


def derived_seeds(seed: int, reps: int) -> List[int]:
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(reps)]


def hardness_proxy(inst: TspInstance, reps: int = DEFAULT_REPS, seed: int = 0,
                   limits: Optional[SolveLimits] = None) -> HardnessProxy:
    """Branch-and-bound node counts and runtimes over ``reps`` derived seeds."""
    nodes, runtimes = [], []
    for child_seed in derived_seeds(seed, reps):
        result = solve_exact(inst, limits=limits, method="bnb", seed=child_seed)
        nodes.append(result.nodes_explored)
        runtimes.append(result.runtime)
    return HardnessProxy(tuple(nodes), tuple(runtimes))


def evaluate(inst: TspInstance, reps: int = DEFAULT_REPS, seed: int = 0, limits: Optional[SolveLimits] = None,
             lp_limits: Optional[LpLimits] = None) -> EvaluationReport:
    """TOUR via the exact solver, SUBT via SEP, and the hardness proxy.

    Args:
        inst: Instance to evaluate
        reps: Branch-and-bound repetitions for the proxy
        seed: Master seed; repetition seeds derive from it
        limits: Budget for the TOUR solve and per branch-and-bound repetition
        lp_limits: Simplex tolerances

    Returns:
        EvaluationReport
    """
    tour = _tour_value(inst, limits, seed)
    sep = solve_sep(inst, lp_limits)
    gap = _ratio(tour, sep.value)
    if gap < 1.0 - GAP_TOL:
        logger.warning("gap %.9g below 1 for %s: TOUR=%s SUBT=%s", gap, inst.name, tour, sep.value)
    if gap > GAP_CAP + GAP_TOL:
        logger.warning("gap %.9g above 3/2 for %s; the instance may not be metric", gap, inst.name)
    if inst.zero_cost_edges():
        logger.warning("%s has %d zero-cost edges", inst.name or "instance", inst.zero_cost_edges())
    proxy = hardness_proxy(inst, reps, seed, limits)
    report = EvaluationReport(inst.name, inst.n, float(tour), sep.value, gap, sep.fractional, proxy, seed, sep)
    logger.info("evaluate name=%s n=%d tour=%s subt=%.9g gap=%.6f median_nodes=%s", inst.name, inst.n, tour,
                sep.value, gap, proxy.median_nodes)
    return report


@dataclass(frozen=True)
class HardenOutcome:
    """Result of hardening one instance.

    Attributes:
        hard: Integer instance from IH-OPT
        before: Report on the input
        after: Report on ``hard``
        hopt: The fractional H-OPT stage
        ihopt: The integer stage
        hopt_gap: TOUR/SUBT of the H-OPT costs
        support_preserved: SEP on ``hard`` returns a vertex with the input vertex's support
        gap_regression: ``after.gap`` fell below ``hopt_gap``
    """

    hard: TspInstance
    before: EvaluationReport
    after: EvaluationReport
    hopt: HardeningResult
    ihopt: HardeningResult
    hopt_gap: float
    support_preserved: bool
    gap_regression: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.hard.name,
            'before': self.before.to_dict(),
            'after': self.after.to_dict(),
            'hopt_gap': self.hopt_gap,
            'ihopt': self.ihopt.to_dict(),
            'support_preserved': self.support_preserved,
            'gap_regression': self.gap_regression,
        }


def _remaining(limits: SolveLimits, started: float) -> SolveLimits:
    if limits.time_limit is None:
        return limits
    left = max(limits.time_limit - (time.perf_counter() - started), 0.0)
    return SolveLimits(time_limit=left, node_limit=limits.node_limit)


def harden(inst: TspInstance, delta: int = DEFAULT_DELTA, limits: Optional[SolveLimits] = None,
           reps: int = DEFAULT_REPS, seed: int = 0, tau: float = DEFAULT_TAU,
           triangle_k: int = DEFAULT_TRIANGLE_K, lp_limits: Optional[LpLimits] = None,
           vertex: Optional[SepSolution] = None) -> HardenOutcome:
    """SEP vertex, then H-OPT, warm pool and IH-OPT, with reports before and after.

    Args:
        inst: Source instance
        delta: IH-OPT tour right-hand side
        limits: Budget for the whole run. H-OPT gets half of the time limit and
            IH-OPT the remainder; the node limit applies to IH-OPT
        reps: Hardness-proxy repetitions
        seed: Master seed
        tau: Warm-pool slack threshold
        triangle_k: Triangle rows per separation round
        lp_limits: Simplex tolerances
        vertex: SEP solution of ``inst`` when already known

    Returns:
        HardenOutcome

    Raises:
        IntegralVertexError: If SEP(inst) has an integral optimum
    """
    x_bar = vertex if vertex is not None else solve_sep(inst, lp_limits)
    if not x_bar.fractional:
        raise IntegralVertexError(f"SEP optimum of {inst.name or 'instance'} is integral; nothing to harden")

    limits = limits or SolveLimits()
    started = time.perf_counter()
    hopt_limits = SolveLimits() if limits.time_limit is None else SolveLimits(time_limit=limits.time_limit / 2)
    hopt = solve_hopt(x_bar, 1.0, triangle_k=triangle_k, seed=seed, limits=hopt_limits, lp_limits=lp_limits)
    pool = warm_pool(hopt, tau)
    ihopt = solve_ihopt(x_bar, delta, limits=_remaining(limits, started), pool=pool, triangle_k=triangle_k,
                        seed=seed, lp_limits=lp_limits)
    name = f"{inst.name}_hard" if inst.name else "hard"
    hard = ihopt.instance(name=name)

    before = evaluate(inst, reps, seed, limits, lp_limits)
    after = evaluate(hard, reps, seed, limits, lp_limits)
    _, _, hopt_gap = instance_gap(hopt.instance(), lp_limits, limits)

    support_preserved = bool(np.array_equal(after.sep_solution.support(), x_bar.support()))
    gap_regression = hopt.status == OPTIMAL and after.gap < hopt_gap - 1e-6
    if gap_regression:
        logger.warning("IH-OPT gap %.6f below H-OPT gap %.6f for %s", after.gap, hopt_gap, name)
    if hopt.status == OPTIMAL and before.gap > hopt_gap + 1e-6:
        logger.warning("H-OPT gap %.6f below source gap %.6f for %s", hopt_gap, before.gap, name)
    logger.info("harden name=%s gap %.6f -> %.6f (H-OPT %.6f) status=%s", name, before.gap, after.gap, hopt_gap,
                ihopt.status)
    return HardenOutcome(hard, before, after, hopt, ihopt, hopt_gap, support_preserved, gap_regression)


@dataclass(frozen=True)
class GeneratedInstance:
    """One hardened vertex of a batch."""

    index: int
    vertex_key: str
    outcome: HardenOutcome

    @property
    def gap(self) -> float:
        return self.outcome.after.gap


def _harden_task(index: int, inst: TspInstance, vertex: SepSolution, options: Dict[str, Any]) -> HardenOutcome:
    return harden(inst, vertex=vertex, **options)


def pipeline_generate(n: int, r: int, delta: int = DEFAULT_DELTA, seed: int = 0,
                      limits: Optional[SolveLimits] = None, workers: int = 1, reps: int = DEFAULT_REPS,
                      burn_in: int = DEFAULT_BURN_IN, thin: int = DEFAULT_THIN,
                      max_draws: int = DEFAULT_MAX_DRAWS, tau: float = DEFAULT_TAU,
                      triangle_k: int = DEFAULT_TRIANGLE_K) -> List[GeneratedInstance]:
    """Sample ``r`` vertices, harden each, rank by gap then by median node count.

    Vertices that fail to harden are logged and skipped. With ``workers > 1``
    hardening fans out to a process pool; results merge by vertex index.

    Returns:
        Hardened instances, hardest first
    """
    vertices = algorithm1_sample_vertices(n, r, seed, burn_in, thin, max_draws)
    options = {'delta': delta, 'limits': limits, 'reps': reps, 'seed': seed, 'tau': tau, 'triangle_k': triangle_k}
    jobs = [(idx, v.source.instance(name=f"n{n}_s{seed}_v{idx}"), v.vertex) for idx, v in enumerate(vertices)]

    outcomes: Dict[int, HardenOutcome] = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_harden_task, idx, inst, vertex, options): idx for idx, inst, vertex in jobs}
            for future in as_completed(futures):
                idx = futures[future]
                try:
                    outcomes[idx] = future.result()
                except HardTspError as e:
                    logger.error("vertex %d failed: %s", idx, e)
    else:
        for idx, inst, vertex in jobs:
            try:
                outcomes[idx] = _harden_task(idx, inst, vertex, options)
            except HardTspError as e:
                logger.error("vertex %d failed: %s", idx, e)

    generated = [GeneratedInstance(idx, vertices[idx].key, outcomes[idx]) for idx in sorted(outcomes)]
    generated.sort(key=lambda g: (-g.gap, -g.outcome.after.hardness.median_nodes, g.index))
    logger.info("generated n=%d r=%d hardened=%d best_gap=%s", n, r, len(generated),
                f"{generated[0].gap:.6f}" if generated else "none")
    return generated


def delta_sweep(inst: TspInstance, deltas: Sequence[int] = (100, 1000, 10000), limits: Optional[SolveLimits] = None,
                reps: int = DEFAULT_REPS, seed: int = 0, tau: float = DEFAULT_TAU,
                triangle_k: int = DEFAULT_TRIANGLE_K) -> List[Dict[str, Any]]:
    """Harden one instance at several ``delta`` values sharing SEP, H-OPT and the warm pool.

    Returns:
        One row per delta with gap, hardness proxy and IH-OPT status
    """
    x_bar = solve_sep(inst)
    if not x_bar.fractional:
        raise IntegralVertexError(f"SEP optimum of {inst.name or 'instance'} is integral; nothing to harden")
    hopt = solve_hopt(x_bar, 1.0, triangle_k=triangle_k, seed=seed,
                      limits=SolveLimits(time_limit=limits.time_limit) if limits else None)
    rows = []
    for delta in deltas:
        started = time.perf_counter()
        ihopt = solve_ihopt(x_bar, delta, limits=limits, pool=warm_pool(hopt, tau), triangle_k=triangle_k, seed=seed)
        report = evaluate(ihopt.instance(name=f"{inst.name}_d{delta}"), reps, seed, limits)
        rows.append({
            'delta': int(delta),
            'status': ihopt.status,
            'objective': ihopt.objective,
            'gap': report.gap,
            'median_nodes': report.hardness.median_nodes,
            'median_runtime': report.hardness.median_runtime,
            'harden_time': time.perf_counter() - started,
        })
        logger.info("delta sweep delta=%d gap=%.6f median_nodes=%s", delta, report.gap,
                    report.hardness.median_nodes)
    return rows
