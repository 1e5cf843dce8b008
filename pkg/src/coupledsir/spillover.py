"""Monte Carlo spillover experiments: sweeps, transition detection, regime
boundaries, reservoir calibration, and topology comparison.

Conventions: layer 1 is the novel host population, layer 2 the reservoir.
Initial infections are seeded in the reservoir; the spillover size of a
realization is the host-layer ever-infected count. A realization with size
at least 3 counts as a spillover event, and a scenario with spillover
probability below 0.1 is classified as non-spillover.

Every probability estimate re-derives its per-realization seeds from
(master_seed, r), so sweeps, bisections, and ensembles all see common random
numbers and identical configurations reproduce results bit-for-bit.
"""
from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import BoundaryError, CalibrationError, ParameterError
from .gillespie import SimulationEngine, realization_seeds
from .graphs import Graph, hub_interlink_pairs, random_interlink_pairs, select_hubs
from .params import EpidemicParams

__all__ = [
    "SweepResult",
    "BoundaryResult",
    "CalibrationResult",
    "spillover_probability",
    "detect_transition",
    "sweep_links",
    "sweep_beta12",
    "regime_boundary",
    "calibrate_reservoir_rate",
    "topology_threshold_links",
]

SIZE_THRESHOLD = 3
P_THRESHOLD = 0.1


def spillover_probability(sizes: Sequence[int], size_threshold: int = SIZE_THRESHOLD) -> float:
    """Fraction of realizations whose host-layer size reaches the threshold."""
    sizes = np.asarray(sizes)
    if sizes.size == 0:
        raise ParameterError("cannot estimate a probability from an empty size list")
    return float(np.count_nonzero(sizes >= size_threshold) / sizes.size)


def detect_transition(
    grid: Sequence[float], probs: Sequence[float], p_threshold: float = P_THRESHOLD
) -> Optional[float]:
    """Linearly interpolated parameter value where the probability first
    crosses p_threshold; None if it never does."""
    grid = np.asarray(grid, dtype=np.float64)
    probs = np.asarray(probs, dtype=np.float64)
    if grid.shape != probs.shape:
        raise ParameterError(
            f"grid has {grid.size} values but probabilities has {probs.size}"
        )
    if np.any(np.diff(grid) <= 0):
        raise ParameterError("grid must be strictly increasing")
    if probs.size == 0:
        return None
    if probs[0] >= p_threshold:
        return float(grid[0])
    for j in range(1, probs.size):
        if probs[j - 1] < p_threshold <= probs[j]:
            frac = (p_threshold - probs[j - 1]) / (probs[j] - probs[j - 1])
            return float(grid[j - 1] + frac * (grid[j] - grid[j - 1]))
    return None


@dataclass
class SweepResult:
    """Spillover sizes and probability estimates over one parameter grid.

    sizes[k] holds the raw host-layer ever-infected counts of the R
    realizations at grid[k]; sizes below the threshold clamp to zero in
    `clamped_sizes`. stderr is the binomial sqrt(p*(1-p)/R).
    """

    parameter: str
    grid: np.ndarray
    sizes: list[np.ndarray]
    R: int
    size_threshold: int = SIZE_THRESHOLD
    p_threshold: float = P_THRESHOLD
    probabilities: np.ndarray = field(init=False)
    stderrs: np.ndarray = field(init=False)
    critical: Optional[float] = field(init=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        probs = np.array(
            [spillover_probability(s, self.size_threshold) for s in self.sizes]
        )
        self.probabilities = probs
        self.stderrs = np.sqrt(probs * (1.0 - probs) / self.R)
        self.critical = detect_transition(self.grid, probs, self.p_threshold)

    def clamped_sizes(self, k: int) -> np.ndarray:
        raw = self.sizes[k]
        return np.where(raw >= self.size_threshold, raw, 0)

    def sizes_to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("param_value,realization,raw_size,clamped_size\n")
            for k, value in enumerate(self.grid):
                clamped = self.clamped_sizes(k)
                for r, (raw, cl) in enumerate(zip(self.sizes[k], clamped)):
                    fh.write(f"{value:.12g},{r},{raw},{cl}\n")

    def summary_to_csv(self, path) -> None:
        crit = "" if self.critical is None else f"{self.critical:.12g}"
        with open(path, "w") as fh:
            fh.write("param_value,R,probability,stderr,critical_value\n")
            for value, p, se in zip(self.grid, self.probabilities, self.stderrs):
                fh.write(f"{value:.12g},{self.R},{p:.12g},{se:.12g},{crit}\n")


class _MonteCarlo:
    """Shared machinery: one engine per layer pair, per-realization coupling
    redraw, and optional process-parallel ensembles with index-stable output."""

    def __init__(
        self,
        g_host: Graph,
        g_reservoir: Graph,
        seeds_per_run: int,
        master_seed: int,
        coupling_mode: str = "random",
        num_hubs: int = 5,
        redraw: bool = True,
        n_jobs: int = 1,
    ):
        if coupling_mode not in ("random", "hubs"):
            raise ParameterError(f"unknown coupling mode {coupling_mode!r}")
        if seeds_per_run < 0 or seeds_per_run > g_reservoir.n:
            raise ParameterError("seeds_per_run outside [0, reservoir size]")
        self.g_host = g_host
        self.g_reservoir = g_reservoir
        self.seeds_per_run = seeds_per_run
        self.master_seed = master_seed
        self.coupling_mode = coupling_mode
        self.num_hubs = num_hubs
        self.redraw = redraw
        self.n_jobs = n_jobs
        self.engine = SimulationEngine(g_host, g_reservoir)
        self.hubs = select_hubs(g_reservoir, num_hubs) if coupling_mode == "hubs" else None

    def _draw_pairs(self, rng: np.random.Generator, link_count: int) -> np.ndarray:
        if self.coupling_mode == "hubs":
            return hub_interlink_pairs(rng, self.g_host.n, self.hubs, link_count)
        return random_interlink_pairs(rng, self.g_host.n, self.g_reservoir.n, link_count)

    def _one(self, params: EpidemicParams, link_count: int, r: int, inter) -> tuple[int, int]:
        node_seed, sim_seed, coupling_seed = realization_seeds(self.master_seed, r)
        if inter is None:
            pairs = self._draw_pairs(np.random.default_rng(coupling_seed), link_count)
            inter = self.engine.interlink_csr(pairs)
        rng = np.random.default_rng(node_seed)
        local = np.sort(rng.choice(self.g_reservoir.n, size=self.seeds_per_run, replace=False))
        seeds = (local + self.g_host.n).astype(np.int64)
        out = self.engine.run(params, inter, seeds, sim_seed)
        return out.ever_infected

    def _fixed_inter(self, link_count: int, R: int):
        # fixed-coupling mode uses the coupling stream one past the last
        # realization, so it never overlaps a realization's own streams
        _, _, coupling_seed = realization_seeds(self.master_seed, R)
        pairs = self._draw_pairs(np.random.default_rng(coupling_seed), link_count)
        return self.engine.interlink_csr(pairs)

    def _chunk(self, params, link_count, rs, inter) -> np.ndarray:
        out = np.empty((len(rs), 2), dtype=np.int64)
        for i, r in enumerate(rs):
            out[i] = self._one(params, link_count, r, inter)
        return out

    def sizes(self, params: EpidemicParams, link_count: int, R: int) -> np.ndarray:
        """(R, 2) ever-infected counts (host, reservoir), realization-ordered."""
        if R < 1:
            raise ParameterError("realization count R must be at least 1")
        if link_count < 0:
            raise ParameterError("link count must be non-negative")
        inter = None if self.redraw else self._fixed_inter(link_count, R)
        if self.n_jobs <= 1 or R < 64:
            return self._chunk(params, link_count, list(range(R)), inter)
        per = max(1, R // (4 * self.n_jobs))
        chunks = [list(range(s, min(s + per, R))) for s in range(0, R, per)]
        init_args = (
            self.g_host, self.g_reservoir, self.seeds_per_run, self.master_seed,
            self.coupling_mode, self.num_hubs, self.redraw,
        )
        results = np.empty((R, 2), dtype=np.int64)
        with ProcessPoolExecutor(
            max_workers=self.n_jobs, initializer=_mc_worker_init, initargs=(init_args,)
        ) as pool:
            tasks = [(params, link_count, rs, None if self.redraw else R) for rs in chunks]
            for rs, block in zip(chunks, pool.map(_mc_worker_run, tasks)):
                results[rs[0]:rs[-1] + 1] = block
        return results

    def host_sizes(self, params: EpidemicParams, link_count: int, R: int) -> np.ndarray:
        return self.sizes(params, link_count, R)[:, 0]


_MC_WORKER: dict = {}


def _mc_worker_init(args) -> None:
    g_host, g_reservoir, seeds_per_run, master_seed, mode, num_hubs, redraw = args
    _MC_WORKER["mc"] = _MonteCarlo(
        g_host, g_reservoir, seeds_per_run, master_seed,
        coupling_mode=mode, num_hubs=num_hubs, redraw=redraw, n_jobs=1,
    )


def _mc_worker_run(task) -> np.ndarray:
    params, link_count, rs, fixed_R = task
    mc: _MonteCarlo = _MC_WORKER["mc"]
    inter = None if fixed_R is None else mc._fixed_inter(link_count, fixed_R)
    return mc._chunk(params, link_count, rs, inter)


def _fraction_to_count(fraction: float, n1: int, n2: int) -> int:
    return int(np.floor(fraction * n1 * n2 + 0.5))


def sweep_links(
    g_host: Graph,
    g_reservoir: Graph,
    params: EpidemicParams,
    fraction_grid: Sequence[float],
    R: int,
    seeds_per_run: int = 10,
    master_seed: int = 0,
    coupling_mode: str = "random",
    num_hubs: int = 5,
    redraw: bool = True,
    n_jobs: int = 1,
) -> SweepResult:
    """Spillover sizes over a grid of inter-link fractions.

    Each realization places a fresh coupling of round(f*N1*N2) links
    (random or hub-targeted), seeds the reservoir, and runs to extinction.
    """
    grid = [float(f) for f in fraction_grid]
    if not grid:
        raise ParameterError("fraction grid must be non-empty")
    if any(f <= 0 or f > 1 for f in grid):
        raise ParameterError("fraction grid values must lie in (0, 1]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ParameterError("fraction grid must be strictly increasing")
    mc = _MonteCarlo(
        g_host, g_reservoir, seeds_per_run, master_seed,
        coupling_mode=coupling_mode, num_hubs=num_hubs, redraw=redraw, n_jobs=n_jobs,
    )
    sizes = []
    for f in grid:
        count = _fraction_to_count(f, g_host.n, g_reservoir.n)
        sizes.append(mc.host_sizes(params, count, R))
    return SweepResult(parameter="link_fraction", grid=np.array(grid), sizes=sizes, R=R)


def sweep_beta12(
    g_host: Graph,
    g_reservoir: Graph,
    params_base: EpidemicParams,
    beta12_grid: Sequence[float],
    link_count: int = 1000,
    R: int = 2000,
    seeds_per_run: int = 10,
    master_seed: int = 0,
    redraw: bool = True,
    n_jobs: int = 1,
) -> SweepResult:
    """Spillover sizes over a grid of host<-reservoir infection rates with a
    fixed inter-link count. A zero rate is allowed as a no-transmission control."""
    grid = [float(b) for b in beta12_grid]
    if not grid:
        raise ParameterError("beta12 grid must be non-empty")
    if any(b < 0 for b in grid):
        raise ParameterError("beta12 grid values must be non-negative")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ParameterError("beta12 grid must be strictly increasing")
    if link_count > g_host.n * g_reservoir.n:
        raise ParameterError("link count exceeds the number of potential inter-pairs")
    mc = _MonteCarlo(g_host, g_reservoir, seeds_per_run, master_seed, redraw=redraw, n_jobs=n_jobs)
    sizes = []
    for b in grid:
        params = dataclasses.replace(params_base, beta12=b)
        sizes.append(mc.host_sizes(params, link_count, R))
    return SweepResult(parameter="beta12", grid=np.array(grid), sizes=sizes, R=R)


@dataclass
class BoundaryResult:
    """(fraction, critical beta12) pairs with the fitted hyperbola constant
    c = median(fraction * beta12_critical)."""

    points: list[tuple[float, float]]
    constant: float
    max_relative_deviation: float
    failures: list[tuple[float, str]]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("fraction,beta12_critical,product\n")
            for f, b in self.points:
                fh.write(f"{f:.12g},{b:.12g},{f * b:.12g}\n")


def regime_boundary(
    g_host: Graph,
    g_reservoir: Graph,
    params_base: EpidemicParams,
    fraction_grid: Sequence[float],
    R: int,
    master_seed: int = 0,
    p_threshold: float = P_THRESHOLD,
    seeds_per_run: int = 10,
    bracket: tuple[float, float] = (0.001, 1.0),
    max_iter: int = 12,
    n_jobs: int = 1,
) -> BoundaryResult:
    """Locate the critical beta12 for each link fraction by bisection.

    Fractions must exceed 0.001, the stated validity range of the
    inverse-proportionality regime. A fraction whose bracket never crosses
    the probability threshold is recorded as a failure, not fatal.
    """
    fractions = [float(f) for f in fraction_grid]
    if not fractions:
        raise ParameterError("fraction grid must be non-empty")
    if any(f <= 0.001 for f in fractions):
        raise ParameterError("regime boundary requires fractions above 0.001")
    mc = _MonteCarlo(g_host, g_reservoir, seeds_per_run, master_seed, n_jobs=n_jobs)

    points = []
    failures = []
    for f in fractions:
        count = _fraction_to_count(f, g_host.n, g_reservoir.n)

        def prob(beta12: float) -> float:
            params = dataclasses.replace(params_base, beta12=beta12)
            return spillover_probability(mc.host_sizes(params, count, R))

        lo, hi = bracket
        p_lo, p_hi = prob(lo), prob(hi)
        if not (p_lo < p_threshold <= p_hi):
            failures.append(
                (f, f"probability bracket [{p_lo:.4g}, {p_hi:.4g}] does not cross {p_threshold}")
            )
            continue
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if prob(mid) >= p_threshold:
                hi = mid
            else:
                lo = mid
        points.append((f, 0.5 * (lo + hi)))

    if not points:
        raise BoundaryError("no fraction produced a bracketed transition")
    products = np.array([f * b for f, b in points])
    constant = float(np.median(products))
    max_rel = float(np.max(np.abs(products - constant)) / constant) if constant > 0 else 0.0
    return BoundaryResult(
        points=points, constant=constant, max_relative_deviation=max_rel, failures=failures
    )


@dataclass
class CalibrationResult:
    beta22: float
    achieved_mean: float
    R: int
    trace: list[tuple[float, float]]


def calibrate_reservoir_rate(
    g_reservoir: Graph,
    target_mean_interval: tuple[float, float] = (51.0, 53.0),
    seeds_per_run: int = 10,
    mu: float = 1.0,
    R: int = 600,
    master_seed: int = 0,
    max_iter: int = 40,
    n_jobs: int = 1,
) -> CalibrationResult:
    """Bisect beta22 until the mean reservoir ever-infected count falls in
    the target interval.

    The upper bracket is found by doubling. Common random numbers make each
    estimate a deterministic, near-monotone function of beta22; if bisection
    still fails within max_iter steps, R is increased once (x4) before
    giving up with a CalibrationError carrying the trace.
    """
    lo_t, hi_t = target_mean_interval
    if lo_t <= 0 or hi_t < lo_t:
        raise ParameterError("target interval must be positive with lo <= hi")
    if seeds_per_run > lo_t:
        raise ParameterError(
            f"target mean {lo_t} is below the {seeds_per_run} always-infected seeds"
        )
    placeholder_host = Graph(1, [])
    trace: list[tuple[float, float]] = []

    def attempt(R_eff: int) -> Optional[CalibrationResult]:
        mc = _MonteCarlo(placeholder_host, g_reservoir, seeds_per_run, master_seed, n_jobs=n_jobs)

        def mean_size(beta22: float) -> float:
            params = EpidemicParams(0.0, 0.0, 0.0, beta22, mu=mu)
            m = float(mc.sizes(params, 0, R_eff)[:, 1].mean())
            trace.append((beta22, m))
            return m

        m0 = mean_size(0.0)
        if lo_t <= m0 <= hi_t:
            return CalibrationResult(0.0, m0, R_eff, list(trace))
        if m0 > hi_t:
            return None  # even zero transmission overshoots; unachievable
        hi = 0.05
        while mean_size(hi) < hi_t:
            hi *= 2.0
            if hi > 1e6:
                return None
        lo = 0.0
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            m = mean_size(mid)
            if lo_t <= m <= hi_t:
                return CalibrationResult(mid, m, R_eff, list(trace))
            if m < lo_t:
                lo = mid
            else:
                hi = mid
        return None

    result = attempt(R) or attempt(4 * R)
    if result is None:
        raise CalibrationError(
            f"could not place the mean reservoir size inside [{lo_t}, {hi_t}]",
            trace=trace,
        )
    return result


def topology_threshold_links(
    entries: Sequence[tuple[str, Graph, float]],
    g_host: Graph,
    beta12: float,
    mu: float = 1.0,
    seeds_per_run: int = 10,
    R: int = 2000,
    master_seed: int = 0,
    p_threshold: float = P_THRESHOLD,
    n_jobs: int = 1,
) -> dict[str, Optional[int]]:
    """Minimal inter-link count reaching the spillover threshold, per topology.

    entries are (name, reservoir graph, calibrated beta22) triples; each
    search doubles the link count until the spillover probability reaches
    p_threshold, then bisects down to the minimal integer count. None means
    the threshold is unreachable (e.g. beta12 = 0).
    """
    results: dict[str, Optional[int]] = {}
    for name, g_reservoir, beta22 in entries:
        params = EpidemicParams(0.0, beta12, 0.0, beta22, mu=mu)
        mc = _MonteCarlo(g_host, g_reservoir, seeds_per_run, master_seed, n_jobs=n_jobs)
        capacity = g_host.n * g_reservoir.n

        def prob(count: int) -> float:
            return spillover_probability(mc.host_sizes(params, count, R))

        lo, hi = 0, None  # prob at 0 links is trivially 0
        probe = 1
        while True:
            c = min(probe, capacity)
            if prob(c) >= p_threshold:
                hi = c
                break
            lo = c
            if c == capacity:
                break
            probe *= 2
        if hi is None:
            results[name] = None
            continue
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if prob(mid) >= p_threshold:
                hi = mid
            else:
                lo = mid
        results[name] = hi
    return results
