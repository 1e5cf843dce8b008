"""Exact continuous-time Markov chain SIR simulation on a two-layer network.

A susceptible node of layer m becomes infected at rate
beta_m1 * (infected neighbors in layer 1) + beta_m2 * (infected neighbors in
layer 2); an infected node recovers at rate mu. Waiting times are exponential
in the total active rate and the event is chosen proportionally to per-node
rates, so trajectories are statistically exact.

Per-node rates live in a Fenwick tree (O(log n) update and sampling); an
event touches only the reacting node's neighborhood. The tree is rebuilt
from scratch every 10^4 events to bound floating-point drift. The hot loop
is JIT-compiled.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .errors import ParameterError
from .graphs import Graph, LayeredNetwork
from .params import EpidemicParams

__all__ = [
    "SeedStrategy",
    "EventLog",
    "RealizationOutcome",
    "SimulationEngine",
    "simulate",
    "run_ensemble",
    "realization_seeds",
    "ensemble_summary_csv",
]

_REBUILD_EVERY = 10_000
_SEED_MASK = 0xFFFFFFFF


@njit(cache=True)
def _fw_add(tree, i, delta):
    i += 1
    n = tree.shape[0] - 1
    while i <= n:
        tree[i] += delta
        i += i & (-i)


@njit(cache=True)
def _fw_total(tree):
    i = tree.shape[0] - 1
    s = 0.0
    while i > 0:
        s += tree[i]
        i -= i & (-i)
    return s


@njit(cache=True)
def _fw_find(tree, top_bit, x):
    """0-based index of the first node whose cumulative rate reaches x."""
    n = tree.shape[0] - 1
    idx = 0
    bit = top_bit
    while bit > 0:
        nxt = idx + bit
        if nxt <= n and tree[nxt] < x:
            idx = nxt
            x -= tree[nxt]
        bit >>= 1
    return idx


@njit(cache=True)
def _infect(
    tree, noderate, status,
    intra_indptr, intra_indices, inter_indptr, inter_indices,
    n1, b_intra1, b_intra2, b12, b21, mu, v,
):
    status[v] = 1
    _fw_add(tree, v, mu - noderate[v])
    noderate[v] = mu
    c = b_intra1 if v < n1 else b_intra2
    if c > 0.0:
        for e in range(intra_indptr[v], intra_indptr[v + 1]):
            u = intra_indices[e]
            if status[u] == 0:
                _fw_add(tree, u, c)
                noderate[u] += c
    # inter rows of a layer-1 node list layer-2 targets, which receive at b21
    c = b21 if v < n1 else b12
    if c > 0.0:
        for e in range(inter_indptr[v], inter_indptr[v + 1]):
            u = inter_indices[e]
            if status[u] == 0:
                _fw_add(tree, u, c)
                noderate[u] += c


@njit(cache=True)
def _recover(
    tree, noderate, status,
    intra_indptr, intra_indices, inter_indptr, inter_indices,
    n1, b_intra1, b_intra2, b12, b21, mu, v,
):
    status[v] = 2
    _fw_add(tree, v, -noderate[v])
    noderate[v] = 0.0
    c = b_intra1 if v < n1 else b_intra2
    if c > 0.0:
        for e in range(intra_indptr[v], intra_indptr[v + 1]):
            u = intra_indices[e]
            if status[u] == 0:
                _fw_add(tree, u, -c)
                noderate[u] -= c
    c = b21 if v < n1 else b12
    if c > 0.0:
        for e in range(inter_indptr[v], inter_indptr[v + 1]):
            u = inter_indices[e]
            if status[u] == 0:
                _fw_add(tree, u, -c)
                noderate[u] -= c


@njit(cache=True)
def _rebuild(
    tree, noderate, status,
    intra_indptr, intra_indices, inter_indptr, inter_indices,
    n1, b_intra1, b_intra2, b12, b21, mu,
):
    """Exact recomputation of all rates; bounds incremental float drift."""
    n = noderate.shape[0]
    for v in range(n):
        noderate[v] = mu if status[v] == 1 else 0.0
    for v in range(n):
        if status[v] != 1:
            continue
        c = b_intra1 if v < n1 else b_intra2
        if c > 0.0:
            for e in range(intra_indptr[v], intra_indptr[v + 1]):
                u = intra_indices[e]
                if status[u] == 0:
                    noderate[u] += c
        c = b21 if v < n1 else b12
        if c > 0.0:
            for e in range(inter_indptr[v], inter_indptr[v + 1]):
                u = inter_indices[e]
                if status[u] == 0:
                    noderate[u] += c
    for i in range(tree.shape[0]):
        tree[i] = 0.0
    for v in range(n):
        if noderate[v] != 0.0:
            _fw_add(tree, v, noderate[v])


@njit(cache=True)
def _run_kernel(
    intra_indptr, intra_indices, inter_indptr, inter_indices,
    n1, b_intra1, b_intra2, b12, b21, mu,
    seed_nodes, kernel_seed, t_max,
    ev_t, ev_node, ev_kind, record_log,
):
    np.random.seed(kernel_seed)
    n = intra_indptr.shape[0] - 1
    status = np.zeros(n, dtype=np.int8)
    noderate = np.zeros(n)
    tree = np.zeros(n + 1)
    top_bit = 1
    while (top_bit << 1) <= n:
        top_bit <<= 1

    ever1 = 0
    ever2 = 0
    n_inf = 0
    for k in range(seed_nodes.shape[0]):
        v = seed_nodes[k]
        if status[v] == 0:
            _infect(tree, noderate, status, intra_indptr, intra_indices,
                    inter_indptr, inter_indices, n1, b_intra1, b_intra2,
                    b12, b21, mu, v)
            n_inf += 1
            if v < n1:
                ever1 += 1
            else:
                ever2 += 1

    t = 0.0
    events = 0
    n_logged = 0
    while n_inf > 0:
        total = _fw_total(tree)
        if total <= 0.0:
            break
        wait = np.random.exponential(1.0 / total)
        if t + wait > t_max:
            return ever1, ever2, t_max, False, n_logged
        t += wait
        x = np.random.random() * total
        v = _fw_find(tree, top_bit, x)
        if v >= n:
            v = n - 1
        if status[v] == 0:
            _infect(tree, noderate, status, intra_indptr, intra_indices,
                    inter_indptr, inter_indices, n1, b_intra1, b_intra2,
                    b12, b21, mu, v)
            n_inf += 1
            if v < n1:
                ever1 += 1
            else:
                ever2 += 1
            kind = 0
        elif status[v] == 1:
            _recover(tree, noderate, status, intra_indptr, intra_indices,
                     inter_indptr, inter_indices, n1, b_intra1, b_intra2,
                     b12, b21, mu, v)
            n_inf -= 1
            kind = 1
        else:
            # float dust selected a zero-rate node; recompute and redraw
            _rebuild(tree, noderate, status, intra_indptr, intra_indices,
                     inter_indptr, inter_indices, n1, b_intra1, b_intra2,
                     b12, b21, mu)
            continue
        if record_log:
            ev_t[n_logged] = t
            ev_node[n_logged] = v
            ev_kind[n_logged] = kind
            n_logged += 1
        events += 1
        if events % _REBUILD_EVERY == 0:
            _rebuild(tree, noderate, status, intra_indptr, intra_indices,
                     inter_indptr, inter_indices, n1, b_intra1, b_intra2,
                     b12, b21, mu)
    return ever1, ever2, t, True, n_logged


@dataclass(frozen=True)
class SeedStrategy:
    """Draw k initially infected nodes uniformly without replacement from one layer."""

    layer: int
    k: int

    def __post_init__(self):
        if self.layer not in (1, 2):
            raise ParameterError("seed layer must be 1 or 2")
        if self.k < 0:
            raise ParameterError("seed count must be non-negative")

    def draw(self, net: LayeredNetwork, rng: np.random.Generator) -> np.ndarray:
        """Global node indices of the seeds for one realization."""
        size = net.n1 if self.layer == 1 else net.n2
        if self.k > size:
            raise ParameterError(f"cannot seed {self.k} nodes in a layer of {size}")
        offset = 0 if self.layer == 1 else net.n1
        local = np.sort(rng.choice(size, size=self.k, replace=False))
        return (local + offset).astype(np.int64)


@dataclass
class EventLog:
    """Chronological transitions: kind 0 = infection (S->I), 1 = recovery (I->R).

    Nodes are global indices; `n1` translates them back to per-layer ones.
    """

    times: np.ndarray
    nodes: np.ndarray
    kinds: np.ndarray
    n1: int

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("t,node,layer,transition\n")
            for t, v, kind in zip(self.times, self.nodes, self.kinds):
                layer = 1 if v < self.n1 else 2
                local = v if v < self.n1 else v - self.n1
                name = "S->I" if kind == 0 else "I->R"
                fh.write(f"{t:.12g},{local},{layer},{name}\n")


@dataclass
class RealizationOutcome:
    """Result of one stochastic realization.

    ever_infected counts every node that entered I at any time, including
    initial seeds. extinction_time is the time of the last event when the
    run died out; if t_max interrupted it, extinct is False and the time
    equals t_max.
    """

    ever_infected: tuple[int, int]
    extinction_time: float
    extinct: bool
    rng_seed: int
    events: Optional[EventLog] = None

    @property
    def ever_infected_layer1(self) -> int:
        return self.ever_infected[0]

    @property
    def ever_infected_layer2(self) -> int:
        return self.ever_infected[1]


class SimulationEngine:
    """Reusable per-layer-pair simulation state.

    Holds the merged intra-layer adjacency in CSR form; rates and inter-links
    are per-run arguments, so one engine serves whole parameter sweeps with
    redrawn couplings.
    """

    def __init__(self, g1: Graph, g2: Graph):
        self.g1 = g1
        self.g2 = g2
        self.n1 = g1.n
        self.n = g1.n + g2.n
        p1, i1 = g1.neighbor_csr
        p2, i2 = g2.neighbor_csr
        self._intra_indptr = np.concatenate([p1, p1[-1] + p2[1:]]).astype(np.int64)
        self._intra_indices = np.concatenate([i1, i2 + g1.n]).astype(np.int64)

    def interlink_csr(self, pairs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Bidirectional CSR over global nodes for an (m, 2) inter-pair array."""
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        us, ws = pairs[:, 0], pairs[:, 1]
        counts = np.concatenate([
            np.bincount(us, minlength=self.n1),
            np.bincount(ws, minlength=self.n - self.n1),
        ])
        indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        order1 = np.argsort(us, kind="stable")
        order2 = np.argsort(ws, kind="stable")
        indices = np.concatenate([ws[order1] + self.n1, us[order2]]).astype(np.int64)
        return indptr, indices

    def run(
        self,
        params: EpidemicParams,
        inter: tuple[np.ndarray, np.ndarray],
        seed_nodes: np.ndarray,
        kernel_seed: int,
        t_max: Optional[float] = None,
        record_log: bool = False,
    ) -> RealizationOutcome:
        inter_indptr, inter_indices = inter
        cap = 2 * self.n if record_log else 0
        ev_t = np.empty(cap)
        ev_node = np.empty(cap, dtype=np.int64)
        ev_kind = np.empty(cap, dtype=np.int8)
        kernel_seed = int(kernel_seed) & _SEED_MASK
        ever1, ever2, t_end, extinct, n_logged = _run_kernel(
            self._intra_indptr, self._intra_indices, inter_indptr, inter_indices,
            self.n1, params.beta11, params.beta22, params.beta12, params.beta21,
            params.mu,
            np.asarray(seed_nodes, dtype=np.int64),
            kernel_seed,
            math.inf if t_max is None else float(t_max),
            ev_t, ev_node, ev_kind, record_log,
        )
        log = None
        if record_log:
            log = EventLog(
                times=ev_t[:n_logged].copy(),
                nodes=ev_node[:n_logged].copy(),
                kinds=ev_kind[:n_logged].copy(),
                n1=self.n1,
            )
        return RealizationOutcome(
            ever_infected=(ever1, ever2),
            extinction_time=t_end,
            extinct=extinct,
            rng_seed=kernel_seed,
            events=log,
        )


def simulate(
    net: LayeredNetwork,
    params: EpidemicParams,
    seeds: Sequence[int],
    rng_seed: int,
    t_max: Optional[float] = None,
    record_log: bool = False,
) -> RealizationOutcome:
    """One exact realization from the given global seed nodes.

    Deterministic given rng_seed (reduced modulo 2^32 for the generator).
    An empty seed set is legal and yields an empty outcome.
    """
    seed_arr = np.asarray(sorted(set(int(s) for s in seeds)), dtype=np.int64)
    if seed_arr.size and (seed_arr.min() < 0 or seed_arr.max() >= net.n_total):
        raise ParameterError("seed node index out of range")
    engine = SimulationEngine(net.layer1, net.layer2)
    inter = engine.interlink_csr(net.interlinks)
    return engine.run(params, inter, seed_arr, rng_seed, t_max, record_log)


def realization_seeds(master_seed: int, r: int) -> tuple[int, int, int]:
    """Deterministic per-realization seeds (node_seed, sim_seed, coupling_seed).

    These are the first three words of
    numpy.random.SeedSequence((master_seed, r)); node_seed draws the initial
    infected set, sim_seed drives the event kernel, and coupling_seed places
    redrawn inter-links in sweeps.
    """
    a, b, c = np.random.SeedSequence((master_seed, r)).generate_state(3)
    return int(a), int(b), int(c)


def run_ensemble(
    net: LayeredNetwork,
    params: EpidemicParams,
    strategy: SeedStrategy,
    R: int,
    master_seed: int,
    t_max: Optional[float] = None,
    n_jobs: int = 1,
) -> list[RealizationOutcome]:
    """R independent realizations with per-realization derived seeds.

    Realization r redraws its seed nodes and uses the seeds from
    realization_seeds(master_seed, r); the output order is by realization
    index regardless of the execution schedule, so results are identical
    for any n_jobs.
    """
    if R < 1:
        raise ParameterError("realization count R must be at least 1")
    engine = SimulationEngine(net.layer1, net.layer2)
    inter = engine.interlink_csr(net.interlinks)

    def one(r: int) -> RealizationOutcome:
        node_seed, sim_seed, _ = realization_seeds(master_seed, r)
        seed_nodes = strategy.draw(net, np.random.default_rng(node_seed))
        return engine.run(params, inter, seed_nodes, sim_seed, t_max)

    if n_jobs <= 1 or R < 32:
        return [one(r) for r in range(R)]
    payload = (net, params, strategy, master_seed, t_max)
    chunks = _index_chunks(R, n_jobs)
    results: list[Optional[RealizationOutcome]] = [None] * R
    with ProcessPoolExecutor(
        max_workers=n_jobs, initializer=_ensemble_worker_init, initargs=(payload,)
    ) as pool:
        for chunk, outs in zip(chunks, pool.map(_ensemble_worker_run, chunks)):
            for r, out in zip(chunk, outs):
                results[r] = out
    return results  # type: ignore[return-value]


def _index_chunks(R: int, n_jobs: int) -> list[list[int]]:
    per = max(1, R // (4 * n_jobs))
    return [list(range(s, min(s + per, R))) for s in range(0, R, per)]


_ENSEMBLE_CTX: dict = {}


def _ensemble_worker_init(payload) -> None:
    net, params, strategy, master_seed, t_max = payload
    engine = SimulationEngine(net.layer1, net.layer2)
    _ENSEMBLE_CTX.update(
        net=net, params=params, strategy=strategy, master_seed=master_seed,
        t_max=t_max, engine=engine, inter=engine.interlink_csr(net.interlinks),
    )


def _ensemble_worker_run(chunk: list[int]) -> list[RealizationOutcome]:
    ctx = _ENSEMBLE_CTX
    outs = []
    for r in chunk:
        node_seed, sim_seed, _ = realization_seeds(ctx["master_seed"], r)
        seed_nodes = ctx["strategy"].draw(ctx["net"], np.random.default_rng(node_seed))
        outs.append(ctx["engine"].run(ctx["params"], ctx["inter"], seed_nodes, sim_seed, ctx["t_max"]))
    return outs


def ensemble_summary_csv(outcomes: Sequence[RealizationOutcome], path) -> None:
    with open(path, "w") as fh:
        fh.write("realization,ever_infected_layer1,ever_infected_layer2,extinction_time\n")
        for r, out in enumerate(outcomes):
            fh.write(
                f"{r},{out.ever_infected[0]},{out.ever_infected[1]},"
                f"{out.extinction_time:.12g}\n"
            )
