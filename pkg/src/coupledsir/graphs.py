"""Random-graph generators, two-layer coupling, and edge-list I/O.

All generators are deterministic functions of (parameters, seed): the same
seed always reproduces the same graph. Nodes are labeled 0..n-1; edges are
undirected, without self-loops or duplicates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import GraphFormatError, ParameterError

__all__ = [
    "Graph",
    "LayeredNetwork",
    "LinkSpec",
    "gen_erdos_renyi",
    "gen_erdos_renyi_gnm",
    "gen_watts_strogatz",
    "gen_barabasi_albert",
    "gen_barabasi_albert_edges",
    "couple_random",
    "couple_to_hubs",
    "random_interlink_pairs",
    "hub_interlink_pairs",
    "select_hubs",
    "load_graph",
    "save_graph",
    "load_layered_network",
    "save_layered_network",
    "sample_without_replacement",
]


def sample_without_replacement(rng: np.random.Generator, population: int, k: int) -> np.ndarray:
    """Sample k distinct integers uniformly from range(population).

    Rejection-based so the cost scales with k, not with the population size
    (numpy's choice(replace=False) permutes the whole population).
    """
    if k < 0 or k > population:
        raise ParameterError(f"cannot sample {k} items from population of {population}")
    if k == 0:
        return np.empty(0, dtype=np.int64)
    if 2 * k >= population:
        return rng.permutation(population)[:k].astype(np.int64)
    chosen: list[np.ndarray] = []
    seen: set[int] = set()
    need = k
    while need > 0:
        # Oversample a little; expected collisions are ~k^2 / (2*population).
        batch = rng.integers(0, population, size=need + 16 + need * need // max(population, 1))
        # Keep first occurrences in draw order: that is exactly sampling
        # without replacement, so the resulting k-set is uniform.
        _, first_idx = np.unique(batch, return_index=True)
        fresh = batch[np.sort(first_idx)]
        fresh = fresh[[int(x) not in seen for x in fresh]] if seen else fresh
        take = fresh[:need]
        seen.update(int(x) for x in take)
        chosen.append(take.astype(np.int64))
        need = k - sum(len(c) for c in chosen)
    return np.concatenate(chosen)


class Graph:
    """An undirected simple graph stored as sorted neighbor lists.

    Instances are validated on construction and treated as immutable
    afterwards, so they can be shared freely across threads.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 0:
            raise ParameterError("node count must be non-negative")
        self.n = int(n)
        edge_arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if edge_arr.size:
            lo = np.minimum(edge_arr[:, 0], edge_arr[:, 1])
            hi = np.maximum(edge_arr[:, 0], edge_arr[:, 1])
            if lo.min() < 0 or hi.max() >= self.n:
                raise ParameterError("edge endpoint out of range")
            if np.any(lo == hi):
                raise ParameterError("self-loops are not allowed")
            order = np.lexsort((hi, lo))
            edge_arr = np.column_stack((lo[order], hi[order]))
            if len(edge_arr) > 1 and np.any(np.all(edge_arr[1:] == edge_arr[:-1], axis=1)):
                raise ParameterError("duplicate edges are not allowed")
        self.edges = edge_arr
        # CSR-style neighbor storage; per-node slices come out sorted.
        both_src = np.concatenate([edge_arr[:, 0], edge_arr[:, 1]]) if edge_arr.size else np.empty(0, np.int64)
        both_dst = np.concatenate([edge_arr[:, 1], edge_arr[:, 0]]) if edge_arr.size else np.empty(0, np.int64)
        order = np.lexsort((both_dst, both_src))
        self._nbr_indices = both_dst[order]
        counts = np.bincount(both_src, minlength=self.n) if self.n else np.empty(0, np.int64)
        self._nbr_indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self._adjacency = None
        self._spectral_radius = None

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self._nbr_indptr)

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor array of node v (a read-only view)."""
        return self._nbr_indices[self._nbr_indptr[v]:self._nbr_indptr[v + 1]]

    @property
    def neighbor_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) arrays of the neighbor structure."""
        return self._nbr_indptr, self._nbr_indices

    def adjacency(self):
        """Adjacency matrix as a scipy CSR matrix (cached)."""
        if self._adjacency is None:
            from scipy.sparse import csr_matrix

            data = np.ones(len(self._nbr_indices), dtype=np.float64)
            self._adjacency = csr_matrix(
                (data, self._nbr_indices, self._nbr_indptr), shape=(self.n, self.n)
            )
        return self._adjacency

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges}

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edge_count})"


@dataclass(frozen=True)
class LinkSpec:
    """How many inter-layer links to place: exactly one of the three modes.

    probability: each of the N1*N2 potential pairs independently with prob omega.
    count:       exactly this many distinct pairs, uniform without replacement.
    fraction:    count = round(fraction * N1 * N2), round-half-up.
    """

    probability: Optional[float] = None
    count: Optional[int] = None
    fraction: Optional[float] = None

    def __post_init__(self):
        modes = [self.probability is not None, self.count is not None, self.fraction is not None]
        if sum(modes) != 1:
            raise ParameterError("LinkSpec requires exactly one of probability, count, fraction")
        if self.probability is not None and not 0.0 <= self.probability <= 1.0:
            raise ParameterError(f"link probability {self.probability} outside [0, 1]")
        if self.count is not None and self.count < 0:
            raise ParameterError("link count must be non-negative")
        if self.fraction is not None and not 0.0 <= self.fraction <= 1.0:
            raise ParameterError(f"link fraction {self.fraction} outside [0, 1]")

    def resolve_count(self, n1: int, n2: int) -> Optional[int]:
        """Requested link count for an n1 x n2 layer pair; None in probability mode."""
        potential = n1 * n2
        if self.probability is not None:
            return None
        if self.count is not None:
            if self.count > potential:
                raise ParameterError(
                    f"link count {self.count} exceeds the {potential} potential pairs"
                )
            return self.count
        return int(math.floor(self.fraction * potential + 0.5))


class LayeredNetwork:
    """Two undirected layers plus a bipartite inter-layer link set.

    Inter-links are undirected: the pair (u, w) couples layer-1 node u with
    layer-2 node w, so the implied A21 is exactly A12 transposed.
    """

    def __init__(self, layer1: Graph, layer2: Graph, interlinks: Iterable[tuple[int, int]]):
        self.layer1 = layer1
        self.layer2 = layer2
        links = np.asarray(list(interlinks), dtype=np.int64).reshape(-1, 2)
        if links.size:
            if links[:, 0].min() < 0 or links[:, 0].max() >= layer1.n:
                raise ParameterError("inter-link layer-1 endpoint out of range")
            if links[:, 1].min() < 0 or links[:, 1].max() >= layer2.n:
                raise ParameterError("inter-link layer-2 endpoint out of range")
            order = np.lexsort((links[:, 1], links[:, 0]))
            links = links[order]
            if len(links) > 1 and np.any(np.all(links[1:] == links[:-1], axis=1)):
                raise ParameterError("duplicate inter-links are not allowed")
        self.interlinks = links
        self._a12 = None

    @property
    def n1(self) -> int:
        return self.layer1.n

    @property
    def n2(self) -> int:
        return self.layer2.n

    @property
    def n_total(self) -> int:
        return self.layer1.n + self.layer2.n

    @property
    def interlink_count(self) -> int:
        return len(self.interlinks)

    def a11(self):
        return self.layer1.adjacency()

    def a22(self):
        return self.layer2.adjacency()

    def a12(self):
        """Bipartite coupling block as an n1 x n2 CSR matrix (cached)."""
        if self._a12 is None:
            from scipy.sparse import csr_matrix

            data = np.ones(len(self.interlinks), dtype=np.float64)
            self._a12 = csr_matrix(
                (data, (self.interlinks[:, 0], self.interlinks[:, 1])),
                shape=(self.layer1.n, self.layer2.n),
            )
        return self._a12

    def __eq__(self, other) -> bool:
        if not isinstance(other, LayeredNetwork):
            return NotImplemented
        return (
            self.layer1 == other.layer1
            and self.layer2 == other.layer2
            and np.array_equal(self.interlinks, other.interlinks)
        )

    def __repr__(self) -> str:
        return (
            f"LayeredNetwork(n1={self.layer1.n}, n2={self.layer2.n}, "
            f"interlinks={self.interlink_count})"
        )


def _pair_index_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


def gen_erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """Gilbert G(n, p) graph: each pair present independently with probability p.

    Args:
        n: node count, >= 1.
        p: edge probability in [0, 1].
        seed: RNG seed; same seed reproduces the same graph.
    """
    if n < 1:
        raise ParameterError("n must be at least 1")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"edge probability {p} outside [0, 1]")
    rng = np.random.default_rng(seed)
    us, vs = _pair_index_arrays(n)
    mask = rng.random(len(us)) < p
    return Graph(n, zip(us[mask].tolist(), vs[mask].tolist()))


def gen_erdos_renyi_gnm(n: int, m: int, seed: int) -> Graph:
    """G(n, m) graph: exactly m distinct edges, uniform without replacement.

    Args:
        n: node count.
        m: edge count, 0 <= m <= n*(n-1)/2.
        seed: RNG seed.
    """
    if n < 1:
        raise ParameterError("n must be at least 1")
    max_edges = n * (n - 1) // 2
    if not 0 <= m <= max_edges:
        raise ParameterError(f"edge count {m} outside [0, {max_edges}] for n={n}")
    rng = np.random.default_rng(seed)
    picks = sample_without_replacement(rng, max_edges, m)
    us, vs = _pair_index_arrays(n)
    return Graph(n, zip(us[picks].tolist(), vs[picks].tolist()))


def gen_watts_strogatz(n: int, k: int, p_rewire: float, seed: int) -> Graph:
    """Watts-Strogatz small-world graph with exactly n*k/2 edges.

    Starts from a ring lattice where every node connects to k/2 neighbors on
    each side, then rewires the far endpoint of each lattice edge with
    probability p_rewire to a uniformly chosen node that is neither the near
    endpoint nor already a neighbor. A rewiring with no valid target (dense
    corner) keeps the lattice edge, so the edge count never changes.

    Args:
        n: node count.
        k: mean degree; must be even and < n.
        p_rewire: rewiring probability in [0, 1].
        seed: RNG seed.
    """
    if k % 2 != 0:
        raise ParameterError("mean degree k must be even")
    if not 0 < k < n:
        raise ParameterError("mean degree k must satisfy 0 < k < n")
    if not 0.0 <= p_rewire <= 1.0:
        raise ParameterError(f"rewiring probability {p_rewire} outside [0, 1]")
    rng = np.random.default_rng(seed)
    adj: list[set[int]] = [set() for _ in range(n)]
    half = k // 2
    for i in range(n):
        for j in range(1, half + 1):
            t = (i + j) % n
            adj[i].add(t)
            adj[t].add(i)
    # Rewire lattice edges in a fixed (node, offset) order for determinism.
    for i in range(n):
        for j in range(1, half + 1):
            t = (i + j) % n
            if t not in adj[i]:
                continue  # already rewired away by an earlier step
            if rng.random() >= p_rewire:
                continue
            if len(adj[i]) >= n - 1:
                continue  # no valid target; keep the lattice edge
            while True:
                cand = int(rng.integers(n))
                if cand != i and cand not in adj[i]:
                    break
            adj[i].remove(t)
            adj[t].remove(i)
            adj[i].add(cand)
            adj[cand].add(i)
    edges = [(i, j) for i in range(n) for j in adj[i] if i < j]
    return Graph(n, edges)


def gen_barabasi_albert(n: int, m_attach: int, seed: int) -> Graph:
    """Preferential-attachment graph: clique seed, then degree-biased growth.

    The first m_attach+1 nodes form a clique; every later node attaches to
    m_attach distinct existing nodes chosen with probability proportional to
    their current degree. The seed clique must be smaller than the graph so
    at least one attachment step happens.

    Args:
        n: node count.
        m_attach: links added per new node, 1 <= m_attach <= n-2.
        seed: RNG seed.
    """
    if not 1 <= m_attach <= n - 2:
        raise ParameterError(f"m_attach {m_attach} must satisfy 1 <= m_attach <= n-2={n - 2}")
    rng = np.random.default_rng(seed)
    edges: list[tuple[int, int]] = []
    # repeated[i] lists every node once per unit of degree, so a uniform draw
    # from it is a degree-proportional draw.
    repeated: list[int] = []
    clique = m_attach + 1
    for i in range(clique):
        for j in range(i + 1, clique):
            edges.append((i, j))
            repeated.append(i)
            repeated.append(j)
    for new in range(clique, n):
        targets: set[int] = set()
        while len(targets) < m_attach:
            targets.add(repeated[int(rng.integers(len(repeated)))])
        for t in sorted(targets):
            edges.append((t, new))
            repeated.append(t)
            repeated.append(new)
    return Graph(n, edges)


def gen_barabasi_albert_edges(n: int, edge_count: int, seed: int, m_attach: int = 3) -> Graph:
    """Scale-free graph trimmed to an exact edge count.

    Generates a preferential-attachment graph with the given m_attach, then
    uniformly deletes surplus edges. Useful for reproducing published
    instances whose edge count no integer m_attach yields exactly.
    """
    base = gen_barabasi_albert(n, m_attach, seed)
    if edge_count > base.edge_count:
        raise ParameterError(
            f"target edge count {edge_count} exceeds the {base.edge_count} edges "
            f"generated with m_attach={m_attach}"
        )
    rng = np.random.default_rng(seed)
    rng.random()  # decouple the deletion stream from the generation stream
    keep = sample_without_replacement(rng, base.edge_count, edge_count)
    return Graph(n, base.edges[np.sort(keep)])


def _decode_pairs(flat: np.ndarray, n2: int) -> np.ndarray:
    return np.column_stack((flat // n2, flat % n2))


def random_interlink_pairs(rng: np.random.Generator, n1: int, n2: int, count: int) -> np.ndarray:
    """count distinct (u, w) inter-pairs, uniform over the n1*n2 potential pairs."""
    flat = sample_without_replacement(rng, n1 * n2, count)
    return _decode_pairs(flat.astype(np.int64), n2)


def select_hubs(g: Graph, num_hubs: int) -> np.ndarray:
    """The num_hubs highest-degree nodes, ties broken by lowest index."""
    if num_hubs < 1 or num_hubs > g.n:
        raise ParameterError(f"num_hubs {num_hubs} outside [1, {g.n}]")
    # lexsort keys: last key is primary, so sort by (-degree, index).
    ranked = np.lexsort((np.arange(g.n), -g.degrees))
    return ranked[:num_hubs].astype(np.int64)


def hub_interlink_pairs(
    rng: np.random.Generator, n1: int, hubs: np.ndarray, count: int
) -> np.ndarray:
    """Split count links as equally as possible over hubs (remainder to the
    earliest-listed hubs); each hub's layer-1 partners drawn uniformly
    without replacement."""
    num_hubs = len(hubs)
    if count < 0 or count > num_hubs * n1:
        raise ParameterError(
            f"link count {count} exceeds capacity {num_hubs * n1} of {num_hubs} hubs"
        )
    base, rem = divmod(count, num_hubs)
    pairs = []
    for rank, hub in enumerate(hubs):
        quota = base + (1 if rank < rem else 0)
        partners = sample_without_replacement(rng, n1, quota)
        pairs.append(np.column_stack((partners, np.full(quota, hub, dtype=np.int64))))
    return np.concatenate(pairs) if pairs else np.empty((0, 2), dtype=np.int64)


def couple_random(g1: Graph, g2: Graph, spec: LinkSpec, seed: int) -> LayeredNetwork:
    """Couple two layers with randomly placed inter-links.

    Probability mode includes each of the N1*N2 potential pairs independently;
    count and fraction modes place exactly the requested number of distinct
    pairs, uniform without replacement.
    """
    rng = np.random.default_rng(seed)
    potential = g1.n * g2.n
    count = spec.resolve_count(g1.n, g2.n)
    if count is None:
        mask = rng.random(potential) < spec.probability
        pairs = _decode_pairs(np.flatnonzero(mask).astype(np.int64), g2.n)
    else:
        pairs = random_interlink_pairs(rng, g1.n, g2.n, count)
    return LayeredNetwork(g1, g2, pairs)


def couple_to_hubs(
    g1: Graph, g2: Graph, count: int, num_hubs: int, seed: int
) -> LayeredNetwork:
    """Attach all inter-links to the highest-degree nodes of layer 2.

    Hubs are the num_hubs highest-degree layer-2 nodes, ties broken by lowest
    index. The count is split as equally as possible, remainder going to the
    highest-degree hubs; each hub's layer-1 partners are drawn uniformly
    without replacement.
    """
    hubs = select_hubs(g2, num_hubs)
    rng = np.random.default_rng(seed)
    return LayeredNetwork(g1, g2, hub_interlink_pairs(rng, g1.n, hubs, count))


def save_graph(g: Graph, path) -> None:
    """Write a graph as a whitespace-separated edge list with an "# n=" header."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"# n={g.n}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


def load_graph(path) -> Graph:
    """Read an edge-list file written by save_graph (header optional).

    Raises GraphFormatError naming the offending line for malformed lines,
    out-of-range indices, and self-loops.
    """
    path = Path(path)
    n_declared: Optional[int] = None
    edges: list[tuple[int, int]] = []
    max_seen = -1
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if lineno == 1 and "n=" in line:
                    try:
                        n_declared = int(line.split("n=")[1].split()[0])
                    except (IndexError, ValueError):
                        raise GraphFormatError("unparsable header", lineno) from None
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphFormatError(f"expected 'u v', got {line!r}", lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(f"non-integer endpoint in {line!r}", lineno) from None
            if u < 0 or v < 0:
                raise GraphFormatError("negative node index", lineno)
            if u == v:
                raise GraphFormatError(f"self-loop on node {u}", lineno)
            if n_declared is not None and (u >= n_declared or v >= n_declared):
                raise GraphFormatError(
                    f"node index exceeds declared n={n_declared}", lineno
                )
            max_seen = max(max_seen, u, v)
            edges.append((u, v))
    n = n_declared if n_declared is not None else max_seen + 1
    return Graph(max(n, 0), edges)


def save_layered_network(net: LayeredNetwork, prefix) -> None:
    """Write a layered network as three files: <prefix>.layer1, <prefix>.layer2,
    and <prefix>.links ("u w" meaning layer1-node u <-> layer2-node w)."""
    prefix = Path(prefix)
    save_graph(net.layer1, prefix.parent / (prefix.name + ".layer1"))
    save_graph(net.layer2, prefix.parent / (prefix.name + ".layer2"))
    with (prefix.parent / (prefix.name + ".links")).open("w") as fh:
        for u, w in net.interlinks:
            fh.write(f"{u} {w}\n")


def load_layered_network(prefix) -> LayeredNetwork:
    prefix = Path(prefix)
    g1 = load_graph(prefix.parent / (prefix.name + ".layer1"))
    g2 = load_graph(prefix.parent / (prefix.name + ".layer2"))
    links = []
    links_path = prefix.parent / (prefix.name + ".links")
    with links_path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphFormatError(f"expected 'u w', got {line!r}", lineno)
            try:
                links.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise GraphFormatError(f"non-integer endpoint in {line!r}", lineno) from None
    return LayeredNetwork(g1, g2, links)
