"""Multi-domain network model: generation, inter-domain wiring, rewire dynamics.

Each domain is an undirected weighted graph on nodes 0..n-1, generated from an
intra-domain degree distribution via configuration-model pairing and kept
connected by explicit repair. Domains on the chain are joined by a fixed
number of inter-domain links whose endpoints become gateway nodes. Per-slot
dynamicity adds and removes random intra-domain edges; inter-domain links are
never touched.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import kernels

_PROB_TOL = 1e-9
_FILE_PROB_TOL = 0.01


class _FiniteDistribution:
    """Discrete distribution over a finite support, sampled by inverse CDF."""

    def __init__(self, values, probs):
        values = np.asarray(values)
        probs = np.asarray(probs, dtype=np.float64)
        if values.size == 0 or values.size != probs.size:
            raise ValueError("distribution needs matching, non-empty values and probabilities")
        if np.any(probs < 0.0):
            raise ValueError("probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > _PROB_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        self.values = values
        self.probs = probs
        self._cum = np.cumsum(probs)

    def sample(self, rng):
        idx = np.searchsorted(self._cum, rng.random(), side="right")
        return self.values[min(idx, self.values.size - 1)]

    def sample_many(self, rng, size):
        idx = np.searchsorted(self._cum, rng.random(size), side="right")
        return self.values[np.minimum(idx, self.values.size - 1)]


class DegreeDistribution(_FiniteDistribution):
    """Distribution of node degrees; all degrees are integers >= 1."""

    def __init__(self, entries):
        degrees = [d for d, _ in entries]
        probs = [p for _, p in entries]
        if any(int(d) != d or d < 1 for d in degrees):
            raise ValueError("degrees must be integers >= 1")
        super().__init__(np.asarray(degrees, dtype=np.int64), probs)

    @property
    def entries(self):
        return list(zip(self.values.tolist(), self.probs.tolist()))


class WeightDistribution(_FiniteDistribution):
    """Distribution of edge weights; all weights are > 0."""

    def __init__(self, entries):
        weights = [w for w, _ in entries]
        probs = [p for _, p in entries]
        if any(w <= 0 for w in weights):
            raise ValueError("weights must be > 0")
        super().__init__(np.asarray(weights, dtype=np.float64), probs)

    @property
    def entries(self):
        return list(zip(self.values.tolist(), self.probs.tolist()))


def load_degree_distribution(path) -> DegreeDistribution:
    """Parse a degree-distribution file: one "degree probability" pair per line.

    '#' starts a comment; blank lines are skipped. Probabilities are
    renormalized when their sum is within 1% of 1 and rejected otherwise.
    """
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'degree probability', got {raw!r}")
            try:
                degree = int(parts[0])
                prob = float(parts[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: unparsable entry {raw!r}") from exc
            entries.append((degree, prob))
    if not entries:
        raise ValueError(f"{path}: no degree entries found")
    total = sum(p for _, p in entries)
    if abs(total - 1.0) > _FILE_PROB_TOL:
        raise ValueError(f"{path}: probabilities sum to {total}, outside the 1% tolerance")
    return DegreeDistribution([(d, p / total) for d, p in entries])


def default_degree_distribution() -> DegreeDistribution:
    """Bundled synthetic heavy-tailed intra-domain degree distribution."""
    from importlib.resources import files

    return load_degree_distribution(files("dqsync.data") / "degree_default.txt")


@dataclass
class DomainGraph:
    """Weighted undirected intra-domain topology plus its gateway nodes.

    Edges are stored once with endpoints ordered (u < v). Gateways map a
    neighboring domain id to the set of local endpoints of inter-domain links
    toward it; rewiring never alters them.
    """

    domain_id: int
    n: int
    edges: dict = field(default_factory=dict)  # (u, v) u<v -> weight
    gateways: dict = field(default_factory=dict)  # neighbor domain id -> set of nodes

    def __post_init__(self):
        self._csr = None

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        key = (u, v) if u < v else (v, u)
        return key in self.edges

    def add_edge(self, u: int, v: int, weight: float) -> None:
        if u == v:
            raise ValueError("self-loops are not allowed")
        key = (u, v) if u < v else (v, u)
        if key in self.edges:
            raise ValueError(f"parallel edge {key}")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"edge {key} outside node range")
        self.edges[key] = float(weight)
        self._csr = None

    def remove_edge(self, u: int, v: int) -> None:
        key = (u, v) if u < v else (v, u)
        del self.edges[key]
        self._csr = None

    def copy(self) -> "DomainGraph":
        dup = DomainGraph(self.domain_id, self.n, dict(self.edges),
                          {k: set(v) for k, v in self.gateways.items()})
        return dup

    def csr(self):
        """CSR adjacency (indptr, indices, weights) with sorted neighbor lists."""
        if self._csr is None:
            if self.edges:
                arr = np.array(list(self.edges.keys()), dtype=np.int64)
                w = np.fromiter(self.edges.values(), dtype=np.float64, count=len(self.edges))
                us = np.concatenate([arr[:, 0], arr[:, 1]])
                vs = np.concatenate([arr[:, 1], arr[:, 0]])
                ws = np.concatenate([w, w])
                order = np.lexsort((vs, us))
                us, vs, ws = us[order], vs[order], ws[order]
                indptr = np.zeros(self.n + 1, dtype=np.int64)
                np.add.at(indptr, us + 1, 1)
                indptr = np.cumsum(indptr)
                self._csr = (indptr, vs, ws)
            else:
                self._csr = (np.zeros(self.n + 1, dtype=np.int64),
                             np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))
        return self._csr

    def component_labels(self) -> np.ndarray:
        indptr, indices, _ = self.csr()
        return kernels.component_labels(indptr, indices, self.n)

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        return bool(np.all(self.component_labels() == 0))

    def digest(self) -> str:
        """Stable hash of the node count and canonical edge list."""
        h = hashlib.blake2b(digest_size=16)
        h.update(np.int64(self.n).tobytes())
        for (u, v) in sorted(self.edges):
            h.update(np.int64(u).tobytes())
            h.update(np.int64(v).tobytes())
            h.update(np.float64(self.edges[(u, v)]).tobytes())
        return h.hexdigest()


@dataclass
class Network:
    """Linear chain of domains joined by persistent inter-domain links."""

    domains: list
    inter_links: list = field(default_factory=list)  # (dom_i, u, dom_j, v, weight), j = i+1

    @property
    def num_domains(self) -> int:
        return len(self.domains)

    def domain(self, domain_id: int) -> DomainGraph:
        return self.domains[domain_id - 1]

    def links_between(self, i: int):
        """Inter-links joining domain i and i+1, in creation order."""
        return [(u, v, w) for (a, u, b, v, w) in self.inter_links if a == i]

    def digest(self) -> str:
        h = hashlib.blake2b(digest_size=16)
        for d in self.domains:
            h.update(bytes.fromhex(d.digest()))
        for (a, u, b, v, w) in self.inter_links:
            h.update(np.int64(a).tobytes())
            h.update(np.int64(u).tobytes())
            h.update(np.int64(b).tobytes())
            h.update(np.int64(v).tobytes())
            h.update(np.float64(w).tobytes())
        return h.hexdigest()


def _repair_connectivity(d: DomainGraph, wdist: WeightDistribution, rng) -> int:
    """Join fragments with exactly (component count - 1) random edges."""
    labels = d.component_labels()
    roots = np.unique(labels)
    if roots.size <= 1:
        return 0
    members = {int(r): np.flatnonzero(labels == r).tolist() for r in roots}
    keys = sorted(members)
    added = 0
    while len(keys) > 1:
        i, j = rng.choice(len(keys), size=2, replace=False)
        ka, kb = keys[int(i)], keys[int(j)]
        u = members[ka][int(rng.integers(len(members[ka])))]
        v = members[kb][int(rng.integers(len(members[kb])))]
        d.add_edge(u, v, wdist.sample(rng))
        added += 1
        keep, drop = (ka, kb) if ka < kb else (kb, ka)
        members[keep] = members[keep] + members[drop]
        del members[drop]
        keys = sorted(members)
    return added


def generate_domain(n: int, deg: DegreeDistribution, wdist: WeightDistribution,
                    rng, domain_id: int = 1) -> DomainGraph:
    """Build a connected simple graph on n nodes from the degree distribution.

    Degrees are sampled i.i.d. (clamped to n-1), stubs paired configuration
    model style with rejection of self-loops and parallel edges, and the
    result is repaired to connectivity.
    """
    if n < 2:
        raise ValueError(f"domain needs at least 2 nodes, got {n}")
    degrees = np.minimum(deg.sample_many(rng, n), n - 1).astype(np.int64)
    if degrees.sum() % 2 == 1:
        candidates = np.flatnonzero(degrees < n - 1)
        degrees[candidates[int(rng.integers(candidates.size))]] += 1

    d = DomainGraph(domain_id, n)
    pending = np.repeat(np.arange(n, dtype=np.int64), degrees)
    while pending.size >= 2:
        rng.shuffle(pending)
        rejects = []
        progress = False
        for k in range(0, pending.size - 1, 2):
            u, v = int(pending[k]), int(pending[k + 1])
            key = (u, v) if u < v else (v, u)
            if u == v or key in d.edges:
                rejects.append(u)
                rejects.append(v)
            else:
                d.edges[key] = float(wdist.sample(rng))
                progress = True
        if pending.size % 2 == 1:
            rejects.append(int(pending[-1]))
        if not progress:
            break
        pending = np.asarray(rejects, dtype=np.int64)
    d._csr = None
    _repair_connectivity(d, wdist, rng)
    return d


def connect_domains(net: Network, i: int, j: int, beta: int,
                    wdist: WeightDistribution, rng) -> Network:
    """Place beta distinct inter-links between consecutive domains i and j.

    Each link picks a uniformly random node on both sides, resampling on
    already-linked pairs; endpoints are recorded as gateways on both domains.
    """
    if j != i + 1:
        raise ValueError(f"domains must be consecutive on the chain, got {i},{j}")
    if not (1 <= i <= net.num_domains and 1 <= j <= net.num_domains):
        raise ValueError(f"no such domain pair ({i},{j})")
    if beta < 1:
        raise ValueError("need at least one inter-link")
    da, db = net.domain(i), net.domain(j)
    if beta > da.n * db.n:
        raise ValueError(f"cannot place {beta} distinct links between domains "
                         f"of size {da.n} and {db.n}")
    placed = set()
    while len(placed) < beta:
        u = int(rng.integers(da.n))
        v = int(rng.integers(db.n))
        if (u, v) in placed:
            continue
        placed.add((u, v))
        w = float(wdist.sample(rng))
        net.inter_links.append((i, u, j, v, w))
        da.gateways.setdefault(j, set()).add(u)
        db.gateways.setdefault(i, set()).add(v)
    return net


def rewire_step(d: DomainGraph, e: int, wdist: WeightDistribution, rng) -> DomainGraph:
    """One slot of intra-domain dynamicity: add e new edges, remove e, repair.

    When fewer than e candidate edges exist for addition or removal, operates
    on as many as exist. Node set and gateway designations are unchanged.
    """
    if e < 0:
        raise ValueError("rewire count must be >= 0")
    if e == 0:
        return d

    total_pairs = d.n * (d.n - 1) // 2
    absent = total_pairs - len(d.edges)
    add_count = min(e, absent)
    if add_count > 0:
        if absent <= 2 * add_count or absent <= 64:
            # dense regime: enumerate the absent pairs and draw without replacement
            existing = d.edges
            candidates = [(u, v) for u in range(d.n) for v in range(u + 1, d.n)
                          if (u, v) not in existing]
            chosen_idx = rng.choice(len(candidates), size=add_count, replace=False)
            chosen = [candidates[int(k)] for k in np.sort(chosen_idx)]
        else:
            chosen = []
            seen = set()
            while len(chosen) < add_count:
                u = int(rng.integers(d.n))
                v = int(rng.integers(d.n))
                if u == v:
                    continue
                key = (u, v) if u < v else (v, u)
                if key in d.edges or key in seen:
                    continue
                seen.add(key)
                chosen.append(key)
        for key in chosen:
            d.edges[key] = float(wdist.sample(rng))

    remove_count = min(e, len(d.edges))
    if remove_count > 0:
        keys = list(d.edges)
        drop_idx = rng.choice(len(keys), size=remove_count, replace=False)
        for k in drop_idx:
            del d.edges[keys[int(k)]]

    d._csr = None
    _repair_connectivity(d, wdist, rng)
    return d


def min_cost_matrix(d: DomainGraph, terminals) -> np.ndarray:
    """Minimum accumulated edge weight between every ordered pair of terminals.

    Rows/columns follow the order of `terminals`. Raises on unknown terminals
    and on disconnected inputs.
    """
    terminals = np.asarray(list(terminals), dtype=np.int64)
    if terminals.size and (terminals.min() < 0 or terminals.max() >= d.n):
        bad = terminals[(terminals < 0) | (terminals >= d.n)]
        raise ValueError(f"unknown terminal node(s) {bad.tolist()} in domain {d.domain_id}")
    indptr, indices, weights = d.csr()
    rows = kernels.shortest_dists(indptr, indices, weights, terminals, d.n)
    if np.isinf(rows).any():
        raise ValueError(f"domain {d.domain_id} is not connected")
    return rows[:, terminals]
