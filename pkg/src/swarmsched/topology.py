"""Swarm deployments, connectivity graphs, hop distances and BFS trees.

Nodes are dense integer ids ``0..V-1``.  Edges are never stored on their own:
they are always recomputed from positions and the communication range, so a
topology is fully described by ``(positions, comm_range)``.
"""

from __future__ import annotations

import hashlib
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import DisconnectedTopology, ParseError, PlacementFailure

PLACEMENTS = ("grow", "uniform")


@dataclass(frozen=True)
class DeploymentConfig:
    num_uavs: int
    area_width: float = 1000.0
    area_height: float = 1000.0
    comm_range: float = 150.0
    safety_distance: float = 5.0
    rng_seed: int = 0
    # "grow": each new UAV must land within range of one already placed.
    # "uniform": i.i.d. uniform layout, whole layout redrawn until connected.
    placement: str = "grow"
    max_attempts: int = 1000
    max_draws_per_node: int = 100_000

    def __post_init__(self):
        if self.num_uavs < 1:
            raise ValueError("num_uavs must be >= 1")
        if self.area_width <= 0 or self.area_height <= 0:
            raise ValueError("area dimensions must be positive")
        if not self.comm_range > self.safety_distance > 0:
            raise ValueError("need comm_range > safety_distance > 0")
        if self.placement not in PLACEMENTS:
            raise ValueError(f"placement must be one of {PLACEMENTS}")
        if self.max_attempts < 1 or self.max_draws_per_node < 1:
            raise ValueError("attempt budgets must be >= 1")


@dataclass(frozen=True)
class SwarmTopology:
    positions: tuple[tuple[float, float], ...]
    comm_range: float
    neighbors: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pos = tuple((float(x), float(y)) for x, y in self.positions)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "neighbors", _unit_disk_neighbors(pos, self.comm_range))

    @property
    def num_nodes(self) -> int:
        return len(self.positions)

    @property
    def num_edges(self) -> int:
        return sum(len(nb) for nb in self.neighbors) // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, nb in enumerate(self.neighbors) for v in nb if u < v]

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._neighbor_sets[u]

    @cached_property
    def _neighbor_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(nb) for nb in self.neighbors)

    @cached_property
    def adjacency_matrix(self) -> np.ndarray:
        n = self.num_nodes
        adj = np.zeros((n, n), dtype=bool)
        for u, v in self.edges():
            adj[u, v] = adj[v, u] = True
        return adj

    def is_connected(self) -> bool:
        return len(bfs_distances(self, 0)) == self.num_nodes

    def min_pairwise_distance(self) -> float:
        if self.num_nodes < 2:
            return math.inf
        p = np.asarray(self.positions)
        d = np.sqrt(((p[:, None, :] - p[None, :, :]) ** 2).sum(-1))
        np.fill_diagonal(d, np.inf)
        return float(d.min())

    def to_text(self) -> str:
        lines = [f"swarm {self.num_nodes} {self.comm_range!r}"]
        lines += [f"node {i} {x!r} {y!r}" for i, (x, y) in enumerate(self.positions)]
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        """Short content hash of positions and range, used to pair CSV rows."""
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def _unit_disk_neighbors(positions, comm_range: float) -> tuple[tuple[int, ...], ...]:
    n = len(positions)
    if n == 0:
        return ()
    p = np.asarray(positions, dtype=float)
    diff = p[:, None, :] - p[None, :, :]
    dist = np.sqrt((diff**2).sum(-1))
    adj = dist <= comm_range
    np.fill_diagonal(adj, False)
    return tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in adj)


def generate_deployment(config: DeploymentConfig) -> SwarmTopology:
    """Place ``config.num_uavs`` UAVs at random and return the connected topology.

    Raises PlacementFailure when the attempt budget is exhausted.
    """
    rng = np.random.default_rng(config.rng_seed)
    place = _place_grow if config.placement == "grow" else _place_uniform
    for _ in range(config.max_attempts):
        pts = place(config, rng)
        if pts is None:
            continue
        topo = SwarmTopology(tuple(map(tuple, pts)), config.comm_range)
        if topo.is_connected():
            return topo
    raise PlacementFailure(
        f"no connected layout of {config.num_uavs} UAVs with range {config.comm_range} m "
        f"in {config.area_width}x{config.area_height} m after {config.max_attempts} attempts"
    )


def _draw(config: DeploymentConfig, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform((0.0, 0.0), (config.area_width, config.area_height))


def _place_uniform(config, rng):
    pts = np.empty((config.num_uavs, 2))
    for i in range(config.num_uavs):
        for _ in range(config.max_draws_per_node):
            c = _draw(config, rng)
            if i == 0 or np.hypot(*(pts[:i] - c).T).min() >= config.safety_distance:
                pts[i] = c
                break
        else:
            return None
    return pts


def _place_grow(config, rng):
    pts = np.empty((config.num_uavs, 2))
    pts[0] = _draw(config, rng)
    for i in range(1, config.num_uavs):
        for _ in range(config.max_draws_per_node):
            c = _draw(config, rng)
            d = np.hypot(*(pts[:i] - c).T)
            if d.min() >= config.safety_distance and (d <= config.comm_range).any():
                pts[i] = c
                break
        else:
            return None
    return pts


def bfs_distances(topology: SwarmTopology, source: int) -> dict[int, int]:
    """Hop counts from ``source`` to every reachable node."""
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in topology.neighbors[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def hop_distance_matrix(topology: SwarmTopology) -> np.ndarray:
    """All-pairs hop counts by level-synchronous frontier expansion.

    Every source is expanded at once: level k's frontier is the set of nodes
    adjacent to level k-1 and not yet reached. Unreachable pairs are -1.
    """
    n = topology.num_nodes
    # float matmul goes through BLAS; counts stay far below 2**53
    adj = topology.adjacency_matrix.astype(np.float64)
    dist = np.full((n, n), -1, dtype=np.int64)
    reached = np.eye(n, dtype=bool)
    frontier = reached.copy()
    np.fill_diagonal(dist, 0)
    level = 0
    while frontier.any():
        level += 1
        nxt = (frontier.astype(np.float64) @ adj > 0) & ~reached
        dist[nxt] = level
        reached |= nxt
        frontier = nxt
    return dist


def eccentricity(topology: SwarmTopology, v: int) -> int:
    dist = bfs_distances(topology, v)
    if len(dist) != topology.num_nodes:
        raise DisconnectedTopology(f"node {v} cannot reach every node")
    return max(dist.values())


def eccentricities(topology: SwarmTopology) -> np.ndarray:
    dist = hop_distance_matrix(topology)
    if (dist < 0).any():
        raise DisconnectedTopology("graph is not connected")
    return dist.max(axis=1)


def select_root(topology: SwarmTopology) -> int:
    """Graph center: the minimum-eccentricity node, lowest id on ties."""
    return int(np.argmin(eccentricities(topology)))


@dataclass(frozen=True)
class BfsTree:
    root: int
    parent: dict[int, int | None]
    tier: dict[int, int]

    @property
    def depth(self) -> int:
        return max(self.tier.values())

    @property
    def num_nodes(self) -> int:
        return len(self.tier)

    def tiers(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for v in sorted(self.tier):
            out.setdefault(self.tier[v], []).append(v)
        return out

    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {v: [] for v in self.tier}
        for v in sorted(self.parent):
            p = self.parent[v]
            if p is not None:
                out[p].append(v)
        return out

    def path_to_root(self, v: int) -> list[int]:
        path = [v]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        return path

    def links(self) -> list[tuple[int, int]]:
        return [(v, p) for v, p in sorted(self.parent.items()) if p is not None]


def build_bfs_tree(topology: SwarmTopology, root: int) -> BfsTree:
    tier = bfs_distances(topology, root)
    if len(tier) != topology.num_nodes:
        raise DisconnectedTopology("graph is not connected")
    parent: dict[int, int | None] = {root: None}
    for v in range(topology.num_nodes):
        if v != root:
            parent[v] = min(u for u in topology.neighbors[v] if tier[u] == tier[v] - 1)
    return BfsTree(root=root, parent=parent, tier=dict(sorted(tier.items())))


def parse_topology(text: str | Iterable[str]) -> SwarmTopology:
    """Parse the line-oriented ``swarm``/``node`` format.

    Raises ParseError (with a 1-based line number) on malformed input and
    DisconnectedTopology when the resulting graph is not connected.
    """
    lines = text.splitlines() if isinstance(text, str) else list(text)
    header = None
    positions: list[tuple[float, float]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if header is None:
                if parts[0] != "swarm" or len(parts) != 3:
                    raise ParseError("expected 'swarm <V> <comm_range_m>'", lineno)
                header = (int(parts[1]), float(parts[2]))
                if header[0] < 1 or not header[1] > 0:
                    raise ParseError("V must be >= 1 and range positive", lineno)
                continue
            if parts[0] != "node" or len(parts) != 4:
                raise ParseError("expected 'node <id> <x_m> <y_m>'", lineno)
            idx = int(parts[1])
            if idx != len(positions):
                raise ParseError(f"expected node id {len(positions)}, got {idx}", lineno)
            x, y = float(parts[2]), float(parts[3])
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError("non-finite coordinate", lineno)
        positions.append((x, y))
    if header is None:
        raise ParseError("missing 'swarm' header", max(len(lines), 1))
    if len(positions) != header[0]:
        raise ParseError(f"header declares {header[0]} nodes, found {len(positions)}", len(lines))
    topo = SwarmTopology(tuple(positions), header[1])
    if not topo.is_connected():
        raise DisconnectedTopology("topology file describes a disconnected graph")
    return topo
