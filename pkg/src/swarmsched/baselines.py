"""Comparison schemes: SPF unicast, neighbor broadcast, and alternative roots."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .topology import SwarmTopology, build_bfs_tree, eccentricities, select_root

SCHEMES = ("proposed", "spf", "neighbor_broadcast", "root_random", "root_centroid")


@dataclass(frozen=True)
class BaselineResult:
    scheme: str
    delay_slots: int
    messages_sent: int
    root: int | None = None


def proposed(topology: SwarmTopology, root: int | None = None) -> BaselineResult:
    """Tree aggregation rooted at ``root`` (graph center by default).

    Delay equals the root's eccentricity and every non-root node sends once.
    """
    if root is None:
        root = select_root(topology)
    ecc = int(eccentricities(topology)[root])
    return BaselineResult("proposed", ecc, topology.num_nodes - 1, root)


def spf_overhead(topology: SwarmTopology, root: int) -> BaselineResult:
    """Every node unicasts its own model to ``root`` along a shortest path.

    Relays forward each message separately. A node sends at most one message
    per slot; messages wait FIFO at relays (a node's own message is queued
    first, same-slot arrivals are queued by sender id). The delay is the slot
    in which the last message reaches the root.
    """
    tree = build_bfs_tree(topology, root)
    messages = sum(tree.tier.values())
    queues: dict[int, deque[int]] = {v: deque([v]) for v in tree.parent if v != root}
    pending = topology.num_nodes - 1
    t = 0
    while pending:
        t += 1
        arrivals: list[tuple[int, int, int]] = []
        for v in sorted(queues):
            if queues[v]:
                arrivals.append((tree.parent[v], v, queues[v].popleft()))
        for dest, _, msg in sorted(arrivals):
            if dest == root:
                pending -= 1
            else:
                queues[dest].append(msg)
    return BaselineResult("spf", t, messages, root)


def neighbor_broadcast_overhead(
    topology: SwarmTopology, rounds_per_aggregation: int | None = None
) -> BaselineResult:
    """Decentralized scheme where every node broadcasts to all neighbors each round.

    Counted as one message per (broadcaster, neighbor) link per round.
    ``rounds_per_aggregation`` defaults to the graph's minimum eccentricity.
    """
    if rounds_per_aggregation is None:
        rounds_per_aggregation = int(eccentricities(topology).min())
    if rounds_per_aggregation < 1 and topology.num_nodes > 1:
        raise ValueError("rounds_per_aggregation must be >= 1")
    per_round = 2 * topology.num_edges
    return BaselineResult(
        "neighbor_broadcast", rounds_per_aggregation, rounds_per_aggregation * per_round
    )


def root_random(topology: SwarmTopology, seed: int) -> int:
    return int(np.random.default_rng(seed).integers(topology.num_nodes))


def root_centroid(topology: SwarmTopology) -> int:
    """Node closest (Euclidean) to the mean position; lowest id on ties."""
    p = np.asarray(topology.positions)
    d = np.hypot(*(p - p.mean(axis=0)).T)
    return int(np.flatnonzero(d == d.min())[0])


def evaluate(topology: SwarmTopology, scheme: str, random_seed: int = 0) -> BaselineResult:
    """Evaluate one named scheme on a topology (paired comparisons share the topology)."""
    if scheme == "proposed":
        return proposed(topology)
    if scheme == "spf":
        return spf_overhead(topology, select_root(topology))
    if scheme == "neighbor_broadcast":
        return neighbor_broadcast_overhead(topology)
    if scheme == "root_random":
        r = proposed(topology, root_random(topology, random_seed))
        return BaselineResult("root_random", r.delay_slots, r.messages_sent, r.root)
    if scheme == "root_centroid":
        r = proposed(topology, root_centroid(topology))
        return BaselineResult("root_centroid", r.delay_slots, r.messages_sent, r.root)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
