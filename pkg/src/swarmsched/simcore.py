"""Slot-by-slot execution of one aggregation round over a schedule.

Every node runs :func:`node_action` at every slot; the node only acts in its
designated slot, where it folds the partial sums received in the previous
slot into its own weighted model and uploads the result to its parent.  The
root never uploads and finalizes the global model after the last slot.

Payloads are pre-weighted partial sums, so the root ends up holding
``sum(weight[v] * model[v])`` without any node relaying someone else's
message.  Additions happen in a fixed order (children by ascending id, own
weighted model last), which makes every run bit-for-bit reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, MissingUpdate
from .schedule import Schedule
from .topology import BfsTree, SwarmTopology

HEADER_BYTES = 32


def message_bytes(dim: int) -> int:
    """Wire size of one model message: float64 payload plus a fixed header."""
    return 8 * dim + HEADER_BYTES


@dataclass
class NodeState:
    node: int
    weight: float
    local_model: np.ndarray
    aggregate: np.ndarray | None = None
    received_from: set[int] = field(default_factory=set)
    has_sent: bool = False


@dataclass(frozen=True)
class Delivery:
    slot: int
    sender: int
    receiver: int
    dim: int


@dataclass
class RoundResult:
    delay_slots: int
    messages_sent: int
    global_model: np.ndarray
    transcript: list[Delivery]
    slot_duration: float = 1.0

    @property
    def delay_seconds(self) -> float:
        return self.delay_slots * self.slot_duration

    @property
    def bytes_sent(self) -> int:
        return sum(message_bytes(d.dim) for d in self.transcript)

    def transcript_dump(self) -> str:
        rows = sorted(self.transcript, key=lambda d: (d.slot, d.sender))
        return "".join(f"t={d.slot} {d.sender}->{d.receiver} dim={d.dim}\n" for d in rows)


def make_states(models, weights=None) -> list[NodeState]:
    """Node states for models indexed by node id.

    ``weights=None`` selects the unweighted mode (every weight is 1).
    """
    models = [np.atleast_1d(np.asarray(m, dtype=np.float64)) for m in models]
    if weights is None:
        weights = [1.0] * len(models)
    if len(weights) != len(models):
        raise ValueError("need one weight per model")
    return [NodeState(v, float(w), m) for v, (m, w) in enumerate(zip(models, weights))]


def _accumulate(state: NodeState, inbox: dict[int, np.ndarray]) -> np.ndarray:
    acc = np.zeros_like(state.local_model)
    for u in sorted(inbox):
        acc = acc + inbox[u]
    return acc + state.weight * state.local_model


def _check_inbox(state: NodeState, expected: list[int], inbox: dict[int, np.ndarray]) -> None:
    missing = sorted(set(expected) - set(inbox))
    if missing:
        raise MissingUpdate(f"node {state.node} is missing updates from {missing}")
    extra = sorted(set(inbox) - set(expected))
    if extra:
        raise MissingUpdate(f"node {state.node} got unscheduled updates from {extra}")
    for u, payload in inbox.items():
        if payload.shape != state.local_model.shape:
            raise DimensionMismatch(
                f"node {state.node}: payload from {u} has shape {payload.shape}, "
                f"expected {state.local_model.shape}"
            )


def node_action(
    state: NodeState, t: int, schedule: Schedule, inbox: dict[int, np.ndarray]
) -> tuple[int, np.ndarray] | None:
    """One node's behaviour at slot ``t``.

    Returns ``(parent, partial_sum)`` in the node's designated slot and None
    otherwise. ``inbox`` holds the payloads delivered to this node at the end
    of slot ``t - 1``.
    """
    v = state.node
    if v == schedule.root or t != schedule.designated_slot(v):
        return None
    prev = schedule.slot(t - 1)
    expected = prev.received_by(v) if prev is not None else []
    _check_inbox(state, expected, inbox)
    if state.has_sent:
        raise RuntimeError(f"node {v} asked to transmit twice in one round")

    state.aggregate = _accumulate(state, inbox)
    state.received_from = set(inbox)
    receivers = [r for s, r in schedule.slot(t).transmissions if s == v]
    if len(receivers) != 1:
        raise MissingUpdate(f"node {v} has {len(receivers)} scheduled receivers in slot {t}")
    state.has_sent = True
    return receivers[0], state.aggregate


def finalize_root(state: NodeState, schedule: Schedule, inbox: dict[int, np.ndarray]) -> np.ndarray:
    last = schedule.slot(schedule.num_slots)
    expected = last.received_by(state.node) if last is not None else []
    _check_inbox(state, expected, inbox)
    state.aggregate = _accumulate(state, inbox)
    state.received_from = set(inbox)
    return state.aggregate


def run_round(
    topology: SwarmTopology,
    tree: BfsTree,
    schedule: Schedule,
    states: list[NodeState],
    slot_duration: float = 1.0,
) -> RoundResult:
    n = topology.num_nodes
    if len(states) != n or any(s.node != v for v, s in enumerate(states)):
        raise ValueError("states must be indexed by node id 0..V-1")
    if tree.num_nodes != n or tree.root != schedule.root:
        raise ValueError("tree, schedule and topology disagree")
    dim = states[0].local_model.shape
    for s in states:
        if s.local_model.ndim != 1 or s.local_model.shape != dim:
            raise DimensionMismatch(
                f"node {s.node} has model shape {s.local_model.shape}, expected {dim}"
            )
        if not np.all(np.isfinite(s.local_model)):
            raise ValueError(f"node {s.node} has a non-finite model entry")
        if not (s.weight >= 0 and np.isfinite(s.weight)):
            raise ValueError(f"node {s.node} has invalid weight {s.weight}")

    transcript: list[Delivery] = []
    inboxes: dict[int, dict[int, np.ndarray]] = {}
    for t in range(1, schedule.num_slots + 1):
        # inboxes are frozen at the slot boundary, so the visiting order is irrelevant
        outgoing: dict[int, dict[int, np.ndarray]] = {}
        for s in states:
            sent = node_action(s, t, schedule, inboxes.get(s.node, {}))
            if sent is None:
                continue
            receiver, payload = sent
            if not topology.has_edge(s.node, receiver):
                raise MissingUpdate(f"no radio link {s.node}->{receiver}")
            outgoing.setdefault(receiver, {})[s.node] = payload
            transcript.append(Delivery(t, s.node, receiver, payload.shape[0]))
        stale = [v for v in inboxes if schedule.designated_slot(v) != t]
        if stale:
            raise MissingUpdate(f"updates delivered to nodes {stale} outside their slot")
        inboxes = outgoing

    global_model = finalize_root(states[schedule.root], schedule, inboxes.get(schedule.root, {}))
    return RoundResult(
        delay_slots=schedule.num_slots,
        messages_sent=len(transcript),
        global_model=global_model,
        transcript=transcript,
        slot_duration=slot_duration,
    )


@dataclass
class BroadcastResult:
    delay_slots: int
    messages_sent: int
    transcript: list[Delivery]
    models: dict[int, np.ndarray]


def broadcast_global(tree: BfsTree, global_model) -> BroadcastResult:
    """Push the global model down the tree, one tier per slot."""
    model = np.atleast_1d(np.asarray(global_model, dtype=np.float64))
    children = tree.children()
    by_tier = tree.tiers()
    models = {tree.root: model}
    transcript = []
    for t in range(1, tree.depth + 1):
        for parent in by_tier[t - 1]:
            for child in children[parent]:
                models[child] = models[parent].copy()
                transcript.append(Delivery(t, parent, child, model.shape[0]))
    return BroadcastResult(tree.depth, len(transcript), transcript, models)
