"""Per-slot transmission schedules built from a BFS aggregation tree.

Slot ``t`` (1-based) carries the uploads of tier ``eta - t + 1`` to their
parents, so the deepest tier fires first and tier 1 reports to the root in
the last slot.  Transmission matrices are kept sparse as ``(sender,
receiver)`` pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .topology import BfsTree


@dataclass(frozen=True)
class TransmissionSlot:
    slot_index: int
    transmissions: frozenset[tuple[int, int]]

    def senders(self) -> list[int]:
        return sorted(s for s, _ in self.transmissions)

    def received_by(self, node: int) -> list[int]:
        return sorted(s for s, r in self.transmissions if r == node)

    def sorted_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.transmissions)


@dataclass(frozen=True)
class Schedule:
    root: int
    slots: tuple[TransmissionSlot, ...]
    tiers: dict[int, frozenset[int]]

    @property
    def num_slots(self) -> int:
        return len(self.slots)

    def slot(self, t: int) -> TransmissionSlot | None:
        """Slot ``t`` for ``1 <= t <= num_slots``, otherwise None."""
        if 1 <= t <= self.num_slots:
            return self.slots[t - 1]
        return None

    def total_transmissions(self) -> int:
        return sum(len(s.transmissions) for s in self.slots)

    def tier_of(self, node: int) -> int:
        for k, members in self.tiers.items():
            if node in members:
                return k
        raise KeyError(node)

    def designated_slot(self, node: int) -> int:
        """Slot in which ``node`` uploads; the root's is ``num_slots + 1``."""
        return self.num_slots - self.tier_of(node) + 1

    def dump(self) -> str:
        lines = []
        for s in self.slots:
            pairs = ", ".join(f"{a}->{b}" for a, b in s.sorted_pairs())
            lines.append(f"slot {s.slot_index}: {pairs}")
        return "\n".join(lines) + ("\n" if lines else "")


def build_schedule(tree: BfsTree) -> Schedule:
    by_tier = tree.tiers()
    eta = tree.depth
    slots = []
    for t in range(1, eta + 1):
        k = eta - t + 1
        pairs = frozenset((v, tree.parent[v]) for v in by_tier[k])
        slots.append(TransmissionSlot(t, pairs))
    tiers = {k: frozenset(vs) for k, vs in sorted(by_tier.items())}
    return Schedule(root=tree.root, slots=tuple(slots), tiers=tiers)


@dataclass
class ValidationReport:
    checks: dict[str, bool] = field(default_factory=dict)
    details: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def record(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks[name] = passed
        if detail:
            self.details[name] = detail

    def format(self) -> str:
        lines = []
        for name, passed in self.checks.items():
            line = f"{'PASS' if passed else 'FAIL'} {name}"
            if name in self.details:
                line += f": {self.details[name]}"
            lines.append(line)
        return "\n".join(lines)


def validate_schedule(schedule: Schedule, tree: BfsTree) -> ValidationReport:
    """Check a schedule against the tree it should have been built from.

    Failures are reported, never raised.
    """
    report = ValidationReport()
    eta = tree.depth

    report.record(
        "num_slots_equals_depth",
        schedule.num_slots == eta,
        f"{schedule.num_slots} slots vs depth {eta}",
    )

    bad_tier = []
    for pos, s in enumerate(schedule.slots, start=1):
        want = eta - s.slot_index + 1
        if s.slot_index != pos:
            bad_tier.append(f"slot at position {pos} labelled {s.slot_index}")
        for a, b in s.sorted_pairs():
            if tree.tier.get(a) != want or tree.tier.get(b) != want - 1:
                bad_tier.append(f"slot {s.slot_index}: {a}->{b}")
        expected = {v for v, k in tree.tier.items() if k == want}
        if {a for a, _ in s.transmissions} != expected:
            bad_tier.append(f"slot {s.slot_index}: sender set differs from tier {want}")
    report.record("tier_consistent_slots", not bad_tier, "; ".join(bad_tier[:5]))

    counts: dict[int, int] = {}
    for s in schedule.slots:
        for a, _ in s.transmissions:
            counts[a] = counts.get(a, 0) + 1
    non_root = [v for v in tree.tier if v != tree.root]
    dup = sorted(v for v, c in counts.items() if c > 1)
    missing = sorted(v for v in non_root if v not in counts)
    root_sends = tree.root in counts
    detail = []
    if dup:
        detail.append(f"multiple sends: {dup[:10]}")
    if missing:
        detail.append(f"never sends: {missing[:10]}")
    if root_sends:
        detail.append("root transmits")
    report.record("one_send_per_node", not (dup or missing or root_sends), "; ".join(detail))

    off_tree = [
        (a, b) for s in schedule.slots for a, b in s.sorted_pairs() if tree.parent.get(a) != b
    ]
    report.record("tree_edges_only", not off_tree, ", ".join(f"{a}->{b}" for a, b in off_tree[:10]))

    total = schedule.total_transmissions()
    want_total = tree.num_nodes - 1
    report.record("total_equals_v_minus_1", total == want_total, f"{total} vs {want_total}")
    return report
