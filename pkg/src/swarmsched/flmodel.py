"""Synthetic federated least-squares workload driven through the scheduler.

Each UAV owns a least-squares problem ``F_v(w) = ||A_v w - b_v||^2 / n_v``.
The swarm objective is ``F(w) = sum_v lambda_v F_v(w)`` with
``lambda_v = n_v / sum_u n_u``. A global round is: local mini-batch SGD on
every node, in-network aggregation over the schedule, then a tree broadcast
of the new global model.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DivergenceDetected
from .schedule import build_schedule
from .seeding import make_rng
from .simcore import broadcast_global, make_states, run_round
from .topology import SwarmTopology, build_bfs_tree, select_root

MODES = ("iid", "non-iid")


@dataclass(frozen=True)
class FLConfig:
    dim: int = 10
    local_iters: int = 5
    batch_size: int = 10
    learning_rate: float = 0.01
    rounds: int = 20
    seed: int = 0
    mode: str = "iid"
    samples_per_node: int = 100
    noise_std: float = 0.1

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.local_iters < 0:
            raise ValueError("local_iters must be >= 0")
        if self.dim < 1 or self.batch_size < 1 or self.rounds < 0:
            raise ValueError("dim and batch_size must be >= 1, rounds >= 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass(frozen=True)
class LocalProblem:
    node: int
    features: np.ndarray
    targets: np.ndarray

    @property
    def data_size(self) -> int:
        return len(self.targets)

    def loss(self, w: np.ndarray) -> float:
        r = self.features @ w - self.targets
        return float(r @ r) / self.data_size


def aggregation_weights(problems: list[LocalProblem]) -> list[float]:
    """Dataset-size weights; their rational sum is checked to be exactly one."""
    sizes = [p.data_size for p in problems]
    total = sum(sizes)
    exact = [Fraction(s, total) for s in sizes]
    assert sum(exact) == 1
    return [float(f) for f in exact]


def global_loss(problems: list[LocalProblem], w: np.ndarray, weights=None) -> float:
    if weights is None:
        weights = aggregation_weights(problems)
    return float(sum(lam * p.loss(w) for lam, p in zip(weights, problems)))


def make_synthetic_problems(
    num_nodes: int, config: FLConfig, sizes: list[int] | None = None
) -> list[LocalProblem]:
    """Generate one local problem per node around a shared ground truth.

    IID: every node draws standard normal features and ``samples_per_node``
    rows. Non-IID: data sizes vary between nodes and every node gets its own
    feature mean and per-feature scale. Explicit ``sizes`` override both.
    """
    if num_nodes < 1:
        raise ValueError("num_nodes must be >= 1")
    rng = make_rng(config.seed, 0x5EED)
    w_true = rng.normal(size=config.dim)
    if sizes is None:
        if config.mode == "iid":
            sizes = [config.samples_per_node] * num_nodes
        else:
            lo = max(config.batch_size, config.samples_per_node // 5)
            sizes = [int(s) for s in rng.integers(lo, 2 * config.samples_per_node + 1, num_nodes)]
    if len(sizes) != num_nodes or min(sizes) < 1:
        raise ValueError("need one positive data size per node")

    problems = []
    for v, n in enumerate(sizes):
        node_rng = make_rng(config.seed, 0x5EED, v + 1)
        if config.mode == "iid":
            a = node_rng.normal(size=(n, config.dim))
        else:
            shift = node_rng.normal(scale=1.0, size=config.dim)
            scale = node_rng.uniform(0.5, 1.5, size=config.dim)
            a = shift + scale * node_rng.normal(size=(n, config.dim))
        b = a @ w_true + config.noise_std * node_rng.normal(size=n)
        problems.append(LocalProblem(v, a, b))
    return problems


def local_train(
    problem: LocalProblem, start: np.ndarray, config: FLConfig, round_index: int = 0
) -> np.ndarray:
    """Mini-batch SGD from ``start``.

    Batches are drawn with replacement from a stream seeded by
    ``(seed, round, node)``. When ``batch_size >= data_size`` every step uses
    the full dataset instead.
    """
    w = np.array(start, dtype=np.float64)
    n = problem.data_size
    full = config.batch_size >= n
    rng = make_rng(config.seed, round_index, problem.node)
    for _ in range(config.local_iters):
        if full:
            a, b = problem.features, problem.targets
        else:
            idx = rng.integers(0, n, size=config.batch_size)
            a, b = problem.features[idx], problem.targets[idx]
        # overflow is reported below as DivergenceDetected
        with np.errstate(over="ignore", invalid="ignore"):
            grad = (2.0 / len(b)) * (a.T @ (a @ w - b))
            w = w - config.learning_rate * grad
        if not np.all(np.isfinite(w)):
            raise DivergenceDetected(
                f"node {problem.node} diverged in round {round_index}; lower the learning rate"
            )
    return w


@dataclass
class RoundRecord:
    round: int
    global_loss: float
    model: np.ndarray
    delay_slots: int
    messages: int
    broadcast_messages: int


def run_fl_experiment(
    topology: SwarmTopology,
    problems: list[LocalProblem],
    config: FLConfig,
    initial_model: np.ndarray | None = None,
) -> list[RoundRecord]:
    """Run ``config.rounds`` global rounds; history[0] is the initial model."""
    if len(problems) != topology.num_nodes:
        raise ValueError("need one LocalProblem per node")
    weights = aggregation_weights(problems)
    root = select_root(topology)
    tree = build_bfs_tree(topology, root)
    schedule = build_schedule(tree)

    w = np.zeros(config.dim) if initial_model is None else np.array(initial_model, dtype=np.float64)
    history = [RoundRecord(0, global_loss(problems, w, weights), w, 0, 0, 0)]
    models = {v: w for v in range(topology.num_nodes)}
    for r in range(1, config.rounds + 1):
        local = [local_train(p, models[p.node], config, r) for p in problems]
        result = run_round(topology, tree, schedule, make_states(local, weights))
        w = result.global_model
        bcast = broadcast_global(tree, w)
        models = bcast.models
        history.append(
            RoundRecord(
                r,
                global_loss(problems, w, weights),
                w,
                result.delay_slots,
                result.messages_sent,
                bcast.messages_sent,
            )
        )
    return history


def history_csv(history: list[RoundRecord]) -> str:
    lines = ["round,global_loss,delay_slots,messages"]
    lines += [f"{h.round},{h.global_loss!r},{h.delay_slots},{h.messages}" for h in history]
    return "\n".join(lines) + "\n"


def save_checkpoint(path: str | Path, model: np.ndarray) -> None:
    """Length-prefixed (uint64) little-endian float64 dump."""
    values = np.asarray(model, dtype="<f8")
    Path(path).write_bytes(struct.pack("<Q", values.size) + values.tobytes())


def load_checkpoint(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    (n,) = struct.unpack_from("<Q", raw)
    if len(raw) != 8 + 8 * n:
        raise ValueError(f"checkpoint length mismatch: header says {n} values")
    return np.frombuffer(raw, dtype="<f8", offset=8).astype(np.float64)
