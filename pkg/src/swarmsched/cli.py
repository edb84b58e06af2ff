"""Command line driver: topology generation, inspection, sweeps and FL runs.

Every command is deterministic for a given seed. Per-trial seeds are mixed
from ``(base_seed, size, trial)`` with :func:`swarmsched.seeding.derive_seed`.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import baselines
from .errors import PlacementFailure, SwarmSchedError
from .flmodel import FLConfig, history_csv, make_synthetic_problems, run_fl_experiment, save_checkpoint
from .schedule import build_schedule, validate_schedule
from .seeding import derive_seed
from .simcore import make_states, message_bytes, run_round
from .topology import (
    PLACEMENTS,
    DeploymentConfig,
    SwarmTopology,
    build_bfs_tree,
    eccentricities,
    generate_deployment,
    parse_topology,
    select_root,
)

log = logging.getLogger("swarmsched")

CSV_COLUMNS = (
    "size",
    "trial",
    "scheme",
    "root",
    "eccentricity",
    "delay_slots",
    "messages",
    "bytes",
    "topology_hash",
)
RANDOM_ROOT_STREAM = 1


@dataclass
class ExperimentPlan:
    sizes: list[int]
    trials: int = 5
    schemes: tuple[str, ...] = baselines.SCHEMES
    deployment: DeploymentConfig = field(default_factory=lambda: DeploymentConfig(num_uavs=1))
    model_dim: int = 10
    base_seed: int = 0
    output: Path | None = None
    validate: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.sizes or min(self.sizes) < 1:
            raise ValueError("sizes must all be >= 1")
        unknown = set(self.schemes) - set(baselines.SCHEMES)
        if unknown:
            raise ValueError(f"unknown schemes {sorted(unknown)}")


def trial_topology(plan: ExperimentPlan, size: int, trial: int) -> SwarmTopology:
    cfg = replace(plan.deployment, num_uavs=size, rng_seed=derive_seed(plan.base_seed, size, trial))
    return generate_deployment(cfg)


def _trial_rows(plan: ExperimentPlan, size: int, trial: int) -> list[dict]:
    try:
        topo = trial_topology(plan, size, trial)
    except PlacementFailure as exc:
        log.warning("size %d trial %d skipped: %s", size, trial, exc)
        return []
    ecc = eccentricities(topo)
    digest = topo.digest()
    if plan.validate:
        tree = build_bfs_tree(topo, select_root(topo))
        report = validate_schedule(build_schedule(tree), tree)
        if not report.ok:
            raise SwarmSchedError(f"schedule validation failed (size {size}, trial {trial}):\n{report.format()}")
    rows = []
    for scheme in plan.schemes:
        res = baselines.evaluate(
            topo, scheme, random_seed=derive_seed(plan.base_seed, size, trial, RANDOM_ROOT_STREAM)
        )
        rows.append(
            {
                "size": size,
                "trial": trial,
                "scheme": scheme,
                "root": "" if res.root is None else res.root,
                "eccentricity": int(ecc.min() if res.root is None else ecc[res.root]),
                "delay_slots": res.delay_slots,
                "messages": res.messages_sent,
                "bytes": res.messages_sent * message_bytes(plan.model_dim),
                "topology_hash": digest,
            }
        )
    return rows


def _trial_job(args):
    return _trial_rows(*args)


def _mean_rows(size: int, schemes, rows: list[dict]) -> list[dict]:
    out = []
    for scheme in schemes:
        mine = [r for r in rows if r["scheme"] == scheme]
        if not mine:
            continue
        row = {"size": size, "trial": "mean", "scheme": scheme, "root": "", "topology_hash": ""}
        for col in ("eccentricity", "delay_slots", "messages", "bytes"):
            row[col] = f"{np.mean([r[col] for r in mine]):.4f}"
        out.append(row)
    return out


def run_experiment(plan: ExperimentPlan) -> list[dict]:
    """Paired sweep: every scheme is evaluated on the same topology per (size, trial)."""
    jobs = [(plan, size, trial) for size in plan.sizes for trial in range(plan.trials)]
    if plan.workers > 1:
        with ProcessPoolExecutor(plan.workers) as pool:
            per_trial = list(pool.map(_trial_job, jobs))
    else:
        per_trial = [_trial_job(j) for j in jobs]

    rows: list[dict] = []
    for i, size in enumerate(plan.sizes):
        detail = [r for chunk in per_trial[i * plan.trials : (i + 1) * plan.trials] for r in chunk]
        rows += detail
        rows += _mean_rows(size, plan.schemes, detail)
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def inspect(topology: SwarmTopology, command: str, dim: int = 1) -> str:
    """Human-readable report for one topology.

    ``simulate`` runs one unweighted round where node ``v`` holds the
    constant vector ``v`` (so the root's aggregate is ``sum(range(V))``).
    """
    root = select_root(topology)
    ecc = int(eccentricities(topology)[root])
    if command == "root":
        return f"root {root}\neccentricity {ecc}\n"
    tree = build_bfs_tree(topology, root)
    if command == "tree":
        lines = [f"root {root} depth {tree.depth}"]
        lines += [f"{v} -> {p} tier {tree.tier[v]}" for v, p in tree.links()]
        return "\n".join(lines) + "\n"
    schedule = build_schedule(tree)
    if command == "schedule":
        return schedule.dump()
    if command == "simulate":
        models = [np.full(dim, float(v)) for v in range(topology.num_nodes)]
        result = run_round(topology, tree, schedule, make_states(models))
        agg = " ".join(repr(float(x)) for x in result.global_model)
        return (
            result.transcript_dump()
            + f"root {root}\ndelay_slots {result.delay_slots}\n"
            + f"messages {result.messages_sent}\naggregate {agg}\n"
        )
    raise ValueError(f"unknown inspect command {command!r}")


# ---------------------------------------------------------------------------
# argument handling


def _parse_area(text: str) -> tuple[float, float]:
    parts = text.lower().split("x")
    if len(parts) == 1:
        return float(parts[0]), float(parts[0])
    if len(parts) == 2:
        return float(parts[0]), float(parts[1])
    raise argparse.ArgumentTypeError(f"bad area {text!r}; use W or WxH")


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def read_config(path: str | Path) -> dict[str, str]:
    """Plain ``key=value`` lines; ``#`` starts a comment, keys match flag names."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def _add_deployment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--area", type=_parse_area, default=(1000.0, 1000.0), help="W or WxH meters")
    p.add_argument("--range", dest="range", type=float, default=150.0, help="comm range (m)")
    p.add_argument("--safety", type=float, default=5.0, help="safety distance (m)")
    p.add_argument("--placement", choices=PLACEMENTS, default="grow")
    p.add_argument("--seed", type=int, default=0)


def _deployment(args, num_uavs: int, seed: int) -> DeploymentConfig:
    w, h = args.area
    return DeploymentConfig(
        num_uavs=num_uavs,
        area_width=w,
        area_height=h,
        comm_range=args.range,
        safety_distance=args.safety,
        rng_seed=seed,
        placement=args.placement,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swarmsched", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value file; command-line flags override it")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommands = sub.choices

    p = sub.add_parser("generate", help="write a random connected deployment")
    p.add_argument("--uavs", type=int, default=100)
    _add_deployment_args(p)
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("inspect", help="root, tree, schedule or round transcript of a topology file")
    p.add_argument("file")
    p.add_argument("what", choices=("root", "tree", "schedule", "simulate"))
    p.add_argument("--dim", type=int, default=1)

    p = sub.add_parser("validate", help="check the schedule built for a topology")
    p.add_argument("file", nargs="?", help="topology file (default: generate one)")
    p.add_argument("--uavs", type=int, default=100)
    _add_deployment_args(p)

    p = sub.add_parser("run", help="paired comparison sweep, CSV output")
    p.add_argument("--uavs", type=_int_list, default=[20, 40, 60, 80, 100], help="comma list")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--schemes", type=_str_list, default=baselines.SCHEMES, help="comma list")
    p.add_argument("--dim", type=int, default=10, help="model size for byte accounting")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--validate", action="store_true", help="validate every proposed schedule")
    _add_deployment_args(p)
    p.add_argument("--out", help="CSV file (default: stdout)")

    p = sub.add_parser("fl", help="synthetic federated least-squares run")
    p.add_argument("--uavs", type=int, default=50)
    p.add_argument("--rounds", type=int, default=20)
    p.add_argument("--dim", type=int, default=10)
    p.add_argument("--iters", type=int, default=5)
    p.add_argument("--batch", type=int, default=10)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--mode", choices=("iid", "non-iid"), default="iid")
    _add_deployment_args(p)
    p.add_argument("--out", help="history CSV (default: stdout)")
    p.add_argument("--checkpoint", help="write the final global model here")
    return parser


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        values = read_config(args.config)
        subparser = parser.subcommands[args.command]
        known = {a.dest: a for a in subparser._actions}
        defaults = {}
        for key, value in values.items():
            if key not in known:
                parser.error(f"unknown config key {key!r} for command {args.command}")
            action = known[key]
            if action.const is True:
                defaults[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                defaults[key] = action.type(value) if action.type else value
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path: str) -> SwarmTopology:
    return parse_topology(Path(path).read_text())


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _dispatch(args)
    except (SwarmSchedError, ValueError, OSError) as exc:
        msg = str(exc).replace("\n", " | ")
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "generate":
        topo = generate_deployment(_deployment(args, args.uavs, args.seed))
        _emit(topo.to_text(), args.out)
    elif args.command == "inspect":
        sys.stdout.write(inspect(_load(args.file), args.what, args.dim))
    elif args.command == "validate":
        if args.file:
            topo = _load(args.file)
        else:
            topo = generate_deployment(_deployment(args, args.uavs, args.seed))
        tree = build_bfs_tree(topo, select_root(topo))
        report = validate_schedule(build_schedule(tree), tree)
        print(report.format())
        return 0 if report.ok else 1
    elif args.command == "run":
        plan = ExperimentPlan(
            sizes=args.uavs,
            trials=args.trials,
            schemes=args.schemes,
            deployment=_deployment(args, 1, 0),
            model_dim=args.dim,
            base_seed=args.seed,
            output=Path(args.out) if args.out else None,
            validate=args.validate,
            workers=args.workers,
        )
        _emit(rows_to_csv(run_experiment(plan)), args.out)
    elif args.command == "fl":
        topo = generate_deployment(_deployment(args, args.uavs, derive_seed(args.seed, args.uavs)))
        cfg = FLConfig(
            dim=args.dim,
            local_iters=args.iters,
            batch_size=args.batch,
            learning_rate=args.lr,
            rounds=args.rounds,
            seed=args.seed,
            mode=args.mode,
        )
        history = run_fl_experiment(topo, make_synthetic_problems(topo.num_nodes, cfg), cfg)
        _emit(history_csv(history), args.out)
        if args.checkpoint:
            save_checkpoint(args.checkpoint, history[-1].model)
    return 0


if __name__ == "__main__":
    sys.exit(main())
