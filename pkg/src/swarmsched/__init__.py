"""Delay- and overhead-optimal aggregation scheduling for FL in UAV swarms."""

from .baselines import (
    BaselineResult,
    neighbor_broadcast_overhead,
    root_centroid,
    root_random,
    spf_overhead,
)
from .errors import (
    DimensionMismatch,
    DisconnectedTopology,
    DivergenceDetected,
    MissingUpdate,
    ParseError,
    PlacementFailure,
)
from .schedule import Schedule, TransmissionSlot, build_schedule, validate_schedule
from .simcore import NodeState, RoundResult, broadcast_global, make_states, node_action, run_round
from .topology import (
    BfsTree,
    DeploymentConfig,
    SwarmTopology,
    bfs_distances,
    build_bfs_tree,
    eccentricity,
    generate_deployment,
    parse_topology,
    select_root,
)

__version__ = "0.1.0"
