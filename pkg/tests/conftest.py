import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from swarmsched.topology import DeploymentConfig, SwarmTopology, generate_deployment, parse_topology

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=60
)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"

# worked example: node 0 is the root v_c, node i is v_i
TOY_EDGES = [(1, 0), (1, 2), (1, 3), (4, 0), (4, 6), (5, 6), (6, 0), (7, 0)]


@pytest.fixture
def toy():
    return parse_topology((DATA / "toy8.topo").read_text())


def line(n, spacing=100.0, comm_range=150.0):
    return SwarmTopology(tuple((i * spacing, 0.0) for i in range(n)), comm_range)


def star(leaves, radius=100.0, comm_range=150.0):
    import math

    pts = [(0.0, 0.0)]
    pts += [
        (radius * math.cos(2 * math.pi * k / leaves), radius * math.sin(2 * math.pi * k / leaves))
        for k in range(leaves)
    ]
    return SwarmTopology(tuple(pts), comm_range)


@st.composite
def connected_topologies(draw, max_nodes=40):
    """Deployments from the generator across both placement modes and densities."""
    n = draw(st.integers(1, max_nodes))
    seed = draw(st.integers(0, 2**32 - 1))
    side = draw(st.sampled_from([300.0, 600.0, 1000.0]))
    placement = "grow" if side > 300 else draw(st.sampled_from(["grow", "uniform"]))
    cfg = DeploymentConfig(
        n, area_width=side, area_height=side, comm_range=150.0, safety_distance=5.0,
        rng_seed=seed, placement=placement,
    )
    return generate_deployment(cfg)


@st.composite
def point_graphs(draw, max_nodes=14):
    """Arbitrary point sets (not from the generator), kept only if connected."""
    from hypothesis import assume

    n = draw(st.integers(1, max_nodes))
    coord = st.floats(0, 250, allow_nan=False, allow_infinity=False)
    pts = draw(st.lists(st.tuples(coord, coord), min_size=n, max_size=n))
    topo = SwarmTopology(tuple(pts), 100.0)
    assume(topo.is_connected())
    return topo


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line_ in lines:
            terminalreporter.write_line(line_)


@pytest.fixture
def acceptance_log(request):
    store = request.config.__dict__.setdefault("_acceptance_lines", [])

    def record(criterion, passed, detail):
        msg = f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}"
        store.append(msg)
        print(msg)
        return passed

    return record
