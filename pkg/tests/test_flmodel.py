import math
import struct

import numpy as np
import pytest

from oracles import max_rel_error, sgd_steps, weighted_sum
from swarmsched.errors import DivergenceDetected
from swarmsched.flmodel import (
    FLConfig,
    LocalProblem,
    aggregation_weights,
    global_loss,
    history_csv,
    load_checkpoint,
    local_train,
    make_synthetic_problems,
    run_fl_experiment,
    save_checkpoint,
)
from swarmsched.topology import DeploymentConfig, SwarmTopology, generate_deployment


def test_zero_iterations_is_identity():
    p = make_synthetic_problems(1, FLConfig())[0]
    start = np.arange(10, dtype=float)
    out = local_train(p, start, FLConfig(local_iters=0))
    assert out.tolist() == start.tolist()


def test_full_batch_step_on_squared_norm():
    # (1/2) * ||sqrt(2) I w||^2 == ||w||^2, gradient 2w
    p = LocalProblem(0, math.sqrt(2) * np.eye(2), np.zeros(2))
    cfg = FLConfig(dim=2, local_iters=1, batch_size=2, learning_rate=0.1)
    np.testing.assert_allclose(local_train(p, np.array([1.0, 1.0]), cfg), [0.8, 0.8], rtol=1e-14)


@pytest.mark.parametrize("mode", ["iid", "non-iid"])
def test_sgd_matches_reference(mode):
    cfg = FLConfig(local_iters=5, batch_size=10, learning_rate=0.01, seed=13, mode=mode)
    p = make_synthetic_problems(3, cfg)[2]
    start = np.linspace(-1, 1, cfg.dim)
    got = local_train(p, start, cfg, round_index=4)
    want = sgd_steps(
        p.features.tolist(), p.targets.tolist(), start, 0.01, 5, 10, (13, 4, p.node)
    )
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-14)


def test_divergence_detected():
    cfg = FLConfig(learning_rate=1e6, local_iters=50)
    p = make_synthetic_problems(1, cfg)[0]
    with pytest.raises(DivergenceDetected):
        local_train(p, np.zeros(cfg.dim), cfg)


def test_iid_weights_equal():
    cfg = FLConfig(samples_per_node=100)
    problems = make_synthetic_problems(4, cfg)
    assert [p.data_size for p in problems] == [100] * 4
    assert aggregation_weights(problems) == [0.25] * 4


def test_explicit_sizes_weights():
    problems = make_synthetic_problems(4, FLConfig(mode="non-iid"), sizes=[10, 20, 30, 40])
    assert aggregation_weights(problems) == [0.1, 0.2, 0.3, 0.4]


def test_non_iid_is_skewed():
    problems = make_synthetic_problems(20, FLConfig(mode="non-iid", seed=4))
    assert len({p.data_size for p in problems}) > 1
    means = np.array([p.features.mean(axis=0) for p in problems])
    assert means.std(axis=0).mean() > 0.5


@pytest.mark.parametrize("mode", ["iid", "non-iid"])
def test_problem_generation_deterministic(mode):
    cfg = FLConfig(seed=8, mode=mode)
    a = make_synthetic_problems(6, cfg)
    b = make_synthetic_problems(6, cfg)
    for x, y in zip(a, b):
        assert x.features.tobytes() == y.features.tobytes()
        assert x.targets.tobytes() == y.targets.tobytes()


def test_config_validation():
    with pytest.raises(ValueError):
        FLConfig(learning_rate=0)
    with pytest.raises(ValueError):
        FLConfig(mode="dirichlet")


def test_single_node_equals_local_sgd():
    cfg = FLConfig(rounds=6, seed=2)
    topo = SwarmTopology(((0.0, 0.0),), 150.0)
    problems = make_synthetic_problems(1, cfg)
    history = run_fl_experiment(topo, problems, cfg)
    w = np.zeros(cfg.dim)
    for r in range(1, cfg.rounds + 1):
        w = local_train(problems[0], w, cfg, r)
        assert history[r].model.tobytes() == w.tobytes()
        assert history[r].delay_slots == 0 and history[r].messages == 0


def _centralized(problems, config):
    weights = aggregation_weights(problems)
    w = np.zeros(config.dim)
    out = []
    for r in range(1, config.rounds + 1):
        w = weighted_sum([local_train(p, w, config, r) for p in problems], weights)
        out.append(w)
    return out


@pytest.mark.parametrize("mode,seed", [("iid", 0), ("non-iid", 1), ("non-iid", 2)])
def test_matches_centralized_fedavg(mode, seed):
    cfg = FLConfig(rounds=8, seed=seed, mode=mode)
    topo = generate_deployment(DeploymentConfig(30, rng_seed=seed))
    problems = make_synthetic_problems(30, cfg)
    history = run_fl_experiment(topo, problems, cfg)
    for rec, ref in zip(history[1:], _centralized(problems, cfg)):
        assert max_rel_error(rec.model, ref) <= 1e-9
        assert rec.messages == 29 and rec.broadcast_messages == 29


def test_loss_decreases_iid():
    cfg = FLConfig(rounds=15, seed=5)
    topo = generate_deployment(DeploymentConfig(20, rng_seed=5))
    problems = make_synthetic_problems(20, cfg)
    losses = [h.global_loss for h in run_fl_experiment(topo, problems, cfg)]
    assert all(b <= a for a, b in zip(losses, losses[1:]))
    assert losses[0] == pytest.approx(global_loss(problems, np.zeros(cfg.dim)))


def test_history_csv_format():
    cfg = FLConfig(rounds=2)
    topo = generate_deployment(DeploymentConfig(5, rng_seed=0))
    text = history_csv(run_fl_experiment(topo, make_synthetic_problems(5, cfg), cfg))
    lines = text.splitlines()
    assert lines[0] == "round,global_loss,delay_slots,messages"
    assert len(lines) == 4
    assert lines[2].split(",")[3] == "4"


def test_checkpoint_roundtrip(tmp_path):
    w = np.array([1.5, -2.25, 1e-300, 3.0])
    path = tmp_path / "w.bin"
    save_checkpoint(path, w)
    raw = path.read_bytes()
    assert struct.unpack("<Q", raw[:8]) == (4,)
    assert struct.unpack("<4d", raw[8:]) == tuple(w)
    assert load_checkpoint(path).tolist() == w.tolist()
    path.write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        load_checkpoint(path)
