"""Reference computations that share no code with the package under test."""

import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path


def brute_force_edges(positions, comm_range):
    n = len(positions)
    return sorted(
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if math.dist(positions[i], positions[j]) <= comm_range
    )


def floyd_warshall_hops(n, edges):
    inf = float("inf")
    d = [[0 if i == j else inf for j in range(n)] for i in range(n)]
    for u, v in edges:
        d[u][v] = d[v][u] = 1
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik == inf:
                continue
            di = d[i]
            for j in range(n):
                if dik + dk[j] < di[j]:
                    di[j] = dik + dk[j]
    return d


def scipy_hops(n, edges):
    """All-pairs hop counts via scipy's unweighted shortest paths (BFS)."""
    if not edges:
        return np.zeros((n, n), dtype=int)
    u, v = np.array(edges).T
    m = csr_matrix((np.ones(len(u)), (u, v)), shape=(n, n))
    d = shortest_path(m, directed=False, unweighted=True)
    assert np.isfinite(d).all(), "oracle expects a connected graph"
    return d.astype(int)


def weighted_sum(models, weights):
    """Correctly rounded per-component sum of weight * model."""
    models = np.asarray(models, dtype=float)
    return np.array(
        [math.fsum(w * m[c] for w, m in zip(weights, models)) for c in range(models.shape[1])]
    )


def max_rel_error(actual, expected):
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    zero = expected == 0
    if np.any(actual[zero] != 0):
        return math.inf
    if zero.all():
        return 0.0
    return float(np.max(np.abs(actual[~zero] - expected[~zero]) / np.abs(expected[~zero])))


def sgd_steps(features, targets, start, lr, iters, batch, seed_keys):
    """Mini-batch least-squares SGD written out element by element."""
    rng = np.random.default_rng(np.random.SeedSequence(list(seed_keys)))
    n, d = len(features), len(start)
    w = [float(x) for x in start]
    for _ in range(iters):
        if batch >= n:
            rows = list(range(n))
        else:
            rows = [int(i) for i in rng.integers(0, n, size=batch)]
        grad = [0.0] * d
        for i in rows:
            resid = sum(features[i][c] * w[c] for c in range(d)) - targets[i]
            for c in range(d):
                grad[c] += 2.0 * resid * features[i][c] / len(rows)
        w = [w[c] - lr * grad[c] for c in range(d)]
    return np.array(w)
