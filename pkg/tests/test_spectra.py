import numpy as np
import pytest

from tsgeo.exceptions import EigensolverError
from tsgeo.neighbor_graph import connected_components, epsilon_graph, epsilon_grid, pairwise_distances
from tsgeo.spectra import (
    bucket_counts, check_taus, count_in, jacobi_eigenvalues, mu_series, normalized_laplacian,
    sym_eigenvalues, tau_partition, zero_multiplicity,
)


def complete(n):
    return ~np.eye(n, dtype=bool)


def path(n):
    a = np.zeros((n, n), dtype=bool)
    i = np.arange(n - 1)
    a[i, i + 1] = a[i + 1, i] = True
    return a


def cycle(n):
    a = path(n)
    a[0, -1] = a[-1, 0] = True
    return a


def random_graph(rng, n, p):
    a = np.triu(rng.uniform(size=(n, n)) < p, 1)
    return a | a.T


def test_laplacian_examples():
    assert normalized_laplacian(complete(2)).tolist() == [[1, -1], [-1, 1]]
    assert not normalized_laplacian(np.zeros((4, 4), dtype=bool)).any()
    assert np.allclose(sym_eigenvalues(normalized_laplacian(path(3))), [0, 1, 2], atol=1e-8)
    with pytest.raises(ValueError):
        normalized_laplacian(np.eye(2))


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_eigen_examples(method):
    assert np.allclose(sym_eigenvalues(np.eye(5), method=method), 1)
    assert sym_eigenvalues(np.diag([3.0, 1.0, 2.0]), method=method).tolist() == [1, 2, 3]
    lap = normalized_laplacian(complete(4))
    lam = sym_eigenvalues(lap, method=method)
    assert np.allclose(lam, [0, 4 / 3, 4 / 3, 4 / 3], atol=1e-12)
    _, vecs = np.linalg.eigh(lap)
    assert np.abs(lap @ vecs - vecs * lam).max() <= 1e-9 * 4


@pytest.mark.parametrize("n", range(2, 9))
def test_complete_graph_spectrum(n):
    lam = sym_eigenvalues(normalized_laplacian(complete(n)))
    assert abs(lam[0]) <= 1e-8
    assert np.abs(lam[1:] - n / (n - 1)).max() <= 1e-8


def test_jacobi_matches_lapack(rng):
    for _ in range(10):
        m = rng.normal(size=(9, 9))
        m = m + m.T
        assert np.allclose(jacobi_eigenvalues(m), np.linalg.eigvalsh(m), atol=1e-10)


def test_solver_failure_is_wrapped(monkeypatch):
    def boom(a):
        raise np.linalg.LinAlgError("no convergence")
    monkeypatch.setattr(np.linalg, "eigvalsh", boom)
    with pytest.raises(EigensolverError, match="order 3"):
        sym_eigenvalues(np.eye(3))
    with pytest.raises(EigensolverError):
        jacobi_eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]]), max_sweeps=0)


def test_spectrum_bounds_random_graphs(rng):
    for _ in range(100):
        adj = random_graph(rng, int(rng.integers(1, 25)), rng.uniform(0.02, 0.6))
        lap = normalized_laplacian(adj)
        lam = sym_eigenvalues(lap)
        assert lam.min() >= -1e-8 and lam.max() <= 2 + 1e-8
        assert lam[0] <= 1e-8
        assert zero_multiplicity(lam) == connected_components(adj)
        assert abs(lam.sum() - np.count_nonzero(adj.any(axis=1))) <= 1e-6
        assert np.array_equal(lap, lap.T)


def test_bipartite_and_odd_cycles(rng):
    for _ in range(20):
        a_n, b_n = rng.integers(1, 8, size=2)
        n = a_n + b_n
        adj = np.zeros((n, n), dtype=bool)
        cross = rng.uniform(size=(a_n, b_n)) < 0.5
        cross[:, 0] = True
        cross[0, :] = True  # connected
        adj[:a_n, a_n:] = cross
        adj |= adj.T
        assert abs(sym_eigenvalues(normalized_laplacian(adj))[-1] - 2) <= 1e-7
    for n in (3, 5, 7, 9):
        assert sym_eigenvalues(normalized_laplacian(cycle(n)))[-1] < 2


def test_count_in_examples():
    lam = [0.0, 1.0, 2.0]
    assert count_in(lam, 0, 1) == 1
    assert count_in(lam, 1, 2, closed_hi=True) == 2
    assert count_in([], 0, 2) == 0


def test_tau_partition():
    t = tau_partition()
    assert len(t) == 8 and t[0] == 0 and t[-1] == 2
    check_taus([0.0, 0.5, 2.0])
    with pytest.raises(ValueError):
        check_taus([0.0, 1.0, 1.0, 2.0])
    assert bucket_counts([-1e-16, 0.3, 2.0 + 1e-15], tau_partition(2)).tolist() == [2, 1]


def test_mu_series_conservation_and_ends(rng):
    for _ in range(20):
        n = int(rng.integers(3, 30))
        d = pairwise_distances(rng.normal(size=(n, 3)))
        grid = epsilon_grid(d, 60)
        mu = mu_series(d, grid).channels
        assert mu.shape == (7, 60)
        assert (mu.sum(axis=0) == n).all()
        low = mu_series(d, [d[d > 0].min() / 2]).channels[:, 0]
        assert low.tolist() == [n] + [0] * 6


def test_mu_zero_channel_counts_components(rng):
    d = pairwise_distances(rng.uniform(size=(15, 2)))
    for e in np.linspace(0.05, d.max(), 10):
        lam = sym_eigenvalues(normalized_laplacian(epsilon_graph(d, e)))
        assert count_in(np.where(np.abs(lam) <= 1e-7, 0.0, lam), 0, 0, closed_hi=True) == \
            connected_components(epsilon_graph(d, e))


def test_mu_series_solver_choice_agrees(rng):
    d = pairwise_distances(rng.normal(size=(12, 3)))
    grid = epsilon_grid(d, 30)
    assert np.array_equal(mu_series(d, grid).channels, mu_series(d, grid, method="jacobi").channels)


def test_cut_point_eigenvalues_snap():
    taus = tau_partition()
    assert bucket_counts([8 / 7 - 1e-15, 8 / 7 + 1e-15], taus).tolist() == [0, 0, 0, 0, 2, 0, 0]
    assert bucket_counts([8 / 7 - 1e-6], taus).tolist() == [0, 0, 0, 1, 0, 0, 0]
