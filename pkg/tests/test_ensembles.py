import numpy as np
import pytest
from scipy import stats

from wmlsim.ensembles import (
    EnsembleKind,
    marchenko_pastur_edge,
    normalize_frobenius,
    sample_haar_state,
    sample_jump,
    sample_matrix,
    tail_experiment,
    trial_rng,
)
from wmlsim.tensor_core import schatten_norm


@pytest.mark.parametrize("kind", list(EnsembleKind))
def test_unit_second_moment(kind):
    g = sample_matrix(kind, 316, trial_rng(7, 0))
    assert 0.99 <= np.mean(np.abs(g) ** 2) <= 1.01


def test_ginibre_frobenius_moment():
    vals = [np.linalg.norm(sample_matrix("ginibre", 16, trial_rng(3, i))) ** 2 / 256 for i in range(1000)]
    assert 0.99 <= np.mean(vals) <= 1.01


def test_determinism():
    a = sample_matrix("ginibre", 5, trial_rng(11, 2, 3))
    b = sample_matrix("ginibre", 5, trial_rng(11, 2, 3))
    c = sample_matrix("ginibre", 5, trial_rng(11, 2, 4))
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(ValueError):
        trial_rng(-1)


def test_rademacher_values():
    g = sample_matrix(EnsembleKind.RADEMACHER, 8, trial_rng(0))
    assert set(np.round(g.ravel(), 12)) <= {1, -1, 1j, -1j}


def test_normalize_frobenius():
    g = sample_matrix("ginibre", 6, trial_rng(1))
    l = normalize_frobenius(g)
    assert abs(np.linalg.norm(l.matrix) - 1) <= 1e-13 and l.frobenius_normalized
    np.testing.assert_allclose(normalize_frobenius(5 * g).matrix, l.matrix, atol=1e-15)
    np.testing.assert_array_equal(normalize_frobenius(l.matrix).matrix, l.matrix)
    ratio = schatten_norm(g, np.inf) / schatten_norm(g, 2)
    assert abs(schatten_norm(l.matrix, np.inf) - ratio) <= 1e-12
    with pytest.raises(ValueError):
        normalize_frobenius(np.zeros((3, 3)))


def test_haar_state_moments():
    d = 8
    assert abs(np.linalg.norm(sample_haar_state(d, trial_rng(0))) - 1) <= 1e-13
    rng = trial_rng(5)
    samples = np.array([sample_haar_state(d, rng).ravel() for _ in range(10_000)])
    m = np.mean(np.abs(samples[:, 0]) ** 2)
    assert 0.9 / d <= m <= 1.1 / d
    phi = np.ones(d) / np.sqrt(d)
    overlap_a = np.abs(samples[:5000, 0]) ** 2
    overlap_b = np.abs(samples[5000:] @ phi.conj()) ** 2
    assert stats.ks_2samp(overlap_a, overlap_b).pvalue > 0.05


def test_tail_experiment_values():
    records, summary = tail_experiment("ginibre", [64], 200, 0.5, seed=2)
    assert summary[64]["bound"] == pytest.approx(0.25270760617, rel=1e-10)
    assert summary[64]["violation_rate"] == 0
    assert all(r.violated == (r.norm_sq > r.bound) for r in records)
    assert [r.trial for r in records] == list(range(200))


def test_tail_experiment_order_independent():
    a, _ = tail_experiment("uniform", [4, 8], 30, 0.1, seed=9, workers=1)
    b, _ = tail_experiment("uniform", [8, 4], 30, 0.1, seed=9, workers=4)
    assert a == b


def test_tail_experiment_errors():
    with pytest.raises(ValueError):
        tail_experiment("ginibre", [4], 0, 0.1, 0)
    with pytest.raises(ValueError):
        tail_experiment("ginibre", [4], 10, 1.0, 0)
    with pytest.raises(ValueError):
        EnsembleKind.parse("cauchy")


def test_sample_jump_and_edge():
    l = sample_jump("rademacher", 4, trial_rng(0))
    assert l.frobenius_normalized
    assert marchenko_pastur_edge(64) == pytest.approx(4)
