import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wmlsim.tensor_core import (
    SubsystemDims,
    as_matrix,
    devectorize,
    direct_sum,
    gamma_vector,
    herm_eig,
    is_hermitian,
    kron,
    mat_exp,
    partial_trace,
    schatten_norm,
    swap_operator,
    vectorize,
)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)


def _rand(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_kron_identity():
    np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_on_gamma_vectorizes():
    np.testing.assert_allclose(kron(PAULI_X, np.eye(2)) @ gamma_vector(2), vectorize(PAULI_X))


def test_kron_vec_identity(rng):
    a, b, c = (_rand(rng, 3, 3) for _ in range(3))
    lhs = kron(a, b) @ vectorize(c)
    assert np.max(np.abs(lhs - vectorize(a @ c @ b.T))) <= 1e-12


def test_mat_exp_basics(rng):
    np.testing.assert_allclose(mat_exp(np.zeros((3, 3))), np.eye(3))
    assert mat_exp(np.array([[-1.0]]))[0, 0] == pytest.approx(0.36787944117144233, rel=1e-14)
    a = _rand(rng, 8, 8)
    a *= 2 / np.linalg.norm(a, 2)
    assert np.max(np.abs(mat_exp(a) @ mat_exp(-a) - np.eye(8))) <= 1e-11


def test_mat_exp_rejects_nonsquare():
    with pytest.raises(ValueError):
        mat_exp(np.zeros((2, 3)))


def test_schatten_norms(rng):
    assert schatten_norm(np.eye(5), 2) == pytest.approx(np.sqrt(5))
    diag = np.diag([3.0, -4.0])
    assert schatten_norm(diag, 1) == pytest.approx(7)
    assert schatten_norm(diag, np.inf) == pytest.approx(4)
    g = _rand(rng, 6, 6)
    assert schatten_norm(g, np.inf) <= schatten_norm(g, 2) <= schatten_norm(g, 1)
    with pytest.raises(ValueError):
        schatten_norm(g, 3)


def test_partial_trace_examples(rng):
    d = 2
    rho = np.array([[0.7, 0.2j], [-0.2j, 0.3]])
    pi = np.eye(d * d) / d**2
    np.testing.assert_allclose(partial_trace(np.kron(rho, pi), [d, d * d], [1]), rho, atol=1e-15)
    g = gamma_vector(3)
    np.testing.assert_allclose(partial_trace(g @ g.conj().T / 3, [3, 3], [1]), np.eye(3) / 3, atol=1e-15)
    a = _rand(rng, 12, 12)
    assert np.trace(partial_trace(a, SubsystemDims((3, 4)), [0])) == pytest.approx(np.trace(a))


@pytest.mark.parametrize("size, dims, traced", [(6, [2, 3], [2]), (6, [2, 5], [0]), (4, [2, 2], [-1])])
def test_partial_trace_errors(size, dims, traced):
    with pytest.raises(ValueError):
        partial_trace(np.eye(size), dims, traced)


def test_vectorize_conventions(rng):
    np.testing.assert_array_equal(vectorize(np.eye(3)), gamma_vector(3))
    l = _rand(rng, 4, 4)
    np.testing.assert_array_equal(devectorize(vectorize(l)), l)
    v = vectorize(l)
    assert (v.conj().T @ v)[0, 0].real == pytest.approx(np.linalg.norm(l) ** 2)
    # component at joint index (j, i) is L_ji
    assert v[1 * 4 + 2, 0] == l[1, 2]


def test_vectorize_errors():
    with pytest.raises(ValueError):
        vectorize(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        devectorize(np.zeros(5))


def test_swap_operator():
    d = 3
    a, b = np.arange(9.0).reshape(3, 3), np.eye(3) + 1
    s = swap_operator(d)
    np.testing.assert_allclose(s @ np.kron(a, b) @ s, np.kron(b, a))


def test_hermitian_helpers(rng):
    h = _rand(rng, 4, 4)
    h = h + h.conj().T
    assert is_hermitian(h)
    w, v = herm_eig(h)
    assert np.all(np.diff(w) <= 0)
    np.testing.assert_allclose((v * w) @ v.conj().T, h, atol=1e-12)
    with pytest.raises(ValueError):
        herm_eig(_rand(rng, 3, 3))


def test_direct_sum_and_dims():
    out = direct_sum([np.eye(2), 2 * np.eye(1)])
    np.testing.assert_array_equal(np.diag(out), [1, 1, 2])
    assert SubsystemDims((2, 3, 4)).total == 24
    with pytest.raises(ValueError):
        SubsystemDims((2, 0))


def test_as_matrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_matrix(np.array([[np.nan]]))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_vectorize_round_trip_property(d, seed):
    l = _rand(np.random.default_rng(seed), d, d)
    np.testing.assert_array_equal(devectorize(vectorize(l), d), l)
