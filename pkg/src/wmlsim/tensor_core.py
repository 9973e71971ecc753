"""Dense complex linear-algebra primitives.

All matrices are ``numpy`` complex128 arrays. Operators are vectorized in
row-major order, so ``vectorize(L) == (L ⊗ I)|Γ⟩`` and the map
``X -> A X B`` has superoperator matrix ``kron(A, B.T)``. Every other module
relies on this convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class SubsystemDims:
    """Ordered subsystem dimensions of a tensor-product space."""

    dims: tuple
    labels: Optional[tuple] = None

    def __post_init__(self):
        dims = tuple(int(x) for x in self.dims)
        if not dims or any(x < 1 for x in dims):
            raise ValueError(f"subsystem dimensions must be positive, got {self.dims}")
        object.__setattr__(self, "dims", dims)
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != len(dims):
                raise ValueError("one label per subsystem is required")
            object.__setattr__(self, "labels", labels)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def _square(a, name: str = "matrix") -> np.ndarray:
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def mat_exp(a) -> np.ndarray:
    """Matrix exponential (Padé scaling and squaring)."""
    return scipy.linalg.expm(_square(a))


def schatten_norm(a, p=1) -> float:
    """Schatten p-norm for ``p`` in {1, 2, inf}."""
    m = as_matrix(a)
    if p == 2:
        return float(np.linalg.norm(m))
    if p not in (1, np.inf, "inf"):
        raise ValueError(f"unsupported Schatten index p={p!r}")
    s = np.linalg.svd(m, compute_uv=False)
    if p == 1:
        return float(np.sum(s))
    return float(s[0]) if s.size else 0.0


def partial_trace(a, dims, traced: Iterable[int]) -> np.ndarray:
    """Trace out the subsystems listed in ``traced``.

    Args:
        a: square matrix on the space described by ``dims``.
        dims: a :class:`SubsystemDims` or a plain sequence of dimensions.
        traced: indices of the subsystems to remove.

    Returns:
        The reduced matrix on the kept subsystems, in their original order. If
        every subsystem is traced the result is the 1x1 matrix ``[[Tr a]]``.
    """
    if not isinstance(dims, SubsystemDims):
        dims = SubsystemDims(tuple(dims))
    m = _square(a)
    if m.shape[0] != dims.total:
        raise ValueError(f"matrix dimension {m.shape[0]} does not match dims {dims.dims}")
    traced = sorted(set(int(i) for i in traced))
    n = len(dims.dims)
    if any(i < 0 or i >= n for i in traced):
        raise ValueError(f"invalid subsystem index in {traced} for {n} subsystems")
    kept = [i for i in range(n) if i not in traced]

    t = m.reshape(dims.dims + dims.dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for i in traced:
        col[i] = row[i]
    out = "".join(row[i] for i in kept) + "".join(col[i] for i in kept)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    k = int(np.prod([dims.dims[i] for i in kept])) if kept else 1
    return reduced.reshape(k, k)


def vectorize(l) -> np.ndarray:
    """Row-major column vector ``|L⟩ = (L ⊗ I)|Γ⟩``."""
    return _square(l).reshape(-1, 1)


def devectorize(v, d: Optional[int] = None) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized {d}x{d} matrix")
    return v.reshape(d, d)


def gamma_vector(d: int) -> np.ndarray:
    """Unnormalized maximally entangled vector Σ_i |i⟩|i⟩."""
    return np.eye(d, dtype=np.complex128).reshape(-1, 1)


def swap_operator(d: int) -> np.ndarray:
    s = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            s[i * d + j, j * d + i] = 1.0
    return s


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    m = _square(a)
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol * scale)


def herm_eig(a):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending."""
    m = _square(a)
    if not is_hermitian(m):
        raise ValueError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return w[::-1], v[:, ::-1]


def direct_sum(blocks: Sequence[np.ndarray]) -> np.ndarray:
    return scipy.linalg.block_diag(*[as_matrix(b) for b in blocks])
