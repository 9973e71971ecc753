"""Single-dissipator GKSL generators, their exact channels, and the
Kossakowski-matrix <-> jump-operator correspondence."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Union

import numpy as np

from .tensor_core import (
    HERMITIAN_TOL,
    as_matrix,
    devectorize,
    is_hermitian,
    mat_exp,
    schatten_norm,
    vectorize,
)

PSD_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Superoperator:
    """A linear map on D x D operators, stored as a D^2 x D^2 matrix acting on
    row-major vectorizations."""

    matrix: np.ndarray
    dim: int
    tag: str = "channel"

    def __post_init__(self):
        m = as_matrix(self.matrix, "superoperator")
        if m.shape != (self.dim**2, self.dim**2):
            raise ValueError(
                f"superoperator on dimension {self.dim} must be {self.dim**2}x{self.dim**2}, "
                f"got {m.shape}"
            )
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, d: int) -> "Superoperator":
        return cls(np.eye(d * d, dtype=np.complex128), d, "channel")

    def __matmul__(self, other: "Superoperator") -> "Superoperator":
        """Composition ``self ∘ other``."""
        _check_same_dim(self, other)
        return Superoperator(self.matrix @ other.matrix, self.dim, self.tag)

    def __add__(self, other: "Superoperator") -> "Superoperator":
        _check_same_dim(self, other)
        return Superoperator(self.matrix + other.matrix, self.dim, "map")

    def __sub__(self, other: "Superoperator") -> "Superoperator":
        _check_same_dim(self, other)
        return Superoperator(self.matrix - other.matrix, self.dim, "map")

    def scaled(self, c: complex) -> "Superoperator":
        return Superoperator(c * self.matrix, self.dim, "map")

    def power(self, n: int) -> "Superoperator":
        if n < 0:
            raise ValueError("power must be nonnegative")
        return Superoperator(np.linalg.matrix_power(self.matrix, n), self.dim, self.tag)

    def trace_functional(self) -> np.ndarray:
        """Row vector ⟨I| S; equals ⟨I| for channels and 0 for generators."""
        return vectorize(np.eye(self.dim)).conj().T @ self.matrix

    def trace_preservation_error(self) -> float:
        tr = vectorize(np.eye(self.dim)).conj().T
        return float(np.max(np.abs(self.trace_functional() - tr)))

    def trace_annihilation_error(self) -> float:
        return float(np.max(np.abs(self.trace_functional())))

    def adjoint(self) -> "Superoperator":
        """Hilbert-Schmidt adjoint map."""
        return Superoperator(self.matrix.conj().T, self.dim, "map")


def _check_same_dim(a: Superoperator, b: Superoperator) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


@dataclass(frozen=True, eq=False)
class JumpOperator:
    matrix: np.ndarray
    frobenius_normalized: bool = False

    def __post_init__(self):
        m = as_matrix(self.matrix, "jump operator")
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"jump operator must be square, got shape {m.shape}")
        if self.frobenius_normalized and abs(np.linalg.norm(m) - 1.0) > 1e-10:
            raise ValueError(
                f"jump operator flagged as normalized has Frobenius norm {np.linalg.norm(m)}"
            )
        object.__setattr__(self, "matrix", m)

    @classmethod
    def normalized(cls, matrix) -> "JumpOperator":
        m = as_matrix(matrix, "jump operator")
        norm = np.linalg.norm(m)
        if norm == 0:
            raise ValueError("cannot normalize the zero matrix")
        return cls(m / norm, True)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def op_norm_sq(self) -> float:
        """‖L‖∞²."""
        return schatten_norm(self.matrix, np.inf) ** 2


JumpLike = Union[JumpOperator, np.ndarray]


def _jump_matrix(l: JumpLike) -> np.ndarray:
    if isinstance(l, JumpOperator):
        return l.matrix
    m = as_matrix(l, "jump operator")
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"jump operator must be square, got shape {m.shape}")
    return m


def check_density_matrix(rho, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``rho`` as an array, raising ValueError unless it is a state."""
    m = as_matrix(rho, "density matrix")
    if m.shape[0] != m.shape[1]:
        raise ValueError("density matrix must be square")
    if not is_hermitian(m, tol):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(m) - 1.0) > tol:
        raise ValueError(f"density matrix has trace {np.trace(m).real}")
    if np.linalg.eigvalsh((m + m.conj().T) / 2)[0] < -tol:
        raise ValueError("density matrix has negative eigenvalues")
    return m


def is_density_matrix(rho, tol: float = HERMITIAN_TOL) -> bool:
    try:
        check_density_matrix(rho, tol)
    except ValueError:
        return False
    return True


def dissipator_superop(l: JumpLike) -> Superoperator:
    """Generator of ρ -> LρL† − ½{L†L, ρ}."""
    m = _jump_matrix(l)
    d = m.shape[0]
    ident = np.eye(d)
    ldl = m.conj().T @ m
    mat = np.kron(m, m.conj()) - 0.5 * np.kron(ldl, ident) - 0.5 * np.kron(ident, ldl.T)
    return Superoperator(mat, d, "generator")


def exact_channel(l: JumpLike, t: float) -> Superoperator:
    if t < 0:
        raise ValueError(f"evolution time must be nonnegative, got {t}")
    gen = dissipator_superop(l)
    return Superoperator(mat_exp(t * gen.matrix), gen.dim, "channel")


def apply_channel(s: Superoperator, rho) -> np.ndarray:
    """Apply ``s`` to ``rho``. No renormalization of the output."""
    m = as_matrix(rho, "rho")
    if m.shape != (s.dim, s.dim):
        raise ValueError(f"state of shape {m.shape} does not match superoperator dim {s.dim}")
    return devectorize(s.matrix @ vectorize(m), s.dim)


def depolarizing_superop(d: int) -> Superoperator:
    """Completely depolarizing map X -> (I/d) Tr X."""
    if d < 2:
        raise ValueError("depolarizing channel needs d >= 2")
    v = vectorize(np.eye(d))
    return Superoperator(v @ v.conj().T / d, d, "channel")


def hermitian_basis(d: int) -> List[np.ndarray]:
    """Generalized Gell-Mann basis, Hilbert-Schmidt orthonormal.

    ``F_0 = I/√d``, then the symmetric and antisymmetric off-diagonal
    elements for each pair j < k, then the d − 1 diagonal ones.
    """
    if d < 2:
        raise ValueError("hermitian basis needs d >= 2")
    basis = [np.eye(d, dtype=np.complex128) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            sym = np.zeros((d, d), dtype=np.complex128)
            sym[j, k] = sym[k, j] = 1 / np.sqrt(2)
            anti = np.zeros((d, d), dtype=np.complex128)
            anti[j, k] = -1j / np.sqrt(2)
            anti[k, j] = 1j / np.sqrt(2)
            basis += [sym, anti]
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        basis.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(np.complex128))
    return basis


def _basis_columns(d: int) -> np.ndarray:
    return np.hstack([vectorize(f) for f in hermitian_basis(d)])


@dataclass(frozen=True, eq=False)
class KossakowskiSpec:
    """Coefficient matrix Π of a dissipative GKSL generator in the Gell-Mann basis."""

    pi_matrix: np.ndarray
    basis_tag: str = "gell-mann"

    def __post_init__(self):
        m = as_matrix(self.pi_matrix, "Kossakowski matrix")
        n = m.shape[0]
        d = int(round(np.sqrt(n)))
        if m.shape != (n, n) or d * d != n or d < 2:
            raise ValueError(f"Kossakowski matrix must be d^2 x d^2 with d >= 2, got {m.shape}")
        if self.basis_tag != "gell-mann":
            raise ValueError(f"unknown basis convention {self.basis_tag!r}")
        object.__setattr__(self, "pi_matrix", m)

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.pi_matrix.shape[0])))

    @classmethod
    def from_jumps(cls, weights, jumps) -> "KossakowskiSpec":
        """Build Π = Σ_k γ_k ū_k ū_kᵀ from ``L_k = Σ_m u_mk F_m``."""
        mats = [_jump_matrix(l) for l in jumps]
        cols = _basis_columns(mats[0].shape[0])
        pi = np.zeros((cols.shape[1], cols.shape[1]), dtype=np.complex128)
        for g, m in zip(weights, mats):
            u = cols.conj().T @ vectorize(m)
            pi += g * (u.conj() @ u.T)
        return cls(pi)

    def check_psd(self) -> None:
        m = self.pi_matrix
        scale = max(1.0, float(np.max(np.abs(m))))
        if not is_hermitian(m, PSD_TOL):
            raise ValueError("Kossakowski matrix is not Hermitian")
        if np.linalg.eigvalsh((m + m.conj().T) / 2)[0] < -PSD_TOL * scale:
            raise ValueError("Kossakowski matrix is not positive semidefinite")


@dataclass(frozen=True)
class JumpDecomposition:
    weights: List[float]
    jumps: List[JumpOperator] = field(default_factory=list)

    def generator(self) -> Superoperator:
        d = self.jumps[0].dim
        mat = sum(g * dissipator_superop(l).matrix for g, l in zip(self.weights, self.jumps))
        return Superoperator(mat, d, "generator")


def program_state(spec: KossakowskiSpec) -> np.ndarray:
    """π = (1/Tr Π) Σ_mn Π_mn |F_n⟩⟨F_m|."""
    spec.check_psd()
    tr = np.trace(spec.pi_matrix).real
    if tr <= 0:
        raise ValueError("Kossakowski matrix has zero trace")
    cols = _basis_columns(spec.dim)
    return cols @ spec.pi_matrix.T @ cols.conj().T / tr


def decompose_kossakowski(spec: KossakowskiSpec) -> JumpDecomposition:
    spec.check_psd()
    m = spec.pi_matrix
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    tr = np.trace(m).real
    basis = hermitian_basis(spec.dim)
    weights, jumps = [], []
    for k in np.argsort(w)[::-1]:
        if w[k] <= 1e-12 * tr:
            continue
        # Π = Σ γ ū ū† so the eigenvectors of Π are the conjugated coefficients.
        u = v[:, k].conj()
        mat = sum(c * f for c, f in zip(u, basis))
        weights.append(float(w[k]))
        jumps.append(JumpOperator.normalized(mat))
    return JumpDecomposition(weights, jumps)


def gksl_superop(spec: KossakowskiSpec) -> Superoperator:
    """Generator Σ_mn Π_mn [F_n ρ F_m† − ½{F_m† F_n, ρ}] summed term by term."""
    d = spec.dim
    basis = hermitian_basis(d)
    ident = np.eye(d)
    mat = np.zeros((d * d, d * d), dtype=np.complex128)
    for m_idx, fm in enumerate(basis):
        for n_idx, fn in enumerate(basis):
            c = spec.pi_matrix[m_idx, n_idx]
            if c == 0:
                continue
            prod = fm.conj().T @ fn
            mat += c * (
                np.kron(fn, fm.conj()) - 0.5 * np.kron(prod, ident) - 0.5 * np.kron(ident, prod.T)
            )
    return Superoperator(mat, d, "generator")
