"""State and channel distances, Choi matrices, diamond-distance bounds, and the
sample-complexity bound formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .lindblad import Superoperator, check_density_matrix
from .tensor_core import as_matrix, gamma_vector, herm_eig, partial_trace, schatten_norm

ASCENT_TOL = 1e-10
ASCENT_MAX_ITER = 200


def trace_distance(rho, sigma) -> float:
    """½‖ρ − σ‖₁."""
    a, b = as_matrix(rho, "rho"), as_matrix(sigma, "sigma")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    w = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    return float(0.5 * np.sum(np.abs(w)))


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ‖√ρ√σ‖₁²."""
    a = check_density_matrix(rho, 1e-8)
    b = check_density_matrix(sigma, 1e-8)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    f = schatten_norm(_psd_sqrt(a) @ _psd_sqrt(b), 1) ** 2
    return float(min(max(f, 0.0), 1.0))


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """J = Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|), input slot first."""

    matrix: np.ndarray
    dim: int

    def is_psd(self, tol: float = 1e-9) -> bool:
        j = self.matrix
        return bool(np.linalg.eigvalsh((j + j.conj().T) / 2)[0] >= -tol)

    def output_marginal(self) -> np.ndarray:
        """Trace over the output slot; the identity for trace-preserving maps."""
        return partial_trace(self.matrix, [self.dim, self.dim], [1])

    def to_superop(self) -> Superoperator:
        d = self.dim
        s = self.matrix.reshape(d, d, d, d).transpose(1, 3, 0, 2)
        return Superoperator(s.reshape(d * d, d * d), d, "map")


def choi(s: Superoperator) -> ChoiMatrix:
    d = s.dim
    j = s.matrix.reshape(d, d, d, d).transpose(2, 0, 3, 1)
    return ChoiMatrix(j.reshape(d * d, d * d), d)


def is_cptp(s: Superoperator, psd_tol: float = 1e-9, tp_tol: float = 1e-10) -> bool:
    return choi(s).is_psd(psd_tol) and s.trace_preservation_error() <= tp_tol


@dataclass
class DiamondBounds:
    """Bounds on the normalized diamond distance ½‖A − B‖⋄."""

    lower: float
    upper: float
    ascent_lower: float
    method_notes: str = ""
    ascent_history: List[float] = field(default_factory=list, repr=False)


def _extended_output(j4: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """(𝓘 ⊗ Φ)(|ψ⟩⟨ψ|) for a pure ψ on reference ⊗ system."""
    d = j4.shape[0]
    big = np.kron(psi.reshape(d, d), np.eye(d))
    jm = j4.reshape(d * d, d * d)
    return big @ jm @ big.conj().T


def _sign_operator(x: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((x + x.conj().T) / 2)
    sign = np.where(w >= 0, 1.0, -1.0)
    return (v * sign) @ v.conj().T


def _adjoint_extended(adj: Superoperator, s: np.ndarray) -> np.ndarray:
    """(𝓘 ⊗ Φ†)(S) for S on reference ⊗ system."""
    d = adj.dim
    t = s.reshape(d, d, d, d)  # [r, p, r', q]
    sm = adj.matrix.reshape(d, d, d, d)  # [a, b, p, q]
    out = np.einsum("abpq,rpsq->rasb", sm, t)
    return out.reshape(d * d, d * d)


def see_saw_ascent(delta_map: Superoperator, psi0: np.ndarray, history: Optional[list] = None) -> float:
    """Local maximization of ½‖(𝓘 ⊗ ΔΦ)(ψψ†)‖₁ over pure ψ.

    Alternates the optimal Hermitian contraction S for the current ψ with the
    top eigenvector of (𝓘 ⊗ ΔΦ†)(S). The objective never decreases.
    """
    d = delta_map.dim
    j4 = choi(delta_map).matrix.reshape(d, d, d, d)
    adj = delta_map.adjoint()
    psi = np.asarray(psi0, dtype=np.complex128).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    best = -np.inf
    for _ in range(ASCENT_MAX_ITER):
        out = _extended_output(j4, psi)
        s = _sign_operator(out)
        value = 0.5 * float(np.real(np.trace(s @ out)))
        if history is not None:
            history.append(value)
        if value - best < ASCENT_TOL:
            best = max(best, value)
            break
        best = value
        a = _adjoint_extended(adj, s)
        _, vecs = herm_eig((a + a.conj().T) / 2)
        psi = vecs[:, 0]
    return best


def diamond_bounds(sa: Superoperator, sb: Superoperator, ascent_restarts: int = 8, seed: int = 0) -> DiamondBounds:
    """Sandwich bounds on ½‖sa − sb‖⋄ plus a see-saw refined lower bound.

    ``lower`` uses the maximally entangled input, ``upper`` is ½‖J‖₁. The
    ascent starts from the maximally entangled vector and from
    ``ascent_restarts − 1`` Haar-random vectors drawn from ``seed``.
    """
    if sa.dim != sb.dim:
        raise ValueError(f"dimension mismatch: {sa.dim} vs {sb.dim}")
    d = sa.dim
    diff = sa - sb
    jnorm = schatten_norm(choi(diff).matrix, 1)
    lower = jnorm / (2 * d)
    upper = jnorm / 2
    if jnorm == 0:
        return DiamondBounds(0.0, 0.0, 0.0, "identical maps")

    rng = np.random.default_rng(seed)
    starts = [gamma_vector(d).reshape(-1) / np.sqrt(d)]
    for _ in range(max(ascent_restarts, 1) - 1):
        z = rng.standard_normal(d * d) + 1j * rng.standard_normal(d * d)
        starts.append(z / np.linalg.norm(z))
    history: list = []
    ascent = max(see_saw_ascent(diff, psi, history if i == 0 else None) for i, psi in enumerate(starts))
    notes = f"choi sandwich; see-saw with {len(starts)} starts"
    return DiamondBounds(lower, upper, ascent, notes, history)


# ---------------------------------------------------------------------------
# Sample-complexity bounds


GENERAL_LOWER_EPS_MAX = 0.039
GENERAL_LOWER_EPS_PER_T = 0.013


@dataclass(frozen=True)
class BoundReport:
    d: int
    t: float
    eps: float
    delta: float
    l_inf_sq: float
    new_upper: float
    old_upper: float
    general_lower: float
    typical_upper: float
    worst_lower: float
    ginibre_tail: float
    general_lower_valid: bool
    worst_lower_asymptotic: bool = True

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def ginibre_tail_bound(d: int, delta: float) -> float:
    """High-probability bound 16/d + 8 log(2/δ)/d² on ‖L‖∞² for normalized Ginibre L."""
    return 16 / d + 8 * math.log(2 / delta) / d**2


def lemma1_bound(d: int, t: float, n: int, l_inf_sq: float) -> float:
    """(2d+3) t² / (8n) · ‖L‖∞²."""
    return (2 * d + 3) * t * t / (8 * n) * l_inf_sq


def one_step_bound(d: int, delta: float, l_inf_sq: float) -> float:
    """Δ²(2d+3)/8 · ‖L‖∞²."""
    return delta * delta * (2 * d + 3) / 8 * l_inf_sq


def complexity_bounds(d: int, t: float, eps: float, delta: float, l_inf_sq: float) -> BoundReport:
    if d < 2:
        raise ValueError("d must be >= 2")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if not 0 < l_inf_sq <= 1:
        raise ValueError("l_inf_sq must lie in (0, 1]")
    ratio = t * t / eps
    return BoundReport(
        d=d,
        t=t,
        eps=eps,
        delta=delta,
        l_inf_sq=l_inf_sq,
        new_upper=(2 * d + 3) / 8 * l_inf_sq * ratio,
        old_upper=3 * d * d * ratio,
        general_lower=1e-4 * ratio,
        typical_upper=7 * (1 + math.log(2 / delta) / d) * ratio,
        worst_lower=d / 32 * ratio,
        ginibre_tail=ginibre_tail_bound(d, delta),
        general_lower_valid=eps <= min(GENERAL_LOWER_EPS_MAX, GENERAL_LOWER_EPS_PER_T * t),
    )
