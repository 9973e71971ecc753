"""Wave matrix Lindbladization (WML).

A single WML step couples the system (label 1) to a fresh program state
``π_L = |L⟩⟨L|`` on labels 2⊗3, evolves for time Δ under the fixed generator
``𝓜(ω) = MωM† − ½{M†M, ω}`` and discards the program. Three realizations of
that step are provided and are expected to agree:

* ``BRUTE_FORCE``: exponentiate the d⁶ x d⁶ generator and trace out 2⊗3.
* ``ANALYTIC``: closed form obtained by exponentiating the 5 x 5 transfer
  matrix of 𝓜 on the family 𝓢₀..𝓢₄.
* ``STINESPRING``: single-ancilla dilation ``exp(−i√δ [[0, M†], [M, 0]])``.

All one-step maps are returned as d² x d² superoperators on system 1.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass

import numpy as np

from .lindblad import (
    JumpLike,
    JumpOperator,
    Superoperator,
    _jump_matrix,
    depolarizing_superop,
    dissipator_superop,
)
from .tensor_core import gamma_vector, mat_exp, swap_operator

NORMALIZATION_TOL = 1e-10
MAX_GENERATOR_DIM = 4


class WmlStepMethod(enum.Enum):
    BRUTE_FORCE = "brute_force"
    ANALYTIC = "analytic"
    STINESPRING = "stinespring"

    @classmethod
    def parse(cls, value) -> "WmlStepMethod":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "_")
        aliases = {"bruteforce": "brute_force", "brute": "brute_force"}
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class SimulationParams:
    d: int
    t: float
    n: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def delta(self) -> float:
        return self.t / self.n

    @property
    def lemma1_valid(self) -> bool:
        """Whether n > 2dt, the regime where the per-step error bound is proven."""
        return self.n > 2 * self.d * self.t


def f_relax(x):
    """``1 + (e^{-x} - 1)/x``, with value 0 at x = 0.

    Accurate for small ``x`` (series below 1e-3). Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("f_relax is defined for x >= 0")
    small = x < 1e-3
    safe = np.where(small, 1.0, x)
    direct = (safe + np.expm1(-safe)) / safe
    series = x / 2 - x**2 / 6 + x**3 / 24 - x**4 / 120 + x**5 / 720
    out = np.where(small, series, direct)
    return float(out) if out.ndim == 0 else out


def exp_quad_gap(x):
    """``e^x − x − 1`` on [0, 1]."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("exp_quad_gap is defined on [0, 1]")
    out = np.expm1(x) - x
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# The jump operator M and superoperators on the d³-dimensional space 1⊗2⊗3


@functools.lru_cache(maxsize=None)
def _m_operator_cached(d: int) -> np.ndarray:
    g = gamma_vector(d)
    proj = np.kron(np.eye(d), g @ g.conj().T)
    swap = np.kron(swap_operator(d), np.eye(d))
    m = proj @ swap / np.sqrt(d)
    m.setflags(write=False)
    return m


def m_operator(d: int) -> np.ndarray:
    """``M = (1/√d)(I₁ ⊗ |Γ⟩⟨Γ|₂₃)(SWAP₁₂ ⊗ I₃)``, a d³ x d³ matrix."""
    if d < 2:
        raise ValueError("M is defined for d >= 2")
    return _m_operator_cached(int(d)).copy()


def _generator_matrix(m: np.ndarray) -> np.ndarray:
    p = m.conj().T @ m
    ident = np.eye(m.shape[0])
    return np.kron(m, m.conj()) - 0.5 * np.kron(p, ident) - 0.5 * np.kron(ident, p.T)


def wml_generator_superop(d: int) -> Superoperator:
    if d < 2 or d > MAX_GENERATOR_DIM:
        raise ValueError(f"WML generator supported for 2 <= d <= {MAX_GENERATOR_DIM}, got {d}")
    return Superoperator(_generator_matrix(_m_operator_cached(d)), d**3, "generator")


def _s_matrices(m: np.ndarray, d: int) -> list:
    p = m.conj().T @ m
    ident = np.eye(m.shape[0])
    return [
        np.kron(ident, ident),
        np.kron(m, m.conj()),
        0.5 * (np.kron(p, ident) + np.kron(ident, p.T)),
        np.sqrt(d) / 2 * (np.kron(p, m.conj()) + np.kron(m, p.T)),
        np.kron(p, p.T) / d,
    ]


def s_superops(d: int) -> list:
    """The five maps 𝓢₀..𝓢₄ closed under left multiplication by 𝓜."""
    if d not in (2, 3):
        raise ValueError(f"S superoperators supported for d in {{2, 3}}, got {d}")
    return [Superoperator(x, d**3, "map") for x in _s_matrices(_m_operator_cached(d), d)]


def transfer_matrix(d: int) -> np.ndarray:
    """Matrix T with 𝓜𝓢_k = Σ_j T_kj 𝓢_j."""
    if d < 2:
        raise ValueError("transfer matrix is defined for d >= 2")
    return np.array(
        [
            [0, 1, -1, 0, 0],
            [0, 1 / d, 0, -1 / d, 0],
            [0, d, -d / 2, 0, -d / 2],
            [0, d, 0, -d / 2, -d / 2],
            [0, d, 0, 0, -d],
        ],
        dtype=np.complex128,
    )


@dataclass(frozen=True)
class TransferCoeffs:
    """First row of exp(TΔ) and the derived one-step channel coefficients.

    The channel acts as ``ρ + a·½{L†L, ρ} + b·LρL† + c·𝓓₁[LρL†]``.
    """

    d: int
    delta: float
    d_prime: float
    c01: float
    c02: float
    c03: float
    c04: float
    a: float
    b: float
    c: float

    @property
    def first_row(self) -> np.ndarray:
        return np.array([1.0, self.c01, self.c02, self.c03, self.c04])


def transfer_coeffs(d: int, delta: float) -> TransferCoeffs:
    if d < 2:
        raise ValueError("transfer coefficients need d >= 2")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    d_prime = d - 1 / d
    f_half = f_relax(delta * d / 2)
    f_prime = f_relax(delta * d_prime)
    # (1 - e^{-Δd'})/d' and (e^{-Δd/2} - 1)/(d/2), written through f to keep
    # the O(Δ²) combination c01 + c02 = Δ(f_half - f_prime) accurate.
    c01 = delta * (1 - f_prime)
    c02 = delta * (f_half - 1)
    total = delta * (f_half - f_prime)
    denom = d * d - 2
    c03 = 2 / denom * total
    c04 = -(d * d) / denom * total
    b = (2 * c02 + d * d * c01) / denom
    return TransferCoeffs(d, delta, d_prime, c01, c02, c03, c04, a=c02, b=b, c=c04)


# ---------------------------------------------------------------------------
# Reduction of d³-space maps to channels on system 1


def _checked_jump(l: JumpLike) -> np.ndarray:
    m = _jump_matrix(l)
    if abs(np.linalg.norm(m) - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"jump operator must have unit Frobenius norm, got {np.linalg.norm(m)}")
    return m


def program_state_vector(l: JumpLike) -> np.ndarray:
    """|L⟩ = (L ⊗ I)|Γ⟩ as a column vector on 2⊗3."""
    return _jump_matrix(l).reshape(-1, 1)


def program_reduction(big: np.ndarray, l: JumpLike) -> Superoperator:
    """The system-1 map ``X -> Tr₂₃[Φ(X ⊗ π_L)]`` for a map Φ on 1⊗2⊗3.

    Args:
        big: d⁶ x d⁶ superoperator matrix on the d³-dimensional space.
        l: jump operator defining the program state.
    """
    lm = _jump_matrix(l)
    d = lm.shape[0]
    pi = program_state_vector(lm)
    pi = pi @ pi.conj().T
    k = d * d
    t = np.asarray(big).reshape(d, k, d, k, d, k, d, k)
    out = np.einsum("pkqkimjn,mn->pqij", t, pi, optimize=True)
    return Superoperator(out.reshape(d * d, d * d), d, "channel")


@functools.lru_cache(maxsize=32)
def _wml_propagator(d: int, delta: float) -> np.ndarray:
    e = mat_exp(delta * _generator_matrix(_m_operator_cached(d)))
    e.setflags(write=False)
    return e


def clear_propagator_cache() -> None:
    _wml_propagator.cache_clear()


def stinespring_delta_param(d: int, delta: float) -> float:
    """Invert Δ = 2(1 − cos√(δd))/d on the principal branch."""
    if delta < 0 or delta > 4 / d:
        raise ValueError(f"no real Stinespring parameter for Δ={delta} at d={d} (need 0 <= Δ <= 4/d)")
    arg = np.clip(1 - delta * d / 2, -1.0, 1.0)
    return float(np.arccos(arg) ** 2 / d)


def stinespring_step_size(d: int, delta_param: float) -> float:
    """Δ(δ) = 2(1 − cos√(δd))/d."""
    if delta_param < 0:
        raise ValueError("δ must be nonnegative")
    theta = np.sqrt(delta_param * d)
    # 1 - cos θ = 2 sin²(θ/2), exact for small θ
    return float(4 * np.sin(theta / 2) ** 2 / d)


def _stinespring_kraus(d: int, delta_param: float):
    m = _m_operator_cached(d)
    theta = np.sqrt(delta_param * d)
    alpha = 2 * np.sin(theta / 2) ** 2 / d
    a = np.eye(d**3) - alpha * (m.conj().T @ m)
    b = -1j * np.sin(theta) / np.sqrt(d) * m
    return a, b


def _stinespring_big_channel(d: int, delta_param: float) -> np.ndarray:
    a, b = _stinespring_kraus(d, delta_param)
    return np.kron(a, a.conj()) + np.kron(b, b.conj())


def one_step_superop(l: JumpLike, delta: float, method=WmlStepMethod.ANALYTIC) -> Superoperator:
    """One WML step of duration ``delta`` as a channel on system 1."""
    method = WmlStepMethod.parse(method)
    lm = _checked_jump(l)
    d = lm.shape[0]
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if delta == 0:
        return Superoperator.identity(d)

    if method is WmlStepMethod.ANALYTIC:
        co = transfer_coeffs(d, delta)
        ident = np.eye(d)
        p = lm.conj().T @ lm
        sandwich = np.kron(lm, lm.conj())
        mat = (
            np.eye(d * d)
            + co.a * 0.5 * (np.kron(p, ident) + np.kron(ident, p.T))
            + co.b * sandwich
            + co.c * depolarizing_superop(d).matrix @ sandwich
        )
        return Superoperator(mat, d, "channel")

    if method is WmlStepMethod.BRUTE_FORCE:
        if d > MAX_GENERATOR_DIM:
            raise ValueError(f"brute-force step supports d <= {MAX_GENERATOR_DIM}")
        return program_reduction(_wml_propagator(d, float(delta)), lm)

    if d > MAX_GENERATOR_DIM:
        raise ValueError(f"Stinespring step supports d <= {MAX_GENERATOR_DIM}")
    delta_param = stinespring_delta_param(d, delta)
    return program_reduction(_stinespring_big_channel(d, delta_param), lm)


def n_step_channel(l: JumpLike, params: SimulationParams, method=WmlStepMethod.ANALYTIC) -> Superoperator:
    lm = _jump_matrix(l)
    if lm.shape[0] != params.d:
        raise ValueError(f"jump operator dimension {lm.shape[0]} does not match d={params.d}")
    step = one_step_superop(lm, params.delta, method)
    return step.power(params.n)


def stinespring_blocks(d: int, delta_param: float):
    """Closed-form left blocks ``(U₀₀, U₁₀)`` of the dilation unitary."""
    a, b = _stinespring_kraus(d, delta_param)
    return a, b


def stinespring_unitary(d: int, delta_param: float, tol: float = 1e-10) -> np.ndarray:
    """``exp(−i√δ [[0, M†], [M, 0]])`` with the ancilla as the outer block index.

    The exponential is cross-checked against the closed-form left blocks and
    a RuntimeError is raised if they disagree by more than ``tol``.
    """
    if delta_param < 0:
        raise ValueError("δ must be nonnegative")
    if d not in (2, 3):
        raise ValueError(f"Stinespring unitary supported for d in {{2, 3}}, got {d}")
    m = _m_operator_cached(d)
    n = d**3
    h = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    h[:n, n:] = m.conj().T
    h[n:, :n] = m
    u = mat_exp(-1j * np.sqrt(delta_param) * h)
    a, b = stinespring_blocks(d, delta_param)
    dev = max(np.max(np.abs(u[:n, :n] - a)), np.max(np.abs(u[n:, :n] - b)))
    if dev > tol:
        raise RuntimeError(f"Stinespring closed form deviates from exponential by {dev:.3e}")
    return u


def stinespring_exact_expansion_residual(d: int, delta_param: float, l: JumpLike = None) -> float:
    """Largest entrywise deviation of the dilated step from its three-term form.

    Compares ``Tr_a V ρ V†`` with ``ρ + Δ𝓜(ρ) + (Δ²d/4)(M†MρM†M/d − MρM†)``
    on the d³-dimensional space. If ``l`` is given, the system-1 reduction is
    also compared with ``ρ + Δ𝓛(ρ) + (Δ²d/4)(𝓓₁ − 𝓘)(LρL†)``.
    """
    if d not in (2, 3):
        raise ValueError(f"supported for d in {{2, 3}}, got {d}")
    step = stinespring_step_size(d, delta_param)
    big = _stinespring_big_channel(d, delta_param)
    m = _m_operator_cached(d)
    p = m.conj().T @ m
    expansion = (
        np.eye(d**6)
        + step * _generator_matrix(m)
        + step**2 * d / 4 * (np.kron(p, p.T) / d - np.kron(m, m.conj()))
    )
    residual = float(np.max(np.abs(big - expansion)))
    if l is not None:
        lm = _jump_matrix(l)
        reduced = program_reduction(big, lm).matrix
        sandwich = np.kron(lm, lm.conj())
        target = (
            np.eye(d * d)
            + step * dissipator_superop(lm).matrix
            + step**2 * d / 4 * (depolarizing_superop(d).matrix - np.eye(d * d)) @ sandwich
        )
        residual = max(residual, float(np.max(np.abs(reduced - target))))
    return residual


def residual_generator_superop(l: JumpLike, delta: float) -> Superoperator:
    """The map 𝓛̃ with ``one_step = 𝓘 + Δ(𝓘 − 𝓓₁)∘𝓛̃``.

    At Δ = 0 this is 𝓛 itself.
    """
    lm = _jump_matrix(l)
    d = lm.shape[0]
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    f_half = f_relax(delta * d / 2)
    f_prime = f_relax(delta * (d - 1 / d))
    denom = d * d - 2
    ident = np.eye(d)
    p = lm.conj().T @ lm
    mat = (
        dissipator_superop(lm).matrix
        + f_half * 0.5 * (np.kron(p, ident) + np.kron(ident, p.T))
        + (2 / denom * f_half - d * d / denom * f_prime) * np.kron(lm, lm.conj())
    )
    return Superoperator(mat, d, "generator")


__all__ = [
    "JumpOperator",
    "SimulationParams",
    "TransferCoeffs",
    "WmlStepMethod",
    "clear_propagator_cache",
    "exp_quad_gap",
    "f_relax",
    "m_operator",
    "n_step_channel",
    "one_step_superop",
    "program_reduction",
    "program_state_vector",
    "residual_generator_superop",
    "s_superops",
    "stinespring_blocks",
    "stinespring_delta_param",
    "stinespring_exact_expansion_residual",
    "stinespring_step_size",
    "stinespring_unitary",
    "transfer_coeffs",
    "transfer_matrix",
    "wml_generator_superop",
]
