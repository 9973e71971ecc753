"""Rank-one adversarial instance L = |u⟩⟨u| with input ρ₀ = |u⟩⟨u|.

The exact dynamics leave ρ₀ fixed, while n WML steps produce
``y_n |u⟩⟨u| + z_n I`` with (y_n, z_n) obeying a 2 x 2 linear recurrence.
``u`` is the first computational basis vector throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lindblad import JumpOperator, apply_channel
from .wml import SimulationParams, WmlStepMethod, f_relax, n_step_channel


@dataclass(frozen=True)
class RankOneCoeffs:
    d: int
    delta: float
    a: float
    b: float
    c: float

    @property
    def s(self) -> float:
        return self.a + self.b

    @property
    def kappa(self) -> float:
        return self.c / self.d

    @property
    def lambda_minus_one(self) -> float:
        return self.s + self.kappa

    @property
    def lam(self) -> float:
        return 1 + self.lambda_minus_one

    @property
    def update_matrix(self) -> np.ndarray:
        """M_Δ acting on (y, z)."""
        return np.array([[1 + self.s, self.s], [self.kappa, 1 + self.kappa]])


def _coeff_arrays(d: int, delta):
    delta = np.asarray(delta, dtype=float)
    f_half = f_relax(delta * d / 2)
    f_prime = f_relax(delta * (d - 1 / d))
    e20 = delta * (f_half - 1)  # (e^{-dΔ/2} - 1)/(d/2)
    e10 = delta * (1 - f_prime)  # -(e^{-(d-1/d)Δ} - 1)/(d - 1/d)
    denom = d * d - 2
    a = e20
    b = 2 / denom * e20 + d * d / denom * e10
    c = -(d * d) / denom * delta * (f_half - f_prime)
    return a, b, c


def rankone_coeffs(d: int, delta: float) -> RankOneCoeffs:
    if d < 2:
        raise ValueError("rank-one construction needs d >= 2")
    if delta <= 0:
        raise ValueError("delta must be positive")
    a, b, c = _coeff_arrays(d, delta)
    return RankOneCoeffs(d, float(delta), float(a), float(b), float(c))


def recurrence_yz(coeffs: RankOneCoeffs, n: int):
    """Iterate M_Δ n times on (1, 0)."""
    v = np.array([1.0, 0.0])
    m = coeffs.update_matrix
    for _ in range(n):
        v = m @ v
    return float(v[0]), float(v[1])


def closed_form_yz(coeffs: RankOneCoeffs, n: int):
    """(y_n, z_n) = (κ + sλⁿ, κ(λⁿ − 1)) / (λ − 1).

    Evaluated as ``z_n = κ g``, ``y_n = 1 + s g`` with
    ``g = (λⁿ − 1)/(λ − 1)``, which avoids cancellation when λ is near 1.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    x = coeffs.lambda_minus_one
    if x == 0:
        return recurrence_yz(coeffs, n)
    g = math.expm1(n * math.log1p(x)) / x
    return 1 + coeffs.s * g, coeffs.kappa * g


def zn_asymptotic(t: float, n: int) -> float:
    """Leading behavior t²/(4n) of z_n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return t * t / (4 * n)


def trace_distance_lb(d: int, z_n: float) -> float:
    """(d − 1)/2 · |z_n|, a lower bound on the trace-distance error."""
    return (d - 1) / 2 * abs(z_n)


def exact_trace_error(d: int, y_n: float, z_n: float) -> float:
    """½‖y|u⟩⟨u| + zI − |u⟩⟨u|‖₁."""
    return 0.5 * (abs(y_n - 1 + z_n) + (d - 1) * abs(z_n))


def closed_form_error(d: int, t: float, n: int) -> float:
    if t == 0:
        return 0.0
    y, z = closed_form_yz(rankone_coeffs(d, t / n), n)
    return exact_trace_error(d, y, z)


def rankone_sample_count(d: int, t: float, eps: float, n_max: int = 10**7) -> int:
    """Smallest n whose n-step error on the rank-one instance is at most ``eps``.

    Uses only the closed form, so large d is cheap.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if t == 0:
        return 1
    start, chunk = 1, 4096
    while start <= n_max:
        n = np.arange(start, min(start + chunk, n_max + 1), dtype=float)
        a, b, c = _coeff_arrays(d, t / n)
        s, kappa = a + b, c / d
        x = s + kappa
        g = np.expm1(n * np.log1p(x)) / x
        y, z = 1 + s * g, kappa * g
        err = 0.5 * (np.abs(y - 1 + z) + (d - 1) * np.abs(z))
        hit = np.nonzero(err <= eps)[0]
        if hit.size:
            return int(n[hit[0]])
        start += chunk
        chunk *= 2
    raise RuntimeError(f"error {eps} not reached for n <= {n_max}")


def rankone_jump(d: int) -> JumpOperator:
    u = np.zeros((d, d), dtype=np.complex128)
    u[0, 0] = 1.0
    return JumpOperator(u, True)


@dataclass(frozen=True)
class RankOneSimulation:
    rho: np.ndarray
    y: float
    z: float
    y_closed: float
    z_closed: float
    coeff_deviation: float
    off_space_residual: float


def simulate_rankone(d: int, t: float, n: int, method=WmlStepMethod.ANALYTIC) -> RankOneSimulation:
    """Run n WML steps on ρ₀ = |u⟩⟨u| and compare with the closed form."""
    method = WmlStepMethod.parse(method)
    if method is WmlStepMethod.BRUTE_FORCE and d > 3:
        raise ValueError("brute-force rank-one simulation supports d <= 3")
    if not 2 <= d <= 4:
        raise ValueError("rank-one simulation supports 2 <= d <= 4")
    params = SimulationParams(d, t, n)
    lj = rankone_jump(d)
    channel = n_step_channel(lj, params, method)
    rho = apply_channel(channel, lj.matrix)

    proj = lj.matrix
    ident = np.eye(d)
    gram = np.array([[1.0, 1.0], [1.0, float(d)]])
    rhs = np.array([np.trace(proj @ rho).real, np.trace(rho).real])
    y, z = np.linalg.solve(gram, rhs)
    residual = float(np.max(np.abs(rho - (y * proj + z * ident))))

    if t == 0:
        y_c, z_c = 1.0, 0.0
    else:
        y_c, z_c = closed_form_yz(rankone_coeffs(d, params.delta), n)
    dev = max(abs(y - y_c), abs(z - z_c))
    return RankOneSimulation(rho, float(y), float(z), y_c, z_c, float(dev), residual)


@dataclass(frozen=True)
class RankOneTrajectory:
    d: int
    t: float
    n_max: int
    points: tuple  # (n, y_n, z_n) for n = 0..n_max


def rankone_trajectory(d: int, t: float, n_max: int) -> RankOneTrajectory:
    """Coefficients (y_n, z_n) of the n-step output at fixed Δ = t/n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    coeffs = rankone_coeffs(d, t / n_max)
    m = coeffs.update_matrix
    v = np.array([1.0, 0.0])
    points = [(0, 1.0, 0.0)]
    for n in range(1, n_max + 1):
        v = m @ v
        points.append((n, float(v[0]), float(v[1])))
    return RankOneTrajectory(d, t, n_max, tuple(points))
