"""Random jump operators and operator-norm concentration experiments.

Trial ``i`` of dimension ``d`` draws from its own generator seeded by
``SeedSequence(master, spawn_key=(d, i))``, so a record depends only on
``(master, d, i)`` and never on execution order or worker count.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .lindblad import JumpOperator
from .metrics import ginibre_tail_bound
from .tensor_core import as_matrix, schatten_norm


class EnsembleKind(enum.Enum):
    """Entrywise i.i.d. complex ensembles, all with E|entry|² = 1."""

    GINIBRE = "ginibre"
    UNIFORM = "uniform"  # uniform on the disc of radius √2
    RADEMACHER = "rademacher"  # uniform on {±1, ±i}

    @classmethod
    def parse(cls, value) -> "EnsembleKind":
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        aliases = {
            "ginibrecomplex": "ginibre",
            "uniformcomplex": "uniform",
            "rademachercomplex": "rademacher",
        }
        return cls(aliases.get(key, key))


def trial_rng(master: int, *key: int) -> np.random.Generator:
    """Independent generator for the stream identified by ``(master, *key)``."""
    if master < 0 or master >= 2**64:
        raise ValueError("master seed must be a 64-bit unsigned integer")
    return np.random.default_rng(np.random.SeedSequence(entropy=master, spawn_key=tuple(int(k) for k in key)))


def sample_matrix(kind, d: int, rng: np.random.Generator) -> np.ndarray:
    kind = EnsembleKind.parse(kind)
    if d < 1:
        raise ValueError("d must be >= 1")
    if kind is EnsembleKind.GINIBRE:
        return (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    if kind is EnsembleKind.UNIFORM:
        r = np.sqrt(2 * rng.random((d, d)))
        phase = np.exp(2j * np.pi * rng.random((d, d)))
        return r * phase
    units = np.array([1, -1, 1j, -1j], dtype=np.complex128)
    return units[rng.integers(0, 4, size=(d, d))]


def normalize_frobenius(g) -> JumpOperator:
    return JumpOperator.normalized(as_matrix(g, "matrix"))


def sample_jump(kind, d: int, rng: np.random.Generator) -> JumpOperator:
    return normalize_frobenius(sample_matrix(kind, d, rng))


def sample_haar_state(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit column vector in C^d."""
    if d < 1:
        raise ValueError("d must be >= 1")
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return (z / np.linalg.norm(z)).reshape(-1, 1)


@dataclass(frozen=True)
class TailRecord:
    d: int
    trial: int
    norm_sq: float
    scaled: float
    bound: float
    violated: bool


def _tail_record(kind: EnsembleKind, d: int, trial: int, delta: float, seed: int) -> TailRecord:
    g = sample_matrix(kind, d, trial_rng(seed, d, trial))
    norm_sq = schatten_norm(g, np.inf) ** 2 / np.linalg.norm(g) ** 2
    bound = ginibre_tail_bound(d, delta)
    return TailRecord(d, trial, norm_sq, d * norm_sq, bound, norm_sq > bound)


def tail_experiment(
    kind,
    d_list: Sequence[int],
    trials: int,
    delta: float,
    seed: int,
    workers: int = 1,
) -> Tuple[List[TailRecord], Dict[int, dict]]:
    """Sample ‖L‖∞² for Frobenius-normalized random matrices.

    Returns:
        The per-trial records sorted by ``(d, trial)`` and a per-d summary with
        keys ``violation_rate``, ``median_scaled``, ``p99_scaled`` and ``bound``.
    """
    kind = EnsembleKind.parse(kind)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    jobs = [(d, i) for d in d_list for i in range(trials)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda job: _tail_record(kind, job[0], job[1], delta, seed), jobs))
    else:
        records = [_tail_record(kind, d, i, delta, seed) for d, i in jobs]
    records.sort(key=lambda r: (r.d, r.trial))

    summary = {}
    for d in sorted(set(d_list)):
        scaled = np.array([r.scaled for r in records if r.d == d])
        violated = [r.violated for r in records if r.d == d]
        summary[d] = {
            "violation_rate": float(np.mean(violated)),
            "median_scaled": float(np.median(scaled)),
            "p99_scaled": float(np.percentile(scaled, 99)),
            "bound": ginibre_tail_bound(d, delta),
            "within_delta": float(np.mean(violated)) <= delta,
        }
    return records, summary


def marchenko_pastur_edge(d: int) -> float:
    """Asymptotic value (2√d)²/d² · d = 4 of d‖L‖∞² for Ginibre L."""
    return (2 * math.sqrt(d)) ** 2 / d
