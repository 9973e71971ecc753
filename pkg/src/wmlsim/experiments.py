"""Seeded batch experiments behind the command-line interface.

Every runner takes an :class:`ExperimentConfig` and returns a
:class:`RunResult` whose rows are a pure function of the config, apart from
the shared ``timestamp`` column.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .ensembles import EnsembleKind, sample_jump, tail_experiment, trial_rng
from .lindblad import exact_channel
from .metrics import choi, complexity_bounds, diamond_bounds, lemma1_bound, trace_distance
from .tensor_core import mat_exp
from .wml import (
    SimulationParams,
    WmlStepMethod,
    _generator_matrix,
    _s_matrices,
    m_operator,
    n_step_channel,
    one_step_superop,
    residual_generator_superop,
    stinespring_exact_expansion_residual,
    stinespring_unitary,
    transfer_coeffs,
    transfer_matrix,
)
from .worstcase import (
    closed_form_error,
    closed_form_yz,
    rankone_coeffs,
    rankone_sample_count,
    simulate_rankone,
    trace_distance_lb,
    zn_asymptotic,
)

log = logging.getLogger(__name__)

COMMANDS = ("verify", "scaling", "typical", "worstcase", "bounds")
NON_PROVENANCE_KEYS = ("out", "format", "workers")


class UsageError(ValueError):
    """Invalid experiment configuration (exit status 2)."""


@dataclass
class ExperimentConfig:
    command: str
    d: Optional[int] = None
    d_list: Optional[List[int]] = None
    t: float = 1.0
    n_grid: Optional[List[int]] = None
    eps: Optional[List[float]] = None
    delta: float = 0.5
    trials: int = 100
    seed: int = 0
    method: str = "analytic"
    kind: str = "ginibre"
    l_inf_sq: float = 1.0
    restarts: int = 8
    out: Optional[str] = None
    format: str = "csv"
    workers: int = 1

    def dims(self, default: Sequence[int]) -> List[int]:
        if self.d_list:
            return list(self.d_list)
        if self.d is not None:
            return [self.d]
        return list(default)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        for d in self.dims([2]):
            if d < 2:
                raise UsageError(f"dimension must be >= 2, got {d}")
        if not math.isfinite(self.t) or self.t < 0:
            raise UsageError("t must be a finite nonnegative number")
        if self.n_grid is not None and any(n < 1 for n in self.n_grid):
            raise UsageError("every n in the grid must be >= 1")
        if self.eps is not None and any(not 0 < e < 1 for e in self.eps):
            raise UsageError("eps values must lie in (0, 1)")
        if not 0 < self.delta < 1:
            raise UsageError("delta must lie in (0, 1)")
        if self.trials < 1:
            raise UsageError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        if not 0 < self.l_inf_sq <= 1:
            raise UsageError("l_inf_sq must lie in (0, 1]")
        if self.restarts < 1 or self.workers < 1:
            raise UsageError("restarts and workers must be >= 1")
        if self.format not in ("csv", "json"):
            raise UsageError(f"unknown format {self.format!r}")
        try:
            WmlStepMethod.parse(self.method)
            EnsembleKind.parse(self.kind)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def provenance(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k not in NON_PROVENANCE_KEYS}

    def config_hash(self) -> str:
        blob = json.dumps(self.provenance(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @classmethod
    def field_names(cls) -> List[str]:
        return [f.name for f in fields(cls)]


@dataclass
class RunResult:
    rows: List[dict]
    failures: List[str] = field(default_factory=list)
    summary: Dict = field(default_factory=dict)
    report: List[str] = field(default_factory=list)

    @property
    def exit_status(self) -> int:
        return 1 if self.failures else 0


def _timestamp() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


def _stamp(config: ExperimentConfig, rows: List[dict]) -> List[dict]:
    base = {
        "command": config.command,
        "seed": config.seed,
        "software_version": __version__,
        "timestamp": _timestamp(),
        "config_hash": config.config_hash(),
        "method": WmlStepMethod.parse(config.method).value,
    }
    return [{**base, **row} for row in rows]


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------------------
# verify


@dataclass
class IdentityCheck:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<44s} max deviation {self.deviation:.3e} (tol {self.tolerance:.0e})"


def verify_identities(d: int, seed: int = 0, m: Optional[np.ndarray] = None) -> List[IdentityCheck]:
    """Algebraic identities of the WML construction at dimension ``d``.

    ``m`` replaces the jump operator M in the structural identities; it exists
    so that a corrupted operator can be shown to fail.
    """
    if d not in (2, 3):
        raise UsageError(f"verify supports d in {{2, 3}}, got {d}")
    m = m_operator(d) if m is None else np.asarray(m, dtype=np.complex128)
    checks = [
        IdentityCheck("sqrt(d) M^2 = M", float(np.max(np.abs(np.sqrt(d) * m @ m - m))), 1e-13),
        IdentityCheck(
            "M^dag M M^dag = d M^dag",
            float(np.max(np.abs(m.conj().T @ m @ m.conj().T - d * m.conj().T))),
            1e-12,
        ),
    ]
    gen = _generator_matrix(m)
    tr = np.eye(d**3).reshape(1, -1)
    checks.append(IdentityCheck("generator trace annihilation", float(np.max(np.abs(tr @ gen))), 1e-10))

    s = _s_matrices(m, d)
    tm = transfer_matrix(d)
    dev = max(float(np.max(np.abs(gen @ s[k] - sum(tm[k, j] * s[j] for j in range(5))))) for k in range(5))
    checks.append(IdentityCheck("M S_k = sum_j T_kj S_j", dev, 1e-10))
    checks.append(IdentityCheck("M = S_1 - S_2", float(np.max(np.abs(gen - (s[1] - s[2])))), 1e-12))

    dev = 0.0
    for dd in (2, 3, 5, 10):
        for delta in (0.01, 0.1, 0.5):
            row = mat_exp(delta * transfer_matrix(dd))[0].real
            dev = max(dev, float(np.max(np.abs(row - transfer_coeffs(dd, delta).first_row))))
    checks.append(IdentityCheck("first row of exp(T delta) closed form", dev, 1e-12))

    rng = trial_rng(seed, d, 0)
    jumps = [sample_jump(EnsembleKind.GINIBRE, d, rng) for _ in range(3)]
    dev = dev_decomp = 0.0
    for l in jumps:
        for delta in (0.01, 0.1):
            analytic = one_step_superop(l, delta, WmlStepMethod.ANALYTIC).matrix
            brute = one_step_superop(l, delta, WmlStepMethod.BRUTE_FORCE).matrix
            dev = max(dev, float(np.max(np.abs(analytic - brute))))
            lt = residual_generator_superop(l, delta).matrix
            dep = np.eye(d * d) - np.outer(np.eye(d).reshape(-1), np.eye(d).reshape(-1)) / d
            rebuilt = np.eye(d * d) + delta * dep @ lt
            dev_decomp = max(dev_decomp, float(np.max(np.abs(analytic - rebuilt))))
    checks.append(IdentityCheck("analytic step = brute-force step", dev, 1e-10))
    checks.append(IdentityCheck("step = I + delta (I - D1) L~", dev_decomp, 1e-11))

    dev = max(stinespring_exact_expansion_residual(d, p, jumps[0]) for p in (0.05, 0.2, 0.5))
    checks.append(IdentityCheck("Stinespring three-term expansion", dev, 1e-10))
    try:
        for p in (0.1, 0.5):
            stinespring_unitary(d, p, tol=1e-11)
        dev = 0.0
    except RuntimeError:
        dev = math.inf
    checks.append(IdentityCheck("Stinespring closed-form blocks", dev, 1e-11))
    return checks


def run_verify(config: ExperimentConfig, m: Optional[np.ndarray] = None) -> RunResult:
    rows, report, failures = [], [], []
    for d in config.dims([2]):
        for check in verify_identities(d, config.seed, m):
            rows.append(
                {"d": d, "identity": check.name, "deviation": check.deviation,
                 "tolerance": check.tolerance, "passed": check.passed}
            )
            report.append(f"d={d}  " + check.line())
            if not check.passed:
                failures.append(f"d={d}: {check.name}")
    return RunResult(_stamp(config, rows), failures, report=report)


# ---------------------------------------------------------------------------
# scaling

DEFAULT_SCALING_GRID = [32, 64, 128, 256, 512, 1024]


def scaling_jump(seed: int, d: int):
    """Seeded Ginibre jump operator used by the scaling experiment."""
    return sample_jump(EnsembleKind.GINIBRE, d, trial_rng(seed, d, 0))


def _scaling_row(config: ExperimentConfig, d: int, n: int) -> dict:
    method = WmlStepMethod.parse(config.method)
    l = scaling_jump(config.seed, d)
    params = SimulationParams(d, config.t, n)
    exact = exact_channel(l, config.t)
    approx = n_step_channel(l, params, method)
    bounds = diamond_bounds(exact, approx, config.restarts, seed=int(trial_rng(config.seed, d, n).integers(2**32)))
    err_maxent = trace_distance(choi(exact).matrix / d, choi(approx).matrix / d)
    return {
        "d": d,
        "t": config.t,
        "n": n,
        "l_inf_sq": l.op_norm_sq,
        "err_maxent": err_maxent,
        "err_choi_lower": bounds.lower,
        "err_ascent_lower": bounds.ascent_lower,
        "err_choi_upper": bounds.upper,
        "bound_lemma1": lemma1_bound(d, config.t, n, l.op_norm_sq),
        "lemma1_valid": params.lemma1_valid,
    }


def loglog_slope(n: Sequence[float], err: Sequence[float]) -> float:
    x, y = np.log(np.asarray(n, float)), np.log(np.asarray(err, float))
    return float(np.polyfit(x, y, 1)[0])


def run_scaling(config: ExperimentConfig) -> RunResult:
    grid = sorted(config.n_grid or DEFAULT_SCALING_GRID)
    jobs = [(d, n) for d in config.dims([2]) for n in grid]
    rows = _map(lambda job: _scaling_row(config, *job), jobs, config.workers)
    rows.sort(key=lambda r: (r["d"], r["n"]))
    failures, summary, report = [], {}, []
    for r in rows:
        if r["lemma1_valid"] and max(r["err_choi_lower"], r["err_ascent_lower"]) > r["bound_lemma1"]:
            failures.append(f"d={r['d']} n={r['n']}: certified lower bound exceeds the n-step bound")
    for d in config.dims([2]):
        sub = [r for r in rows if r["d"] == d and r["err_maxent"] > 0]
        if len(sub) >= 2:
            slope = loglog_slope([r["n"] for r in sub], [r["err_maxent"] for r in sub])
            summary[d] = {"loglog_slope": slope}
            report.append(f"d={d}  log-log slope of err_maxent vs n: {slope:.4f}")
    return RunResult(_stamp(config, rows), failures, summary, report)


# ---------------------------------------------------------------------------
# typical


def run_typical(config: ExperimentConfig) -> RunResult:
    d_list = config.dims([16, 32, 64])
    eps = (config.eps or [0.1])[0]
    records, tails = tail_experiment(config.kind, d_list, config.trials, config.delta, config.seed, config.workers)
    t2_eps = config.t**2 / eps
    rows, failures, report = [], [], []
    for r in records:
        typical = 7 * (1 + math.log(2 / config.delta) / r.d) * t2_eps
        certified = (2 * r.d + 3) / 8 * r.norm_sq * t2_eps
        rows.append(
            {
                "d": r.d,
                "trial": r.trial,
                "kind": EnsembleKind.parse(config.kind).value,
                "delta": config.delta,
                "eps": eps,
                "t": config.t,
                "norm_sq": r.norm_sq,
                "scaled": r.scaled,
                "tail_bound": r.bound,
                "violated": r.violated,
                "certified_upper": certified,
                "typical_upper": typical,
                "within_typical": certified <= typical,
            }
        )
    summary = {}
    for d in sorted(set(d_list)):
        sub = [r for r in rows if r["d"] == d]
        frac = float(np.mean([r["within_typical"] for r in sub]))
        summary[d] = {**tails[d], "fraction_within_typical": frac, "typical_upper": sub[0]["typical_upper"]}
        report.append(
            f"d={d}  violation rate {tails[d]['violation_rate']:.4f}  median d|L|^2 "
            f"{tails[d]['median_scaled']:.4f}  fraction within typical bound {frac:.4f}"
        )
        if frac < 1 - config.delta:
            failures.append(f"d={d}: only {frac:.3f} of trials within the typical bound")
        if tails[d]["violation_rate"] > config.delta:
            failures.append(f"d={d}: tail-bound violation rate above delta")
    return RunResult(_stamp(config, rows), failures, summary, report)


# ---------------------------------------------------------------------------
# worstcase

DEFAULT_WORST_DIMS = [2, 3, 4, 8, 16, 32, 64]
DEFAULT_WORST_GRID = [16, 64, 256, 1024]


def small_eps_threshold(d: int, t: float) -> float:
    """Largest ε treated as "sufficiently small" for the rank-one lower bound."""
    return 0.1 * (d - 1) * t * t / 16


def _worst_row(config: ExperimentConfig, d: int, n: int) -> dict:
    t = config.t
    if t > 0:
        y, z = closed_form_yz(rankone_coeffs(d, t / n), n)
    else:
        y, z = 1.0, 0.0
    z_sim_dev = None
    method = WmlStepMethod.parse(config.method)
    if d <= 3 and method is not WmlStepMethod.STINESPRING:
        sim = simulate_rankone(d, t, n, method)
        z_sim_dev = max(sim.coeff_deviation, sim.off_space_residual)
    lb = trace_distance_lb(d, z)
    return {
        "d": d,
        "t": t,
        "n": n,
        "y_closed": y,
        "z_closed": z,
        "z_sim_dev": z_sim_dev,
        "tdist_lb": lb,
        "n_tdist_lb": n * lb,
        "exact_error": closed_form_error(d, t, n),
        "asymptote": zn_asymptotic(t, n),
    }


def run_worstcase(config: ExperimentConfig) -> RunResult:
    grid = sorted(config.n_grid or DEFAULT_WORST_GRID)
    dims = config.dims(DEFAULT_WORST_DIMS)
    jobs = [(d, n) for d in dims for n in grid]
    rows = _map(lambda job: _worst_row(config, *job), jobs, config.workers)
    rows.sort(key=lambda r: (r["d"], r["n"]))
    failures, summary, report = [], {}, []
    for r in rows:
        if r["z_sim_dev"] is not None and r["z_sim_dev"] > 1e-10:
            failures.append(f"d={r['d']} n={r['n']}: simulation deviates from closed form")
    for eps in config.eps or []:
        for d in dims:
            if config.t == 0:
                continue
            n_eps = rankone_sample_count(d, config.t, eps)
            lower = d / 32 * config.t**2 / eps
            small = eps <= small_eps_threshold(d, config.t)
            summary[(d, eps)] = {"n_eps": n_eps, "worst_lower": lower, "small_eps": small}
            report.append(f"d={d} eps={eps:g}  n(eps)={n_eps}  d/32 t^2/eps={lower:.6g}  small-eps regime={small}")
            if small and n_eps < lower:
                failures.append(f"d={d} eps={eps}: n(eps)={n_eps} below d/32 t^2/eps")
    return RunResult(_stamp(config, rows), failures, summary, report)


# ---------------------------------------------------------------------------
# bounds


def run_bounds(config: ExperimentConfig) -> RunResult:
    rows, failures = [], []
    for d in config.dims([2]):
        for eps in config.eps or [0.1]:
            rep = complexity_bounds(d, config.t, eps, config.delta, config.l_inf_sq)
            rows.append(rep.as_dict())
            if rep.new_upper > rep.old_upper:
                failures.append(f"d={d} eps={eps}: new upper bound exceeds old upper bound")
            if config.l_inf_sq == 1 and rep.worst_lower > rep.new_upper:
                failures.append(f"d={d} eps={eps}: worst-case lower bound exceeds upper bound")
    return RunResult(_stamp(config, rows), failures)


RUNNERS = {
    "verify": run_verify,
    "scaling": run_scaling,
    "typical": run_typical,
    "worstcase": run_worstcase,
    "bounds": run_bounds,
}


def run(config: ExperimentConfig) -> RunResult:
    config.validate()
    return RUNNERS[config.command](config)


# ---------------------------------------------------------------------------
# serialization


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".16e")
    return str(v)


def _columns(rows: List[dict]) -> List[str]:
    cols: List[str] = []
    for row in rows:
        cols.extend(k for k in row if k not in cols)
    return cols


def to_csv(rows: List[dict], exclude: Sequence[str] = ()) -> str:
    cols = [c for c in _columns(rows) if c not in exclude]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_csv_value(row.get(c)) for c in cols])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def to_json(rows: List[dict], exclude: Sequence[str] = ()) -> str:
    cols = [c for c in _columns(rows) if c not in exclude]
    out = [{c: _json_value(row.get(c)) for c in cols} for row in rows]
    return json.dumps(out, indent=1)


def serialize(rows: List[dict], fmt: str, exclude: Sequence[str] = ()) -> str:
    return to_json(rows, exclude) if fmt == "json" else to_csv(rows, exclude)


def parse_csv(text: str) -> List[dict]:
    """Read rows written by :func:`to_csv`, converting numbers and booleans."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        parsed = {}
        for k, v in row.items():
            if v == "":
                parsed[k] = None
            elif v in ("true", "false"):
                parsed[k] = v == "true"
            else:
                try:
                    parsed[k] = int(v)
                except ValueError:
                    try:
                        parsed[k] = float(v)
                    except ValueError:
                        parsed[k] = v
        out.append(parsed)
    return out
