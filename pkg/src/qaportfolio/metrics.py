"""Success probability, time-to-solution, advantage ratio, and scaling fits."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .exact import ClassicalSpectrum
from .evolution import StateVector

#: Success probabilities at or above 1 - EXACT_TOL count as exact success.
EXACT_TOL = 1e-12

#: Instances with p below this cannot be resolved and are excluded from fits.
RESOLVABLE_P = 1e-9

RECORD_COLUMNS = ("seed", "n", "algorithm", "schedule", "t_f",
                  "p_success", "tts", "excluded", "wall_time")


@dataclass
class RunRecord:
    """One (instance, algorithm, schedule, t_f) evaluation."""

    seed: int
    n: int
    algorithm: str
    schedule: str
    t_f: float
    p_success: float
    tts: float
    excluded: bool = False
    exact_success: bool = False
    wall_time: float = 0.0
    params_digest: str = ""
    norm_drift: float = 0.0
    seed_state: int | None = None

    def key(self) -> tuple:
        return (self.seed, self.n, self.algorithm, self.schedule, self.t_f)


@dataclass
class ScalingFit:
    """Least-squares fit of mean TTS to 2^(beta + alpha * n)."""

    alpha: float
    beta: float
    residual: float
    n_range: tuple[int, int]
    instances_per_n: dict[int, int] = field(default_factory=dict)

    def as_dict(self, algorithm: str = "", schedule: str = "") -> dict:
        return {
            "algorithm": algorithm,
            "schedule": schedule,
            "alpha": self.alpha,
            "beta": self.beta,
            "residual": self.residual,
            "n_min": self.n_range[0],
            "n_max": self.n_range[1],
            "instances_per_n": {str(k): v for k, v in sorted(self.instances_per_n.items())},
        }


def success_probability(psi: StateVector, spectrum: ClassicalSpectrum) -> float:
    """Total final population on all degenerate classical ground states."""
    if psi.amplitudes.shape[0] != spectrum.energies.shape[0]:
        raise ValueError("state and spectrum dimensions differ")
    return float((np.abs(psi.amplitudes[spectrum.ground_states]) ** 2).sum())


#: Cumulative success level the time-to-solution metric targets.
TTS_TARGET = 0.99


def tts(p: float, t_f: float) -> float:
    """Expected time to 99% cumulative success: t_f ln(1-0.99) / ln(1-p).

    p <= 0 maps to +inf (unsolvable at this budget); p at or above
    1 - 1e-12 maps to t_f itself (exact success). Numerator and
    denominator share the ln(1-x) form so tts(0.99, t_f) == t_f exactly.
    """
    if t_f <= 0:
        raise ValueError("t_f must be positive")
    if p <= 0.0:
        return math.inf
    if p >= 1.0 - EXACT_TOL:
        return t_f
    return t_f * math.log(1.0 - TTS_TARGET) / math.log(1.0 - p)


def advantage_ratio(p_reverse: float, p_forward: float) -> float:
    """Reverse-over-forward success ratio R; +inf when the forward run fails."""
    if p_forward < 0 or p_reverse < 0:
        raise ValueError("probabilities must be nonnegative")
    if p_forward == 0.0:
        return math.inf
    return p_reverse / p_forward


def fit_scaling(points: list[tuple[int, float]]) -> ScalingFit:
    """Fit log2(mean TTS) = beta + alpha * n by least squares.

    Needs at least three distinct sizes; every TTS must be finite and
    positive (callers filter or cap unresolvable instances first).
    """
    sizes = np.array([p[0] for p in points], dtype=np.float64)
    values = np.array([p[1] for p in points], dtype=np.float64)
    if len(set(sizes.tolist())) < 3:
        raise ValueError("need at least 3 distinct sizes to fit")
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise ValueError("all TTS values must be finite and positive")
    logs = np.log2(values)
    design = np.column_stack([np.ones_like(sizes), sizes])
    coef, *_ = np.linalg.lstsq(design, logs, rcond=None)
    beta, alpha = float(coef[0]), float(coef[1])
    resid = logs - design @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return ScalingFit(alpha=alpha, beta=beta, residual=rms,
                      n_range=(int(sizes.min()), int(sizes.max())))


def make_record(seed: int, n: int, algorithm: str, schedule: str, t_f: float,
                p: float, wall_time: float = 0.0, params_digest: str = "",
                norm_drift: float = 0.0, seed_state: int | None = None) -> RunRecord:
    """Assemble a RunRecord, applying the TTS and exclusion conventions."""
    return RunRecord(
        seed=seed, n=n, algorithm=algorithm, schedule=schedule, t_f=t_f,
        p_success=p, tts=tts(p, t_f), excluded=p < RESOLVABLE_P,
        exact_success=p >= 1.0 - EXACT_TOL, wall_time=wall_time,
        params_digest=params_digest, norm_drift=norm_drift, seed_state=seed_state)


def aggregate_mean_tts(records: list[RunRecord]) -> tuple[list[tuple[int, float]], int]:
    """Arithmetic-mean TTS per size over resolvable instances.

    Returns the (n, mean_tts) points plus the count of excluded records.
    """
    by_n: dict[int, list[float]] = {}
    excluded = 0
    for rec in records:
        if rec.excluded or not math.isfinite(rec.tts):
            excluded += 1
            continue
        by_n.setdefault(rec.n, []).append(rec.tts)
    points = [(n, float(np.mean(vals))) for n, vals in sorted(by_n.items())]
    return points, excluded


def params_digest(params: dict) -> str:
    """Short stable digest of algorithm parameters for record keys."""
    blob = json.dumps(params, sort_keys=True, default=str).encode()
    return hashlib.sha1(blob).hexdigest()[:10]


def write_records_csv(records: list[RunRecord], path) -> None:
    """Records CSV, sorted by key; floats via repr for byte-stable output."""
    ordered = sorted(records, key=lambda r: r.key())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_COLUMNS)
        for r in ordered:
            writer.writerow([
                r.seed, r.n, r.algorithm, r.schedule, repr(float(r.t_f)),
                repr(float(r.p_success)), repr(float(r.tts)),
                int(r.excluded), repr(float(r.wall_time)),
            ])


def read_records_csv(path) -> list[RunRecord]:
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            p = float(row["p_success"])
            records.append(RunRecord(
                seed=int(row["seed"]), n=int(row["n"]),
                algorithm=row["algorithm"], schedule=row["schedule"],
                t_f=float(row["t_f"]), p_success=p, tts=float(row["tts"]),
                excluded=bool(int(row["excluded"])),
                exact_success=p >= 1.0 - EXACT_TOL,
                wall_time=float(row["wall_time"])))
    return records
