"""Batch studies and their outputs.

Reproduces the benchmark protocol at desk scale: forward TTS scaling with
exponent fits, forward success-probability scatter, hard-instance reverse
advantage ratios, reverse-annealing TTS scaling, and spectrum traces.
Studies are deterministic for a fixed config at any worker count, and
resume from partially written output directories.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import evolution, exact, hamiltonians, metrics, schedules
from .instances import build_ising

DESK_N_RANGE = [4, 6, 8, 10]
FULL_N_RANGE = [4, 6, 8, 10, 12]
DESK_INSTANCES = 100
FULL_INSTANCES = 500

#: Variants compared under the reverse schedule (Table-II style studies).
REVERSE_ALGORITHMS = [
    hamiltonians.STANDARD,
    hamiltonians.COUPLER_FERRO,
    hamiltonians.COUPLER_ANTIFERRO,
    hamiltonians.COUPLER_MIXED,
    hamiltonians.RFQA_M,
    hamiltonians.RFQA_D,
]

STUDIES = ("forward_scaling", "forward_success", "reverse_ratio",
           "reverse_scaling", "spectrum")

#: Abort a study when more than this fraction of runs fail.
MAX_FAILURE_FRACTION = 0.05


class StudyError(RuntimeError):
    """A study could not produce its contracted outputs."""


@dataclass
class ExperimentConfig:
    """Knobs for one study run; unset fields fall back to desk-scale defaults."""

    study: str
    out_dir: str
    master_seed: int = 7
    n_range: list[int] | None = None
    instances: int | None = None
    t_f: list[float] | None = None
    algorithms: list[str] | None = None
    s_pause: float = 0.5
    ramp_fraction: float = 0.1
    dt: float | None = None
    workers: int = 1
    full: bool = False
    rfqa_amplitude: float = hamiltonians.DEFAULT_RFQA_AMPLITUDE
    inhomogeneous_r: float = 0.5
    hard_seed: int | None = None
    search_budget: int = 200
    p_threshold: float = 0.2
    t_probe: float = 10.0
    include_cd_inhomogeneous_reverse: bool = False
    spectrum_grid: int = 400
    spectrum_levels: int = 4

    def __post_init__(self) -> None:
        if self.study not in STUDIES:
            raise ValueError(f"unknown study {self.study!r}")
        if self.n_range is None:
            if self.study in ("forward_scaling", "reverse_scaling"):
                self.n_range = list(FULL_N_RANGE if self.full else DESK_N_RANGE)
            else:
                self.n_range = [12] if self.full else [10]
        if self.instances is None:
            self.instances = FULL_INSTANCES if self.full else DESK_INSTANCES
        if self.t_f is None:
            self.t_f = [float(t) for t in range(1, 11)] \
                if self.study == "reverse_ratio" else [1.0]
        elif isinstance(self.t_f, (int, float)):
            self.t_f = [float(self.t_f)]
        if self.algorithms is None:
            if self.study in ("reverse_ratio", "reverse_scaling"):
                self.algorithms = list(REVERSE_ALGORITHMS)
                if self.include_cd_inhomogeneous_reverse:
                    self.algorithms += [hamiltonians.INHOMOGENEOUS, hamiltonians.CD_QA]
            else:
                self.algorithms = list(hamiltonians.KINDS)
        unknown = set(self.algorithms) - set(hamiltonians.KINDS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")
        if self.instances < 1:
            raise ValueError("instances must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        return cls(**payload)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class StudyReport:
    """In-memory result of a study plus the files it wrote."""

    records: list[metrics.RunRecord]
    summary: dict
    files: list[str] = field(default_factory=list)


def derive_instance_seed(master_seed: int, n: int, index: int) -> int:
    """Stable 63-bit instance seed; identical for every algorithm."""
    blob = f"instance|{master_seed}|{n}|{index}".encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big") >> 1


def derive_algo_seed(instance_seed: int, kind: str) -> int:
    """Stable seed for per-instance algorithm draws (signs, frequencies)."""
    blob = f"algo|{instance_seed}|{kind}".encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big") >> 1


def _run_one(item: tuple, common: dict) -> metrics.RunRecord:
    seed, n, kind, schedule_kind, t_f, seed_state = item
    problem = build_ising(seed, n)
    spectrum = exact.enumerate_spectrum(problem)
    schedule = schedules.Schedule(kind=schedule_kind, t_f=t_f,
                                  s_pause=common["s_pause"],
                                  ramp_fraction=common["ramp_fraction"])
    algo = hamiltonians.make_algorithm(
        kind, problem, t_f, rng_seed=derive_algo_seed(seed, kind),
        rfqa_amplitude=common["rfqa_amplitude"],
        inhomogeneous_r=common["inhomogeneous_r"])
    ham = hamiltonians.assemble(problem, algo, schedule)
    psi0 = evolution.initial_state(n, schedule, seed_state)

    started = time.perf_counter()
    psi = evolution.evolve_with_retries(ham, psi0, t_f, dt=common["dt"])
    wall = time.perf_counter() - started

    p = metrics.success_probability(psi, spectrum)
    digest = metrics.params_digest({
        "kind": kind, "rng_seed": algo.rng_seed,
        "rfqa_amplitude": algo.rfqa_amplitude,
        "inhomogeneous_r": algo.inhomogeneous_r,
        "s_pause": common["s_pause"], "ramp_fraction": common["ramp_fraction"],
    })
    return metrics.make_record(seed=seed, n=n, algorithm=kind,
                               schedule=schedule_kind, t_f=t_f, p=p,
                               wall_time=wall, params_digest=digest,
                               norm_drift=psi.norm_drift, seed_state=seed_state)


def _run_one_safe(args: tuple) -> tuple[tuple, metrics.RunRecord | None, str | None]:
    item, common = args
    key = (item[0], item[1], item[2], item[3], item[4])
    try:
        return key, _run_one(item, common), None
    except Exception as err:  # noqa: BLE001 - per-run failures are recorded
        return key, None, f"{type(err).__name__}: {err}"


def _execute(items: list[tuple], common: dict, workers: int
             ) -> tuple[dict[tuple, metrics.RunRecord], list[tuple[tuple, str]]]:
    """Run work items, serially or in a process pool; merge deterministically."""
    results: dict[tuple, metrics.RunRecord] = {}
    failures: list[tuple[tuple, str]] = []
    if workers <= 1 or len(items) <= 1:
        outcomes = (_run_one_safe((item, common)) for item in items)
        for key, rec, err in outcomes:
            if err is None:
                results[key] = rec
            else:
                failures.append((key, err))
    else:
        chunk = max(1, len(items) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for key, rec, err in pool.map(
                    _run_one_safe, [(item, common) for item in items],
                    chunksize=chunk):
                if err is None:
                    results[key] = rec
                else:
                    failures.append((key, err))
    return results, failures


def _common_params(cfg: ExperimentConfig) -> dict:
    return {
        "s_pause": cfg.s_pause,
        "ramp_fraction": cfg.ramp_fraction,
        "dt": cfg.dt,
        "rfqa_amplitude": cfg.rfqa_amplitude,
        "inhomogeneous_r": cfg.inhomogeneous_r,
    }


def _records_path(out_dir: Path) -> Path:
    return out_dir / "records.csv"


def _load_existing(out_dir: Path) -> dict[tuple, metrics.RunRecord]:
    path = _records_path(out_dir)
    if not path.exists():
        return {}
    return {rec.key(): rec for rec in metrics.read_records_csv(path)}


def _run_items_resumable(cfg: ExperimentConfig, items: list[tuple]
                         ) -> tuple[list[metrics.RunRecord], dict]:
    """Compute any items missing from the output dir, merge, and report."""
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    existing = _load_existing(out_dir)
    item_keys = [(it[0], it[1], it[2], it[3], it[4]) for it in items]
    todo = [it for it, key in zip(items, item_keys) if key not in existing]
    results, failures = _execute(todo, _common_params(cfg), cfg.workers)
    if todo and len(failures) > MAX_FAILURE_FRACTION * len(todo):
        raise StudyError(
            f"{len(failures)}/{len(todo)} runs failed; first: {failures[0]}")

    merged = dict(existing)
    merged.update(results)
    records = [merged[key] for key in item_keys if key in merged]
    stats = {
        "computed": len(results),
        "resumed": len(items) - len(todo),
        "failures": [{"key": list(map(str, key)), "error": err}
                     for key, err in failures],
        "max_norm_drift": max((r.norm_drift for r in results.values()),
                              default=0.0),
    }
    return records, stats


def _write_summary(out_dir: Path, summary: dict) -> Path:
    path = out_dir / "summary.json"
    if path.exists():
        try:
            previous = json.loads(path.read_text())
            prev_drift = previous.get("run_stats", {}).get("max_norm_drift", 0.0)
            cur = summary.get("run_stats", {}).get("max_norm_drift", 0.0)
            summary.setdefault("run_stats", {})["max_norm_drift"] = max(prev_drift, cur)
        except (json.JSONDecodeError, AttributeError):
            pass
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return path


def _write_fits_csv(out_dir: Path, fits: list[dict]) -> Path:
    path = out_dir / "fits.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "schedule", "alpha", "beta", "residual",
                         "n_min", "n_max"])
        for f in fits:
            writer.writerow([f["algorithm"], f["schedule"], repr(f["alpha"]),
                             repr(f["beta"]), repr(f["residual"]),
                             f["n_min"], f["n_max"]])
    return path


def _fit_algorithms(records: list[metrics.RunRecord], schedule: str,
                    algorithms: list[str]) -> tuple[list[dict], list[str], dict]:
    fits, warnings = [], []
    exclusions: dict[str, int] = {}
    for kind in algorithms:
        recs = [r for r in records if r.algorithm == kind and r.schedule == schedule]
        if not recs:
            continue
        points, excluded = metrics.aggregate_mean_tts(recs)
        exclusions[kind] = excluded
        if len(points) < 3:
            warnings.append(
                f"{kind}/{schedule}: {len(points)} sizes with data, "
                f"need >= 3 for a scaling fit")
            continue
        fit = metrics.fit_scaling(points)
        per_n: dict[int, int] = {}
        for r in recs:
            if not r.excluded:
                per_n[r.n] = per_n.get(r.n, 0) + 1
        fit.instances_per_n = per_n
        fits.append(fit.as_dict(algorithm=kind, schedule=schedule))
    return fits, warnings, exclusions


def run_forward_scaling(cfg: ExperimentConfig) -> StudyReport:
    """Forward anneal at fixed t_f across sizes; per-algorithm 2^(b+an) fits."""
    t_f = cfg.t_f[0]
    items = [
        (derive_instance_seed(cfg.master_seed, n, idx), n, kind,
         schedules.FORWARD, t_f, None)
        for n in cfg.n_range
        for idx in range(cfg.instances)
        for kind in cfg.algorithms
    ]
    records, stats = _run_items_resumable(cfg, items)
    fits, warnings, exclusions = _fit_algorithms(records, schedules.FORWARD,
                                                 cfg.algorithms)
    out_dir = Path(cfg.out_dir)
    metrics.write_records_csv(records, _records_path(out_dir))
    files = [str(_records_path(out_dir)), str(_write_fits_csv(out_dir, fits))]
    summary = {
        "study": cfg.study,
        "config": cfg.to_dict(),
        "fits": fits,
        "exclusions": exclusions,
        "warnings": warnings,
        "run_stats": stats,
    }
    files.append(str(_write_summary(out_dir, summary)))
    return StudyReport(records=records, summary=summary, files=files)


def run_forward_success(cfg: ExperimentConfig) -> StudyReport:
    """Per-instance forward success probabilities at one size, all variants."""
    t_f = cfg.t_f[0]
    n = cfg.n_range[0]
    items = [
        (derive_instance_seed(cfg.master_seed, n, idx), n, kind,
         schedules.FORWARD, t_f, None)
        for idx in range(cfg.instances)
        for kind in cfg.algorithms
    ]
    records, stats = _run_items_resumable(cfg, items)

    by_algo: dict[str, dict[int, float]] = {}
    for rec in records:
        by_algo.setdefault(rec.algorithm, {})[rec.seed] = rec.p_success
    baseline = by_algo.get(hamiltonians.STANDARD, {})
    enhancement = {}
    for kind, probs in sorted(by_algo.items()):
        if kind == hamiltonians.STANDARD or not baseline:
            continue
        shared = [s for s in probs if s in baseline]
        if shared:
            wins = sum(1 for s in shared if probs[s] > baseline[s])
            enhancement[kind] = wins / len(shared)

    out_dir = Path(cfg.out_dir)
    metrics.write_records_csv(records, _records_path(out_dir))
    summary = {
        "study": cfg.study,
        "config": cfg.to_dict(),
        "n": n,
        "enhancement_fraction_vs_standard": enhancement,
        "run_stats": stats,
    }
    files = [str(_records_path(out_dir)), str(_write_summary(out_dir, summary))]
    return StudyReport(records=records, summary=summary, files=files)


def find_hard_instance(cfg: ExperimentConfig, n: int
                       ) -> tuple[int, exact.HardnessReport]:
    """Locate (or validate) a hard instance for the reverse studies."""
    if cfg.hard_seed is not None:
        problem = build_ising(cfg.hard_seed, n)
        report = exact.is_hard_instance(problem, cfg.p_threshold, cfg.t_probe)
        if report.seed_state is None:
            raise StudyError(
                f"designated instance {cfg.hard_seed} has no non-global "
                f"local minimum to seed reverse annealing")
        return cfg.hard_seed, report

    candidates_with_minima = 0
    best_p = math.inf
    for idx in range(cfg.search_budget):
        seed = derive_instance_seed(cfg.master_seed, n, idx)
        problem = build_ising(seed, n)
        report = exact.is_hard_instance(problem, cfg.p_threshold, cfg.t_probe)
        if report.has_local_minimum:
            candidates_with_minima += 1
            if report.p_forward is not None:
                best_p = min(best_p, report.p_forward)
        if report.is_hard:
            return seed, report
    raise StudyError(
        f"no hard instance within {cfg.search_budget} candidates at n={n} "
        f"(with local minima: {candidates_with_minima}, "
        f"lowest probe p: {best_p})")


def run_reverse_ratio(cfg: ExperimentConfig) -> StudyReport:
    """Advantage ratio R(t_f) on one hard instance, forward vs reverse."""
    n = cfg.n_range[0]
    hard_seed, hardness = find_hard_instance(cfg, n)
    seed_state = hardness.seed_state

    items = []
    for kind in cfg.algorithms:
        for t_f in cfg.t_f:
            items.append((hard_seed, n, kind, schedules.FORWARD, t_f, None))
            items.append((hard_seed, n, kind, schedules.REVERSE, t_f, seed_state))
    records, stats = _run_items_resumable(cfg, items)

    by_key = {(r.algorithm, r.schedule, r.t_f): r.p_success for r in records}
    ratio_rows = []
    points_above_one = 0
    total_points = 0
    for t_f in cfg.t_f:
        row: dict[str, float] = {"t_f": t_f, "r_reference": 1.0}
        for kind in cfg.algorithms:
            p_f = by_key.get((kind, schedules.FORWARD, t_f))
            p_r = by_key.get((kind, schedules.REVERSE, t_f))
            if p_f is None or p_r is None:
                continue
            ratio = metrics.advantage_ratio(p_r, p_f)
            row[f"R_{kind}"] = ratio
            total_points += 1
            if ratio > 1.0:
                points_above_one += 1
        ratio_rows.append(row)

    out_dir = Path(cfg.out_dir)
    metrics.write_records_csv(records, _records_path(out_dir))
    ratio_path = out_dir / "ratio.csv"
    columns = ["t_f", "r_reference"] + [f"R_{kind}" for kind in cfg.algorithms]
    with open(ratio_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in ratio_rows:
            writer.writerow([repr(float(row.get(c, math.nan))) for c in columns])

    summary = {
        "study": cfg.study,
        "config": cfg.to_dict(),
        "hard_instance": {"seed": hard_seed, **hardness.as_dict()},
        "fraction_points_above_one":
            points_above_one / total_points if total_points else 0.0,
        "run_stats": stats,
    }
    files = [str(_records_path(out_dir)), str(ratio_path),
             str(_write_summary(out_dir, summary))]
    return StudyReport(records=records, summary=summary, files=files)


def _reverse_seed_state(problem) -> tuple[int, bool]:
    """Best non-global local minimum, else the second-lowest energy state."""
    minima = exact.local_minima(problem, exclude_ground=True)
    if minima:
        return minima[0].state, False
    spectrum = exact.enumerate_spectrum(problem)
    if math.isfinite(spectrum.first_excited_energy):
        above = spectrum.energies > spectrum.ground_energy + exact.DEGENERACY_TOL
        candidates = np.flatnonzero(
            np.abs(spectrum.energies - spectrum.first_excited_energy)
            <= exact.DEGENERACY_TOL)
        candidates = candidates[above[candidates]]
        state = int(candidates[0]) if candidates.size else int(np.flatnonzero(above)[0])
    else:
        state = 0
    return state, True


def run_reverse_scaling(cfg: ExperimentConfig) -> StudyReport:
    """Reverse-annealing TTS scaling, seeded per instance at its local minimum.

    Also runs the forward standard-QA baseline the exponent table compares
    against.
    """
    t_f = cfg.t_f[0]
    items = []
    fallback_count = 0
    seeded = 0
    for n in cfg.n_range:
        for idx in range(cfg.instances):
            seed = derive_instance_seed(cfg.master_seed, n, idx)
            problem = build_ising(seed, n)
            seed_state, fell_back = _reverse_seed_state(problem)
            fallback_count += int(fell_back)
            seeded += 1
            for kind in cfg.algorithms:
                items.append((seed, n, kind, schedules.REVERSE, t_f, seed_state))
            items.append((seed, n, hamiltonians.STANDARD, schedules.FORWARD,
                          t_f, None))
    records, stats = _run_items_resumable(cfg, items)

    fits_rev, warn_rev, excl_rev = _fit_algorithms(records, schedules.REVERSE,
                                                   cfg.algorithms)
    fits_fwd, warn_fwd, excl_fwd = _fit_algorithms(records, schedules.FORWARD,
                                                   [hamiltonians.STANDARD])
    fits = fits_fwd + fits_rev
    out_dir = Path(cfg.out_dir)
    metrics.write_records_csv(records, _records_path(out_dir))
    files = [str(_records_path(out_dir)), str(_write_fits_csv(out_dir, fits))]
    summary = {
        "study": cfg.study,
        "config": cfg.to_dict(),
        "fits": fits,
        "exclusions": {"reverse": excl_rev, "forward": excl_fwd},
        "warnings": warn_rev + warn_fwd,
        "instances_without_local_minimum": fallback_count,
        "instances_seeded": seeded,
        "run_stats": stats,
    }
    files.append(str(_write_summary(out_dir, summary)))
    return StudyReport(records=records, summary=summary, files=files)


def run_spectrum(cfg: ExperimentConfig) -> StudyReport:
    """Spectrum trace CSV for the designated (or found) hard instance."""
    n = cfg.n_range[0]
    if cfg.hard_seed is not None:
        seed = cfg.hard_seed
        problem = build_ising(seed, n)
        hard_info = None
    else:
        seed, report = find_hard_instance(cfg, n)
        problem = build_ising(seed, n)
        hard_info = report.as_dict()
    kind = cfg.algorithms[0] if cfg.algorithms else hamiltonians.STANDARD
    algo = hamiltonians.make_algorithm(kind, problem, cfg.t_f[0],
                                       rng_seed=derive_algo_seed(seed, kind),
                                       rfqa_amplitude=cfg.rfqa_amplitude,
                                       inhomogeneous_r=cfg.inhomogeneous_r)
    trace = evolution.spectrum_trace(problem, algo,
                                     grid_points=cfg.spectrum_grid,
                                     k=cfg.spectrum_levels)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "spectrum.csv"
    trace.to_csv(csv_path)
    summary = {
        "study": cfg.study,
        "config": cfg.to_dict(),
        "instance_seed": seed,
        "algorithm": kind,
        "min_gap": trace.min_gap,
        "min_gap_location": trace.min_gap_location,
        "metadata": trace.metadata,
        "hard_instance": hard_info,
        "run_stats": {"computed": 1, "resumed": 0, "failures": [],
                      "max_norm_drift": 0.0},
    }
    files = [str(csv_path), str(_write_summary(out_dir, summary))]
    return StudyReport(records=[], summary=summary, files=files)


def run_study(cfg: ExperimentConfig) -> StudyReport:
    runner = {
        "forward_scaling": run_forward_scaling,
        "forward_success": run_forward_success,
        "reverse_ratio": run_reverse_ratio,
        "reverse_scaling": run_reverse_scaling,
        "spectrum": run_spectrum,
    }[cfg.study]
    return runner(cfg)
