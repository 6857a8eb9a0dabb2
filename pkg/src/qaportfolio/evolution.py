"""Schrodinger propagation and quasi-static spectra.

Fixed-step RK4 integration of i dpsi/dt = H(t) psi (hbar = 1) with strict
norm-drift accounting, plus dense gap tracking along the schedule.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import kernels
from .exact import ResourceLimitError
from .hamiltonians import AlgorithmSpec, HamiltonianOperator, assemble
from .instances import IsingProblem
from .schedules import FORWARD, Schedule

#: Maximum tolerated |norm - 1| before final renormalization.
NORM_DRIFT_TOL = 1e-6

#: Dense diagonalization cap for spectrum traces.
SPECTRUM_LIMIT = 12


class StepSizeError(RuntimeError):
    """Norm drift exceeded tolerance; retry with a smaller step."""


@dataclass
class StateVector:
    """Dense complex amplitudes over the 2^n basis."""

    amplitudes: np.ndarray
    n: int
    norm_drift: float = 0.0

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass
class SpectrumTrace:
    """Lowest-k instantaneous levels along the schedule parameter s."""

    grid: np.ndarray
    levels: np.ndarray
    min_gap: float
    min_gap_location: float
    metadata: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        k = self.levels.shape[1]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["s"] + [f"E_{i}" for i in range(k)])
            for s, row in zip(self.grid, self.levels):
                writer.writerow([repr(float(s))] + [repr(float(e)) for e in row])


def default_dt(t_f: float) -> float:
    """Fixed step keeping 2000+ steps per unit-coefficient anneal."""
    return min(1e-3, t_f / 2000.0)


def initial_state(n: int, schedule: Schedule,
                  seed_state: int | None = None) -> StateVector:
    """Starting state for a schedule.

    Forward anneals start in the uniform superposition (ground state of the
    driver); reverse anneals start in the designated classical basis state,
    normally a local minimum found by the exact solver.
    """
    dim = 1 << n
    if schedule.kind == FORWARD:
        amps = np.full(dim, 2.0 ** (-n / 2.0), dtype=np.complex128)
    else:
        if seed_state is None:
            raise ValueError("reverse schedule needs a designated seed state")
        if not 0 <= seed_state < dim:
            raise ValueError(f"seed state {seed_state} outside basis of size {dim}")
        amps = np.zeros(dim, dtype=np.complex128)
        amps[seed_state] = 1.0
    return StateVector(amplitudes=amps, n=n)


def evolve(ham: HamiltonianOperator, psi0: StateVector, t_f: float,
           dt: float | None = None, renormalize: bool = True) -> StateVector:
    """Propagate psi0 from t=0 to t=t_f under H(t) with fixed-step RK4.

    Raises StepSizeError when the final norm drifts by more than 1e-6;
    callers are expected to halve dt and retry (see evolve_with_retries).
    Renormalizes only once, at the end.
    """
    if dt is None:
        dt = default_dt(t_f)
    if dt > t_f:
        raise ValueError("dt must not exceed t_f")
    n_steps = max(1, int(math.ceil(t_f / dt - 1e-12)))

    psi = np.ascontiguousarray(psi0.amplitudes, dtype=np.complex128).copy()
    norm0 = float(np.linalg.norm(psi))
    if norm0 == 0.0:
        raise ValueError("initial state has zero norm")
    dim = psi.shape[0]
    k1 = np.empty(dim, dtype=np.complex128)
    k2 = np.empty_like(k1)
    k3 = np.empty_like(k1)
    k4 = np.empty_like(k1)
    tmp = np.empty_like(k1)

    t_step = t_f / n_steps
    coeff_start = ham.coeffs(0.0)
    for step in range(n_steps):
        t_mid = t_f * (step + 0.5) / n_steps
        t_end = t_f * (step + 1) / n_steps
        coeff_mid = ham.coeffs(t_mid)
        coeff_end = ham.coeffs(min(t_end, t_f))
        b0, cx0, cy0, w0 = coeff_start
        bm, cxm, cym, wm = coeff_mid
        b1, cx1, cy1, w1 = coeff_end
        kernels.rk4_step(psi, ham.diag, t_step,
                         b0, cx0, cy0, w0, bm, cxm, cym, wm, b1, cx1, cy1, w1,
                         ham.uses_y, ham.pair_masks, ham.pair_signs,
                         k1, k2, k3, k4, tmp)
        coeff_start = coeff_end

    norm = float(np.linalg.norm(psi))
    drift = abs(norm / norm0 - 1.0)
    if drift > NORM_DRIFT_TOL:
        raise StepSizeError(
            f"norm drift {drift:.3e} exceeds {NORM_DRIFT_TOL:.0e} "
            f"(t_f={t_f}, dt={t_step:.3e})")
    if renormalize:
        psi *= norm0 / norm
    return StateVector(amplitudes=psi, n=psi0.n, norm_drift=drift)


def evolve_with_retries(ham: HamiltonianOperator, psi0: StateVector, t_f: float,
                        dt: float | None = None, max_halvings: int = 6,
                        renormalize: bool = True) -> StateVector:
    """evolve(), halving dt on norm-drift failure up to ``max_halvings`` times."""
    if dt is None:
        dt = default_dt(t_f)
    last: StepSizeError | None = None
    for _ in range(max_halvings + 1):
        try:
            return evolve(ham, psi0, t_f, dt=dt, renormalize=renormalize)
        except StepSizeError as err:
            last = err
            dt /= 2.0
    raise StepSizeError(
        f"norm drift persisted after {max_halvings} halvings: {last}")


def spectrum_trace(problem: IsingProblem, algo: AlgorithmSpec,
                   grid_points: int = 400, k: int = 4) -> SpectrumTrace:
    """Lowest-k levels of the quasi-static H(s) on a uniform s grid.

    Oscillatory driver variants are evaluated with their sin terms frozen
    at zero mean; the CD variant with lambda-dot = 0 (noted in metadata).
    """
    if problem.n > SPECTRUM_LIMIT:
        raise ResourceLimitError(
            f"dense diagonalization limited to n <= {SPECTRUM_LIMIT}, got {problem.n}")
    if k < 2:
        raise ValueError("need at least 2 levels for a gap")
    if grid_points < 2:
        raise ValueError("need at least 2 grid points")
    ham = assemble(problem, algo, Schedule(kind=FORWARD, t_f=1.0))
    grid = np.linspace(0.0, 1.0, grid_points)
    levels = np.empty((grid_points, k))
    for idx, s in enumerate(grid):
        mat = ham.dense_static(float(s))
        levels[idx] = scipy.linalg.eigvalsh(mat, subset_by_index=[0, k - 1])
    gaps = levels[:, 1] - levels[:, 0]
    loc = int(np.argmin(gaps))
    metadata = {"algorithm": algo.kind}
    if algo.kind in ("rfqa_m", "rfqa_d", "cd_qa"):
        metadata["oscillations"] = "frozen_at_mean"
    return SpectrumTrace(grid=grid, levels=levels, min_gap=float(gaps[loc]),
                         min_gap_location=float(grid[loc]), metadata=metadata)
