"""Brute-force reference solver for the diagonal problem Hamiltonian.

Enumerates all 2^n spin configurations: full spectrum, degenerate ground
set, and single-flip local minima (the seed states for reverse annealing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .instances import IsingProblem

#: Two states within this absolute energy distance count as degenerate.
DEGENERACY_TOL = 1e-12

#: Hard cap on brute-force enumeration.
MAX_ENUM_QUBITS = 24

_CHUNK_BITS = 16


class ResourceLimitError(RuntimeError):
    """Requested problem size exceeds a brute-force or dense-vector limit."""


@dataclass
class ClassicalSpectrum:
    """All 2^n classical energies plus ground-state bookkeeping."""

    energies: np.ndarray
    ground_energy: float
    ground_states: np.ndarray
    first_excited_energy: float


@dataclass
class LocalMinimum:
    """Basis state stable under every single-spin flip."""

    state: int
    energy: float
    basin_gap: float


@dataclass
class HardnessReport:
    """Outcome of the hard-instance probe."""

    is_hard: bool
    has_local_minimum: bool
    p_forward: float | None = None
    min_gap: float | None = None
    min_gap_location: float | None = None
    seed_state: int | None = None

    def as_dict(self) -> dict:
        return {
            "is_hard": self.is_hard,
            "has_local_minimum": self.has_local_minimum,
            "p_forward": self.p_forward,
            "min_gap": self.min_gap,
            "min_gap_location": self.min_gap_location,
            "seed_state": self.seed_state,
        }


def _spin_block(start: int, count: int, n: int) -> np.ndarray:
    """Spin configurations (+1/-1) for basis indices start..start+count-1."""
    idx = np.arange(start, start + count, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n)) & 1
    return 1.0 - 2.0 * bits


def all_energies(problem: IsingProblem) -> np.ndarray:
    """Classical energy of every basis state, indexed by the global bit map."""
    if problem.n > MAX_ENUM_QUBITS:
        raise ResourceLimitError(
            f"enumeration limited to n <= {MAX_ENUM_QUBITS}, got {problem.n}")
    n = problem.n
    dim = 1 << n
    chunk = min(dim, 1 << _CHUNK_BITS)
    out = np.empty(dim, dtype=np.float64)
    for start in range(0, dim, chunk):
        z = _spin_block(start, min(chunk, dim - start), n)
        out[start:start + z.shape[0]] = (
            z @ problem.h + ((z @ problem.J) * z).sum(axis=1) + problem.constant)
    return out


def enumerate_spectrum(problem: IsingProblem) -> ClassicalSpectrum:
    """Exhaustive spectrum of the Ising problem (n <= 24)."""
    energies = all_energies(problem)
    e0 = float(energies.min())
    ground = np.flatnonzero(energies <= e0 + DEGENERACY_TOL)
    above = energies[energies > e0 + DEGENERACY_TOL]
    e1 = float(above.min()) if above.size else math.inf
    return ClassicalSpectrum(energies=energies, ground_energy=e0,
                             ground_states=ground, first_excited_energy=e1)


def local_minima(problem: IsingProblem,
                 exclude_ground: bool = True) -> list[LocalMinimum]:
    """All basis states whose every single-spin flip does not lower the energy.

    Sorted by energy ascending (ties by index), so the first entry is the
    preferred reverse-annealing seed. Global minimizers are dropped when
    ``exclude_ground`` is set (the default).
    """
    if problem.n > MAX_ENUM_QUBITS:
        raise ResourceLimitError(
            f"enumeration limited to n <= {MAX_ENUM_QUBITS}, got {problem.n}")
    n = problem.n
    dim = 1 << n
    j_sym = problem.J + problem.J.T
    energies = all_energies(problem)
    e0 = energies.min()

    chunk = min(dim, 1 << _CHUNK_BITS)
    found: list[LocalMinimum] = []
    for start in range(0, dim, chunk):
        z = _spin_block(start, min(chunk, dim - start), n)
        # Energy change of flipping spin i: -2 z_i (h_i + sum_j J~_ij z_j).
        delta = -2.0 * z * (z @ j_sym + problem.h)
        gaps = delta.min(axis=1)
        for row in np.flatnonzero(gaps >= -DEGENERACY_TOL):
            k = start + int(row)
            if exclude_ground and energies[k] <= e0 + DEGENERACY_TOL:
                continue
            found.append(LocalMinimum(state=k, energy=float(energies[k]),
                                      basin_gap=float(max(gaps[row], 0.0))))
    found.sort(key=lambda m: (m.energy, m.state))
    return found


def is_hard_instance(problem: IsingProblem, p_threshold: float = 0.2,
                     t_probe: float = 10.0) -> HardnessReport:
    """Probe whether an instance is hard in the reverse-annealing sense.

    Hard means (a) a non-global single-flip local minimum exists and
    (b) forward standard QA at t_f = t_probe still finds the ground state
    with probability below ``p_threshold``. When both hold, the report also
    locates the minimum spectral gap along the anneal.
    """
    if not 0.0 < p_threshold <= 1.0:
        raise ValueError("p_threshold must be in (0, 1]")
    from . import evolution, hamiltonians, metrics, schedules

    minima = local_minima(problem, exclude_ground=True)
    if not minima:
        return HardnessReport(is_hard=False, has_local_minimum=False)

    schedule = schedules.Schedule(kind=schedules.FORWARD, t_f=t_probe)
    algo = hamiltonians.AlgorithmSpec(kind=hamiltonians.STANDARD)
    ham = hamiltonians.assemble(problem, algo, schedule)
    psi0 = evolution.initial_state(problem.n, schedule)
    psi = evolution.evolve_with_retries(ham, psi0, t_probe)
    spectrum = enumerate_spectrum(problem)
    p = metrics.success_probability(psi, spectrum)
    if p >= p_threshold:
        return HardnessReport(is_hard=False, has_local_minimum=True, p_forward=p,
                              seed_state=minima[0].state)

    trace = evolution.spectrum_trace(problem, algo, grid_points=201, k=2)
    return HardnessReport(is_hard=True, has_local_minimum=True, p_forward=p,
                          min_gap=trace.min_gap,
                          min_gap_location=trace.min_gap_location,
                          seed_state=minima[0].state)
