"""Time-dependent total Hamiltonians for every annealing variant.

All variants share one term decomposition (diagonal problem part, per-site
x/y fields, optional xx pair couplers), assembled here into a matrix-free
operator; the jitted kernel in :mod:`qaportfolio.kernels` does the work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels, schedules
from .exact import ResourceLimitError, all_energies
from .instances import IsingProblem

STANDARD = "standard"
COUPLER_FERRO = "coupler_ferro"
COUPLER_ANTIFERRO = "coupler_antiferro"
COUPLER_MIXED = "coupler_mixed"
INHOMOGENEOUS = "inhomogeneous"
RFQA_M = "rfqa_m"
RFQA_D = "rfqa_d"
CD_QA = "cd_qa"

KINDS = (STANDARD, COUPLER_FERRO, COUPLER_ANTIFERRO, COUPLER_MIXED,
         INHOMOGENEOUS, RFQA_M, RFQA_D, CD_QA)

COUPLER_KINDS = (COUPLER_FERRO, COUPLER_ANTIFERRO, COUPLER_MIXED)
RFQA_KINDS = (RFQA_M, RFQA_D)

#: Dense state vectors are capped at this qubit count.
DENSE_LIMIT = 14

#: Transverse-field sign convention in the CD derivation.
CD_H_X = -1.0

#: Default oscillating-field amplitude for the RFQA variants.
DEFAULT_RFQA_AMPLITUDE = 0.15


@dataclass
class AlgorithmSpec:
    """Tagged description of one annealing variant.

    ``coupler_signs`` is required exactly for the mixed coupler (one sign
    per edge of the coupler edge set); ``rfqa_amplitude`` and
    ``rfqa_frequencies`` exactly for the RFQA variants.
    """

    kind: str
    coupler_signs: np.ndarray | None = None
    rfqa_amplitude: float | None = None
    rfqa_frequencies: np.ndarray | None = None
    inhomogeneous_r: float = 0.5
    rng_seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown algorithm kind {self.kind!r}")
        if (self.coupler_signs is not None) != (self.kind == COUPLER_MIXED):
            raise ValueError("coupler_signs is required for coupler_mixed only")
        has_rfqa = self.rfqa_amplitude is not None or self.rfqa_frequencies is not None
        if self.kind in RFQA_KINDS:
            if self.rfqa_amplitude is None or self.rfqa_frequencies is None:
                raise ValueError(f"{self.kind} needs rfqa_amplitude and rfqa_frequencies")
            if self.rfqa_amplitude <= 0:
                raise ValueError("rfqa_amplitude must be positive")
            self.rfqa_frequencies = np.asarray(self.rfqa_frequencies, dtype=np.float64)
            if np.any(self.rfqa_frequencies <= 0):
                raise ValueError("rfqa_frequencies must be positive")
        elif has_rfqa:
            raise ValueError("rfqa fields only apply to the RFQA variants")
        if self.inhomogeneous_r <= 0:
            raise ValueError("inhomogeneous_r must be positive")


def make_algorithm(kind: str, problem: IsingProblem, t_f: float,
                   rng_seed: int = 0,
                   rfqa_amplitude: float = DEFAULT_RFQA_AMPLITUDE,
                   inhomogeneous_r: float = 0.5) -> AlgorithmSpec:
    """Build an AlgorithmSpec, drawing any per-instance randomness.

    Mixed-coupler signs are drawn once per edge; RFQA frequencies are drawn
    once per spin as u_i/t_f with u_i ~ U(0.5, 1.5), so the oscillations
    stay O(1/t_f) for any annealing time.
    """
    rng = np.random.default_rng(rng_seed)
    signs = None
    amplitude = None
    frequencies = None
    if kind == COUPLER_MIXED:
        signs = 2.0 * rng.integers(0, 2, size=len(problem.edges())) - 1.0
    elif kind in RFQA_KINDS:
        amplitude = rfqa_amplitude
        frequencies = rng.uniform(0.5, 1.5, problem.n) / t_f
    return AlgorithmSpec(kind=kind, coupler_signs=signs,
                         rfqa_amplitude=amplitude, rfqa_frequencies=frequencies,
                         inhomogeneous_r=inhomogeneous_r, rng_seed=rng_seed)


def problem_diagonal(problem: IsingProblem) -> np.ndarray:
    """Diagonal of H_P over the 2^n basis; matches exact.enumerate_spectrum."""
    if problem.n > DENSE_LIMIT:
        raise ResourceLimitError(
            f"dense state vectors limited to n <= {DENSE_LIMIT}, got {problem.n}")
    return all_energies(problem)


class StaticOperator:
    """Time-independent Hermitian operator in the shared term decomposition."""

    def __init__(self, n: int, cx: np.ndarray | None = None,
                 cy: np.ndarray | None = None,
                 pair_masks: np.ndarray | None = None,
                 pair_signs: np.ndarray | None = None,
                 diag: np.ndarray | None = None):
        self.n = n
        self.dim = 1 << n
        self.cx = np.zeros(n) if cx is None else np.asarray(cx, dtype=np.float64)
        self.cy = np.zeros(n) if cy is None else np.asarray(cy, dtype=np.float64)
        self.diag = np.zeros(self.dim) if diag is None else np.asarray(diag)
        if pair_masks is None:
            self.pair_masks = np.zeros(0, dtype=np.int64)
            self.pair_signs = np.zeros(0)
        else:
            self.pair_masks = np.asarray(pair_masks, dtype=np.int64)
            self.pair_signs = np.asarray(pair_signs, dtype=np.float64)
        self._use_y = bool(np.any(self.cy))

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        out = np.empty(self.dim, dtype=np.complex128)
        kernels.apply_terms(out, np.ascontiguousarray(psi, dtype=np.complex128),
                            self.diag, 1.0, self.cx, self.cy, self._use_y,
                            1.0, self.pair_masks, self.pair_signs)
        return out

    def dense(self) -> np.ndarray:
        return kernels.build_dense(self.n, self.diag, 1.0, self.cx, self.cy,
                                   1.0, self.pair_masks, self.pair_signs)


def driver_field(n: int) -> StaticOperator:
    """H_0 = -sum_i sigma_i^x; its ground state is the uniform superposition."""
    return StaticOperator(n, cx=-np.ones(n))


def pair_masks_for(edges: list[tuple[int, int]]) -> np.ndarray:
    return np.array([(1 << i) | (1 << j) for i, j in edges], dtype=np.int64)


def coupler_term(kind: str, edges: list[tuple[int, int]], n: int,
                 signs: np.ndarray | None = None,
                 rng_seed: int | None = None) -> StaticOperator:
    """Transverse coupler H_I over the edge set: F -> -xx, A -> +xx, M -> r_ij xx."""
    masks = pair_masks_for(edges)
    if kind == "F":
        pair_signs = -np.ones(len(edges))
    elif kind == "A":
        pair_signs = np.ones(len(edges))
    elif kind == "M":
        if signs is None:
            if rng_seed is None:
                raise ValueError("mixed coupler needs signs or rng_seed")
            rng = np.random.default_rng(rng_seed)
            signs = 2.0 * rng.integers(0, 2, size=len(edges)) - 1.0
        pair_signs = np.asarray(signs, dtype=np.float64)
        if pair_signs.shape != (len(edges),):
            raise ValueError("one sign per edge required")
    else:
        raise ValueError(f"coupler kind must be F, A or M, got {kind!r}")
    return StaticOperator(n, pair_masks=masks, pair_signs=pair_signs)


def cd_alpha(problem: IsingProblem, h_x: float, lam: float,
             lam_dot: float) -> np.ndarray:
    """Per-site sigma^y coefficients of the counter-diabatic term.

    Closed-form minimizer of the Hilbert-Schmidt norm of
    G = d_lambda H + i [A, H] for A = sum_i alpha_i sigma_i^y, scaled by
    lambda-dot:

        alpha_i = -h_x h_i lam_dot /
                  (2 [h_x^2 (1-lam)^2 + lam^2 (h_i^2 + sum_{j!=i} J_ij^2)])

    Sites with a vanishing denominator (lam = 1 on a fully trivial site)
    get alpha_i = 0, the limit of the closed form.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must be in [0, 1]")
    if lam_dot == 0.0:
        return np.zeros(problem.n)
    j_sym = problem.J + problem.J.T
    jsq = (j_sym ** 2).sum(axis=1)
    denom = 2.0 * (h_x ** 2 * (1.0 - lam) ** 2
                   + lam ** 2 * (problem.h ** 2 + jsq))
    out = np.zeros(problem.n)
    ok = denom > 0.0
    out[ok] = -h_x * problem.h[ok] * lam_dot / denom[ok]
    return out


class HamiltonianOperator:
    """Assembled H(t) for one (problem, algorithm, schedule) triple.

    Immutable after construction; callable as ``ham(t, psi)``. The
    ``coeffs`` method exposes the shared term decomposition used by the
    propagation kernel, ``static_coeffs`` the quasi-static version with
    any driver oscillations frozen at their mean (for spectra).
    """

    def __init__(self, problem: IsingProblem, algo: AlgorithmSpec,
                 schedule: schedules.Schedule):
        if problem.n > DENSE_LIMIT:
            raise ResourceLimitError(
                f"dense state vectors limited to n <= {DENSE_LIMIT}, got {problem.n}")
        self.problem = problem
        self.algo = algo
        self.schedule = schedule
        self.n = problem.n
        self.dim = 1 << problem.n
        self.diag = problem_diagonal(problem)
        self.uses_y = algo.kind in (RFQA_D, CD_QA)

        edges = problem.edges()
        if algo.kind in COUPLER_KINDS:
            self.pair_masks = pair_masks_for(edges)
            if algo.kind == COUPLER_FERRO:
                self.pair_signs = -np.ones(len(edges))
            elif algo.kind == COUPLER_ANTIFERRO:
                self.pair_signs = np.ones(len(edges))
            else:
                signs = np.asarray(algo.coupler_signs, dtype=np.float64)
                if signs.shape != (len(edges),):
                    raise ValueError(
                        f"coupler_signs must have one entry per edge "
                        f"({len(edges)}), got {signs.shape}")
                self.pair_signs = signs
        else:
            self.pair_masks = np.zeros(0, dtype=np.int64)
            self.pair_signs = np.zeros(0)

        if algo.kind in RFQA_KINDS and len(algo.rfqa_frequencies) != problem.n:
            raise ValueError("one RFQA frequency per spin required")

    def coeffs(self, t: float) -> tuple[float, np.ndarray, np.ndarray, float]:
        """(b, cx, cy, w) of the term decomposition at time t."""
        algo = self.algo
        n = self.n
        zeros = np.zeros(n)
        if algo.kind == CD_QA:
            lam, lam_dot = self.schedule.cd_control(t)
            cy = cd_alpha(self.problem, CD_H_X, lam, lam_dot)
            return lam, np.full(n, -(1.0 - lam)), cy, 0.0
        s = self.schedule.s(t)
        if algo.kind == STANDARD:
            return s, np.full(n, -(1.0 - s)), zeros, 0.0
        if algo.kind in COUPLER_KINDS:
            return s, np.full(n, -(1.0 - s)), zeros, (1.0 - s) * s
        if algo.kind == INHOMOGENEOUS:
            gamma = schedules.gamma_profile(n, s, algo.inhomogeneous_r)
            return s, -gamma, zeros, 0.0
        if algo.kind == RFQA_M:
            osc = 1.0 + algo.rfqa_amplitude * np.sin(
                2.0 * np.pi * algo.rfqa_frequencies * t)
            return s, -(1.0 - s) * osc, zeros, 0.0
        # RFQA_D: driver direction oscillates in the x-y plane.
        theta = algo.rfqa_amplitude * np.sin(2.0 * np.pi * algo.rfqa_frequencies * t)
        return s, -(1.0 - s) * np.cos(theta), -(1.0 - s) * np.sin(theta), 0.0

    def static_coeffs(self, s: float) -> tuple[float, np.ndarray, np.ndarray, float]:
        """Quasi-static decomposition at schedule value s, oscillations frozen."""
        n = self.n
        zeros = np.zeros(n)
        kind = self.algo.kind
        if kind in COUPLER_KINDS:
            return s, np.full(n, -(1.0 - s)), zeros, (1.0 - s) * s
        if kind == INHOMOGENEOUS:
            gamma = schedules.gamma_profile(n, s, self.algo.inhomogeneous_r)
            return s, -gamma, zeros, 0.0
        # Standard; RFQA with sin terms at their zero mean; CD with
        # lambda = s and lambda-dot = 0 all reduce to plain interpolation.
        return s, np.full(n, -(1.0 - s)), zeros, 0.0

    def apply(self, t: float, psi: np.ndarray, out: np.ndarray) -> np.ndarray:
        b, cx, cy, w = self.coeffs(t)
        kernels.apply_terms(out, psi, self.diag, b, cx, cy, self.uses_y, w,
                            self.pair_masks, self.pair_signs)
        return out

    def __call__(self, t: float, psi: np.ndarray) -> np.ndarray:
        out = np.empty(self.dim, dtype=np.complex128)
        return self.apply(t, np.ascontiguousarray(psi, dtype=np.complex128), out)

    def dense(self, t: float) -> np.ndarray:
        """Dense matrix of H(t) (test oracles; keep n small)."""
        b, cx, cy, w = self.coeffs(t)
        return kernels.build_dense(self.n, self.diag, b, cx, cy, w,
                                   self.pair_masks, self.pair_signs)

    def dense_static(self, s: float) -> np.ndarray:
        """Dense quasi-static H(s) with oscillations frozen (spectra)."""
        b, cx, cy, w = self.static_coeffs(s)
        return kernels.build_dense(self.n, self.diag, b, cx, cy, w,
                                   self.pair_masks, self.pair_signs)


def assemble(problem: IsingProblem, algo: AlgorithmSpec,
             schedule: schedules.Schedule) -> HamiltonianOperator:
    """Bind one algorithm variant to a problem and schedule."""
    return HamiltonianOperator(problem, algo, schedule)
