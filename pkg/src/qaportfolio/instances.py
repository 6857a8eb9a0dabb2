"""Random mean-variance portfolio instances and their QUBO / Ising encodings."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

MAX_VARIABLES = 24

#: Tolerance below which a covariance eigenvalue counts as nonnegative.
PSD_TOL = 1e-10


@dataclass
class PortfolioSpec:
    """One random unconstrained single-period mean-variance instance.

    Parameters
    ----------
    n : int
        Number of assets.
    mu : np.ndarray
        Expected return per asset, length n.
    sigma : np.ndarray
        Covariance matrix of asset returns, n x n, symmetric PSD.
    q : float
        Risk-aversion weight (>= 0).
    seed : int
        RNG seed the instance was generated from (kept for provenance).
    """

    n: int
    mu: np.ndarray
    sigma: np.ndarray
    q: float
    seed: int

    def __post_init__(self) -> None:
        self.mu = np.asarray(self.mu, dtype=np.float64)
        self.sigma = np.asarray(self.sigma, dtype=np.float64)
        if self.mu.shape != (self.n,):
            raise ValueError(f"mu must have length {self.n}, got {self.mu.shape}")
        if self.sigma.shape != (self.n, self.n):
            raise ValueError(f"sigma must be {self.n}x{self.n}, got {self.sigma.shape}")
        if not np.array_equal(self.sigma, self.sigma.T):
            raise ValueError("sigma must be exactly symmetric")
        if self.q < 0:
            raise ValueError("risk aversion q must be >= 0")
        if np.linalg.eigvalsh(self.sigma).min() < -PSD_TOL:
            raise ValueError("sigma must be positive semidefinite")


@dataclass
class QuboProblem:
    """Minimize x^T Q x + offset over binary x, Q symmetric."""

    n: int
    Q: np.ndarray
    offset: float = 0.0

    def __post_init__(self) -> None:
        self.Q = np.asarray(self.Q, dtype=np.float64)
        if self.Q.shape != (self.n, self.n):
            raise ValueError(f"Q must be {self.n}x{self.n}, got {self.Q.shape}")
        if not np.array_equal(self.Q, self.Q.T):
            raise ValueError("Q must be exactly symmetric")

    def energy(self, x: np.ndarray) -> float:
        """Objective value of a binary assignment vector."""
        x = np.asarray(x, dtype=np.float64)
        return float(x @ self.Q @ x) + self.offset


@dataclass
class IsingProblem:
    """Diagonal problem Hamiltonian sum_i h_i z_i + sum_{i<j} J_ij z_i z_j + C.

    Spins z_i in {+1, -1}. Couplings are stored strictly upper triangular
    (one coupling per unordered pair). ``scale`` records the normalization
    factor the coefficients were divided by, so that
    ``scale * ising_energy == qubo_energy`` on every configuration.
    """

    n: int
    h: np.ndarray
    J: np.ndarray
    constant: float = 0.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        self.h = np.asarray(self.h, dtype=np.float64)
        self.J = np.asarray(self.J, dtype=np.float64)
        if self.h.shape != (self.n,):
            raise ValueError(f"h must have length {self.n}, got {self.h.shape}")
        if self.J.shape != (self.n, self.n):
            raise ValueError(f"J must be {self.n}x{self.n}, got {self.J.shape}")
        if np.any(self.J != np.triu(self.J, 1)):
            raise ValueError("J must be strictly upper triangular")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def energy(self, z: np.ndarray) -> float:
        """Classical energy of one spin configuration (+1/-1 entries)."""
        z = np.asarray(z, dtype=np.float64)
        return float(self.h @ z + z @ self.J @ z) + self.constant

    def edges(self) -> list[tuple[int, int]]:
        """Pairs (i, j), i < j, with a nonzero coupling."""
        rows, cols = np.nonzero(self.J)
        return list(zip(rows.tolist(), cols.tolist()))


def spins_from_index(k: int, n: int) -> np.ndarray:
    """Spin configuration encoded by basis-state index k.

    Bit i of k is the binary variable x_i; bit 0 maps to z_i = +1
    (the sigma^z eigenvalue), so z_i = 1 - 2 * bit_i.
    """
    bits = (k >> np.arange(n)) & 1
    return (1 - 2 * bits).astype(np.float64)


def index_from_spins(z: np.ndarray) -> int:
    """Inverse of :func:`spins_from_index`."""
    bits = ((1 - np.asarray(z)) // 2).astype(np.int64)
    return int((bits << np.arange(len(bits))).sum())


def generate_instance(seed: int, n: int) -> PortfolioSpec:
    """Draw one random portfolio instance, deterministically from (seed, n).

    mu_i ~ U(0, 1); sigma = F F^T / n with F_ij ~ U(-1, 1) (PSD by
    construction); q = 0.5.
    """
    if not 1 <= n <= MAX_VARIABLES:
        raise ValueError(f"n must be in [1, {MAX_VARIABLES}], got {n}")
    rng = np.random.default_rng(seed)
    mu = rng.uniform(0.0, 1.0, n)
    f = rng.uniform(-1.0, 1.0, (n, n))
    sigma = f @ f.T / n
    sigma = (sigma + sigma.T) / 2.0
    return PortfolioSpec(n=n, mu=mu, sigma=sigma, q=0.5, seed=int(seed))


def to_qubo(spec: PortfolioSpec) -> QuboProblem:
    """Lower the mean-variance objective to minimization form.

    Maximizing sum_i mu_i x_i - q sum_ij sigma_ij x_i x_j equals minimizing
    x^T Q x with Q_ii = -mu_i + q sigma_ii and Q_ij = q sigma_ij (i != j).
    """
    Q = spec.q * spec.sigma.copy()
    Q[np.diag_indices(spec.n)] -= spec.mu
    Q = (Q + Q.T) / 2.0
    return QuboProblem(n=spec.n, Q=Q, offset=0.0)


def qubo_to_ising(qubo: QuboProblem) -> IsingProblem:
    """Substitute x_i = (1 - z_i)/2 and normalize to max(|h|, |J|) = 1.

    The substitution reproduces QUBO energies exactly on all 2^n
    configurations; the normalization factor is recorded in ``scale``.
    """
    Q = (qubo.Q + qubo.Q.T) / 2.0
    diag = np.diag(Q).copy()
    off = Q - np.diag(diag)

    # x^T Q x = sum_i Q_ii x_i + sum_{i<j} 2 Q_ij x_i x_j for binary x.
    h = -diag / 2.0 - off.sum(axis=1) / 2.0
    J = np.triu(Q, 1) / 2.0
    constant = qubo.offset + diag.sum() / 2.0 + np.triu(Q, 1).sum() / 2.0

    m = max(np.abs(h).max(initial=0.0), np.abs(J).max(initial=0.0))
    if m > 0.0:
        h = h / m
        J = J / m
        constant = constant / m
    else:
        m = 1.0
    return IsingProblem(n=qubo.n, h=h, J=J, constant=float(constant), scale=float(m))


def build_ising(seed: int, n: int) -> IsingProblem:
    """Convenience pipeline: generate -> QUBO -> normalized Ising problem."""
    return qubo_to_ising(to_qubo(generate_instance(seed, n)))


def portfolio_to_json(spec: PortfolioSpec) -> str:
    payload = {
        "n": spec.n,
        "mu": spec.mu.tolist(),
        "sigma": spec.sigma.tolist(),
        "q": spec.q,
        "seed": spec.seed,
    }
    return json.dumps(payload, sort_keys=True)


def portfolio_from_json(text: str) -> PortfolioSpec:
    d = json.loads(text)
    return PortfolioSpec(n=d["n"], mu=np.array(d["mu"]), sigma=np.array(d["sigma"]),
                         q=d["q"], seed=d["seed"])


def ising_to_json(problem: IsingProblem) -> str:
    couplings = [[i, j, problem.J[i, j]] for i, j in problem.edges()]
    payload = {
        "n": problem.n,
        "h": problem.h.tolist(),
        "J": couplings,
        "constant": problem.constant,
        "scale": problem.scale,
    }
    return json.dumps(payload, sort_keys=True)


def ising_from_json(text: str) -> IsingProblem:
    d = json.loads(text)
    J = np.zeros((d["n"], d["n"]))
    for i, j, v in d["J"]:
        J[i, j] = v
    return IsingProblem(n=d["n"], h=np.array(d["h"]), J=J,
                        constant=d["constant"], scale=d["scale"])
