"""Time-dependent control functions for all annealing variants.

Forward and reverse interpolation s(t), the counter-diabatic control
lambda(t) with its analytic derivative, and the per-site inhomogeneous
field profile Gamma_i(s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FORWARD = "forward"
REVERSE = "reverse"

SCHEDULE_KINDS = (FORWARD, REVERSE)


@dataclass
class CdControl:
    """Counter-diabatic interpolation lambda(t) = sin^2[(pi/2) sin^2(pi t / 2T)].

    Both lambda-dot endpoints vanish, so the CD driving term is zero at
    t = 0 and t = t_f.
    """

    t_f: float

    def value(self, t: float) -> tuple[float, float]:
        """(lambda, dlambda/dt) at time t."""
        T = self.t_f
        if not 0.0 <= t <= T:
            raise ValueError(f"t={t} outside [0, {T}]")
        u = math.sin(math.pi * t / (2.0 * T)) ** 2
        lam = math.sin(math.pi * u / 2.0) ** 2
        lam_dot = (math.pi ** 2 / (4.0 * T)) * math.sin(math.pi * t / T) \
            * math.sin(math.pi * u)
        return lam, lam_dot


@dataclass
class Schedule:
    """Annealing control s(t) on [0, t_f], forward-linear or reverse.

    Forward: s ramps 0 -> 1 linearly. Reverse: s starts at 1, ramps down to
    ``s_pause`` over ``ramp_fraction * t_f``, holds, and ramps back up to 1
    over the final ``ramp_fraction * t_f``.
    """

    kind: str
    t_f: float
    s_pause: float = 0.5
    ramp_fraction: float = 0.1

    def __post_init__(self) -> None:
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.t_f <= 0:
            raise ValueError("t_f must be positive")
        if not 0.0 <= self.s_pause <= 1.0:
            raise ValueError("s_pause must be in [0, 1]")
        if not 0.0 < self.ramp_fraction <= 0.5:
            raise ValueError("ramp_fraction must be in (0, 0.5]")

    def s(self, t: float) -> float:
        """Interpolation value s(t); raises outside [0, t_f]."""
        if not 0.0 <= t <= self.t_f:
            raise ValueError(f"t={t} outside [0, {self.t_f}]")
        if self.kind == FORWARD:
            return t / self.t_f
        t_ramp = self.ramp_fraction * self.t_f
        if t < t_ramp:
            return 1.0 - (1.0 - self.s_pause) * t / t_ramp
        if t > self.t_f - t_ramp:
            return 1.0 - (1.0 - self.s_pause) * (self.t_f - t) / t_ramp
        return self.s_pause

    def s_dot(self, t: float) -> float:
        """Piecewise-constant ds/dt (one-sided at the corners)."""
        if not 0.0 <= t <= self.t_f:
            raise ValueError(f"t={t} outside [0, {self.t_f}]")
        if self.kind == FORWARD:
            return 1.0 / self.t_f
        t_ramp = self.ramp_fraction * self.t_f
        rate = (1.0 - self.s_pause) / t_ramp
        if t < t_ramp:
            return -rate
        if t > self.t_f - t_ramp:
            return rate
        return 0.0

    def cd_control(self, t: float) -> tuple[float, float]:
        """CD interpolation (lambda, lambda-dot) under this schedule.

        Forward runs follow the dedicated CdControl curve; reverse runs
        identify lambda with the reverse profile itself.
        """
        if self.kind == FORWARD:
            return CdControl(self.t_f).value(t)
        return self.s(t), self.s_dot(t)


def s_of_t(schedule: Schedule, t: float) -> float:
    return schedule.s(t)


def lambda_of_t(control: CdControl, t: float) -> tuple[float, float]:
    return control.value(t)


def gamma_site(n: int, i: int, s: float, r: float = 0.5) -> float:
    """Inhomogeneous transverse-field amplitude on site i (1-based).

    Piecewise in s with breakpoints s_i = (1 - i/N)^(1/r): full field below
    s_i, the linear-in-s^r shoulder N(1 - s^r) + (1 - i) between s_i and
    s_{i-1}, zero above s_{i-1} (s_0 = 1). Sites switch off from site N
    down to site 1. Clamped to [0, 1] against floating-point excursions.
    """
    if not 1 <= i <= n:
        raise ValueError(f"site index {i} outside 1..{n}")
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s} outside [0, 1]")
    if r <= 0:
        raise ValueError("r must be positive")
    s_i = (1.0 - i / n) ** (1.0 / r)
    s_prev = 1.0 if i == 1 else (1.0 - (i - 1) / n) ** (1.0 / r)
    if s < s_i:
        value = 1.0
    elif s > s_prev:
        value = 0.0
    else:
        value = n * (1.0 - s ** r) + (1.0 - i)
    return min(1.0, max(0.0, value))


def gamma_profile(n: int, s: float, r: float = 0.5) -> np.ndarray:
    """Gamma_i(s) for all sites 1..n as an array."""
    return np.array([gamma_site(n, i, s, r) for i in range(1, n + 1)])
