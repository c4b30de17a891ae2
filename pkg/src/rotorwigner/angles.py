"""Euler-angle phase-space coordinates and their integer conjugate momenta.

Conventions (z-y-z Euler angles):
    alpha in [0, 2pi), beta in [0, pi), gamma in [0, 2pi).

Each angle carries an integer momentum quantum number.  Plane waves go as
exp(i * step * m * angle) with step = 1 for alpha/gamma and step = 2 for
beta, so the beta axis has period pi.  Physical momenta are
p_alpha = m_alpha, p_beta = 2 * m_beta, p_gamma = m_gamma (hbar = 1); the
factor 2 appears only in the conversion accessor, never in indexing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

AXES = ("alpha", "beta", "gamma")

#: angle period per axis
PERIOD = {"alpha": 2.0 * math.pi, "beta": math.pi, "gamma": 2.0 * math.pi}

#: plane-wave / displacement eigenphase multiplier per axis
MOMENTUM_STEP = {"alpha": 1, "beta": 2, "gamma": 1}

TWO_PI = 2.0 * math.pi


def wrap_angle(value: float, period: float) -> float:
    """Reduce into [0, period); the result is always in range, even for
    negative inputs and for values within one ulp below the period."""
    w = math.fmod(value, period)
    if w < 0.0:
        w += period
    if w >= period:  # fmod can land exactly on the period for tiny negatives
        w -= period
    return w


@dataclass(frozen=True)
class EulerAngles:
    """An orientation (alpha, beta, gamma), canonicalized on construction."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", wrap_angle(float(self.alpha), TWO_PI))
        object.__setattr__(self, "beta", wrap_angle(float(self.beta), math.pi))
        object.__setattr__(self, "gamma", wrap_angle(float(self.gamma), TWO_PI))

    def translate(self, other: "EulerAngles") -> "EulerAngles":
        """Component-wise translation with wrapping."""
        return EulerAngles(self.alpha + other.alpha,
                           self.beta + other.beta,
                           self.gamma + other.gamma)

    def __neg__(self) -> "EulerAngles":
        return EulerAngles(-self.alpha, -self.beta, -self.gamma)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)

    def component(self, axis: str) -> float:
        return getattr(self, axis)


@dataclass(frozen=True)
class MomentumTriple:
    """Integer momentum quantum numbers (m_alpha, m_beta, m_gamma)."""

    m_alpha: int
    m_beta: int
    m_gamma: int

    def __post_init__(self):
        for name in ("m_alpha", "m_beta", "m_gamma"):
            v = getattr(self, name)
            if not isinstance(v, (int,)) or isinstance(v, bool):
                raise TypeError(f"{name} must be an exact integer, got {v!r}")

    def physical(self) -> tuple[int, int, int]:
        """(p_alpha, p_beta, p_gamma) in units of hbar = 1."""
        return (self.m_alpha, 2 * self.m_beta, self.m_gamma)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.m_alpha, self.m_beta, self.m_gamma)

    def component(self, axis: str) -> int:
        return {"alpha": self.m_alpha, "beta": self.m_beta,
                "gamma": self.m_gamma}[axis]

    def __add__(self, other: "MomentumTriple") -> "MomentumTriple":
        return MomentumTriple(self.m_alpha + other.m_alpha,
                              self.m_beta + other.m_beta,
                              self.m_gamma + other.m_gamma)

    def __sub__(self, other: "MomentumTriple") -> "MomentumTriple":
        return MomentumTriple(self.m_alpha - other.m_alpha,
                              self.m_beta - other.m_beta,
                              self.m_gamma - other.m_gamma)


def round_half_up(x: float) -> int:
    """Nearest-integer rounding for real momentum arguments (halves go up)."""
    return int(math.floor(x + 0.5))
