"""Phase-space grids: angle samples x integer momentum windows.

Angle samples are uniform midpoints of each period, which keeps periodic
integrals spectrally exact below the grid bandwidth and never touches the
beta = 0 pole.  Momentum windows are inclusive integer ranges, one per axis.
The stored array is real with layout
(alpha-pt, beta-pt, gamma-pt, m_alpha, m_beta, m_gamma).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .angles import AXES, PERIOD
from .errors import ConfigurationError, DomainError, ToleranceError
from .quadrature import midpoint_angles

#: marginals may dip this far negative from quadrature noise
MARGINAL_NOISE_FLOOR = -1e-8
#: anything below this aborts with diagnostics
MARGINAL_ABORT_FLOOR = -1e-6


@dataclass(frozen=True)
class GridSpec:
    n_alpha: int
    n_beta: int
    n_gamma: int
    m_window: tuple[tuple[int, int], tuple[int, int], tuple[int, int]]

    def __post_init__(self):
        for n in (self.n_alpha, self.n_beta, self.n_gamma):
            if not isinstance(n, (int, np.integer)) or n < 1:
                raise ConfigurationError(f"angle counts must be positive integers, got {n!r}")
        win = tuple((int(lo), int(hi)) for lo, hi in self.m_window)
        object.__setattr__(self, "m_window", win)
        for lo, hi in win:
            if lo > hi:
                raise ConfigurationError(f"empty momentum window ({lo}, {hi})")

    @staticmethod
    def symmetric(n_angles: tuple[int, int, int],
                  m_max: tuple[int, int, int]) -> "GridSpec":
        na, nb, ng = n_angles
        return GridSpec(na, nb, ng, tuple((-w, w) for w in m_max))

    def n_angle(self, axis: str) -> int:
        return {"alpha": self.n_alpha, "beta": self.n_beta,
                "gamma": self.n_gamma}[axis]

    def angle_points(self, axis: str) -> np.ndarray:
        pts, _ = midpoint_angles(self.n_angle(axis), PERIOD[axis])
        return pts

    def angle_weight(self, axis: str) -> float:
        return PERIOD[axis] / self.n_angle(axis)

    def m_values(self, axis: str) -> np.ndarray:
        lo, hi = self.m_window[AXES.index(axis)]
        return np.arange(lo, hi + 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple([self.n_angle(ax) for ax in AXES]
                     + [len(self.m_values(ax)) for ax in AXES])

    @property
    def volume_element(self) -> float:
        out = 1.0
        for ax in AXES:
            out *= self.angle_weight(ax)
        return out


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Real-valued Wigner / Weyl-symbol samples plus provenance metadata."""

    spec: GridSpec
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.spec.shape:
            raise DomainError(f"values shape {v.shape} != grid shape {self.spec.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("grid contains non-finite values")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def grid_normalization(grid: PhaseSpaceGrid) -> float:
    """sum_m int dOmega W."""
    return float(grid.values.sum() * grid.spec.volume_element)


def marginals(grid: PhaseSpaceGrid) -> tuple[np.ndarray, np.ndarray]:
    """(angle marginal, momentum marginal).

    angle[ia, ib, ig] = sum_m W;  momentum[ma, mb, mg] = int dOmega W.
    Dips below MARGINAL_ABORT_FLOOR indicate an implementation or window
    failure and abort with diagnostics; noise down to MARGINAL_NOISE_FLOOR
    is tolerated.
    """
    angle = grid.values.sum(axis=(3, 4, 5))
    momentum = grid.values.sum(axis=(0, 1, 2)) * grid.spec.volume_element
    worst = min(angle.min(), momentum.min())
    if worst < MARGINAL_ABORT_FLOOR:
        raise ToleranceError(
            f"marginal dipped to {worst}, below abort floor {MARGINAL_ABORT_FLOOR}",
            diagnostics={
                "min_angle_marginal": float(angle.min()),
                "min_momentum_marginal": float(momentum.min()),
                "normalization": grid_normalization(grid),
                "meta": dict(grid.meta),
            })
    return angle, momentum


def phase_space_expectation(state_grid: PhaseSpaceGrid,
                            symbol_grid: PhaseSpaceGrid) -> float:
    """int dOmega sum_m W_A W for grids on the identical spec."""
    if state_grid.spec != symbol_grid.spec:
        raise DomainError("phase-space expectation requires identical grid specs")
    return float((state_grid.values * symbol_grid.values).sum()
                 * state_grid.spec.volume_element)
