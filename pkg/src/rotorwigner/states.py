"""Representative states: coherent states, superpositions, and the
fringe/negativity analyses of their Wigner functions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .angles import AXES, EulerAngles, MomentumTriple
from .basis import MBasisSpec, RotorState
from .errors import ConfigurationError, DomainError
from .grids import PhaseSpaceGrid

#: Gaussian tail bound: window must reach center + TAIL_SIGMAS * sigma
TAIL_SIGMAS = 6.0
THETA_SERIES_TAIL = 1e-15
PEAK_PROMINENCE_FRACTION = 0.10
NEGATIVITY_RATIO_THRESHOLD = 0.05


def theta3(q: float, tail: float = THETA_SERIES_TAIL) -> float:
    """Jacobi theta ϑ3(0, q) = sum_{n in Z} q^(n^2) by truncated series.

    Terms are added symmetrically until the next one falls below `tail`.
    Requires 0 <= q < 1.
    """
    if not 0.0 <= q < 1.0:
        raise DomainError(f"theta3 needs 0 <= q < 1, got {q}")
    total = 1.0
    n = 1
    while True:
        term = 2.0 * q ** (n * n)
        total += term
        if term < tail:
            return total
        n += 1


@dataclass(frozen=True)
class CoherentSpec:
    """A coherent state along one angle axis.

    sigma is the 1/e half-width of the momentum amplitude profile
    exp(-m^2 / sigma^2) (no factor 1/2 in the exponent), so larger sigma
    means broader momentum support and tighter angular localization.
    The other two axes stay momentum eigenstates at `bystander`.
    """

    sigma: float
    center_alpha: float
    center_m: int
    axis: str = "alpha"
    bystander: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.sigma <= 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if self.axis not in AXES:
            raise DomainError(f"unknown axis {self.axis!r}")


def coherent_state(spec: CoherentSpec, basis: MBasisSpec) -> RotorState:
    """Displaced coherent state |center_alpha, center_m> on spec.axis.

    The origin profile exp(-m^2 / sigma^2) is displaced by
    D(center_alpha, center_m), which maps the coefficients to
    exp(-i center_alpha (m - center_m)) exp(-(m - center_m)^2 / sigma^2).
    Normalization is exact: the squared weights sum to
    theta3(exp(-2 / sigma^2)), evaluated by the truncated theta series.
    """
    w = basis.m_max(spec.axis)
    need = abs(spec.center_m) + TAIL_SIGMAS * spec.sigma
    if w < need:
        raise ConfigurationError(
            f"window {w} too small on axis {spec.axis}: "
            f"need m_max >= {math.ceil(need)} for center {spec.center_m}, "
            f"sigma {spec.sigma}")
    ms = basis.m_values(spec.axis)
    rel = ms - spec.center_m
    amp = np.exp(-rel.astype(float) ** 2 / spec.sigma ** 2)
    norm = math.sqrt(theta3(math.exp(-2.0 / spec.sigma ** 2)))
    factor = amp * np.exp(-1j * spec.center_alpha * rel) / norm
    captured = float(np.linalg.norm(factor) ** 2)
    factor = factor / np.linalg.norm(factor)
    factors = []
    bystanders = iter(spec.bystander)
    for ax in AXES:
        if ax == spec.axis:
            factors.append(factor)
            continue
        m0 = next(bystanders)
        wax = basis.m_max(ax)
        if abs(m0) > wax:
            raise ConfigurationError(f"bystander momentum {m0} outside {ax} window {wax}")
        f = np.zeros(2 * wax + 1, dtype=complex)
        f[m0 + wax] = 1.0
        factors.append(f)
    return RotorState.product(basis, *factors,
                              diagnostics={"window_capture": captured,
                                           "leakage": 1.0 - captured})


def superpose(states: list[RotorState], weights: list[complex]) -> RotorState:
    """Normalized weighted sum of pure states on a common basis."""
    if not states:
        raise DomainError("superpose needs at least one state")
    if len(states) != len(weights):
        raise DomainError("states and weights must pair up")
    if all(abs(w) == 0.0 for w in weights):
        raise DomainError("all weights are zero")
    basis = states[0].basis
    total = np.zeros(basis.dim, dtype=complex)
    for st, wt in zip(states, weights):
        if st.basis != basis:
            raise DomainError("superpose requires matching bases")
        if not st.is_pure:
            raise DomainError("superpose acts on pure states")
        total += complex(wt) * st.full_vector()
    nrm = np.linalg.norm(total)
    if nrm == 0.0:
        raise DomainError("superposition vanished identically")
    return RotorState.pure(basis, total / nrm)


def count_fringes(grid: PhaseSpaceGrid, slice_m: MomentumTriple,
                  axis: str = "alpha") -> int:
    """Count local maxima of W along `axis` at a fixed momentum triple.

    A maximum counts when its prominence exceeds 10% of the slice's max |W|;
    the scan treats the angle as periodic.
    """
    spec = grid.spec
    idx = [None, None, None]
    for i, ax in enumerate(AXES):
        mv = spec.m_values(ax)
        want = slice_m.component(ax)
        pos = np.where(mv == want)[0]
        if len(pos) == 0:
            raise DomainError(f"momentum {want} outside grid window on {ax}")
        idx[i] = int(pos[0])
    if axis == "alpha":
        line = grid.values[:, 0, 0, idx[0], idx[1], idx[2]]
    elif axis == "beta":
        line = grid.values[0, :, 0, idx[0], idx[1], idx[2]]
    else:
        line = grid.values[0, 0, :, idx[0], idx[1], idx[2]]
    peak = np.abs(line).max()
    if peak == 0.0:
        raise DomainError("empty slice: W vanishes identically there")
    n = len(line)
    wrapped = np.concatenate([line, line, line])
    peaks, _ = find_peaks(wrapped, prominence=PEAK_PROMINENCE_FRACTION * peak)
    return int(np.count_nonzero((peaks >= n) & (peaks < 2 * n)))


def negativity_volume(grid: PhaseSpaceGrid) -> dict:
    """Integrated negative part of W plus the min/max ratio diagnostic.

    Returns {"volume": int dOmega sum_m max(0, -W),
             "min_over_max": min(W) / max(W),
             "negligible": |min/max| below the reporting threshold}.
    """
    v = grid.values
    volume = float(np.clip(-v, 0.0, None).sum() * grid.spec.volume_element)
    vmax = float(v.max())
    vmin = float(v.min())
    ratio = vmin / vmax if vmax != 0.0 else math.inf
    return {"volume": volume,
            "min_over_max": ratio,
            "negligible": abs(ratio) < NEGATIVITY_RATIO_THRESHOLD}
