"""Quadrature helpers.

Periodic angle integrals use uniform midpoint grids (exact for trigonometric
polynomials below the grid bandwidth, and they avoid the beta = 0 pole).
Line integrals over beta carry sqrt(sin beta)-type endpoint behaviour, so
panels are mapped through a cubic smoother that flattens sqrt singularities
at either panel end before Gauss-Legendre is applied.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import roots_legendre

from .errors import ConfigurationError

MIN_QUADRATURE_ORDER = 32
DEFAULT_BETA_ORDER = 200


def check_order(order: int) -> int:
    if order < MIN_QUADRATURE_ORDER:
        raise ConfigurationError(
            f"quadrature order {order} below minimum {MIN_QUADRATURE_ORDER}")
    return int(order)


def midpoint_angles(n: int, period: float) -> tuple[np.ndarray, float]:
    """Uniform midpoint samples of [0, period); returns (points, weight)."""
    if n < 1:
        raise ConfigurationError(f"need at least one angle sample, got {n}")
    pts = (np.arange(n) + 0.5) * (period / n)
    return pts, period / n


def gauss_legendre(order: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(order)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def smoothed_panel(a: float, b: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre panel for integrands with sqrt singularities at a or b.

    Substitutes x = a + (b-a) t^2 (3 - 2t); the Jacobian vanishes linearly at
    both ends, turning sqrt(x - a) and sqrt(b - x) factors into smooth
    functions of t.
    """
    t, w = roots_legendre(order)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    s = t * t * (3.0 - 2.0 * t)
    jac = 6.0 * t * (1.0 - t)
    return a + (b - a) * s, (b - a) * jac * w


def beta_line_nodes(order: int = DEFAULT_BETA_ORDER,
                    oscillation: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for int_0^pi f(beta) d(beta) with sqrt endpoints.

    `oscillation` is the largest |m| of exp(-2 i m beta) factors expected in
    f; panel orders grow with it so phases stay resolved.
    """
    per_panel = max(check_order(order) // 2,
                    int(abs(oscillation) * (math.pi / 2.0)) + 40)
    xs, ws = [], []
    for a, b in ((0.0, math.pi / 2.0), (math.pi / 2.0, math.pi)):
        x, w = smoothed_panel(a, b, per_panel)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def wrapped_pair_nodes(beta: float, order: int,
                       oscillation: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for int_{-pi/2}^{pi/2} d(beta') of integrands built from
    period-pi functions of (beta -+ beta'/2) with sqrt kinks at the wrap
    points of either argument.

    Interior breakpoints exist only when beta < pi/4 (wrap of beta -+ beta'/2
    through 0) or beta > 3pi/4 (wrap through pi).
    """
    half = math.pi / 2.0
    cuts = {-half, half}
    for candidate in (2.0 * beta, -2.0 * beta,
                      2.0 * beta - 2.0 * math.pi, 2.0 * math.pi - 2.0 * beta):
        if -half < candidate < half:
            cuts.add(candidate)
    edges = sorted(cuts)
    base = check_order(order)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        per_panel = max(base, int(abs(oscillation) * (b - a)) + 40)
        x, w = smoothed_panel(a, b, per_panel)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def fourier_coefficients(nodes: np.ndarray, weights: np.ndarray,
                         values: np.ndarray, m_values: np.ndarray,
                         frequency_scale: float) -> np.ndarray:
    """sum_j w_j f_j exp(i * scale * m * x_j) for every m, as one matmul."""
    phases = np.exp(1j * frequency_scale * np.outer(m_values, nodes))
    return phases @ (weights * values)
