"""Reduced rotation matrix elements d^J_{MK}(beta).

Evaluation strategy:

* J <= 30: the explicit sum over Jacobi-like terms, accumulated with
  log-factorials and explicit signs.  Cancellation is mild at these J and
  the structure is easy to check against an extended-precision oracle.
* J > 30: three-term upward recursion in J at fixed (M, K), seeded at
  J0 = max(|M|, |K|) and J0 + 1 by the sum formula (few terms there, so the
  seeds stay accurate at any J0).  Upward recursion follows the dominant
  solution and avoids the cancellation blow-up of the long alternating sum.

Full rotation matrices follow the active z-y-z convention,
D^J_{MK}(alpha, beta, gamma) = exp(-i M alpha) d^J_{MK}(beta) exp(-i K gamma).
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

_SUM_FORMULA_MAX_J = 30


def _check_jmk(j: int, m: int, k: int) -> None:
    if not all(isinstance(v, (int, np.integer)) and not isinstance(v, bool)
               for v in (j, m, k)):
        raise DomainError(f"quantum numbers must be integers, got {(j, m, k)}")
    if j < 0:
        raise DomainError(f"J must be non-negative, got {j}")
    if abs(m) > j or abs(k) > j:
        raise DomainError(f"|M|, |K| must not exceed J: got J={j}, M={m}, K={k}")


def _small_d_sum(j: int, m: int, k: int, beta):
    """Sum-formula evaluation, vectorized over beta."""
    beta = np.asarray(beta, dtype=float)
    c = np.cos(0.5 * beta)
    s = np.sin(0.5 * beta)
    log_pref = 0.5 * (math.lgamma(j + m + 1) + math.lgamma(j - m + 1)
                      + math.lgamma(j + k + 1) + math.lgamma(j - k + 1))
    t_lo = max(0, k - m)
    t_hi = min(j + k, j - m)
    out = np.zeros_like(c)
    # Half-angle cosine/sine powers can underflow to an exact 0 at the poles;
    # 0**0 = 1 under np.power, which is the value the formula needs there.
    for t in range(t_lo, t_hi + 1):
        log_den = (math.lgamma(j + k - t + 1) + math.lgamma(t + 1)
                   + math.lgamma(m - k + t + 1) + math.lgamma(j - m - t + 1))
        sign = -1.0 if (m - k + t) % 2 else 1.0
        coeff = sign * math.exp(log_pref - log_den)
        out = out + coeff * np.power(c, 2 * j + k - m - 2 * t) * np.power(s, m - k + 2 * t)
    return out


def _small_d_recursion(j: int, m: int, k: int, beta):
    """Upward J-recursion from sum-formula seeds at J0 = max(|M|,|K|)."""
    beta = np.asarray(beta, dtype=float)
    x = np.cos(beta)
    j0 = max(abs(m), abs(k))
    d_prev = _small_d_sum(j0, m, k, beta)
    if j == j0:
        return d_prev
    d_curr = _small_d_sum(j0 + 1, m, k, beta)
    for jj in range(j0 + 1, j):
        a = math.sqrt((jj + 1) ** 2 - m * m) * math.sqrt((jj + 1) ** 2 - k * k)
        b = math.sqrt(jj * jj - m * m) * math.sqrt(jj * jj - k * k)
        d_next = ((2 * jj + 1) * (jj * (jj + 1) * x - m * k) * d_curr
                  - (jj + 1) * b * d_prev) / (jj * a)
        d_prev, d_curr = d_curr, d_next
    return d_curr


def wigner_small_d(j: int, m: int, k: int, beta):
    """d^J_{MK}(beta); beta may be a scalar or an array (radians)."""
    _check_jmk(j, m, k)
    scalar = np.isscalar(beta) or np.ndim(beta) == 0
    if j <= _SUM_FORMULA_MAX_J:
        out = _small_d_sum(j, m, k, beta)
    else:
        out = _small_d_recursion(j, m, k, beta)
    return float(out) if scalar else out


def wigner_small_d_stack(j_max: int, m: int, k: int, beta) -> np.ndarray:
    """All d^J_{MK}(beta) for J = max(|M|,|K|) .. j_max, shape (n_J, *beta.shape).

    Uses the same recursion as wigner_small_d, keeping every intermediate J.
    """
    _check_jmk(max(j_max, max(abs(m), abs(k))), m, k)
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    j0 = max(abs(m), abs(k))
    if j_max < j0:
        raise DomainError(f"j_max={j_max} below minimum J={j0} for (M,K)=({m},{k})")
    x = np.cos(beta)
    rows = [_small_d_sum(j0, m, k, beta)]
    if j_max > j0:
        rows.append(_small_d_sum(j0 + 1, m, k, beta))
    for jj in range(j0 + 1, j_max):
        a = math.sqrt((jj + 1) ** 2 - m * m) * math.sqrt((jj + 1) ** 2 - k * k)
        b = math.sqrt(jj * jj - m * m) * math.sqrt(jj * jj - k * k)
        nxt = ((2 * jj + 1) * (jj * (jj + 1) * x - m * k) * rows[-1]
               - (jj + 1) * b * rows[-2]) / (jj * a)
        rows.append(nxt)
    return np.stack(rows)


def wigner_big_d(j: int, m: int, k: int, omega) -> complex:
    """D^J_{MK}(Omega) = e^{-i M alpha} d^J_{MK}(beta) e^{-i K gamma}."""
    alpha, beta, gamma = omega.as_tuple() if hasattr(omega, "as_tuple") else omega
    return (np.exp(-1j * m * alpha) * wigner_small_d(j, m, k, beta)
            * np.exp(-1j * k * gamma))
