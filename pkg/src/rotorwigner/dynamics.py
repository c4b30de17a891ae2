"""Kicked symmetric-top dynamics and the classical torque-free motion.

Reduced units: hbar = 1, time such that the free phases are
E(J, K) * t with E(J, K) = A J (J + 1) + (C - A) K^2 and A = hbar / (2 I1),
C = hbar / (2 I3).  With A = 1/2 every level spacing is an integer, so any
state within one (K, M) block recurs exactly (up to a global phase) at
t = 2 pi.

The laser kick couples through cos^2(beta), which conserves K and M; a run
therefore lives entirely inside one fixed-(K, M) block.  An aligning kick
needs negative strength (the interaction enters as strength * g(t) *
cos^2(beta)).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .basis import JKMBasisSpec, MBasisSpec, OperatorMatrix, RotorState
from .errors import (ConfigurationError, DomainError, IntegrationError,
                     SingularityError)
from .quadrature import gauss_legendre
from .wigner_d import wigner_small_d_stack

SIN_BETA_GUARD = 1e-8
KICK_TOL_DEFAULT = 1e-10
LEAKAGE_WARN = 1e-6
GAUSSIAN_WINDOW_DURATIONS = 5.0


@dataclass(frozen=True)
class TopConstants:
    """Rotational constants A = 1/(2 I1), C = 1/(2 I3), reduced units."""

    A: float = 0.5
    C: float = 0.25

    def __post_init__(self):
        if self.A <= 0 or self.C <= 0:
            raise DomainError(f"rotational constants must be positive: {self}")

    @property
    def I1(self) -> float:
        return 1.0 / (2.0 * self.A)

    @property
    def I3(self) -> float:
        return 1.0 / (2.0 * self.C)


@dataclass(frozen=True)
class PulseConfig:
    """Gaussian kick: strength * g(t) * cos^2(beta), envelope peak 1.

    `duration` is the full width at half maximum of g; the active window is
    center_time +- 5 * duration.  Negative strength aligns (that is the
    physical sign for an induced-dipole interaction).
    """

    strength: float = -10.0
    duration: float = 1e-3
    center_time: float = 0.0

    def __post_init__(self):
        if self.duration <= 0:
            raise DomainError(f"pulse duration must be positive, got {self.duration}")

    @property
    def sigma(self) -> float:
        return self.duration / (2.0 * math.sqrt(2.0 * math.log(2.0)))

    def envelope(self, t):
        return np.exp(-((t - self.center_time) ** 2) / (2.0 * self.sigma ** 2))

    @property
    def window(self) -> tuple[float, float]:
        half = GAUSSIAN_WINDOW_DURATIONS * self.duration
        return (self.center_time - half, self.center_time + half)

    @property
    def effective_kick(self) -> float:
        """strength * integral of g over the full line (impulsive phase)."""
        return self.strength * self.sigma * math.sqrt(2.0 * math.pi)


def free_energies(basis: JKMBasisSpec, constants: TopConstants) -> np.ndarray:
    """E(J, K) = A J (J + 1) + (C - A) K^2 per basis label."""
    labels = basis.labels()
    js = np.array([j for j, _, _ in labels], dtype=float)
    ks = np.array([k for _, k, _ in labels], dtype=float)
    return constants.A * js * (js + 1.0) + (constants.C - constants.A) * ks * ks


def cos2beta_matrix(basis: JKMBasisSpec, quadrature_order: int = 200) -> OperatorMatrix:
    """<J' K M| cos^2(beta) |J K M> on a fixed-(K, M) block.

    With x = cos(beta) the integrand d^J'_{MK} x^2 d^J_{MK} sin(beta) d(beta)
    becomes a polynomial in x of degree <= J + J' + 2 (the half-integer
    powers of (1 -+ x) pair up between the two d's), so Gauss-Legendre in x
    is exact once the order exceeds j_max + 2.  The Legendre-order-2
    coupling rule |J' - J| <= 2 is enforced exactly.
    """
    if basis.fixed_km is None:
        raise DomainError("cos2beta_matrix needs a fixed-(K, M) basis block")
    k, m = basis.fixed_km
    order = max(quadrature_order, basis.j_max + 5)
    x, w = gauss_legendre(order, -1.0, 1.0)
    beta = np.arccos(x)
    stack = wigner_small_d_stack(basis.j_max, m, k, beta)  # (nJ, nodes)
    js = basis.j_values()
    pref = np.sqrt(2.0 * js + 1.0) / np.sqrt(2.0)
    rows = stack * pref[:, None]
    mat = (rows * (w * x * x)) @ rows.T
    sel = np.abs(js[:, None] - js[None, :]) <= 2
    mat = np.where(sel, mat, 0.0)
    mat = 0.5 * (mat + mat.T)
    return OperatorMatrix(basis, mat.astype(complex), hermitian=True)


def _top_shell_population(state_vector: np.ndarray, basis: JKMBasisSpec) -> float:
    js = basis.j_values()
    top = js >= js.max() - 1
    return float(np.abs(state_vector[top]) ** 2 @ np.ones(int(top.sum())))


def propagate_kick(initial: RotorState, pulse: PulseConfig,
                   constants: TopConstants, tol: float = KICK_TOL_DEFAULT,
                   coupling: OperatorMatrix | None = None) -> RotorState:
    """Integrate the kicked Schroedinger equation across the pulse window.

    i d(psi)/dt = [H_free + strength g(t) cos^2(beta)] psi over
    t in [center - 5 duration, center + 5 duration], adaptive
    Dormand-Prince (order 8) at local tolerance `tol`.  The returned state
    is referenced back to the pulse center by exact free evolution, so
    subsequent free propagation can start at t = center_time.

    Norm drift is measured and reported in diagnostics; drift beyond
    100 * tol raises IntegrationError.  Population in the top two J shells
    beyond 1e-6 triggers a truncation warning.
    """
    basis = initial.basis
    if not (isinstance(basis, JKMBasisSpec) and basis.fixed_km is not None):
        raise DomainError("propagate_kick expects a fixed-(K, M) symmetric-top state")
    if not initial.is_pure:
        raise DomainError("propagate_kick expects a pure state")
    energies = free_energies(basis, constants)
    cmat = (coupling or cos2beta_matrix(basis)).matrix.real
    t0, t1 = pulse.window

    def rhs(t, y):
        g = pulse.envelope(t)
        return -1j * (energies * y + (pulse.strength * g) * (cmat @ y))

    sol = solve_ivp(rhs, (t0, t1), initial.full_vector().astype(complex),
                    method="DOP853", rtol=tol, atol=tol * 1e-2)
    if not sol.success:
        raise IntegrationError(f"kick integration failed: {sol.message}")
    psi = sol.y[:, -1]
    drift = abs(np.linalg.norm(psi) - 1.0)
    if drift > 100.0 * tol:
        raise IntegrationError(
            f"norm drift {drift} exceeds 100 * tol = {100.0 * tol}",
            diagnostics={"norm_drift": drift, "tol": tol})
    top_pop = _top_shell_population(psi, basis)
    if top_pop > LEAKAGE_WARN:
        warnings.warn(f"population {top_pop} in the top two J shells; "
                      f"raise j_max", stacklevel=2)
    # reference back to the pulse center so free evolution can take over
    psi = np.exp(1j * energies * (t1 - pulse.center_time)) * psi
    psi = psi / np.linalg.norm(psi)
    return RotorState.pure(basis, psi,
                           diagnostics={"norm_drift": drift,
                                        "top_shell_population": top_pop,
                                        "tol": tol})


def free_propagate(state: RotorState, t_bar: float,
                   constants: TopConstants) -> RotorState:
    """Exact field-free evolution: coefficients pick up exp(-i E(J,K) t)."""
    basis = state.basis
    if not isinstance(basis, JKMBasisSpec):
        raise DomainError("free_propagate expects a symmetric-top state")
    phases = np.exp(-1j * free_energies(basis, constants) * t_bar)
    if state.is_pure:
        return RotorState.pure(basis, phases * state.full_vector(),
                               diagnostics=dict(state.diagnostics))
    rho = state.density * np.outer(phases, phases.conj())
    return RotorState.mixed(basis, rho, diagnostics=dict(state.diagnostics))


@dataclass
class AlignmentRun:
    """A kicked-top run: configuration plus computed time series."""

    constants: TopConstants
    pulse: PulseConfig
    initial_jkm: tuple[int, int, int]
    j_max: int
    times: list[float]
    tol: float = KICK_TOL_DEFAULT
    post_kick: RotorState | None = None
    snapshots: list[RotorState] = field(default_factory=list)
    signal: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        ts = list(self.times)
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise DomainError("sample times must be sorted ascending")
        j, k, m = self.initial_jkm
        if abs(k) > j or abs(m) > j:
            raise DomainError(f"invalid initial state {self.initial_jkm}")
        if self.j_max < j + 2:
            raise ConfigurationError(f"j_max {self.j_max} too small for J = {j}")

    @property
    def basis(self) -> JKMBasisSpec:
        j, k, m = self.initial_jkm
        return JKMBasisSpec(self.j_max, fixed_km=(k, m))


def run_alignment(run: AlignmentRun, keep_snapshots: bool = True) -> AlignmentRun:
    """Execute the kick, then sample <cos^2 beta> (and states) at run.times."""
    basis = run.basis
    j, k, m = run.initial_jkm
    vec = np.zeros(basis.dim, dtype=complex)
    vec[basis.index_of((j, k, m))] = 1.0
    initial = RotorState.pure(basis, vec)
    coupling = cos2beta_matrix(basis)
    run.post_kick = propagate_kick(initial, run.pulse, run.constants, run.tol,
                                   coupling=coupling)
    cmat = coupling.matrix.real
    energies = free_energies(basis, run.constants)
    psi0 = run.post_kick.full_vector()
    run.signal = []
    run.snapshots = []
    for t in run.times:
        psi = np.exp(-1j * energies * t) * psi0
        val = float(np.real(psi.conj() @ (cmat @ psi)))
        run.signal.append((float(t), val))
        if keep_snapshots:
            run.snapshots.append(RotorState.pure(basis, psi))
    return run


def alignment_signal(run: AlignmentRun) -> list[tuple[float, float]]:
    """<psi(t)|cos^2(beta)|psi(t)> at each sample time of a completed run."""
    if run.post_kick is None:
        run_alignment(run, keep_snapshots=False)
    return list(run.signal)


# ---------------------------------------------------------------------------
# classical characteristics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassicalState:
    """A classical phase-space point with continuous momenta."""

    alpha: float
    beta: float
    gamma: float
    p_alpha: float
    p_beta: float
    p_gamma: float

    def coordinates(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma,
                         self.p_alpha, self.p_beta, self.p_gamma])


def classical_hamiltonian(state: ClassicalState, constants: TopConstants) -> float:
    sb = math.sin(state.beta)
    if abs(sb) <= SIN_BETA_GUARD:
        raise SingularityError(f"sin(beta) = {sb} inside the pole guard")
    num = state.p_alpha - state.p_gamma * math.cos(state.beta)
    return (num * num / (2.0 * constants.I1 * sb * sb)
            + state.p_beta ** 2 / (2.0 * constants.I1)
            + state.p_gamma ** 2 / (2.0 * constants.I3))


def classical_vector_field(state: ClassicalState,
                           constants: TopConstants) -> tuple[float, ...]:
    """(alpha_dot, beta_dot, gamma_dot, p_alpha_dot, p_beta_dot, p_gamma_dot).

    These are Hamilton's equations of the torque-free top; alpha and gamma
    are cyclic, so their momenta are constants of motion.
    """
    cb = math.cos(state.beta)
    sb = math.sin(state.beta)
    if abs(sb) <= SIN_BETA_GUARD:
        raise SingularityError(f"sin(beta) = {sb} inside the pole guard")
    I1, I3 = constants.I1, constants.I3
    pa, pb, pg = state.p_alpha, state.p_beta, state.p_gamma
    alpha_dot = (pa - pg * cb) / (I1 * sb * sb)
    beta_dot = pb / I1
    gamma_dot = (pg * cb * cb - pa * cb) / (I1 * sb * sb) + pg / I3
    pb_dot = -(pg - pa * cb) * (pa - pg * cb) / (I1 * sb ** 3)
    return (alpha_dot, beta_dot, gamma_dot, 0.0, pb_dot, 0.0)


def classical_trajectory(initial: ClassicalState, t_span: tuple[float, float],
                         constants: TopConstants, tol: float = 1e-11,
                         max_points: int = 2000) -> dict:
    """Adaptive integration of the classical characteristics.

    Only (alpha, beta, gamma, p_beta) are integrated; p_alpha and p_gamma
    are cyclic and enter as exact parameters.  The trajectory terminates
    with `truncated = True` if it reaches the sin(beta) pole guard.
    Returns arrays plus conservation diagnostics (energy drift is measured
    against the initial Hamiltonian).
    """
    h0 = classical_hamiltonian(initial, constants)
    pa, pg = initial.p_alpha, initial.p_gamma
    I1, I3 = constants.I1, constants.I3

    def rhs(t, y):
        _, beta, _, pb = y
        cb = math.cos(beta)
        sb = math.sin(beta)
        denom = I1 * sb * sb
        return [(pa - pg * cb) / denom,
                pb / I1,
                (pg * cb * cb - pa * cb) / denom + pg / I3,
                -(pg - pa * cb) * (pa - pg * cb) / (I1 * sb ** 3)]

    def pole(t, y):
        return abs(math.sin(y[1])) - SIN_BETA_GUARD
    pole.terminal = True
    pole.direction = -1

    times = np.linspace(t_span[0], t_span[1], max_points)
    sol = solve_ivp(rhs, t_span, [initial.alpha, initial.beta, initial.gamma,
                                  initial.p_beta],
                    method="DOP853", rtol=tol, atol=tol, t_eval=times,
                    events=pole)
    truncated = bool(sol.status == 1)
    alpha, beta, gamma, pb = sol.y
    energies = np.array([
        classical_hamiltonian(ClassicalState(a, b, g, pa, x, pg), constants)
        for a, b, g, x in zip(alpha, beta, gamma, pb)])
    scale = max(abs(h0), 1.0)
    return {
        "t": sol.t,
        "alpha": alpha, "beta": beta, "gamma": gamma,
        "p_alpha": np.full_like(sol.t, pa),
        "p_beta": pb,
        "p_gamma": np.full_like(sol.t, pg),
        "energy": energies,
        "energy_drift": float(np.abs(energies - h0).max() / scale),
        "truncated": truncated,
    }


# ---------------------------------------------------------------------------
# canonical-operator Hamiltonian cross-check
# ---------------------------------------------------------------------------

def canonical_hamiltonian_forms(m_max: int, constants: TopConstants,
                                k: int = 0, m: int = 0,
                                quantum_potential: bool = True
                                ) -> tuple[np.ndarray, np.ndarray]:
    """Quadratic form (H, Gram) of the canonical Hamiltonian at fixed (K, M).

    H = (p_a - p_g cos)^2 / (2 I1 sin^2) + p_b^2 / (2 I1) + p_g^2 / (2 I3)
        - (1 + sin^{-2}) / (8 I1),   p_a -> M, p_g -> K.

    Naive momentum-window matrices fail here: single matrix elements
    <m'|sin^{-2}|m> diverge, and regularizing through inv(sin^2-matrix)
    collapses variationally (the attractive 1/sin^2 sits exactly at the
    critical coupling).  Instead the form is assembled on the pole-vanishing
    vectors D_m = |m> - |m+1>, where every entry is finite and exact:
    |D_m(beta)|-type products carry a factor |1 - e^{2 i beta}|^2 =
    4 sin^2(beta) that cancels the singular denominators, e.g.
    <D'|sin^{-2}|D> = 4 delta and <D'|f/sin^2|D> = 4 <f>-Toeplitz.
    Returns (H_form, Gram) for the generalized eigenproblem H v = E G v.
    """
    I1, I3 = constants.I1, constants.I3
    n = 2 * m_max + 1
    ms = np.arange(-m_max, m_max + 1)
    md = ms[:-1]
    diff = np.zeros((n, n - 1))
    for i in range(n - 1):
        diff[i, i] = 1.0
        diff[i + 1, i] = -1.0
    kd = md[None, :] - md[:, None]
    # Fourier-coefficient Toeplitz blocks (1/pi) int f e^{2 i k beta} d(beta)
    one_fc = (kd == 0).astype(float)
    cos_fc = (4j / math.pi) * kd / (4.0 * kd * kd - 1.0)
    cos2b_fc = 0.5 * ((kd == 1) + (kd == -1)).astype(float)
    cossq_fc = 0.5 * (one_fc + cos2b_fc)
    gram = diff.T @ diff
    p2 = diff.T @ np.diag((2.0 * ms) ** 2) @ diff
    vw = 4.0 * (m * m * one_fc - 2.0 * m * k * cos_fc + k * k * cossq_fc)
    h = (p2 + vw) / (2.0 * I1) + (k * k / (2.0 * I3)) * gram
    if quantum_potential:
        h = h - (gram + 4.0 * one_fc) / (8.0 * I1)
    return 0.5 * (h + h.conj().T), gram


def canonical_hamiltonian_check(m_max: int, constants: TopConstants,
                                k: int = 1, m: int = 0,
                                n_levels: int = 5) -> dict:
    """Compare the canonical-form low spectrum with E(J, K) = A J(J+1)
    + (C - A) K^2, J >= max(|K|, |M|).

    Reports the worst discrepancy over the lowest `n_levels` and the same
    figure with the quantum potential removed (the O(hbar^2) ablation
    offset).  Run at two windows to see the discrepancy shrink.

    Convergence is fastest on blocks with |M - K| >= 1 and |M + K| >= 1
    (roughly 1/window^2); blocks like (0, 0) have sqrt(sin beta) eigenstate
    behaviour at the poles, which the periodic momentum basis resolves only
    slowly.  The default block (K, M) = (1, 0) sits in the fast class.
    """
    from scipy.linalg import eigh

    h, g = canonical_hamiltonian_forms(m_max, constants, k, m)
    evals = eigh(h, g, eigvals_only=True)[:n_levels]
    j0 = max(abs(k), abs(m))
    js = np.arange(j0, j0 + n_levels)
    exact = constants.A * js * (js + 1.0) + (constants.C - constants.A) * k * k
    disc = float(np.abs(evals - exact).max())
    h_abl, g_abl = canonical_hamiltonian_forms(m_max, constants, k, m,
                                               quantum_potential=False)
    evals_abl = eigh(h_abl, g_abl, eigvals_only=True)[:n_levels]
    return {
        "m_max": m_max,
        "block_km": (k, m),
        "levels": evals.tolist(),
        "exact": exact.tolist(),
        "discrepancy": disc,
        "ablation_offset": float(np.abs(evals_abl - exact).max()),
    }
