"""Displacements, phase-point kernels, Weyl symbols, and Wigner transforms.

Everything factorizes over the three angle axes.  On one axis with
momentum step mu (1 for alpha/gamma, 2 for beta) and window |m| <= w:

* displacement      D(theta, k)|m0> = exp(-i theta mu m0) |m0 + k>
* origin kernel     K0[m1, m0] = sinc((m0 + m1) pi / 2)
* displaced kernel  K(theta, k)[m1, m0]
                      = exp(-i theta mu (m1 - m0)) sinc((m1 + m0 - 2k) pi/2),
                    restricted to m1 - k, m0 - k inside the window.

The momentum-representation Wigner transform is the same contraction with
the window restriction dropped and a 1/(4 pi^3) prefactor.  The
angle-representation transform integrates shifted products of half-density
wavefunctions u(Omega) = sqrt(sin beta) psi(Omega) instead; the two paths
share no evaluation machinery, so they can cross-validate each other.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .angles import AXES, MOMENTUM_STEP, PERIOD, EulerAngles, MomentumTriple
from .basis import (MBasisSpec, JKMBasisSpec, OperatorMatrix, RotorState,
                    momentum_operator_matrix, position_angle_matrix)
from .errors import BasisMismatchError, ConfigurationError, DomainError
from .grids import GridSpec, PhaseSpaceGrid
from .quadrature import DEFAULT_BETA_ORDER, gauss_legendre, wrapped_pair_nodes
from .wigner_d import wigner_small_d_stack

IMAG_RESIDUE_TOL = 1e-10
FOUR_PI_CUBED = 4.0 * math.pi ** 3


def sinc_half(q) -> np.ndarray:
    """sinc(q pi / 2) for integer q: 1 at q = 0, 0 at even q, and the exact
    alternating 2/(pi q) branch at odd q (no sin() cancellation)."""
    q = np.asarray(q, dtype=np.int64)
    out = np.zeros(q.shape, dtype=float)
    even = (q % 2) == 0
    out[even] = (q[even] == 0).astype(float)
    odd = ~even
    if odd.any():
        j = (q[odd] - 1) // 2
        out[odd] = np.where(j % 2 == 0, 1.0, -1.0) * 2.0 / (np.pi * q[odd])
    return out


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("ROTORWIGNER_WORKERS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class DisplacementSpec:
    """Angle translation amounts plus integer momentum shifts."""

    omega: EulerAngles
    m: MomentumTriple


# ---------------------------------------------------------------------------
# displacement and kernel matrices
# ---------------------------------------------------------------------------

def axis_displacement_matrix(m_max: int, axis: str, angle: float,
                             shift: int) -> np.ndarray:
    step = MOMENTUM_STEP[axis]
    n = 2 * m_max + 1
    ms = np.arange(-m_max, m_max + 1)
    out = np.zeros((n, n), dtype=complex)
    for col, m0 in enumerate(ms):
        m1 = m0 + shift
        if -m_max <= m1 <= m_max:
            out[m1 + m_max, col] = np.exp(-1j * angle * step * m0)
    return out


def axis_kernel_matrix(m_max: int, axis: str, angle: float, shift: int,
                       masked: bool = True) -> np.ndarray:
    step = MOMENTUM_STEP[axis]
    ms = np.arange(-m_max, m_max + 1)
    m1 = ms[:, None]
    m0 = ms[None, :]
    out = np.exp(-1j * angle * step * (m1 - m0)) * sinc_half(m1 + m0 - 2 * shift)
    if masked:
        ok = np.abs(ms - shift) <= m_max
        out = out * np.outer(ok, ok)
    return out


def _axis_windows(basis: MBasisSpec):
    return [(ax, basis.m_max(ax)) for ax in AXES]


def _kron3(blocks) -> np.ndarray:
    return np.kron(np.kron(blocks[0], blocks[1]), blocks[2])


def displacement_matrix(spec: DisplacementSpec, basis: MBasisSpec) -> OperatorMatrix:
    """Tensor-product displacement D(Omega, m); momentum shifts that leave
    the window produce zero columns."""
    if not isinstance(basis, MBasisSpec):
        raise BasisMismatchError("displacement_matrix requires the momentum basis")
    blocks = [axis_displacement_matrix(w, ax, spec.omega.component(ax),
                                       spec.m.component(ax))
              for ax, w in _axis_windows(basis)]
    return OperatorMatrix(basis, _kron3(blocks))


def kernel_origin(axis: str, basis: MBasisSpec) -> OperatorMatrix:
    """Single-axis origin kernel, tagged on the one-axis slice of `basis`.

    All three axes share the closed form sinc((m0 + m1) pi / 2)."""
    if axis not in AXES:
        raise DomainError(f"unknown axis {axis!r}")
    w = basis.m_max(axis)
    tag = MBasisSpec(w if axis == "alpha" else 0,
                     w if axis == "beta" else 0,
                     w if axis == "gamma" else 0)
    ms = np.arange(-w, w + 1)
    mat = sinc_half(ms[:, None] + ms[None, :]).astype(complex)
    return OperatorMatrix(tag, mat, hermitian=True)


def kernel(point_omega: EulerAngles, point_m: MomentumTriple,
           basis: MBasisSpec) -> OperatorMatrix:
    """Displaced kernel D K0 D^+; Hermitian by construction.  Its trace is 1
    whenever the momentum shift stays inside the window (asserted by tests,
    never rescaled here: a drifting trace flags window problems)."""
    if not isinstance(basis, MBasisSpec):
        raise BasisMismatchError("kernel requires the momentum basis")
    blocks = [axis_kernel_matrix(w, ax, point_omega.component(ax),
                                 point_m.component(ax))
              for ax, w in _axis_windows(basis)]
    return OperatorMatrix(basis, _kron3(blocks), hermitian=True)


# ---------------------------------------------------------------------------
# symbol / Wigner contraction engine (momentum representation)
# ---------------------------------------------------------------------------

def _axis_mode_tables(m_max: int, grid_m: np.ndarray, masked: bool) -> dict:
    """S[d] tables: S[d][i, k] = sinc((2 m0_i + d - 2 k) pi / 2) for the
    valid diagonal range m0_i of offset d, optionally kernel-masked."""
    n = 2 * m_max + 1
    ms = np.arange(-m_max, m_max + 1)
    tables = {}
    for d in range(-(n - 1), n):
        m0 = ms[max(0, -d): n - max(0, d)]
        S = sinc_half(2 * m0[:, None] + d - 2 * grid_m[None, :])
        if masked:
            ok = (np.abs(m0[:, None] - grid_m[None, :]) <= m_max) \
                & (np.abs(m0[:, None] + d - grid_m[None, :]) <= m_max)
            S = S * ok
        tables[d] = S
    return tables


def _axis_contract(payload: np.ndarray, m_max: int, axis: str, x: np.ndarray,
                   grid_m: np.ndarray, masked: bool) -> tuple[np.ndarray, float]:
    """One-axis contraction sum_{m0,m1} P[m0,m1] K(x,k)[m1,m0].

    payload is a coefficient vector (P = psi psi^+) or a matrix.  Returns a
    real (len(x), len(grid_m)) array (per-axis 1/period NOT applied) and the
    worst imaginary residue.
    """
    step = MOMENTUM_STEP[axis]
    n = 2 * m_max + 1
    pure = payload.ndim == 1
    tables = _axis_mode_tables(m_max, grid_m, masked)
    acc = np.zeros((len(x), len(grid_m)), dtype=complex)
    for d, S in tables.items():
        if pure:
            lo = max(0, -d)
            diag = payload[lo: n - max(0, d)] * payload[lo + d: n + d - max(0, d)].conj()
        else:
            diag = np.diagonal(payload, offset=d)
        if not np.any(diag):
            continue
        mode = diag @ S
        acc += np.exp(-1j * step * d * x)[:, None] * mode[None, :]
    residue = float(np.abs(acc.imag).max()) if acc.size else 0.0
    return acc.real, residue


def _contract_payload6(payload6: np.ndarray, basis: MBasisSpec, grid: GridSpec,
                       masked: bool) -> tuple[np.ndarray, float]:
    """Full contraction sum P[m0,m1] K(point)[m1,m0] on every grid point.

    payload6 is <m0|P|m1> reshaped to basis.shape + basis.shape.  Axes are
    consumed one at a time; each pass turns the leading (m0, m1) pair into a
    trailing (x, k) pair, so after three passes the layout is
    (xa, ka, xb, kb, xg, kg).
    """
    work = payload6.transpose(0, 3, 1, 4, 2, 5).astype(complex)  # interleave pairs
    for ax, w in _axis_windows(basis):
        n = 2 * w + 1
        step = MOMENTUM_STEP[ax]
        x = grid.angle_points(ax)
        gm = grid.m_values(ax)
        tables = _axis_mode_tables(w, gm, masked)
        rest = work.shape[2:]
        out = np.zeros(rest + (len(x), len(gm)), dtype=complex)
        for d, S in tables.items():
            diag = np.diagonal(work, offset=d, axis1=0, axis2=1)  # (rest..., ndiag)
            if not np.any(diag):
                continue
            mode = diag @ S                                       # (rest..., nk)
            phase = np.exp(-1j * step * d * x)                    # (nx,)
            out += mode[..., None, :] * phase[:, None]
        work = out
    vals = work.transpose(0, 2, 4, 1, 3, 5)  # -> (xa, xb, xg, ka, kb, kg)
    residue = float(np.abs(vals.imag).max())
    return vals.real, residue


def weyl_symbol(op: OperatorMatrix, point_omega: EulerAngles,
                point_m: MomentumTriple):
    """tr[A Kernel(Omega, m)] at one phase-space point; real (with residue
    check) when A is flagged Hermitian."""
    basis = op.basis
    if not isinstance(basis, MBasisSpec):
        raise BasisMismatchError("weyl_symbol requires a momentum-basis operator")
    blocks = [axis_kernel_matrix(w, ax, point_omega.component(ax),
                                 point_m.component(ax))
              for ax, w in _axis_windows(basis)]
    a6 = op.matrix.reshape(basis.shape + basis.shape)
    val = np.einsum("abgABG,Aa,Bb,Gg->", a6, *blocks)
    if op.hermitian:
        if abs(val.imag) > IMAG_RESIDUE_TOL * max(1.0, abs(val.real)):
            warnings.warn(f"imaginary residue {val.imag} on a Hermitian symbol")
        return float(val.real)
    return complex(val)


def weyl_symbol_grid(op: OperatorMatrix, grid: GridSpec,
                     masked: bool = True) -> PhaseSpaceGrid:
    """tr[A Kernel] on every grid point; A must be Hermitian (real storage)."""
    basis = op.basis
    if not isinstance(basis, MBasisSpec):
        raise BasisMismatchError("weyl_symbol_grid requires a momentum-basis operator")
    if not op.hermitian:
        raise DomainError("grid symbols are stored real; operator must be Hermitian")
    a6 = op.matrix.reshape(basis.shape + basis.shape)
    vals, residue = _contract_payload6(a6, basis, grid, masked)
    if residue > IMAG_RESIDUE_TOL:
        warnings.warn(f"imaginary residue {residue} discarded from symbol grid")
    return PhaseSpaceGrid(grid, vals, meta={"kind": "weyl-symbol",
                                            "masked": masked,
                                            "imag_residue": residue})


def wigner_from_m_basis(state: RotorState, grid: GridSpec) -> PhaseSpaceGrid:
    """Momentum-representation Wigner transform.

    W(Omega, m) = (1/4 pi^3) sum_{m', m''} sinc[(m - (m'+m'')/2) pi]
                  e^{i (m'_a - m''_a) alpha} e^{i 2 (m'_b - m''_b) beta}
                  e^{i (m'_g - m''_g) gamma} <m'|rho|m''>.

    The parity split of the sinc (Kronecker delta for m'+m'' even, signed
    reciprocal for odd) is evaluated in closed form per difference vector;
    product states contract one axis at a time.
    """
    basis = state.basis
    if not isinstance(basis, MBasisSpec):
        raise DomainError("wigner_from_m_basis requires a momentum-basis state")
    if state.factors is not None:
        parts = []
        residue = 0.0
        for ax, factor in zip(AXES, state.factors):
            vals, res = _axis_contract(factor, basis.m_max(ax), ax,
                                       grid.angle_points(ax), grid.m_values(ax),
                                       masked=False)
            scale = max(np.abs(vals).max(), 1e-300)
            residue = max(residue, res / scale)
            parts.append(vals)
        vals = np.einsum("ai,bj,gk->abgijk", *parts) / FOUR_PI_CUBED
    else:
        rho = state.density_matrix()
        p6 = rho.reshape(basis.shape + basis.shape)
        vals, residue = _contract_payload6(p6, basis, grid, masked=False)
        vals = vals / FOUR_PI_CUBED
        residue /= FOUR_PI_CUBED
    if residue > IMAG_RESIDUE_TOL:
        warnings.warn(f"imaginary residue {residue} discarded from Wigner grid")
    return PhaseSpaceGrid(grid, vals, meta={"kind": "wigner", "path": "momentum",
                                            "imag_residue": residue})


# ---------------------------------------------------------------------------
# angle-representation Wigner transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AngleQuadrature:
    """Quadrature controls for the angle-representation path."""

    beta_order: int = DEFAULT_BETA_ORDER
    axis_order: int | None = None  # momentum-basis path; default from bandwidth


def _half_density_factory(j_max: int, k: int, m: int, coeffs: np.ndarray):
    """u(beta) = sqrt(sin beta) * sum_J c_J sqrt((2J+1)/8 pi^2) d^J_{MK}(beta),
    evaluated on the wrapped argument (period pi)."""
    js = np.arange(max(abs(k), abs(m)), j_max + 1)
    weights = coeffs * np.sqrt((2 * js + 1) / (8.0 * math.pi ** 2))

    def u(beta):
        b = np.mod(beta, math.pi)
        stack = wigner_small_d_stack(j_max, m, k, b)
        return np.sqrt(np.sin(b)) * np.tensordot(weights, stack, axes=(0, 0))

    return u


def _fixed_km_blocks(state: RotorState) -> dict:
    basis = state.basis
    vec = state.full_vector()
    blocks: dict[tuple[int, int], dict] = {}
    for coeff, (j, k, m) in zip(vec, basis.labels()):
        blocks.setdefault((k, m), {})[j] = coeff
    out = {}
    for (k, m), jmap in blocks.items():
        if not any(abs(c) > 0.0 for c in jmap.values()):
            continue
        j0 = max(abs(k), abs(m))
        coeffs = np.zeros(basis.j_max - j0 + 1, dtype=complex)
        for j, c in jmap.items():
            coeffs[j - j0] = c
        out[(k, m)] = _half_density_factory(basis.j_max, k, m, coeffs)
    return out


def _pair_beta_integrals(u1, u2, betas: np.ndarray, m_values: np.ndarray,
                         beta_order: int) -> np.ndarray:
    """I[ib, im] = int_{-pi/2}^{pi/2} e^{2 i m b'} u1(beta - b'/2)
    conj(u2(beta + b'/2)) db', panel quadrature with wrap-point splitting."""
    osc = int(np.abs(m_values).max(initial=0))
    rows = [None] * len(betas)

    def run(ib):
        beta = betas[ib]
        nodes, wts = wrapped_pair_nodes(beta, beta_order, oscillation=osc)
        g = u1(beta - nodes / 2.0) * np.conj(u2(beta + nodes / 2.0))
        phases = np.exp(2j * np.outer(m_values, nodes))
        rows[ib] = phases @ (wts * g)

    workers = _worker_count()
    if workers > 1 and len(betas) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, range(len(betas))))
    else:
        for ib in range(len(betas)):
            run(ib)
    return np.stack(rows)


def _wigner_jkm_pure(state: RotorState, grid: GridSpec,
                     quad: AngleQuadrature) -> np.ndarray:
    blocks = _fixed_km_blocks(state)
    alphas = grid.angle_points("alpha")
    betas = grid.angle_points("beta")
    gammas = grid.angle_points("gamma")
    m_a = grid.m_values("alpha")
    m_b = grid.m_values("beta")
    m_g = grid.m_values("gamma")
    acc = np.zeros(grid.shape, dtype=complex)
    for (k1, mm1), u1 in blocks.items():
        for (k2, mm2), u2 in blocks.items():
            ib = _pair_beta_integrals(u1, u2, betas, m_b, quad.beta_order)
            sa = sinc_half(2 * m_a - mm1 - mm2)
            sg = sinc_half(2 * m_g - k1 - k2)
            pa = np.exp(1j * (mm1 - mm2) * alphas)
            pg = np.exp(1j * (k1 - k2) * gammas)
            acc += np.einsum("a,g,i,k,bj->abgijk", pa, pg, sa, sg, ib) / math.pi
    return acc


def _wigner_m_product(state: RotorState, grid: GridSpec,
                      quad: AngleQuadrature) -> np.ndarray:
    """Angle-representation path for momentum-basis product states.

    Per axis: W(x, m) = (1/L) int_{-L/2}^{L/2} e^{i mu m x'}
    u(x - x'/2) conj(u(x + x'/2)) dx' with the L-periodic half-density
    u(x) = sum_m c_m e^{i mu m x} / sqrt(L); Gauss-Legendre in x' (the
    integrand is an entire trigonometric polynomial of half-integer modes).
    """
    basis = state.basis
    parts = []
    for ax, factor in zip(AXES, state.factors):
        period = PERIOD[ax]
        step = MOMENTUM_STEP[ax]
        w = basis.m_max(ax)
        ms = basis.m_values(ax)
        x = grid.angle_points(ax)
        gm = grid.m_values(ax)
        max_freq = step * (np.abs(gm).max(initial=0) + w) / 2.0
        order = quad.axis_order or int(max_freq * period / 2.0) + 40
        nodes, wts = gauss_legendre(order, -period / 2.0, period / 2.0)

        def u(xx):
            return (np.exp(1j * step * np.outer(xx, ms)) @ factor) / math.sqrt(period)

        vals = np.empty((len(x), len(gm)))
        for i, xx in enumerate(x):
            g = u(xx - nodes / 2.0) * np.conj(u(xx + nodes / 2.0))
            row = np.exp(1j * step * np.outer(gm, nodes)) @ (wts * g)
            vals[i] = row.real
        parts.append(vals / period)
    return np.einsum("ai,bj,gk->abgijk", *parts)


def wigner_from_angle_basis(state: RotorState, grid: GridSpec,
                            quad: AngleQuadrature | None = None) -> PhaseSpaceGrid:
    """Angle-representation Wigner transform.

    W(Omega, m) = (1/4 pi^3) int d(alpha') d(beta') d(gamma')
                  sqrt(sin beta'_+ sin beta'_-) e^{i m_a alpha'}
                  e^{i 2 m_b beta'} e^{i m_g gamma'}
                  <Omega'_-|rho|Omega'_+>,

    with Omega'_+- the half-shifted, wrapped orientations.  For fixed-(K, M)
    blocks the alpha'/gamma' integrals reduce to Kronecker deltas times
    sinc factors and only the beta' line integral is quadrature.  Mixed
    states are decomposed into eigenvector contributions.
    """
    quad = quad or AngleQuadrature()
    if quad.beta_order < 32:
        raise ConfigurationError(f"beta quadrature order {quad.beta_order} below minimum 32")
    basis = state.basis
    meta = {"kind": "wigner", "path": "angle", "beta_order": quad.beta_order}
    if isinstance(basis, JKMBasisSpec):
        if state.is_pure:
            acc = _wigner_jkm_pure(state, grid, quad)
        else:
            evals, evecs = np.linalg.eigh(state.density)
            acc = np.zeros(grid.shape, dtype=complex)
            for p, col in zip(evals, evecs.T):
                if p < 1e-14:
                    continue
                pure = RotorState.pure(basis, col / np.linalg.norm(col))
                acc += p * _wigner_jkm_pure(pure, grid, quad)
        residue = float(np.abs(acc.imag).max())
        if residue > IMAG_RESIDUE_TOL:
            warnings.warn(f"imaginary residue {residue} discarded from Wigner grid")
        meta["imag_residue"] = residue
        return PhaseSpaceGrid(grid, acc.real, meta=meta)
    if state.factors is None:
        raise DomainError(
            "angle-representation path supports symmetric-top states and "
            "momentum-basis product states; use wigner_from_m_basis for "
            "general momentum-basis payloads")
    vals = _wigner_m_product(state, grid, quad)
    meta["imag_residue"] = 0.0
    return PhaseSpaceGrid(grid, vals, meta=meta)


# ---------------------------------------------------------------------------
# inverse Weyl map
# ---------------------------------------------------------------------------

def required_angle_samples(basis: MBasisSpec, axis: str) -> int:
    """Minimum angle samples for alias-free mode extraction: the symbol of a
    window-w operator carries modes |d| <= 2w, so 4w + 1 samples suffice."""
    return 4 * basis.m_max(axis) + 1


@lru_cache(maxsize=1024)
def _solve_table(m_max: int, grid_lo: int, grid_hi: int, d: int,
                 masked: bool) -> np.ndarray:
    """pinv of the forward map C_d(k) = sum_m0 A[m0, m0+d] S(2m0+d-2k)."""
    gm = np.arange(grid_lo, grid_hi + 1)
    ms = np.arange(-m_max, m_max + 1)
    n = 2 * m_max + 1
    m0 = ms[max(0, -d): n - max(0, d)]
    S = sinc_half(2 * m0[:, None] + d - 2 * gm[None, :])
    if masked:
        ok = (np.abs(m0[:, None] - gm[None, :]) <= m_max) \
            & (np.abs(m0[:, None] + d - gm[None, :]) <= m_max)
        S = S * ok
    # forward: C = S.T @ diag  -> solve for diag
    return np.linalg.pinv(S.T, rcond=1e-12)


def inverse_weyl(grid: PhaseSpaceGrid, basis: MBasisSpec) -> OperatorMatrix:
    """Reconstruct the operator whose Weyl symbol matches the grid.

    The infinite-window inversion is the adjoint sum
    A = (1/4 pi^3) sum_m int dOmega W_A(Omega, m) Kernel(Omega, m); on a
    truncated window the kernel family is no longer orthonormal (the odd
    m1 + m0 sector has slowly decaying sinc tails), so the adjoint sum loses
    O(1/window) accuracy.  This routine therefore extracts angle Fourier
    modes exactly and solves the remaining per-diagonal sinc systems in the
    least-squares sense, which coincides with the adjoint sum as the window
    grows and round-trips interior-supported operators to near machine
    precision.
    """
    if not isinstance(basis, MBasisSpec):
        raise BasisMismatchError("inverse_weyl requires a momentum basis")
    spec = grid.spec
    for ax in AXES:
        need = required_angle_samples(basis, ax)
        if spec.n_angle(ax) < need:
            raise ConfigurationError(
                f"{ax} grid has {spec.n_angle(ax)} angle samples; "
                f"window {basis.m_max(ax)} needs at least {need}")
    masked = bool(grid.meta.get("masked", True))
    # angle DFT -> C[da, db, dg, ka, kb, kg]
    modes = np.asarray(grid.values, dtype=complex)
    n_d = []
    for pos, ax in enumerate(AXES):
        w = basis.m_max(ax)
        step = MOMENTUM_STEP[ax]
        x = spec.angle_points(ax)
        ds = np.arange(-2 * w, 2 * w + 1)
        n_d.append(ds)
        phase = np.exp(1j * step * np.outer(ds, x)) / len(x)
        modes = np.moveaxis(np.tensordot(phase, modes, axes=(1, pos)), 0, pos)
    shape = basis.shape
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    out6 = out.reshape(shape + shape)
    lo = [int(spec.m_window[i][0]) for i in range(3)]
    hi = [int(spec.m_window[i][1]) for i in range(3)]
    ws = [basis.m_max(ax) for ax in AXES]
    for ia, da in enumerate(n_d[0]):
        pa = _solve_table(ws[0], lo[0], hi[0], int(da), masked)
        for ib, db in enumerate(n_d[1]):
            pb = _solve_table(ws[1], lo[1], hi[1], int(db), masked)
            for ig, dg in enumerate(n_d[2]):
                pg = _solve_table(ws[2], lo[2], hi[2], int(dg), masked)
                c = modes[ia, ib, ig]              # (ka, kb, kg)
                t = np.tensordot(pa, c, axes=(1, 0))     # (m0a, kb, kg)
                t = np.tensordot(pb, t, axes=(1, 1))     # (m0b, m0a, kg)
                t = np.tensordot(pg, t, axes=(1, 2))     # (m0g, m0b, m0a)
                t = t.transpose(2, 1, 0)
                i0a = np.arange(max(0, -da), 2 * ws[0] + 1 - max(0, da))
                i0b = np.arange(max(0, -db), 2 * ws[1] + 1 - max(0, db))
                i0g = np.arange(max(0, -dg), 2 * ws[2] + 1 - max(0, dg))
                out6[i0a[:, None, None], i0b[None, :, None], i0g[None, None, :],
                     i0a[:, None, None] + da, i0b[None, :, None] + db,
                     i0g[None, None, :] + dg] = t
    return OperatorMatrix(basis, out)


# ---------------------------------------------------------------------------
# Weyl-ordered operator products
# ---------------------------------------------------------------------------

def weyl_ordered_product(n: int, m: int, axis: str,
                         basis: MBasisSpec) -> OperatorMatrix:
    """The Weyl-ordered combination of angle^n and momentum^m on one axis:

        2^{-m} sum_k binom(m, k) p^{m-k} x^n p^k.

    Its symbol approaches angle^n * p^m on interior points as the window
    grows; keep n, m <= 4 to stay inside truncation accuracy.
    """
    if n < 0 or m < 0:
        raise DomainError("exponents must be non-negative")
    x_op = position_angle_matrix(axis, basis).matrix
    p_op = momentum_operator_matrix(axis, basis).matrix
    xn = np.linalg.matrix_power(x_op, n)
    out = np.zeros_like(x_op)
    for k in range(m + 1):
        out = out + math.comb(m, k) * (
            np.linalg.matrix_power(p_op, m - k) @ xn @ np.linalg.matrix_power(p_op, k))
    return OperatorMatrix(basis, out / 2.0 ** m, hermitian=True)
