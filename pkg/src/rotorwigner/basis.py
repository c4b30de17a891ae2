"""Truncated rotor Hilbert spaces: bases, states, operators, overlaps.

Two bases are supported.  The momentum basis |m_alpha m_beta m_gamma> holds
the joint eigenstates of the three canonical momenta; its angle
representation is

    <Omega|m> = exp(i m_a alpha) exp(i 2 m_b beta) exp(i m_g gamma)
                / sqrt(4 pi^3 sin beta).

The symmetric-top basis |J K M> has

    <Omega|JKM> = sqrt((2J+1) / 8 pi^2) conj(D^J_{MK}(Omega)),

with D in the active z-y-z convention of wigner_d.  Both are orthonormal on
the measure d(alpha) sin(beta) d(beta) d(gamma).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .angles import AXES, MOMENTUM_STEP, PERIOD, EulerAngles, MomentumTriple
from .errors import BasisMismatchError, DomainError, PoleError
from .quadrature import beta_line_nodes
from .wigner_d import wigner_small_d, wigner_small_d_stack

PURE_NORM_TOL = 1e-12
MIXED_HERM_TOL = 1e-12
MIXED_TRACE_TOL = 1e-12
MIXED_EIG_FLOOR = -1e-10
HERMITIAN_FLAG_TOL = 1e-10

#: largest dense dimension we will materialize for full product vectors
MAX_DENSE_DIM = 4_000_000


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MBasisSpec:
    """Symmetric momentum windows |m_axis| <= m_max_axis, one per axis."""

    m_max_alpha: int
    m_max_beta: int
    m_max_gamma: int

    def __post_init__(self):
        for name in ("m_max_alpha", "m_max_beta", "m_max_gamma"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise DomainError(f"{name} must be a non-negative integer, got {v!r}")

    def m_max(self, axis: str) -> int:
        return {"alpha": self.m_max_alpha, "beta": self.m_max_beta,
                "gamma": self.m_max_gamma}[axis]

    def m_values(self, axis: str) -> np.ndarray:
        w = self.m_max(axis)
        return np.arange(-w, w + 1)

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(2 * self.m_max(ax) + 1 for ax in AXES)

    @property
    def dim(self) -> int:
        na, nb, ng = self.shape
        return na * nb * ng

    def index_of(self, m: MomentumTriple) -> int:
        na, nb, ng = self.shape
        ia = m.m_alpha + self.m_max_alpha
        ib = m.m_beta + self.m_max_beta
        ig = m.m_gamma + self.m_max_gamma
        if not (0 <= ia < na and 0 <= ib < nb and 0 <= ig < ng):
            raise DomainError(f"{m} outside window {self}")
        return (ia * nb + ib) * ng + ig

    def triple_of(self, index: int) -> MomentumTriple:
        na, nb, ng = self.shape
        if not 0 <= index < self.dim:
            raise DomainError(f"index {index} out of range for dim {self.dim}")
        ia, rem = divmod(index, nb * ng)
        ib, ig = divmod(rem, ng)
        return MomentumTriple(ia - self.m_max_alpha, ib - self.m_max_beta,
                              ig - self.m_max_gamma)


@lru_cache(maxsize=64)
def _jkm_labels(j_max: int, fixed_km) -> tuple[tuple[int, int, int], ...]:
    if fixed_km is not None:
        k, m = fixed_km
        j0 = max(abs(k), abs(m))
        return tuple((j, k, m) for j in range(j0, j_max + 1))
    out = []
    for j in range(j_max + 1):
        for k in range(-j, j + 1):
            for m in range(-j, j + 1):
                out.append((j, k, m))
    return tuple(out)


@dataclass(frozen=True)
class JKMBasisSpec:
    """|JKM> with J <= j_max; optionally restricted to one conserved (K, M)."""

    j_max: int
    fixed_km: tuple[int, int] | None = None

    def __post_init__(self):
        if not isinstance(self.j_max, (int, np.integer)) or self.j_max < 0:
            raise DomainError(f"j_max must be a non-negative integer, got {self.j_max!r}")
        if self.fixed_km is not None:
            k, m = self.fixed_km
            object.__setattr__(self, "fixed_km", (int(k), int(m)))
            if max(abs(k), abs(m)) > self.j_max:
                raise DomainError(f"fixed (K,M)={self.fixed_km} needs j_max >= {max(abs(k), abs(m))}")

    def labels(self) -> tuple[tuple[int, int, int], ...]:
        return _jkm_labels(self.j_max, self.fixed_km)

    @property
    def dim(self) -> int:
        return len(self.labels())

    def index_of(self, jkm: tuple[int, int, int]) -> int:
        try:
            return self.labels().index(tuple(jkm))
        except ValueError:
            raise DomainError(f"{jkm} not in basis {self}") from None

    def j_values(self) -> np.ndarray:
        return np.array([lbl[0] for lbl in self.labels()])


@dataclass(frozen=True)
class RotorState:
    """Pure or mixed state on a truncated basis.

    Exactly one payload is set: `vector` (pure), `density` (mixed), or
    `factors` (pure momentum-basis product state, one coefficient vector per
    axis; the fast paths of the grid evaluators key off this form).
    Payload arrays are frozen; states are safe to share.
    """

    basis: MBasisSpec | JKMBasisSpec
    vector: np.ndarray | None = None
    density: np.ndarray | None = None
    factors: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    @staticmethod
    def pure(basis, vector, diagnostics=None) -> "RotorState":
        v = np.asarray(vector, dtype=complex)
        if v.shape != (basis.dim,):
            raise DomainError(f"vector shape {v.shape} does not match dim {basis.dim}")
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > PURE_NORM_TOL:
            raise DomainError(f"pure state norm {nrm} deviates from 1 beyond {PURE_NORM_TOL}")
        return RotorState(basis, vector=_readonly(v), diagnostics=dict(diagnostics or {}))

    @staticmethod
    def mixed(basis, density, diagnostics=None) -> "RotorState":
        rho = np.asarray(density, dtype=complex)
        if rho.shape != (basis.dim, basis.dim):
            raise DomainError(f"density shape {rho.shape} does not match dim {basis.dim}")
        herm = np.abs(rho - rho.conj().T).max()
        if herm > MIXED_HERM_TOL:
            raise DomainError(f"density not Hermitian: max |rho - rho^+| = {herm}")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > MIXED_TRACE_TOL:
            raise DomainError(f"density trace {tr} deviates from 1")
        lo = np.linalg.eigvalsh(rho).min()
        if lo < MIXED_EIG_FLOOR:
            raise DomainError(f"density has negative eigenvalue {lo}")
        return RotorState(basis, density=_readonly(rho), diagnostics=dict(diagnostics or {}))

    @staticmethod
    def product(basis: MBasisSpec, f_alpha, f_beta, f_gamma,
                diagnostics=None) -> "RotorState":
        if not isinstance(basis, MBasisSpec):
            raise BasisMismatchError("product states require the momentum basis")
        fs = []
        for ax, f in zip(AXES, (f_alpha, f_beta, f_gamma)):
            f = np.asarray(f, dtype=complex)
            n = 2 * basis.m_max(ax) + 1
            if f.shape != (n,):
                raise DomainError(f"{ax} factor has shape {f.shape}, expected ({n},)")
            fs.append(f)
        nrm = np.prod([np.linalg.norm(f) for f in fs])
        if abs(nrm - 1.0) > PURE_NORM_TOL:
            raise DomainError(f"product state norm {nrm} deviates from 1")
        return RotorState(basis, factors=tuple(_readonly(f) for f in fs),
                          diagnostics=dict(diagnostics or {}))

    @property
    def is_pure(self) -> bool:
        return self.density is None

    def full_vector(self) -> np.ndarray:
        if self.vector is not None:
            return self.vector
        if self.factors is not None:
            if self.basis.dim > MAX_DENSE_DIM:
                raise DomainError(f"refusing to materialize dim {self.basis.dim}")
            fa, fb, fg = self.factors
            return np.kron(np.kron(fa, fb), fg)
        raise DomainError("mixed state has no coefficient vector")

    def density_matrix(self) -> np.ndarray:
        if self.density is not None:
            return self.density
        v = self.full_vector()
        return np.outer(v, v.conj())


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator on a tagged basis; hermiticity asserted, checked on demand."""

    basis: MBasisSpec | JKMBasisSpec
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise DomainError(f"matrix shape {m.shape} does not match dim {self.basis.dim}")
        object.__setattr__(self, "matrix", _readonly(m))
        if self.hermitian:
            self.check_hermitian()

    def check_hermitian(self, tol: float = HERMITIAN_FLAG_TOL) -> float:
        dev = np.abs(self.matrix - self.matrix.conj().T).max()
        if dev >= tol:
            raise DomainError(f"operator flagged hermitian deviates by {dev}")
        return dev


def _require_same_basis(a, b):
    if a != b:
        raise BasisMismatchError(f"basis mismatch: {a} vs {b}")


# ---------------------------------------------------------------------------
# position / momentum operators on the momentum basis
# ---------------------------------------------------------------------------

def axis_position_matrix(m_max: int, axis: str) -> np.ndarray:
    """Multiplication by the angle on one axis, in its momentum basis.

    Fourier analysis of the angle over its period L gives diagonal L/2 and
    off-diagonal i / (step * (m' - m)).
    """
    step = MOMENTUM_STEP[axis]
    period = PERIOD[axis]
    n = 2 * m_max + 1
    idx = np.arange(n)
    diff = idx[:, None] - idx[None, :]
    with np.errstate(divide="ignore"):
        off = 1j / (step * diff)
    out = np.where(diff == 0, period / 2.0, off)
    return out


def axis_momentum_matrix(m_max: int, axis: str) -> np.ndarray:
    """Physical momentum on one axis: diag(step * m), hbar = 1."""
    step = MOMENTUM_STEP[axis]
    ms = np.arange(-m_max, m_max + 1)
    return np.diag((step * ms).astype(complex))


def _embed_axis(basis: MBasisSpec, axis: str, block: np.ndarray) -> np.ndarray:
    mats = []
    for ax in AXES:
        n = 2 * basis.m_max(ax) + 1
        mats.append(block if ax == axis else np.eye(n))
    return np.kron(np.kron(mats[0], mats[1]), mats[2])


def position_angle_matrix(axis: str, basis: MBasisSpec) -> OperatorMatrix:
    if not isinstance(basis, MBasisSpec):
        raise BasisMismatchError("position_angle_matrix requires the momentum basis")
    if axis not in AXES:
        raise DomainError(f"unknown axis {axis!r}")
    block = axis_position_matrix(basis.m_max(axis), axis)
    return OperatorMatrix(basis, _embed_axis(basis, axis, block), hermitian=True)


def momentum_operator_matrix(axis: str, basis: MBasisSpec) -> OperatorMatrix:
    if not isinstance(basis, MBasisSpec):
        raise BasisMismatchError("momentum_operator_matrix requires the momentum basis")
    if axis not in AXES:
        raise DomainError(f"unknown axis {axis!r}")
    block = axis_momentum_matrix(basis.m_max(axis), axis)
    return OperatorMatrix(basis, _embed_axis(basis, axis, block), hermitian=True)


def expectation(state: RotorState, op: OperatorMatrix) -> complex:
    """tr(rho A) for mixed states, <psi|A|psi> for pure states."""
    _require_same_basis(state.basis, op.basis)
    if state.is_pure:
        v = state.full_vector()
        return complex(v.conj() @ (op.matrix @ v))
    return complex(np.trace(state.density @ op.matrix))


# ---------------------------------------------------------------------------
# angle representation
# ---------------------------------------------------------------------------

MIN_SIN_BETA = 1e-12


def angle_wavefunction(state: RotorState, omega: EulerAngles) -> complex:
    """<Omega|psi> for a pure state."""
    if not state.is_pure:
        raise DomainError("angle_wavefunction requires a pure state")
    alpha, beta, gamma = omega.as_tuple()
    if isinstance(state.basis, MBasisSpec):
        sb = math.sin(beta)
        if sb < MIN_SIN_BETA:
            raise PoleError(f"momentum-basis wavefunction diverges at beta={beta}")
        basis = state.basis
        if state.factors is not None:
            fa, fb, fg = state.factors
            va = fa @ np.exp(1j * basis.m_values("alpha") * alpha)
            vb = fb @ np.exp(2j * basis.m_values("beta") * beta)
            vg = fg @ np.exp(1j * basis.m_values("gamma") * gamma)
            total = va * vb * vg
        else:
            v = state.full_vector().reshape(basis.shape)
            pa = np.exp(1j * basis.m_values("alpha") * alpha)
            pb = np.exp(2j * basis.m_values("beta") * beta)
            pg = np.exp(1j * basis.m_values("gamma") * gamma)
            total = np.einsum("abg,a,b,g->", v, pa, pb, pg)
        return complex(total / math.sqrt(4.0 * math.pi ** 3 * sb))
    total = 0.0 + 0.0j
    for coeff, (j, k, m) in zip(state.full_vector(), state.basis.labels()):
        if coeff == 0.0:
            continue
        norm = math.sqrt((2 * j + 1) / (8.0 * math.pi ** 2))
        total += coeff * norm * (np.exp(1j * m * alpha)
                                 * wigner_small_d(j, m, k, beta)
                                 * np.exp(1j * k * gamma))
    return complex(total)


def fixed_km_radial(state: RotorState) -> tuple[int, int, np.ndarray, "np.ufunc"]:
    """(K, M, c_J, f) for a pure fixed-(K,M) state, where the angle
    wavefunction is f(beta) * exp(i M alpha) * exp(i K gamma)."""
    basis = state.basis
    if not (isinstance(basis, JKMBasisSpec) and basis.fixed_km is not None):
        raise DomainError("state is not on a fixed-(K,M) basis")
    if not state.is_pure:
        raise DomainError("fixed_km_radial requires a pure state")
    k, m = basis.fixed_km
    coeffs = state.full_vector()
    js = basis.j_values()
    norms = np.sqrt((2 * js + 1) / (8.0 * math.pi ** 2))

    def f(beta):
        stack = wigner_small_d_stack(basis.j_max, m, k, beta)
        return np.tensordot(coeffs * norms, stack, axes=(0, 0))

    return k, m, coeffs, f


# ---------------------------------------------------------------------------
# basis conversion
# ---------------------------------------------------------------------------

def _beta_overlap_integrals(j_values: np.ndarray, m_quantum: int, k_quantum: int,
                            m_beta_values: np.ndarray,
                            quadrature_order: int) -> np.ndarray:
    """int_0^pi sqrt(sin b) exp(-2 i m b) d^J_{MK}(b) db for every (J, m)."""
    osc = int(np.abs(m_beta_values).max(initial=0))
    nodes, weights = beta_line_nodes(quadrature_order, oscillation=osc)
    j_hi = int(j_values.max())
    stack = wigner_small_d_stack(j_hi, m_quantum, k_quantum, nodes)
    j0 = max(abs(m_quantum), abs(k_quantum))
    rows = stack[np.asarray(j_values) - j0]
    weighted = rows * (np.sqrt(np.sin(nodes)) * weights)
    phases = np.exp(-2j * np.outer(m_beta_values, nodes))
    return weighted @ phases.T  # (n_J, n_m)


def basis_overlap(jkm: tuple[int, int, int], m: MomentumTriple,
                  quadrature_order: int = 200) -> complex:
    """<m|JKM>.

    The alpha and gamma integrals are Kronecker deltas (m_alpha = M,
    m_gamma = K); the beta integral is evaluated by quadrature:

        <m|JKM> = delta delta * sqrt((2J+1)/(2 pi))
                  * int_0^pi sqrt(sin b) e^{-2 i m_beta b} d^J_{MK}(b) db
    """
    j, k, mq = jkm
    if abs(k) > j or abs(mq) > j or j < 0:
        raise DomainError(f"invalid (J,K,M) = {jkm}")
    if m.m_alpha != mq or m.m_gamma != k:
        return 0.0 + 0.0j
    val = _beta_overlap_integrals(np.array([j]), mq, k,
                                  np.array([m.m_beta]), quadrature_order)[0, 0]
    return complex(math.sqrt((2 * j + 1) / (2.0 * math.pi)) * val)


def jkm_to_m_product(state: RotorState, m_max_beta: int,
                     quadrature_order: int = 200,
                     m_max_alpha: int | None = None,
                     m_max_gamma: int | None = None) -> RotorState:
    """Convert a pure fixed-(K,M) state to a momentum-basis product state.

    The alpha/gamma factors are Kronecker deltas at M and K.  The beta factor
    collects the quadrature overlaps; whatever amplitude falls outside
    |m_beta| <= m_max_beta is reported as `leakage` in the diagnostics and
    the vector is renormalized.
    """
    k, mq, coeffs, _ = fixed_km_radial(state)
    basis = state.basis
    ms = np.arange(-m_max_beta, m_max_beta + 1)
    ints = _beta_overlap_integrals(basis.j_values(), mq, k, ms, quadrature_order)
    pref = np.sqrt((2 * basis.j_values() + 1) / (2.0 * math.pi))
    fb = (coeffs * pref) @ ints
    captured = float(np.linalg.norm(fb) ** 2)
    leakage = 1.0 - captured
    fb = fb / np.linalg.norm(fb)
    wa = abs(mq) if m_max_alpha is None else m_max_alpha
    wg = abs(k) if m_max_gamma is None else m_max_gamma
    mspec = MBasisSpec(wa, m_max_beta, wg)
    fa = np.zeros(2 * wa + 1, dtype=complex)
    fa[mq + wa] = 1.0
    fg = np.zeros(2 * wg + 1, dtype=complex)
    fg[k + wg] = 1.0
    return RotorState.product(mspec, fa, fb, fg,
                              diagnostics={"leakage": leakage,
                                           "quadrature_order": quadrature_order})
