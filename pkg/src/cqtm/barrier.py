"""Single-barrier physics: dispersion, closed-form transfer matrix W_m, F/B.

Energies are in units of K (K = 1).  Outside the barriers E = 2(1 - cos k);
in a barrier core cos k = gamma cos l (unbound, E >= V) or
cos k = gamma cosh l (bound, E < V), with V = 2(1 - gamma).

W_m is the transfer matrix of the block ``0 1^m 0^(m+1)`` (2m + 2 path
steps).  It maps plane-wave coefficients (A, B) in the frame where the block
starts to (F, G) in the frame where the next block starts, so free
propagation over L steps is diag(e^{ikL}, e^{-ikL}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import constants

from cqtm.errors import DomainError, ResonanceError
from cqtm.xmatrix import FAST, ExtCMatrix, FastBackend

# below this core momentum the sin(lj)/sin(l) ratios use their small-l series
L_SERIES = 1e-6
# bound-branch ratios grow like e^{l(m-1)}; past this the factor goes into the exponent
_SCALE_THRESHOLD = 30.0

# lower momentum bounds of the reference sweeps, keyed by gamma
DEFAULT_K_LO = {0.999: 0.0223, 0.99: 0.069, 0.9: 0.18}


@dataclass(frozen=True)
class ModelParams:
    gamma: float
    n_level: int = 10

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise DomainError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.n_level < 0:
            raise DomainError(f"n_level must be non-negative, got {self.n_level}")

    @property
    def delta(self) -> float:
        return 1.0 - self.gamma

    @property
    def k_star(self) -> float:
        """Momentum where E equals the core height."""
        return math.acos(self.gamma)

    @property
    def flank_height(self) -> float:
        return self.delta

    @property
    def core_height(self) -> float:
        return 2.0 * self.delta


def default_k_lo(gamma: float) -> float | None:
    for g, k in DEFAULT_K_LO.items():
        if abs(g - gamma) < 1e-12:
            return k
    return None


@dataclass(frozen=True)
class BranchMomentum:
    k: float
    branch: str  # "bound" or "unbound"
    l: float

    @property
    def energy(self) -> float:
        return 2.0 * (1.0 - math.cos(self.k))


def _check_k(k, gamma):
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0) or np.any(k >= math.pi):
        raise DomainError("momentum must lie strictly inside (0, pi)")
    if np.any(np.cos(k) <= -gamma):
        raise DomainError("momentum at or above the top of the core band (cos k <= -gamma)")
    return k


def core_momentum(k, gamma: float):
    """Core momentum l and bound-branch mask for momenta k (vectorized).

    Uses 1 - cos(k)/gamma = (2 sin^2(k/2) - delta)/gamma, which keeps l
    accurate next to the crossover k* = arccos(gamma).
    """
    k = _check_k(k, gamma)
    d = (2.0 * np.sin(k / 2) ** 2 - (1.0 - gamma)) / gamma
    bound = d < 0
    h = np.sqrt(np.abs(d) / 2)
    l = np.where(bound, 2 * np.arcsinh(h), 2 * np.arcsin(np.minimum(h, 1.0)))
    return l, bound


def dispersion(k: float, params: ModelParams) -> BranchMomentum:
    l, bound = core_momentum(k, params.gamma)
    return BranchMomentum(float(k), "bound" if bound else "unbound", float(l))


def _ratios_fast(m, l, bound):
    """s(j) = sin(lj)/sin(l) (sinh for bound), times e^{-t}; returns (s, t)."""
    t = np.where(bound & (l * (m - 1) > _SCALE_THRESHOLD), l * (m - 1), 0.0)
    small = l < L_SERIES
    sigma = np.where(bound, 1.0, -1.0)
    safe_l = np.where(small, 1.0, l)

    def s(j):
        series = j * (1 + sigma * (j * j - 1) * l * l / 6)
        direct = np.where(bound, np.sinh(safe_l * j) / np.sinh(safe_l), np.sin(safe_l * j) / np.sin(safe_l))
        scaled = (np.exp(safe_l * (j - m + 1)) - np.exp(-safe_l * (j + m - 1))) / (2 * np.sinh(safe_l))
        return np.where(small, series, np.where(t > 0, scaled, direct))

    return s, t


def _wm_fast(m: int, k: np.ndarray, gamma: float) -> ExtCMatrix:
    l, bound = core_momentum(k, gamma)
    s, t = _ratios_fast(m, l, bound)
    e2 = np.floor(t / math.log(2.0))
    boost = np.exp(t - e2 * math.log(2.0))
    sm, sm1, sm2 = s(m) * boost, s(m - 1) * boost, s(m - 2) * boost
    eik = np.exp(1j * k)
    pre = 1.0 / (2j * gamma * np.sin(k))
    b11 = eik**2 * sm - 2 * gamma * eik * sm1 + gamma**2 * sm2
    b12 = sm - 2 * gamma * np.cos(k) * sm1 + gamma**2 * sm2
    w11 = np.exp(1j * k * (m + 2)) * pre * b11
    w12 = np.exp(1j * k * m) * pre * b12
    w = np.stack([np.stack([w11, w12], -1), np.stack([np.conj(w12), np.conj(w11)], -1)], -2)
    sumabs = np.abs(sm) + 2 * gamma * np.abs(sm1) + gamma**2 * np.abs(sm2)
    abs_err = 8 * (m + 2) * FAST.eps * np.abs(pre) * sumabs
    maxabs = np.maximum(np.abs(w11), np.abs(w12))
    rel = (abs_err / maxabs)[..., None, None] * np.ones((2, 2))
    return ExtCMatrix.from_array(w, FAST, exp=e2.astype(np.int64), rel_err=rel)


def _wm_precise_one(m: int, k: float, gamma: float):
    g = mpmath.mpf(gamma)
    k = mpmath.mpf(k)
    d = (2 * mpmath.sin(k / 2) ** 2 - (1 - g)) / g
    if d < 0:
        l = 2 * mpmath.asinh(mpmath.sqrt(-d / 2))
        f = mpmath.sinh
    else:
        l = 2 * mpmath.asin(mpmath.sqrt(d / 2))
        f = mpmath.sin

    def s(j):
        return mpmath.mpf(j) if l == 0 else f(l * j) / f(l)

    eik = mpmath.expj(k)
    pre = 1 / (2j * g * mpmath.sin(k))
    b11 = eik**2 * s(m) - 2 * g * eik * s(m - 1) + g**2 * s(m - 2)
    b12 = s(m) - 2 * g * mpmath.cos(k) * s(m - 1) + g**2 * s(m - 2)
    w11 = mpmath.expj(k * (m + 2)) * pre * b11
    w12 = mpmath.expj(k * m) * pre * b12
    sumabs = abs(s(m)) + 2 * g * abs(s(m - 1)) + g**2 * abs(s(m - 2))
    rel = float(abs(pre) * sumabs / max(abs(w11), abs(w12)))
    return [[w11, w12], [mpmath.conj(w12), mpmath.conj(w11)]], rel


def _wm_precise(m: int, k: np.ndarray, gamma: float, backend) -> ExtCMatrix:
    _check_k(k, gamma)
    flat = np.atleast_1d(k).ravel()
    mats = np.empty((len(flat), 2, 2), dtype=object)
    rels = np.empty(len(flat))
    with backend.context():
        for i, kk in enumerate(flat):
            w, rels[i] = _wm_precise_one(m, float(kk), gamma)
            mats[i] = w
    mats = mats.reshape(np.shape(k) + (2, 2))
    rel = (8 * (m + 2) * backend.eps * rels).reshape(np.shape(k))[..., None, None] * np.ones((2, 2))
    return ExtCMatrix.from_array(mats, backend, rel_err=rel)


def build_wm(m: int, k, params: ModelParams, backend=FAST) -> ExtCMatrix:
    """Closed-form transfer matrix of ``0 1^m 0^(m+1)`` at momenta k."""
    if m < 0:
        raise DomainError(f"barrier width must be >= 0, got {m}")
    if params.gamma == 1.0:
        # no potential: exact free propagation, so B and LR vanish identically
        _check_k(k, 1.0)
        return free_matrix(2 * m + 2, k, backend)
    if isinstance(backend, FastBackend):
        return _wm_fast(m, np.asarray(k, dtype=float), params.gamma)
    return _wm_precise(m, np.asarray(k, dtype=float), params.gamma, backend)


def free_matrix(length: int, k, backend=FAST) -> ExtCMatrix:
    """Free propagation over ``length`` path steps."""
    k = np.asarray(k, dtype=float)
    if isinstance(backend, FastBackend):
        p = np.exp(1j * k * length)
        zero = np.zeros_like(p)
        w = np.stack([np.stack([p, zero], -1), np.stack([zero, np.conj(p)], -1)], -2)
        return ExtCMatrix.from_array(w, backend)
    w = np.empty(k.shape + (2, 2), dtype=object)
    with backend.context():
        for idx in np.ndindex(k.shape):
            p = mpmath.expj(mpmath.mpf(float(k[idx])) * length)
            w[idx] = [[p, mpmath.mpc(0)], [mpmath.mpc(0), mpmath.conj(p)]]
    return ExtCMatrix.from_array(w, backend)


@dataclass(frozen=True)
class ScatterCoeffs:
    """Transmission F and reflection B amplitudes (scalars or arrays)."""

    F: complex
    B: complex

    @property
    def abs_F(self):
        return np.abs(self.F)

    @property
    def abs_B(self):
        return np.abs(self.B)

    @property
    def phase_F(self):
        return _principal(np.angle(self.F))

    @property
    def phase_B(self):
        return _principal(np.angle(self.B))


def _principal(phi):
    # np.angle yields -pi for a negative real with -0.0 imaginary part
    return np.where(phi <= -math.pi, math.pi, phi)


def coeffs_from_transfer(z: ExtCMatrix) -> ScatterCoeffs:
    """F = 1/Z22 and B = -Z12/Z22 for an incoming wave from the left."""
    m = z.mant.astype(complex) if z.mant.dtype == object else z.mant
    z22, z12 = m[..., 1, 1], m[..., 0, 1]
    if np.any(z22 == 0):
        raise ResonanceError("Z22 vanishes; F is singular")
    with np.errstate(under="ignore", over="ignore"):
        F = np.ldexp(1.0, -z.exp) / z22
    B = -z12 / z22
    if np.ndim(F) == 0:
        return ScatterCoeffs(complex(F), complex(B))
    return ScatterCoeffs(F, B)


def single_barrier_coeffs(m: int, k, params: ModelParams) -> ScatterCoeffs:
    return coeffs_from_transfer(build_wm(m, k, params))


def gamma_from_physical(V: float, mass: float, spacing: float) -> float:
    """delta = V m Delta^2 / hbar^2 for V in eV, m in electron masses, Delta in Angstrom.

    Returns delta; the weight is gamma = 1 - delta.
    """
    if V < 0 or mass <= 0 or spacing <= 0:
        raise DomainError("need V >= 0, mass > 0 and spacing > 0")
    delta = V * constants.eV * mass * constants.m_e * (spacing * constants.angstrom) ** 2
    delta /= constants.hbar**2
    if delta >= 1:
        raise DomainError(f"delta = {delta:.4g} >= 1 gives a non-positive gamma")
    return delta
