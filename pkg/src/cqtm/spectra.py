"""Transfer matrix of the full distribution, Landauer resistance, band spectra.

Z_N follows the sequence recursion with the multiplication order reversed:

    Z_n = W_n X_{n-1},   X_n = X_{n-1} W_n X_{n-1},   X_0 = W_0,

which needs 3n - 2 matrix products instead of the 2^n - 1 of the direct
product over every block of R_N (``brute_force_zn``, kept as an oracle).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from cqtm.barrier import ModelParams, build_wm, coeffs_from_transfer, core_momentum, single_barrier_coeffs
from cqtm.errors import DomainError, ResourceError
from cqtm.seqgen import expand_sequence
from cqtm.xmatrix import FAST, ExtCMatrix, half_trace, half_trace_abs_error, log10_abs_entry, mat_mul

BRUTE_FORCE_MAX = 14
HEALTH_TOL = 1e-3
LOG10_LR_CAP = 300.0
BISECT_MAX_ITER = 60


def assemble_zn(n: int, k, params: ModelParams, backend=FAST) -> ExtCMatrix:
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    x = build_wm(0, k, params, backend)
    for level in range(1, n + 1):
        w = build_wm(level, k, params, backend)
        z = mat_mul(w, x)
        if level < n:
            x = mat_mul(mat_mul(x, w), x)
    return z


def brute_force_zn(n: int, k, params: ModelParams, backend=FAST) -> ExtCMatrix:
    """Ordered product of W_m over every block of R_n, last block leftmost."""
    if n > BRUTE_FORCE_MAX:
        raise ResourceError(f"brute force limited to n <= {BRUTE_FORCE_MAX}, got {n}")
    terms = expand_sequence(n).terms
    cache = {m: build_wm(int(m), k, params, backend) for m in np.unique(terms)}
    z = cache[terms[0]]
    for m in terms[1:]:
        z = mat_mul(cache[m], z)
    return z


def landauer(z: ExtCMatrix):
    """(log10 LR, transmission) with LR = |Z12|^2 and T = 1/(1 + LR)."""
    log_lr = 2.0 * np.asarray(log10_abs_entry(z, 0, 1))
    with np.errstate(over="ignore"):
        t = np.where(log_lr > LOG10_LR_CAP, 0.0, 1.0 / (1.0 + 10.0 ** np.minimum(log_lr, LOG10_LR_CAP)))
    if log_lr.ndim == 0:
        return float(log_lr), float(t)
    return log_lr, t


def health(z: ExtCMatrix, tol: float = HEALTH_TOL) -> np.ndarray:
    """True where the running error bound supports both LR and the band flag.

    LR needs a relative error below ``tol`` on Z12; the half trace needs an
    absolute error below ``tol`` times max(|Tr Z|/2, 1) so the comparison
    with 1 is trustworthy.
    """
    lr_ok = z.rel_error(0, 1) <= tol
    sign, log_ht, sym_ok = half_trace(z, check=False)
    # half-trace error is in units of 2**exp; compare in log10 to avoid overflow
    with np.errstate(divide="ignore"):
        log_err = np.log10(half_trace_abs_error(z)) + z.exp * math.log10(2.0)
    ht_ok = log_err <= math.log10(tol) + np.maximum(log_ht, 0.0)
    return lr_ok & ht_ok & sym_ok


@dataclass(frozen=True)
class SweepRecord:
    k: float
    branch: str
    log10_lr: float
    transmission: float
    half_trace_sign: int
    log10_half_trace: float
    band: bool
    health: bool
    error: str | None = None

    @property
    def lr(self) -> float | None:
        """Raw LR, only where it is comfortably representable."""
        return 10.0**self.log10_lr if abs(self.log10_lr) < LOG10_LR_CAP else None

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate(n: int, k, params: ModelParams, backend=FAST) -> dict:
    """Vectorized per-momentum quantities at the momenta ``k``."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    _, bound = core_momentum(k, params.gamma)
    z = assemble_zn(n, k, params, backend)
    log_lr, trans = landauer(z)
    sign, log_ht, _ = half_trace(z, check=False)
    return {
        "k": k,
        "branch": np.where(bound, "bound", "unbound"),
        "log10_lr": np.atleast_1d(log_lr),
        "transmission": np.atleast_1d(trans),
        "half_trace_sign": np.atleast_1d(sign),
        "log10_half_trace": np.atleast_1d(log_ht),
        "band": np.atleast_1d(log_ht <= 0.0),
        "health": np.atleast_1d(health(z)),
    }


def _records(cols: dict) -> list[SweepRecord]:
    return [
        SweepRecord(
            float(cols["k"][i]),
            str(cols["branch"][i]),
            float(cols["log10_lr"][i]),
            float(cols["transmission"][i]),
            int(cols["half_trace_sign"][i]),
            float(cols["log10_half_trace"][i]),
            bool(cols["band"][i]),
            bool(cols["health"][i]),
        )
        for i in range(len(cols["k"]))
    ]


def momentum_grid(k_lo: float, k_hi: float, points: int) -> np.ndarray:
    if not 0 < k_lo < k_hi < math.pi:
        raise DomainError("need 0 < k_lo < k_hi < pi")
    if points < 2:
        raise DomainError("need at least 2 grid points")
    return np.linspace(k_lo, k_hi, points)


def sweep(
    n: int,
    params: ModelParams,
    k_lo: float,
    k_hi: float,
    points: int,
    backend=FAST,
    chunk: int = 4096,
) -> list[SweepRecord]:
    """Uniform-grid sweep; rows come back in increasing k.

    Chunks are evaluated independently; a chunk that fails records the
    error in its rows instead of aborting the sweep.
    """
    grid = momentum_grid(k_lo, k_hi, points)
    out = []
    for start in range(0, len(grid), chunk):
        ks = grid[start : start + chunk]
        try:
            out.extend(_records(evaluate(n, ks, params, backend)))
        except (DomainError, ArithmeticError) as exc:
            for kk in ks:
                out.extend(_single_or_error(n, float(kk), params, backend, exc))
    return out


def _single_or_error(n, k, params, backend, exc):
    try:
        return _records(evaluate(n, k, params, backend))
    except (DomainError, ArithmeticError) as e:
        nan = math.nan
        return [SweepRecord(k, "", nan, nan, 1, nan, False, False, error=str(e) or type(e).__name__)]


@dataclass(frozen=True)
class BandInterval:
    k_lo: float
    k_hi: float
    kind: str  # "band" or "gap"
    edge_tolerance: float

    @property
    def width(self) -> float:
        return self.k_hi - self.k_lo

    @property
    def center(self) -> float:
        return 0.5 * (self.k_lo + self.k_hi)


def _is_band(n, k, params, backend):
    z = assemble_zn(n, k, params, backend)
    _, log_ht, _ = half_trace(z, check=False)
    return log_ht <= 0.0


def _bisect_edges(n, lo, hi, lo_band, params, backend, tol):
    """Shrink every bracket [lo, hi] around a band/gap change at once.

    Returns (edges, bracket widths).
    """
    lo, hi = lo.astype(float), hi.astype(float)
    for _ in range(BISECT_MAX_ITER):
        active = hi - lo > tol
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        same = np.asarray(_is_band(n, mid[active], params, backend)) == lo_band[active]
        idx = np.flatnonzero(active)
        lo[idx[same]] = mid[idx[same]]
        hi[idx[~same]] = mid[idx[~same]]
    return 0.5 * (lo + hi), hi - lo


def band_intervals(
    n: int,
    params: ModelParams,
    k_lo: float,
    k_hi: float,
    coarse_points: int,
    refine_tol: float,
    backend=FAST,
) -> list[BandInterval]:
    """Partition [k_lo, k_hi] into alternating bands and gaps.

    Edges are found as sign changes of log10(|Tr Z|/2) on the coarse grid
    and refined by bisection.  Bands or gaps narrower than the grid spacing
    can fall between two samples and go unseen.
    """
    if refine_tol <= 0:
        raise DomainError("refine_tol must be positive")
    grid = momentum_grid(k_lo, k_hi, coarse_points)
    cols = evaluate(n, grid, params, backend)
    band = cols["band"]
    flips = np.flatnonzero(band[1:] != band[:-1])
    edges, tols = [], []
    if len(flips):
        e, w = _bisect_edges(n, grid[flips], grid[flips + 1], band[flips], params, backend, refine_tol)
        edges, tols = e.tolist(), w.tolist()
    bounds = [k_lo] + edges + [k_hi]
    out = []
    for j in range(len(bounds) - 1):
        kind = "band" if band[0] ^ (j % 2 == 1) else "gap"
        tol = max(tols[j - 1] if j > 0 else 0.0, tols[j] if j < len(tols) else 0.0)
        out.append(BandInterval(float(bounds[j]), float(bounds[j + 1]), kind, float(tol)))
    return out


def band_fraction(intervals: list[BandInterval]) -> float:
    total = sum(iv.width for iv in intervals)
    return sum(iv.width for iv in intervals if iv.kind == "band") / total


def transfer_coeffs(n: int, k, params: ModelParams, backend=FAST):
    """F and B for the whole distribution (see ``coeffs_from_transfer``)."""
    return coeffs_from_transfer(assemble_zn(n, k, params, backend))


def incoherent_transmission(m: int, count: int, k, params: ModelParams):
    """(1 - |B|^2)^count for ``count`` independent copies of barrier m."""
    if count < 0:
        raise DomainError("count must be non-negative")
    b = single_barrier_coeffs(m, k, params).abs_B
    return (1.0 - b**2) ** count
