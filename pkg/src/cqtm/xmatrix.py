"""Extended-range 2x2 complex matrices.

Each matrix stores a mantissa block with max-norm in [1, 2) and one shared
binary exponent, so products of thousands of transfer matrices never
overflow.  Arrays may carry leading batch dimensions (one matrix per
momentum); every operation broadcasts over them.

Two mantissa backends share the same code paths:

* ``FAST``: complex128 numpy arrays.
* ``PreciseBackend(digits)``: numpy object arrays of ``mpmath.mpc``.

Alongside the mantissa, every matrix carries ``err``: a first-order running
bound on the absolute error of each mantissa entry.  Comparing it with the
entry magnitude is the cancellation monitor used to flag unreliable points.
"""

from __future__ import annotations

import contextvars
import math
from contextlib import contextmanager, nullcontext
from dataclasses import dataclass

import mpmath
import numpy as np

from cqtm.errors import IntegrityError

RADIX = 2
LOG10_RADIX = math.log10(RADIX)

_mul_counter: contextvars.ContextVar[list | None] = contextvars.ContextVar(
    "mul_counter", default=None
)


@contextmanager
def count_multiplies():
    """Count ``mat_mul`` calls made inside the block (one per batched call)."""
    box = [0]
    token = _mul_counter.set(box)
    try:
        yield box
    finally:
        _mul_counter.reset(token)


class FastBackend:
    name = "fast"
    eps = 2.0**-53

    def context(self):
        return nullcontext()

    def asarray(self, a):
        return np.asarray(a, dtype=complex)

    def abs(self, a):
        return np.abs(a)

    def real(self, a):
        return np.real(a)

    def imag(self, a):
        return np.imag(a)

    def conj(self, a):
        return np.conj(a)

    def log10_abs(self, a):
        with np.errstate(divide="ignore"):
            return np.log10(np.abs(a))

    def scale(self, a, e):
        """Multiply by 2**-e (exact)."""
        return a * np.ldexp(1.0, -e)

    def max_exponent(self, mant):
        return _log2_exponent(np.abs(mant).max(axis=(-1, -2)))

    def __repr__(self):
        return "FastBackend()"


class PreciseBackend:
    name = "precise"

    def __init__(self, digits: int = 50):
        if digits < 16:
            raise ValueError("precise backend needs at least 16 digits")
        self.digits = int(digits)
        self.eps = 10.0 ** (-self.digits)
        self._abs = np.frompyfunc(lambda z: float(abs(z)), 1, 1)
        self._real = np.frompyfunc(lambda z: mpmath.mpf(z.real), 1, 1)
        self._imag = np.frompyfunc(lambda z: mpmath.mpf(z.imag), 1, 1)
        self._conj = np.frompyfunc(mpmath.conj, 1, 1)
        self._mpc = np.frompyfunc(lambda z: mpmath.mpc(z), 1, 1)

    def context(self):
        return mpmath.workdps(self.digits)

    def asarray(self, a):
        a = np.asarray(a)
        if a.dtype == object:
            return a
        with self.context():
            return self._mpc(a.astype(complex)).astype(object)

    def abs(self, a):
        return np.asarray(self._abs(a), dtype=float)

    def real(self, a):
        return np.asarray(self._real(a), dtype=object)

    def imag(self, a):
        return np.asarray(self._imag(a), dtype=object)

    def conj(self, a):
        return np.asarray(self._conj(a), dtype=object)

    def log10_abs(self, a):
        with self.context():
            flat = [
                float(mpmath.log10(abs(z))) if z != 0 else -math.inf
                for z in np.asarray(a, dtype=object).ravel()
            ]
        return np.array(flat, dtype=float).reshape(np.shape(a))

    def max_exponent(self, mant):
        def expo(z):
            a = abs(z)
            return mpmath.frexp(a)[1] - 1 if a else None

        exps = np.frompyfunc(expo, 1, 1)(mant).reshape(mant.shape[:-2] + (4,))
        out = [max((e for e in row if e is not None), default=0) for row in exps.reshape(-1, 4)]
        return np.array(out, dtype=np.int64).reshape(mant.shape[:-2])

    def scale(self, a, e):
        with self.context():
            f = np.frompyfunc(lambda ee: mpmath.ldexp(mpmath.mpf(1), -int(ee)), 1, 1)(e)
            return a * f

    def __repr__(self):
        return f"PreciseBackend(digits={self.digits})"


FAST = FastBackend()


def get_backend(name: str = "fast", digits: int = 50):
    if name == "fast":
        return FAST
    if name == "precise":
        return PreciseBackend(digits)
    raise ValueError(f"unknown backend {name!r}")


def _log2_exponent(maxabs: np.ndarray) -> np.ndarray:
    """Exponent e with maxabs * 2**-e in [1, 2); zero maps to 0."""
    _, e = np.frexp(maxabs)
    return np.where(maxabs > 0, e - 1, 0).astype(np.int64)


@dataclass(frozen=True)
class ExtComplex:
    """A single complex number ``mantissa * 2**exponent``."""

    mantissa: complex
    exponent: int

    @classmethod
    def from_complex(cls, z: complex, exponent: int = 0) -> ExtComplex:
        if z == 0:
            return cls(0j, 0)
        e = int(_log2_exponent(np.array(abs(z))))
        return cls(complex(z) * 2.0**-e, exponent + e)

    def log10_abs(self) -> float:
        if self.mantissa == 0:
            return -math.inf
        return math.log10(abs(self.mantissa)) + self.exponent * LOG10_RADIX

    def __mul__(self, other: ExtComplex) -> ExtComplex:
        return ExtComplex.from_complex(
            self.mantissa * other.mantissa, self.exponent + other.exponent
        )

    def __complex__(self) -> complex:
        return self.mantissa * 2.0**self.exponent


@dataclass(frozen=True, eq=False)
class ExtCMatrix:
    """Batch of 2x2 complex matrices ``mant * 2**exp``.

    ``mant`` has shape (..., 2, 2), ``exp`` and the batch shape (...).
    Indices are 0-based: entry (0, 1) is the usual Z_12.
    """

    mant: np.ndarray
    exp: np.ndarray
    err: np.ndarray
    backend: object = FAST

    @classmethod
    def from_array(cls, a, backend=FAST, exp=0, rel_err=None) -> ExtCMatrix:
        """Build from raw entries ``a * 2**exp``.

        ``rel_err`` bounds the absolute entry errors as a fraction of the
        matrix max-norm; it defaults to one rounding unit per entry.
        """
        mant = backend.asarray(a)
        if mant.shape[-2:] != (2, 2):
            raise ValueError(f"expected (..., 2, 2), got {mant.shape}")
        exp = np.broadcast_to(np.asarray(exp, dtype=np.int64), mant.shape[:-2]).copy()
        out = _normalized(mant, exp, np.zeros(mant.shape, dtype=float), backend)
        absm = backend.abs(out.mant)
        if rel_err is None:
            err = backend.eps * absm
        else:
            err = np.asarray(rel_err, dtype=float) * absm.max(axis=(-1, -2))[..., None, None]
        return ExtCMatrix(out.mant, out.exp, np.broadcast_to(err, mant.shape).copy(), backend)

    @classmethod
    def identity(cls, shape=(), backend=FAST) -> ExtCMatrix:
        eye = np.broadcast_to(np.eye(2, dtype=complex), tuple(shape) + (2, 2))
        return cls.from_array(eye, backend, rel_err=0.0)

    @property
    def shape(self) -> tuple:
        return self.mant.shape[:-2]

    def __getitem__(self, idx) -> ExtCMatrix:
        if not isinstance(idx, tuple):
            idx = (idx,)
        return ExtCMatrix(self.mant[idx], self.exp[idx], self.err[idx], self.backend)

    def __matmul__(self, other: ExtCMatrix) -> ExtCMatrix:
        return mat_mul(self, other)

    def entry(self, i: int, j: int) -> ExtComplex:
        if self.shape:
            raise ValueError("entry() needs an unbatched matrix")
        z = complex(self.mant[i, j])
        return ExtComplex.from_complex(z, int(self.exp))

    def to_complex(self) -> np.ndarray:
        """Plain complex128 values; overflows to inf outside double range."""
        m = np.asarray(self.mant.astype(complex) if self.mant.dtype == object else self.mant)
        with np.errstate(over="ignore", invalid="ignore"):
            return m * np.ldexp(1.0, self.exp)[..., None, None]

    def rel_error(self, i: int, j: int) -> np.ndarray:
        """Estimated relative error of entry (i, j) from the running bound."""
        mag = self.backend.abs(self.mant[..., i, j])
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(mag > 0, self.err[..., i, j] / mag, np.inf)

    def log10_abs_det(self) -> np.ndarray:
        bk = self.backend
        with bk.context():
            m = self.mant
            det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
            return bk.log10_abs(det) + 2 * self.exp * LOG10_RADIX


def _normalized(mant, exp, err, backend) -> ExtCMatrix:
    e = backend.max_exponent(mant)
    with backend.context():
        mant = backend.scale(mant, e[..., None, None])
    err = err * np.ldexp(1.0, -e)[..., None, None]
    return ExtCMatrix(mant, exp + e, err, backend)


def _mul2(a, b):
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=a.dtype)
    out[..., 0, 0] = a[..., 0, 0] * b[..., 0, 0] + a[..., 0, 1] * b[..., 1, 0]
    out[..., 0, 1] = a[..., 0, 0] * b[..., 0, 1] + a[..., 0, 1] * b[..., 1, 1]
    out[..., 1, 0] = a[..., 1, 0] * b[..., 0, 0] + a[..., 1, 1] * b[..., 1, 0]
    out[..., 1, 1] = a[..., 1, 0] * b[..., 0, 1] + a[..., 1, 1] * b[..., 1, 1]
    return out


def mat_mul(a: ExtCMatrix, b: ExtCMatrix) -> ExtCMatrix:
    if a.backend is not b.backend:
        raise ValueError("cannot mix matrices from different backends")
    box = _mul_counter.get()
    if box is not None:
        box[0] += 1
    bk = a.backend
    with bk.context():
        mant = _mul2(a.mant, b.mant)
    abs_a, abs_b = bk.abs(a.mant), bk.abs(b.mant)
    # first-order propagation plus rounding of the two-term complex dot products
    err = abs_a @ b.err + a.err @ abs_b + a.err @ b.err + 4 * bk.eps * (abs_a @ abs_b)
    return _normalized(mant, a.exp + b.exp, err, bk)


def log10_abs_entry(m: ExtCMatrix, row: int, col: int):
    """log10 of |entry|; -inf for a zero entry.  Indices are 0-based."""
    out = m.backend.log10_abs(m.mant[..., row, col]) + m.exp * LOG10_RADIX
    out = np.where(np.isneginf(out), -np.inf, out)
    return out if out.shape else float(out)


def half_trace(m: ExtCMatrix, check: bool = True):
    """Sign and log10 of |Tr m|/2.

    Transfer matrices have Z11 = conj(Z22), so the trace is real; with
    ``check`` an imaginary part beyond the error budget raises
    IntegrityError.  Returns arrays (sign, log10_abs, ok) when ``check`` is
    False, where ``ok`` marks entries that passed the symmetry test.
    """
    bk = m.backend
    with bk.context():
        tr = m.mant[..., 0, 0] + m.mant[..., 1, 1]
        re, im = bk.real(tr), bk.imag(tr)
    budget = np.maximum(1e-8, 8 * (m.err[..., 0, 0] + m.err[..., 1, 1]))
    ok = bk.abs(im) <= budget
    if check and not np.all(ok):
        raise IntegrityError("trace has an imaginary part: Z11 != conj(Z22)")
    log_abs = bk.log10_abs(re) - math.log10(2.0) + m.exp * LOG10_RADIX
    sign = np.where(np.asarray(re, dtype=float) < 0, -1, 1)
    if check:
        if np.ndim(log_abs) == 0:
            return int(sign), float(log_abs)
        return sign, log_abs
    return sign, log_abs, ok


def half_trace_abs_error(m: ExtCMatrix) -> np.ndarray:
    """Bound on the absolute error of |Tr m|/2 in units of 2**exp."""
    return 0.5 * (m.err[..., 0, 0] + m.err[..., 1, 1])
