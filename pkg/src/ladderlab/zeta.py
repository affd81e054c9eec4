"""Critical-line signal evaluation.

Two independent evaluators of the real signal Z(t) = e^{i theta(t)} zeta(1/2+it):

* a fast Riemann-Siegel path (main sum plus four correction terms) used for
  t >= RS_MIN, and
* a slow Euler-Maclaurin path (`zeta_em`) used below RS_MIN and as the
  independent cross-check everywhere.

Phase arithmetic note.  The arguments theta(t) - t*log n grow like t*log t,
so forming them naively in float64 costs ~eps*t*log t of phase accuracy.
Point evaluations therefore run the phases in extended precision
(``numpy.longdouble``), which keeps the absolute error of Z near 1e-11 at
t = 1e5.  Bulk quadrature callers can pass ``fast=True`` to use float64
phases instead (~8x faster); the resulting sign-random noise of a few 1e-9
at t = 1e6 is harmless once integrated.  On platforms whose longdouble is
just float64 the accurate path silently degrades to the fast bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from scipy.special import bernoulli as _bernoulli
from scipy.special import factorial as _factorial
from scipy.special import loggamma as _loggamma

from .constants import TWO_PI
from .errors import DomainError

__all__ = [
    "RS_MIN",
    "ZetaSample",
    "abs_zeta_sq",
    "sample",
    "theta",
    "z_function",
    "zeta_em",
]

_LD = np.longdouble
#: True when longdouble really is extended precision (x86: 64-bit mantissa).
EXTENDED_PRECISION = np.finfo(_LD).nmant >= 60

#: Below this ordinate Z(t) is evaluated through the Euler-Maclaurin path;
#: above it the four-term Riemann-Siegel expansion is already accurate to
#: ~1e-10 absolute (the truncation bound ~0.017 * t**-2.75 at RS_MIN).
RS_MIN = 4000.0

#: Ordinate below which theta(t) switches from the Stirling series to a
#: direct complex log-gamma evaluation.
_THETA_SERIES_MIN = 30.0

_LN_PI_LD = np.log(_LD(np.pi))
_TWO_PI_LD = 2 * _LD(np.pi)


# ---------------------------------------------------------------------------
# theta
# ---------------------------------------------------------------------------

def _theta_ld(t):
    """Stirling series for theta in longdouble; valid for t >= ~30.

    Truncation after the 1/t^7 term leaves < 1e-14 at t = 30 and falls off
    like t^-9.
    """
    tl = np.asarray(t, dtype=_LD)
    x = tl / _TWO_PI_LD
    th = 0.5 * tl * np.log(x) - 0.5 * tl - _LD(np.pi) / 8
    t2 = tl * tl
    th += ((1 / _LD(48)) + (7 / _LD(5760) + (31 / _LD(80640) + 127 / (_LD(430080) * t2)) / t2) / t2) / tl
    return th


def _theta_small(t):
    """Direct log-gamma evaluation, used below the series cutoff."""
    t = np.asarray(t, dtype=np.float64)
    return np.imag(_loggamma(0.25 + 0.5j * t)) - 0.5 * t * math.log(math.pi)


def theta(t):
    """Phase function theta(t) = -(t/2) ln pi + Im ln Gamma(1/4 + it/2).

    Parameters
    ----------
    t : float or array_like
        Ordinate(s) on the critical line, must be >= 0.

    Returns
    -------
    float or ndarray
        theta(t).  Method (truncation) error is below 1e-12 throughout; the
        returned float64 additionally carries the unavoidable representation
        rounding of ~eps*|theta(t)| (relevant only above t ~ 1e5).
    """
    arr = np.asarray(t, dtype=np.float64)
    if np.any(arr < 0.0):
        raise DomainError("theta requires t >= 0")
    out = np.empty_like(arr)
    small = arr < _THETA_SERIES_MIN
    if small.any():
        out[small] = _theta_small(arr[small])
    if (~small).any():
        out[~small] = _theta_ld(arr[~small]).astype(np.float64)
    return out if arr.ndim else float(out)


# ---------------------------------------------------------------------------
# Riemann-Siegel correction terms
# ---------------------------------------------------------------------------

def _psi_on_circle(p, kmax=9, nodes=256, radius=0.5):
    """Derivatives of the remainder shape Psi at real points p.

    Psi(z) = cos(2 pi (z^2 - z - 1/16)) / cos(2 pi z) extends to an entire
    function (all real singularities of the quotient are removable), so the
    derivatives follow from a Cauchy integral over a circle of fixed radius.
    The sample angles are offset by half a step so no node lands on the
    removable real singularities.

    Returns an array of shape (len(p), kmax+1) with Psi^(k)(p).
    """
    p = np.atleast_1d(np.asarray(p, dtype=np.float64))
    ang = (2.0 * np.pi * np.arange(nodes) + np.pi) / nodes
    z = p[:, None] + radius * np.exp(1j * ang)[None, :]
    vals = np.cos(TWO_PI * (z * z - z - 0.0625)) / np.cos(TWO_PI * z)
    ks = np.arange(kmax + 1)
    basis = np.exp(-1j * np.outer(ang, ks))
    return ((vals @ basis) * _factorial(ks) / (nodes * radius ** ks)).real


def _corrections_direct(p):
    """C0..C3 of the Riemann-Siegel expansion at fractional parts p.

    The combinations of Psi derivatives below are the classical ones; their
    correctness is pinned by the cross-method agreement tests (a wrong
    constant would show up as ~1e-5 disagreement against Euler-Maclaurin).
    """
    d = _psi_on_circle(p)
    pi2 = np.pi ** 2
    c0 = d[:, 0]
    c1 = -d[:, 3] / (96.0 * pi2)
    c2 = d[:, 6] / (18432.0 * pi2 ** 2) + d[:, 2] / (64.0 * pi2)
    c3 = (-d[:, 9] / (5308416.0 * pi2 ** 3)
          - d[:, 5] / (3840.0 * pi2 ** 2)
          - d[:, 1] / (64.0 * pi2))
    return np.stack([c0, c1, c2, c3])


_CHEB_DEGREE = 56
_cheb_coefs = None


def _correction_chebs():
    """Chebyshev tables of C0..C3 over p in [0, 1], built once per process.

    The C_j are entire, so the fit converges geometrically; degree 56 leaves
    residuals at the 1e-15 level (checked in the test suite).
    """
    global _cheb_coefs
    if _cheb_coefs is None:
        k = np.arange(_CHEB_DEGREE + 1)
        x = np.cos(np.pi * (k + 0.5) / (_CHEB_DEGREE + 1))
        table = _corrections_direct(0.5 * (x + 1.0))
        _cheb_coefs = [_cheb.chebfit(x, row, _CHEB_DEGREE) for row in table]
    return _cheb_coefs


# ---------------------------------------------------------------------------
# shared phase helpers
# ---------------------------------------------------------------------------

_log_cache = np.empty(0, dtype=_LD)
_log_cache64 = np.empty(0, dtype=np.float64)


def _log_table(n):
    """log(1..n) in longdouble, grown on demand and cached."""
    global _log_cache, _log_cache64
    if _log_cache.size < n:
        size = max(n, 2 * _log_cache.size, 1024)
        _log_cache = np.log(np.arange(1, size + 1, dtype=_LD))
        _log_cache64 = _log_cache.astype(np.float64)
    return _log_cache[:n]


def _phases(theta_col, t_col, logs, fast):
    """(theta - t*log n) for a column of points against a log row.

    Accurate mode reduces mod 2pi in longdouble before dropping to float64;
    fast mode skips the reduction and lets the trig routines do it.
    """
    if fast or not EXTENDED_PRECISION:
        n = logs.size
        ph = np.multiply.outer(t_col, -_log_cache64[:n])
        ph += theta_col.astype(np.float64)[:, None]
        return ph
    ph = theta_col[:, None] - t_col.astype(_LD)[:, None] * logs[None, :]
    return np.mod(ph, _TWO_PI_LD).astype(np.float64)


# ---------------------------------------------------------------------------
# Euler-Maclaurin evaluator
# ---------------------------------------------------------------------------

_BERNOULLI = _bernoulli(64)
_EM_TAIL_TERMS = 28


def _em_auto_terms(tmax):
    # keeps the tail-term ratio ((t+2k)/(2 pi N))^2 safely below ~0.09
    return max(32, int(0.55 * tmax) + 16)


def _zeta_em_batch(t, terms=None, fast=False):
    """zeta(1/2 + it) for an array of ordinates by Euler-Maclaurin."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    n_main = int(terms) if terms is not None else _em_auto_terms(float(t.max()))
    if n_main < 10:
        raise DomainError("zeta_em needs terms >= 10")
    # float64 phases are exact to ~5e-12 while t*log(n) stays small; skip the
    # extended-precision cost in that regime even in accurate mode
    if not fast and float(t.max()) * math.log(n_main) < 1e4:
        fast = True
    s = 0.5 + 1j * t
    logs = _log_table(n_main)
    out = np.zeros(t.shape, dtype=np.complex128)
    # main sum in n-chunks to bound memory
    chunk = max(1, int(4e6) // n_main)
    inv_sqrt = 1.0 / np.sqrt(np.arange(1, n_main, dtype=np.float64))
    for lo in range(0, t.size, chunk):
        sl = slice(lo, min(lo + chunk, t.size))
        # phases carry -t*log n, so n^{-it} = cos(ph) + i sin(ph)
        ph = _phases(np.zeros(t[sl].size, dtype=_LD), t[sl], logs[: n_main - 1], fast)
        cos_ph = np.cos(ph)
        np.sin(ph, out=ph)
        out[sl] = (cos_ph @ inv_sqrt) + 1j * (ph @ inv_sqrt)
    # boundary and Bernoulli tail
    if fast or not EXTENDED_PRECISION:
        ph_n = np.mod(t * math.log(n_main), TWO_PI)
    else:
        ph_n = np.mod(t.astype(_LD) * logs[n_main - 1], _TWO_PI_LD).astype(np.float64)
    n_pow_ms = (n_main ** -0.5) * (np.cos(ph_n) - 1j * np.sin(ph_n))  # N^{-s}
    out += n_pow_ms * n_main / (s - 1.0)
    out += 0.5 * n_pow_ms
    term = n_pow_ms * (_BERNOULLI[2] / 2.0) * s / n_main
    out += term
    nn = float(n_main) * float(n_main)
    for k in range(2, _EM_TAIL_TERMS + 1):
        ratio = ((_BERNOULLI[2 * k] / _BERNOULLI[2 * k - 2])
                 * (s + (2 * k - 3)) * (s + (2 * k - 2))
                 / ((2 * k) * (2 * k - 1) * nn))
        term = term * ratio
        out += term
    return out


def zeta_em(t, terms=None):
    """zeta(1/2 + it) by Euler-Maclaurin summation (the slow oracle).

    Parameters
    ----------
    t : float or array_like
        Ordinate(s), >= 0.
    terms : int, optional
        Number of main-sum terms.  Defaults to an automatic choice
        (~0.55*t + 16) under which the Bernoulli tail converges to machine
        level.  Must be >= 10 when given.

    Returns
    -------
    complex or ndarray
        zeta(1/2 + it).  The error decreases as ``terms`` grows; with the
        automatic choice the result is accurate to ~1e-11 relative at
        t = 1e5.
    """
    arr = np.asarray(t, dtype=np.float64)
    if np.any(arr < 0.0):
        raise DomainError("zeta_em requires t >= 0")
    out = _zeta_em_batch(arr, terms=terms, fast=False)
    return out.reshape(arr.shape) if arr.ndim else complex(out[0])


# ---------------------------------------------------------------------------
# Riemann-Siegel evaluator
# ---------------------------------------------------------------------------

def _z_rs_batch(t, fast=False):
    """Riemann-Siegel Z for an array of ordinates (all >= RS_MIN)."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    a = np.sqrt(t / TWO_PI)
    n_sum = np.floor(a).astype(np.int64)
    frac = a - n_sum
    th = _theta_ld(t) if EXTENDED_PRECISION and not fast else theta(t).astype(_LD)
    out = np.empty_like(t)
    logs = _log_table(int(n_sum.max()))
    cheb0, cheb1, cheb2, cheb3 = _correction_chebs()

    order = np.argsort(n_sum, kind="stable")
    sorted_n = n_sum[order]
    starts = np.flatnonzero(np.r_[True, sorted_n[1:] != sorted_n[:-1], True])
    inv_sqrt_full = 1.0 / np.sqrt(np.arange(1, int(n_sum.max()) + 1, dtype=np.float64))
    for i in range(len(starts) - 1):
        idx = order[starts[i]:starts[i + 1]]
        nn = int(sorted_n[starts[i]])
        chunk = max(1, int(4e6) // max(nn, 1))
        for lo in range(0, idx.size, chunk):
            part = idx[lo:lo + chunk]
            ph = _phases(th[part], t[part], logs[:nn], fast)
            np.cos(ph, out=ph)
            out[part] = 2.0 * (ph @ inv_sqrt_full[:nn])
    x = 1.0 / a
    u = 2.0 * frac - 1.0
    corr = np.sqrt(x) * (_cheb.chebval(u, cheb0)
                         + x * (_cheb.chebval(u, cheb1)
                                + x * (_cheb.chebval(u, cheb2)
                                       + x * _cheb.chebval(u, cheb3))))
    out += np.where(n_sum % 2 == 0, -1.0, 1.0) * corr
    return out


def _z_many(t, fast=False):
    """Z(t) for an arbitrary float64 array, routing per ordinate."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(t < 0.0):
        raise DomainError("z_function requires t >= 0")
    out = np.empty_like(t)
    hi = t >= RS_MIN
    if hi.any():
        out[hi] = _z_rs_batch(t[hi], fast=fast)
    low = ~hi
    if low.any():
        tl = t[low]
        zl = np.empty(tl.shape, dtype=np.complex128)
        # bucket by octave so each group pays for its own term count
        edges = [0.0]
        while edges[-1] < float(tl.max()):
            edges.append(max(256.0, edges[-1] * 2.0))
        for a, b in zip(edges[:-1], edges[1:]):
            grp = (tl >= a) & (tl < b) if b < tl.max() else (tl >= a)
            if grp.any():
                zl[grp] = _zeta_em_batch(tl[grp], fast=fast)
        th = theta(tl)
        out[low] = np.cos(th) * zl.real - np.sin(th) * zl.imag
    return out


def z_function(t, fast=False):
    """Riemann-Siegel Z(t), the real signal with |Z(t)| = |zeta(1/2+it)|.

    Parameters
    ----------
    t : float or array_like
        Ordinate(s), >= 0.
    fast : bool
        When True, phases are computed in float64 (quadrature mode); the
        absolute error grows to a few 1e-9 at t = 1e6 but evaluation is much
        faster.  Default False: extended-precision phases, ~1e-11 absolute
        at t = 1e5.

    Notes
    -----
    For t < RS_MIN the asymptotic expansion is unreliable and the value is
    produced by the Euler-Maclaurin path instead (slower, and below t = 10
    it is the only meaningful choice).
    """
    arr = np.asarray(t, dtype=np.float64)
    out = _z_many(arr, fast=fast)
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def abs_zeta_sq(t, fast=False):
    """|zeta(1/2+it)|^2 = Z(t)^2, never negative."""
    z = z_function(t, fast=fast)
    return z * z


# ---------------------------------------------------------------------------
# sample record
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZetaSample:
    """One evaluation point of the critical-line signal.

    ``abs_zeta_sq`` is computed from |zeta|^2 on the slow path and from Z^2
    on the fast path; the two agree to ~1e-10 relative because the rotated
    value e^{i theta} zeta(1/2+it) is real to working accuracy.
    """

    t: float
    theta: float
    z: float
    abs_zeta_sq: float

    def __post_init__(self):
        if self.abs_zeta_sq < 0.0:
            raise ValueError("abs_zeta_sq must be nonnegative")


def sample(t):
    """Evaluate one ordinate into a :class:`ZetaSample`."""
    t = float(t)
    if t < 0.0:
        raise DomainError("sample requires t >= 0")
    th = float(theta(t))
    if t >= RS_MIN:
        z = float(z_function(t))
        return ZetaSample(t=t, theta=th, z=z, abs_zeta_sq=z * z)
    zeta_val = zeta_em(t)
    z = math.cos(th) * zeta_val.real - math.sin(th) * zeta_val.imag
    return ZetaSample(t=t, theta=th, z=z, abs_zeta_sq=abs(zeta_val) ** 2)
