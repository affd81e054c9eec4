"""The increasing reparametrization phi1 of the cumulative second moment.

phi1(T) is defined as the unique V above the convexity floor solving

    V ln V + (c - ln 2pi) V + c0 = A(T),        A(T) = integral of Z^2,

where c is the Euler constant.  The left side is strictly increasing and
convex for V > 2 pi e^{-c}, so a bracketed Newton iteration is globally
convergent.  Everything else here builds on that inversion: fast monotone
tables, iterates phi1^k, the implicit-differentiation derivative, exact
batched evaluation for sharp identity checks, and the geometry of the
disconnected interval system [phi1^k(T), phi1^k(T+U)].
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .constants import EULER_C, LN_TWO_PI, MAX_ITER_DEPTH, T0_FLOOR, TWO_PI, V_FLOOR
from .errors import AdmissibilityError, DomainError, LadderLabError, TableError
from .quadrature import (cumulative_hl, gauss_panel_sums, integrate_adaptive,
                         zeta_oscillation_cap)
from .report import DIAGNOSTIC, FAIL, PASS, make_report
from .zeta import abs_zeta_sq

__all__ = [
    "IntervalSystem",
    "LadderExact",
    "LadderTable",
    "build_table",
    "geometry_report",
    "interval_system",
    "phi1",
    "phi1_derivative",
    "phi1_iter",
    "prime_pi",
]

#: denominator of the implicit derivative: d/dV [V lnV + (c - ln2pi)V]
_DENOM_SHIFT = 1.0 + EULER_C - LN_TWO_PI


def _invert(a_vals, c0=0.0, rel_tol=1e-13):
    """Solve V ln V + (c - ln 2pi) V + c0 = a for each a (vectorized).

    Newton from a bracketed start; the target function is increasing and
    convex above V_FLOOR, so the iteration is safeguarded by the bracket
    [2 pi, a].
    """
    a = np.atleast_1d(np.asarray(a_vals, dtype=np.float64))
    if np.any(a <= TWO_PI * EULER_C + c0 + 1.0):
        raise DomainError("no bracket: cumulative value too small to invert")
    lo = np.full_like(a, TWO_PI)
    hi = a - c0
    v = np.maximum(a / np.log(np.maximum(a, 8.0)), V_FLOOR * 1.5)
    for _ in range(80):
        f = v * np.log(v) + (EULER_C - LN_TWO_PI) * v + c0 - a
        lo = np.where(f < 0.0, v, lo)
        hi = np.where(f > 0.0, v, hi)
        step = f / (np.log(v) + _DENOM_SHIFT)
        v_new = v - step
        outside = (v_new <= lo) | (v_new >= hi)
        v_new = np.where(outside, 0.5 * (lo + hi), v_new)
        done = np.abs(f) <= rel_tol * a
        if np.all(done):
            break
        v = np.where(done, v, v_new)
    return v if np.ndim(a_vals) else float(v[0])


def phi1(T, c0=0.0, *, store):
    """phi1(T): invert the defining equation at A(T) from a checkpoint store.

    Parameters
    ----------
    T : float
        Ordinate, must be at least the domain floor (100).
    c0 : float
        Free integration constant of the defining equation (default 0).
    store : CumulativeIntegral
        Source of A(T).

    Returns
    -------
    float
        The unique solution V; satisfies the defining equation to
        ~1e-13 * A(T) relative residual, and V < T on the whole domain.
    """
    T = float(T)
    if T < T0_FLOOR:
        raise DomainError(f"phi1 requires T >= {T0_FLOOR}")
    return _invert(cumulative_hl(T, store), c0=c0)


def phi1_derivative(t, ladder, c0=None):
    """d phi1 / dt by implicit differentiation of the defining equation.

    Since A'(t) = Z(t)^2 exactly, the derivative is

        Z(t)^2 / (ln phi1(t) + 1 + c - ln 2pi),

    nonnegative, and vanishing exactly at the zeros of Z.  The denominator
    is logarithmic in phi1, so any table-grade phi1 value is adequate.

    Parameters
    ----------
    t : float or ndarray
    ladder : callable
        Anything mapping t -> phi1(t) (a LadderTable, a LadderExact, ...).
    """
    t_arr = np.asarray(t, dtype=np.float64)
    phi_t = np.asarray(ladder(t_arr), dtype=np.float64)
    out = abs_zeta_sq(t_arr) / (np.log(phi_t) + _DENOM_SHIFT)
    return out if t_arr.ndim else float(out)


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

_TABLE_SCHEMA = 1


@dataclass
class LadderTable:
    """Monotone piecewise-cubic interpolant of phi1 over [t_min, t_max].

    ``max_interp_err`` is the validated worst-case deviation from the direct
    inversion at knot midpoints.  phi_values are strictly increasing and lie
    strictly below the knots.
    """

    knots: np.ndarray
    phi_values: np.ndarray
    c0: float = 0.0
    max_interp_err: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.knots = np.asarray(self.knots, dtype=np.float64)
        self.phi_values = np.asarray(self.phi_values, dtype=np.float64)
        if np.any(np.diff(self.phi_values) <= 0.0):
            raise TableError("phi values must be strictly increasing")
        if np.any(self.phi_values >= self.knots):
            raise TableError("phi1(t) < t must hold on the whole table")
        self._interp = PchipInterpolator(self.knots, self.phi_values, extrapolate=False)

    @property
    def t_min(self):
        return float(self.knots[0])

    @property
    def t_max(self):
        return float(self.knots[-1])

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=np.float64)
        if np.any(t_arr < self.knots[0]) or np.any(t_arr > self.knots[-1]):
            raise DomainError(
                f"t outside table domain [{self.t_min}, {self.t_max}]")
        out = self._interp(t_arr)
        return out if t_arr.ndim else float(out)

    def derivative(self, t):
        """Derivative of the interpolant itself (not the implicit formula)."""
        t_arr = np.asarray(t, dtype=np.float64)
        out = self._interp.derivative()(t_arr)
        return out if t_arr.ndim else float(out)

    def iterate(self, t, k):
        """phi1^k(t) through the table; k = 0 returns t unchanged."""
        if not (0 <= k <= MAX_ITER_DEPTH):
            raise DomainError(f"iteration depth must lie in [0, {MAX_ITER_DEPTH}]")
        t_arr = np.asarray(t, dtype=np.float64)
        out = np.array(t_arr, dtype=np.float64, copy=True)
        for _ in range(k):
            if np.any(out < self.knots[0]):
                raise DomainError("iterate fell below the table domain")
            out = self._interp(out)
        return out if t_arr.ndim else float(out)

    # -- persistence ---------------------------------------------------------

    def to_dict(self):
        return {
            "version": _TABLE_SCHEMA,
            "t_min": self.t_min,
            "t_max": self.t_max,
            "knots": self.knots.tolist(),
            "phi_values": self.phi_values.tolist(),
            "c0": self.c0,
            "max_interp_err": self.max_interp_err,
            "meta": self.meta,
        }

    def save(self, path):
        """Write the table as a JSON document (atomic replace)."""
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(self.to_dict(), fh)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def from_dict(cls, doc):
        if doc.get("version") != _TABLE_SCHEMA:
            raise TableError(f"unsupported table version {doc.get('version')}")
        return cls(knots=np.asarray(doc["knots"]), phi_values=np.asarray(doc["phi_values"]),
                   c0=float(doc["c0"]), max_interp_err=float(doc["max_interp_err"]),
                   meta=doc.get("meta", {}))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save_npz(self, path):
        """Binary cache variant (much faster for multi-million-knot tables)."""
        np.savez_compressed(path, knots=self.knots, phi_values=self.phi_values,
                            c0=self.c0, max_interp_err=self.max_interp_err)

    @classmethod
    def load_npz(cls, path):
        with np.load(path) as doc:
            return cls(knots=doc["knots"], phi_values=doc["phi_values"],
                       c0=float(doc["c0"]), max_interp_err=float(doc["max_interp_err"]))


def _step_policy(t, t_max):
    """Knot spacing keeping the PCHIP midpoint error under ~0.35e-7 * t_max.

    Empirical model of the interpolation error: err ~ C(t) * h^3 with
    C(t) = 2.4 * (t/1e3)^(1/3), measured on the real phi1 (the constant
    includes the tail factor between windowed and full-range maxima).
    """
    c_t = 2.4 * np.maximum(np.asarray(t, dtype=np.float64) / 1e3, 0.03) ** (1.0 / 3.0)
    return (0.35e-7 * t_max / c_t) ** (1.0 / 3.0)


def build_table(t_min, t_max, step=None, c0=0.0, *, store, validate=True):
    """Tabulate phi1 on [t_min, t_max] and wrap it in a monotone interpolant.

    The cumulative integral is accumulated across the knot grid with a fixed
    Gauss rule on half-knot panels (all widths are far below the oscillation
    scale), anchored at A(t_min) from the checkpoint store.  Midpoint values
    obtained along the way validate the interpolant; the build is rejected
    when the measured error exceeds 1e-7 * t_max.

    Parameters
    ----------
    t_min, t_max : float
        Domain, with T0 <= t_min < t_max.
    step : float, optional
        Uniform knot spacing.  Default None picks the automatic policy that
        keeps the validation error comfortably below threshold.
    c0 : float
        Free constant of the defining equation.
    store : CumulativeIntegral
        Checkpoint store anchoring A(t_min).
    """
    t_min = float(t_min)
    t_max = float(t_max)
    if not (T0_FLOOR <= t_min < t_max):
        raise DomainError(f"need {T0_FLOOR} <= t_min < t_max")
    if step is not None and step <= 0.0:
        raise DomainError("step must be positive")

    # knot grid in blocks (the automatic step varies slowly with t)
    knot_parts = [np.array([t_min])]
    pos = t_min
    while pos < t_max:
        block_end = min(pos + 2000.0, t_max)
        h = float(step) if step is not None else float(_step_policy(block_end, t_max))
        n = max(1, int(math.ceil((block_end - pos) / h)))
        knot_parts.append(pos + (block_end - pos) / n * np.arange(1, n + 1))
        pos = block_end
    knots = np.concatenate(knot_parts)

    # cumulative panel sums over half-knot segments (midpoints included)
    half_edges = np.empty(2 * knots.size - 1)
    half_edges[::2] = knots
    half_edges[1::2] = 0.5 * (knots[:-1] + knots[1:])
    anchor = cumulative_hl(t_min, store)
    a_cum = np.empty_like(half_edges)
    a_cum[0] = anchor
    chunk = 400_000
    for lo in range(0, half_edges.size - 1, chunk):
        hi = min(lo + chunk, half_edges.size - 1)
        sums = gauss_panel_sums(lambda x: abs_zeta_sq(x, fast=True),
                                half_edges[lo:hi + 1], rule="g3")
        a_cum[lo + 1:hi + 1] = np.cumsum(sums)
        a_cum[lo + 1:hi + 1] += a_cum[lo]

    phi_all = _invert(a_cum, c0=c0)
    phi_knots = phi_all[::2]
    table = LadderTable(knots=knots, phi_values=phi_knots, c0=c0,
                        meta={"step": step if step is not None else "auto",
                              "anchor": anchor})
    if validate:
        mid_true = phi_all[1::2]
        mid_interp = table._interp(half_edges[1::2])
        err = float(np.max(np.abs(mid_interp - mid_true)))
        table.max_interp_err = err
        threshold = 1e-7 * t_max
        if err > threshold:
            raise TableError(
                f"interpolation validation failed: {err:.3e} > {threshold:.3e};"
                " use a finer step")
    return table


def phi1_iter(t, k, table):
    """k-th iterate phi1^k(t) through a table; phi1^0 is the identity."""
    return table.iterate(t, k)


# ---------------------------------------------------------------------------
# exact batched evaluation (for sharp identities)
# ---------------------------------------------------------------------------

class LadderExact:
    """Exact-at-the-nodes ladder evaluation, anchored to a checkpoint store.

    Evaluates phi1 at arbitrary point sets by integrating Z^2 across the
    sorted points with a fixed Gauss rule on sub-oscillation panels and
    inverting the defining equation at each cumulative value.  All points of
    one call share one anchor, so differences between them carry only local
    quadrature error (~1e-9), which is what the exact substitution identity
    and the chain rule need.  Interpolation tables cannot deliver that
    consistency at any practical knot budget; this class exists so the sharp
    checks do not depend on table resolution.
    """

    def __init__(self, store, c0=0.0):
        self.store = store
        self.c0 = float(c0)

    def phi(self, points):
        pts = np.atleast_1d(np.asarray(points, dtype=np.float64))
        if np.any(pts < T0_FLOOR):
            raise DomainError("ladder evaluation below the domain floor")
        order = np.argsort(pts, kind="stable")
        sorted_pts = pts[order]
        anchor_t = math.floor(float(sorted_pts[0]))
        anchor_a = cumulative_hl(float(anchor_t), self.store)
        # panel edges: anchor -> each point in turn, sub-oscillation widths
        targets = np.concatenate([[anchor_t], sorted_pts])
        edge_parts = []
        seg_last_index = []
        count = 0
        for a, b in zip(targets[:-1], targets[1:]):
            if b <= a:
                seg_last_index.append(count)
                continue
            w = 0.45 * float(zeta_oscillation_cap(np.array([b])))
            n = max(1, int(math.ceil((b - a) / w)))
            edge_parts.append(a + (b - a) / n * np.arange(1, n + 1))
            count += n
            seg_last_index.append(count)
        a_vals = np.empty(sorted_pts.size)
        if count:
            edges = np.concatenate([[anchor_t], np.concatenate(edge_parts)])
            sums = gauss_panel_sums(lambda x: abs_zeta_sq(x, fast=True), edges, rule="g5")
            cum = np.concatenate([[0.0], np.cumsum(sums)])
            a_vals = anchor_a + cum[seg_last_index]
        else:
            a_vals[:] = anchor_a
        phi_sorted = _invert(a_vals, c0=self.c0)
        out = np.empty_like(phi_sorted)
        out[order] = phi_sorted
        return out if np.ndim(points) else float(out[0])

    __call__ = phi

    def chain(self, points, depth):
        """All iterates phi1^k(points) for k = 0..depth, exactly.

        Returns an array of shape (depth+1, len(points)); row k holds
        phi1^k evaluated at the input points.
        """
        pts = np.atleast_1d(np.asarray(points, dtype=np.float64))
        rows = [np.array(pts, copy=True)]
        for _ in range(depth):
            rows.append(self.phi(rows[-1]))
        return np.stack(rows)

    def derivative_factors(self, chain_rows):
        """Implicit-derivative factors d phi^{k+1}/d phi^k along a chain.

        chain_rows has shape (depth+1, n); returns (depth, n) with row k
        equal to phi1'(phi^k(t)) = Z^2/(ln phi^{k+1} + shift).
        """
        factors = []
        for k in range(chain_rows.shape[0] - 1):
            z2 = abs_zeta_sq(chain_rows[k], fast=True)
            factors.append(z2 / (np.log(chain_rows[k + 1]) + _DENOM_SHIFT))
        return np.stack(factors)


# ---------------------------------------------------------------------------
# interval system geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalSystem:
    """Components [phi1^k(T), phi1^k(T+U)], k = 0..n+1, of the disconnected set.

    The components are ordered right to left as k grows; ``gaps[k]`` is the
    distance between component k and component k+1 and must be positive for
    every admissible U.
    """

    T: float
    U: float
    n: int
    endpoints: tuple          # ((a_0, b_0), ..., (a_{n+1}, b_{n+1}))
    lengths: tuple
    gaps: tuple

    def __post_init__(self):
        if any(g <= 0.0 for g in self.gaps):
            raise LadderLabError("interval system is not disjoint")


def admissible_u_max(T):
    """Upper end of the admissible window range: T / ln^2 T."""
    return T / math.log(T) ** 2


def interval_system(T, U, n, table):
    """Build the disconnected interval system for (T, U, n).

    Requires 0 < U <= T/ln^2 T and a table covering all iterates down to
    phi1^{n+1}(T).
    """
    T = float(T)
    U = float(U)
    if T < T0_FLOOR:
        raise DomainError(f"interval_system requires T >= {T0_FLOOR}")
    if not (0.0 < U <= admissible_u_max(T) * (1.0 + 1e-12)):
        raise AdmissibilityError(
            f"U={U} outside the admissible range (0, T/ln^2 T = {admissible_u_max(T):.6g}]")
    if not (0 <= n <= MAX_ITER_DEPTH - 1):
        raise DomainError("n out of range")
    pairs = []
    a, b = T, T + U
    for _ in range(n + 2):
        pairs.append((float(a), float(b)))
        a, b = table(a), table(b)
    # the k = 0 component is [T, T+U] by definition, so its length is U exactly
    lengths = (U,) + tuple(bb - aa for aa, bb in pairs[1:])
    gaps = tuple(pairs[k][0] - pairs[k + 1][1] for k in range(n + 1))
    return IntervalSystem(T=T, U=U, n=n, endpoints=tuple(pairs),
                          lengths=lengths, gaps=gaps)


# ---------------------------------------------------------------------------
# prime counting (for the abscissa-minus-ordinate geometry)
# ---------------------------------------------------------------------------

_SIEVE_LIMIT = 10_000_000
_sieve_cache = {"limit": 0, "flags": None}


def prime_pi(t, exact=True):
    """pi(t): exact via sieve up to 1e7, asymptotic t/ln t above.

    Returns (value, mode) where mode is "exact" or "asymptotic".
    """
    t = float(t)
    if t < 2.0:
        return (0, "exact") if exact else (t / max(math.log(max(t, 2.0)), 1e-9), "asymptotic")
    if exact and t <= _SIEVE_LIMIT:
        n = int(t)
        if _sieve_cache["limit"] < n:
            limit = min(max(2 * n, 1 << 14), _SIEVE_LIMIT)
            flags = np.ones(limit + 1, dtype=bool)
            flags[:2] = False
            for p in range(2, int(limit ** 0.5) + 1):
                if flags[p]:
                    flags[p * p::p] = False
            _sieve_cache["limit"] = limit
            _sieve_cache["flags"] = flags
        return int(np.count_nonzero(_sieve_cache["flags"][: n + 1])), "exact"
    return t / math.log(t), "asymptotic"


# ---------------------------------------------------------------------------
# geometry reports
# ---------------------------------------------------------------------------

def geometry_report(sys, pi_mode=True):
    """Reports for every geometric property of one interval system.

    Hard inequalities (the 1/(2n+5) length bound and the 0.18 T/lnT gap
    bound) get pass/fail verdicts; asymptotic relations are emitted as
    diagnostic ratios for the caller to sweep.
    """
    T, U, n = sys.T, sys.U, sys.n
    ln_t = math.log(T)
    scale = T / ln_t
    out = []
    # closeness of iterates to the identity
    for k in range(n + 2):
        a_k = sys.endpoints[k][0]
        out.append(make_report("2.3", T, U, n, lhs=a_k, rhs=T, verdict=DIAGNOSTIC,
                               k=k, epsilon_measured=1.0 - a_k / T))
    # hard length bound, k = 1..n+1
    bound = scale / (2 * n + 5)
    for k in range(1, n + 2):
        ok = sys.lengths[k] < bound
        out.append(make_report("2.4", T, U, n, lhs=sys.lengths[k], rhs=bound,
                               verdict=PASS if ok else FAIL, k=k))
    # hard gap bound, k = 0..n
    gap_bound = 0.18 * scale
    for k in range(n + 1):
        ok = sys.gaps[k] > gap_bound
        out.append(make_report("2.5", T, U, n, lhs=sys.gaps[k], rhs=gap_bound,
                               verdict=PASS if ok else FAIL, k=k))
    # asymptotic component measure and adjacency distances
    for k in range(1, n + 2):
        out.append(make_report("2.7", T, U, n, lhs=sys.lengths[k], rhs=U,
                               verdict=DIAGNOSTIC, k=k))
    adj = (1.0 - EULER_C) * scale
    for k in range(n + 1):
        out.append(make_report("2.8", T, U, n, lhs=sys.gaps[k], rhs=adj,
                               verdict=DIAGNOSTIC, k=k))
    for k in range(1, n + 2):
        out.append(make_report("2.9", T, U, n, lhs=sys.gaps[k - 1], rhs=adj,
                               verdict=DIAGNOSTIC, k=k))
    # abscissa-minus-ordinate against the prime-counting function
    pi_val, mode = prime_pi(T, exact=pi_mode)
    drop = T - sys.endpoints[1][0]
    out.append(make_report("6.1", T, U, n, lhs=drop,
                           rhs=(1.0 - EULER_C) * float(pi_val),
                           verdict=DIAGNOSTIC, pi_mode=mode))
    return out
