"""Both sides of every window formula, as RatioReports.

Two kinds of checks live here.

* Sharp identities (the substitution identity and the chain rule) hold
  exactly for the computed ladder; their residuals measure only quadrature
  and consistency error and are asserted at tight tolerances.  They are
  evaluated through :class:`~ladderlab.ladder.LadderExact`, never through
  interpolation tables, because the identity needs the integrand and the
  window endpoints to come from one consistent cumulative integral.

* Asymptotic relations ("~" statements) converge logarithmically, so single
  numbers prove nothing; they are emitted as diagnostic ratios and judged
  only as trends across a sweep of increasing T (see
  :func:`ladderlab.report.trend_verdict`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .constants import EULER_C, TWO_PI
from .errors import AdmissibilityError, DomainError, RootBracketError
from .ladder import LadderExact, admissible_u_max, interval_system
from .partitions import ProperPartition, weights
from .quadrature import cumulative_hl, gauss_panel_sums, integrate_adaptive, zeta_oscillation_cap
from .report import DIAGNOSTIC, make_report, trend_verdict
from .selberg import s_function, s1_values, zeros_up_to
from .zeta import abs_zeta_sq

__all__ = [
    "F_ONE",
    "F_IDENTITY",
    "WeightFunction",
    "chain_rule_check",
    "cross_partition_ratio",
    "degenerate_factorization_ratio",
    "factorization_ratio",
    "full_factorization_ratio",
    "hl_global_ratio",
    "hl_window_ratio",
    "identity_6_16",
    "product_integral",
    "s1_pow",
    "s_pow",
    "selberg_gen_ratio",
    "sixth_order_ratio",
    "sweep",
    "tau_ratio_report",
    "tau_witness",
    "theorem_ratio",
]


# ---------------------------------------------------------------------------
# weight functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightFunction:
    """Nonnegative weight F(t) applied at the deepest iterate.

    Kinds: "one" (constant 1), "s_pow" (the even power (pi S(t))^{2l}, i.e.
    the 2l-th power of the zeta argument), "s1_pow" (S1(t)^{2l}), and
    "custom".  Powered kinds require l >= 1 and use the session zero list.
    """

    kind: str
    l: int = 0
    fn: Optional[Callable] = None
    antideriv: Optional[Callable] = None
    label: str = ""

    def __post_init__(self):
        if self.kind in ("s_pow", "s1_pow") and self.l < 1:
            raise ValueError("powered weight kinds need l >= 1")
        if self.kind == "custom" and self.fn is None:
            raise ValueError("custom weight needs fn")

    def values(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "one":
            return np.ones_like(t)
        if self.kind == "s_pow":
            zl = zeros_up_to(float(t.max()))
            return (math.pi * s_function(t, zeros=zl)) ** (2 * self.l)
        if self.kind == "s1_pow":
            zl = zeros_up_to(float(t.max()))
            return s1_values(t, zeros=zl) ** (2 * self.l)
        return np.asarray(self.fn(t), dtype=np.float64)

    def window_integral(self, a, b, rel_tol=1e-8):
        """Integral of F over [a, b]; closed form when available, otherwise
        panels split at the zero ordinates (S is smooth between zeros)."""
        a = float(a)
        b = float(b)
        if b <= a:
            return 0.0
        if self.kind == "one":
            return b - a
        if self.kind == "custom" and self.antideriv is not None:
            return self.antideriv(b) - self.antideriv(a)
        if self.kind == "custom":
            return integrate_adaptive(self.values, a, b, rel_tol=rel_tol).value
        zl = zeros_up_to(b)
        inner = zl.ordinates[(zl.ordinates > a) & (zl.ordinates < b)]
        anchors = np.concatenate([[a], inner, [b]])
        cap = 0.25 * float(zeta_oscillation_cap(np.array([b])))
        parts = []
        for lo, hi in zip(anchors[:-1], anchors[1:]):
            n = max(1, int(math.ceil((hi - lo) / cap)))
            parts.append(lo + (hi - lo) / n * np.arange(0 if not parts else 1, n + 1))
        edges = np.concatenate(parts)
        return float(np.sum(gauss_panel_sums(self.values, edges, rule="g5")))

    @property
    def is_nonnegative(self):
        return self.kind in ("one", "s_pow", "s1_pow")


F_ONE = WeightFunction(kind="one", label="one")
F_IDENTITY = WeightFunction(kind="custom", fn=lambda t: t,
                            antideriv=lambda t: 0.5 * t * t, label="t")


def s_pow(l):
    """(pi S)^{2l}: the 2l-th power of the zeta argument."""
    return WeightFunction(kind="s_pow", l=l, label=f"s2l:{l}")


def s1_pow(l):
    """S1^{2l}."""
    return WeightFunction(kind="s1_pow", l=l, label=f"s1_2l:{l}")


# ---------------------------------------------------------------------------
# the iterated product integral
# ---------------------------------------------------------------------------

def product_integral(T, U, n, F, table, rel_tol=1e-6):
    """Window integral of F[phi1^{n+1}(t)] * prod_k Z(phi1^k(t))^2, k = 0..n.

    Adaptive quadrature with the oscillation cap shrunk by the number of
    product factors.  Iterates are taken through the (validated) table:
    pointwise table error only perturbs this integral at the level the
    trend checks ignore.  Requires admissible U in [0, T/ln^2 T].
    """
    T = float(T)
    U = float(U)
    if U == 0.0:
        return 0.0
    if not (0.0 < U <= admissible_u_max(T) * (1.0 + 1e-12)):
        raise AdmissibilityError(f"U={U} outside (0, T/ln^2 T]")

    def integrand(t):
        acc = abs_zeta_sq(t, fast=True)
        u = np.asarray(t, dtype=np.float64)
        for _ in range(n):
            u = table(u)
            acc = acc * abs_zeta_sq(u, fast=True)
        return acc * F.values(table(u))

    def cap(t):
        return zeta_oscillation_cap(t) / (n + 1)

    return integrate_adaptive(integrand, T, T + U, rel_tol=rel_tol,
                              panel_cap=cap).value


# ---------------------------------------------------------------------------
# canonical chord pair (shared by every reduction-consistency participant)
# ---------------------------------------------------------------------------

def _chord_pair(T, U, table):
    """(window integral of Z^2 over [T, T+U], phi1(T+U) - phi1(T)).

    Memoized on the table so every operation that reduces to this pair sees
    the identical floats.
    """
    cache = getattr(table, "_chord_cache", None)
    if cache is None:
        cache = {}
        setattr(table, "_chord_cache", cache)
    key = (float(T), float(U))
    if key not in cache:
        window = integrate_adaptive(lambda x: abs_zeta_sq(x, fast=True),
                                    T, T + U, rel_tol=1e-9,
                                    panel_cap=zeta_oscillation_cap).value
        phid = float(table(T + U) - table(T))
        cache[key] = (window, phid)
    return cache[key]


# ---------------------------------------------------------------------------
# the window formula and its reductions
# ---------------------------------------------------------------------------

def theorem_ratio(T, U, n, F, table, rel_tol=1e-6):
    """Ratio of the iterated product integral to {integral of F} ln^{n+1} T.

    The right side integrates F over the deepest-iterate image of the
    window; a vanishing F-integral is an error (the formula's hypothesis).
    """
    T = float(T)
    U = float(U)
    ln_t = math.log(T)
    if n == 0 and F.kind == "one":
        window, phid = _chord_pair(T, U, table)
        return make_report("2.1", T, U, n, lhs=window, rhs=phid * ln_t,
                           verdict=DIAGNOSTIC, F=F.label,
                           window_integral=window, phi_window=phid, ln_t=ln_t)
    lhs = product_integral(T, U, n, F, table, rel_tol=rel_tol)
    alpha = table.iterate(T, n + 1)
    beta = table.iterate(T + U, n + 1)
    f_int = F.window_integral(alpha, beta)
    if f_int == 0.0:
        raise ZeroDivisionError("integral of F over the iterated window vanishes")
    window, phid = _chord_pair(T, U, table)
    return make_report("2.1", T, U, n, lhs=lhs, rhs=f_int * ln_t ** (n + 1),
                       verdict=DIAGNOSTIC, F=F.label,
                       window_integral=window, phi_window=phid, ln_t=ln_t)


def corollary_ratio(T, U, n, F, table, rel_tol=1e-6):
    """The integro-iterative equation ratio: identical computation to
    :func:`theorem_ratio`, relabeled (the corollary asserts the same two
    quantities seen as an equation for the unknown iterate)."""
    rep = theorem_ratio(T, U, n, F, table, rel_tol=rel_tol)
    return make_report("2.10", T, U, n, lhs=rep.lhs, rhs=rep.rhs,
                       verdict=rep.verdict, **rep.meta)


def hl_window_ratio(T, U, table):
    """Two window ratios: against U ln T and against the chord form.

    The U ln T comparison requires macroscopic U in [T^{1/3+eps}, T/ln^2 T].
    """
    T = float(T)
    U = float(U)
    lo = T ** (1.0 / 3.0)
    hi = admissible_u_max(T)
    if not (lo <= U <= hi * (1.0 + 1e-12)):
        raise AdmissibilityError(
            f"U={U:.6g} outside the macroscopic range [{lo:.6g}, {hi:.6g}]")
    window, phid = _chord_pair(T, U, table)
    ln_t = math.log(T)
    r610 = make_report("6.10", T, U, 0, lhs=window, rhs=U * ln_t,
                       verdict=DIAGNOSTIC, F="one",
                       window_integral=window, phi_window=phid, ln_t=ln_t)
    r17 = make_report("1.7", T, U, 0, lhs=window, rhs=phid * ln_t,
                      verdict=DIAGNOSTIC, F="one",
                      window_integral=window, phi_window=phid, ln_t=ln_t)
    return [r17, r610]


def hl_global_ratio(T, store):
    """Global cumulative ratio A(T) / (T ln T)."""
    T = float(T)
    a_val = cumulative_hl(T, store)
    return make_report("1.3", T, 0.0, 0, lhs=a_val, rhs=T * math.log(T),
                       verdict=DIAGNOSTIC, F="one")


# ---------------------------------------------------------------------------
# exact identities
# ---------------------------------------------------------------------------

def _composite_panels(a, b, width_cap):
    n = max(2, int(math.ceil((b - a) / width_cap)))
    return a + (b - a) / n * np.arange(n + 1)


_GK_OFFSETS = None


def _gk15_fixed(fvals, lo, hi):
    """K15 sums per panel for values sampled on _gk_nodes output."""
    from .quadrature import _WGK
    half = 0.5 * (hi - lo)
    center = fvals[:, 7]
    pairs = fvals[:, :7] + fvals[:, 8:][:, ::-1]
    return half * (_WGK[7] * center + pairs @ _WGK[:7])


def _gk_nodes(edges):
    from .quadrature import _NODE_OFFSETS
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return mid[:, None] + half[:, None] * _NODE_OFFSETS[None, :], lo, hi


def identity_6_16(T, U, n, F, store, c0=0.0, refine=2):
    """Relative residual of the exact substitution identity.

    LHS: integral over [T, T+U] of F at the deepest iterate times the
    product of implicit-derivative chain factors d phi^{k+1}/d phi^k.
    RHS: integral of F over [phi^{n+1}(T), phi^{n+1}(T+U)].  The identity
    is an exact change of variables, so the residual measures quadrature
    plus ladder-consistency error and must come out below 1e-5.

    Evaluated on a fixed composite Kronrod grid (doubled once as an
    internal error check) with all iterates from one LadderExact pass.
    """
    T = float(T)
    U = float(U)
    if U == 0.0:
        return 0.0
    exact = LadderExact(store, c0=c0)
    cap = float(zeta_oscillation_cap(np.array([T + U]))) / (n + 2)
    results = []
    for level in range(refine):
        edges = _composite_panels(T, T + U, cap / 2 ** level)
        nodes, lo, hi = _gk_nodes(edges)
        flat = nodes.ravel()
        chain = exact.chain(flat, n + 1)
        factors = exact.derivative_factors(chain)
        integrand = np.prod(factors, axis=0) * F.values(chain[n + 1])
        results.append(float(np.sum(_gk15_fixed(integrand.reshape(nodes.shape), lo, hi))))
    lhs = results[-1]
    if refine > 1 and abs(results[-1] - results[-2]) > 1e-6 * max(abs(lhs), 1e-30):
        warnings.warn(f"substitution-identity quadrature not settled: "
                      f"{results}", stacklevel=2)
    ends = exact.chain(np.array([T, T + U]), n + 1)[n + 1]
    rhs = F.window_integral(float(ends[0]), float(ends[1]))
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


def chain_rule_check(t, n, store, c0=0.0, h=5e-4):
    """Relative deviation between the chain-factor product and the centered
    finite difference of phi1^{n+1}; must stay below 1e-3.

    All six evaluations share one cumulative pass, so the finite difference
    is immune to absolute checkpoint error.
    """
    t = float(t)
    exact = LadderExact(store, c0=c0)
    chain = exact.chain(np.array([t - h, t, t + h]), n + 1)
    factors = exact.derivative_factors(chain[:, 1:2])
    prod = float(np.prod(factors[:, 0]))
    fd = float(chain[n + 1, 2] - chain[n + 1, 0]) / (2.0 * h)
    scale = max(abs(fd), 1e-12)
    return abs(prod - fd) / scale


# ---------------------------------------------------------------------------
# factorizations over proper partitions
# ---------------------------------------------------------------------------

def _component_means(parts, T, U, table, rel_tol, cache):
    """g_a * (1/U) * I_a for each part a, where I_a is the depth-(a-1)
    product integral; memoized per call site."""
    out = []
    for a in parts:
        if a not in cache:
            i_a = product_integral(T, U, a - 1, F_ONE, table, rel_tol=rel_tol)
            lo = table.iterate(T, a)
            hi = table.iterate(T + U, a)
            g_a = U / (hi - lo)
            cache[a] = g_a * i_a / U
        out.append(cache[a])
    return out


def factorization_ratio(p, T, U, n, F, table, rel_tol=1e-6):
    """Weighted mean-value factorization over one proper partition.

    LHS: g_{n+1} (1/U) times the depth-n product integral of F.
    RHS: the F mean over the deepest window times the product of weighted
    component means chosen by the partition.
    """
    if not isinstance(p, ProperPartition):
        raise DomainError("p must be a ProperPartition")
    if p.n_plus_1 != n + 1:
        raise DomainError(f"partition of {p.n_plus_1} does not match n+1={n + 1}")
    T = float(T)
    U = float(U)
    w = weights(p, T, U, table)
    lhs_int = product_integral(T, U, n, F, table, rel_tol=rel_tol)
    lhs = w.g_top * lhs_int / U
    alpha = table.iterate(T, n + 1)
    beta = table.iterate(T + U, n + 1)
    f_mean = F.window_integral(alpha, beta) / (beta - alpha)
    cache = {}
    rhs = f_mean * math.prod(_component_means(p.parts, T, U, table, rel_tol, cache))
    formula = "3.7" if F.kind == "one" else "3.6"
    window, phid = _chord_pair(T, U, table)
    beyond = not (p.n_plus_1 == 6 and p.parts in ((2, 2, 2), (3, 3)))
    return make_report(formula, T, U, n, lhs=lhs, rhs=rhs, verdict=DIAGNOSTIC,
                       F=F.label, partition=p.parts,
                       beyond_worked_example=beyond,
                       window_integral=window, phi_window=phid)


def cross_partition_ratio(p1, p2, T, U, table, rel_tol=1e-6):
    """Ratio of the two factorized sides generated by two partitions of the
    same number (their asymptotic equality is the pairwise corollary)."""
    if p1.n_plus_1 != p2.n_plus_1:
        raise DomainError("partitions must split the same number")
    T = float(T)
    U = float(U)
    cache = {}
    lhs = math.prod(_component_means(p1.parts, T, U, table, rel_tol, cache))
    rhs = math.prod(_component_means(p2.parts, T, U, table, rel_tol, cache))
    beyond = not (p1.n_plus_1 == 6 and
                  sorted([p1.parts, p2.parts]) == [(2, 2, 2), (3, 3)])
    return make_report("3.8", T, U, p1.n_plus_1 - 1, lhs=lhs, rhs=rhs,
                       verdict=DIAGNOSTIC, partition_lhs=p1.parts,
                       partition_rhs=p2.parts, beyond_worked_example=beyond)


def full_factorization_ratio(T, U, n, F, table, store, rel_tol=1e-6):
    """Mean-value factorization into per-component window means.

    RHS components reuse checkpointed cumulative differences, which the
    cross-module consistency test compares against direct quadrature.
    """
    T = float(T)
    U = float(U)
    window, phid = _chord_pair(T, U, table)
    if n == 0 and F.kind == "one":
        lhs = window / U
        rhs = window / phid
        return make_report("4.4", T, U, n, lhs=lhs, rhs=rhs, verdict=DIAGNOSTIC,
                           F=F.label, window_integral=window, phi_window=phid)
    lhs = product_integral(T, U, n, F, table, rel_tol=rel_tol) / U
    alpha = table.iterate(T, n + 1)
    beta = table.iterate(T + U, n + 1)
    f_mean = F.window_integral(alpha, beta) / (beta - alpha)
    rhs = f_mean
    for k in range(n + 1):
        a_k = table.iterate(T, k)
        b_k = table.iterate(T + U, k)
        comp = cumulative_hl(b_k, store) - cumulative_hl(a_k, store)
        len_next = table.iterate(T + U, k + 1) - table.iterate(T, k + 1)
        rhs *= comp / len_next
    return make_report("4.4", T, U, n, lhs=lhs, rhs=rhs, verdict=DIAGNOSTIC,
                       F=F.label, window_integral=window, phi_window=phid)


def degenerate_factorization_ratio(T, U, n, l, F, table, store, rel_tol=1e-6):
    """Degenerate factorization: one component mean raised to the power n+1.

    l picks which component supplies the base; l = 0 uses only the first
    two iterates no matter how deep the left side goes.
    """
    if not (0 <= l <= n):
        raise DomainError("need 0 <= l <= n")
    T = float(T)
    U = float(U)
    window, phid = _chord_pair(T, U, table)
    if n == 0 and l == 0 and F.kind == "one":
        base = window / phid
        return make_report("4.7", T, U, n, lhs=window, rhs=phid * base,
                           verdict=DIAGNOSTIC, F=F.label, l=l,
                           window_integral=window, phi_window=phid)
    lhs = product_integral(T, U, n, F, table, rel_tol=rel_tol)
    alpha = table.iterate(T, n + 1)
    beta = table.iterate(T + U, n + 1)
    f_int = F.window_integral(alpha, beta)
    if l == 0:
        base = window / phid
    else:
        a_l = table.iterate(T, l)
        b_l = table.iterate(T + U, l)
        comp = cumulative_hl(b_l, store) - cumulative_hl(a_l, store)
        len_next = table.iterate(T + U, l + 1) - table.iterate(T, l + 1)
        base = comp / len_next
    formula = "4.7" if l == 0 else "4.6"
    return make_report(formula, T, U, n, lhs=lhs, rhs=f_int * base ** (n + 1),
                       verdict=DIAGNOSTIC, F=F.label, l=l,
                       window_integral=window, phi_window=phid)


# ---------------------------------------------------------------------------
# mean-value witnesses
# ---------------------------------------------------------------------------

def _bracket_root(fn, a, b, n_scan):
    xs = np.linspace(a, b, n_scan + 1)[1:-1]
    vals = np.array([fn(x) for x in xs])
    sign = np.sign(vals)
    sign[sign == 0.0] = 1.0
    flips = np.flatnonzero(sign[:-1] != sign[1:])
    if flips.size == 0:
        return None
    i = flips[0]
    return brentq(fn, xs[i], xs[i + 1], xtol=1e-10)


def tau_witness(T, U, table, rel_tol=1e-6):
    """Mean-value ordinates (tau_0, tau_1, tau_2) inside the first three
    components, realizing the two mean-value equalities behind the
    cross-partition comparison for n+1 = 3.

    Existence follows from continuity (a nonnegative-weighted mean lies
    between the extremes of the integrand), so a missing bracket after a
    dense rescan signals a quadrature bug and raises.
    """
    T = float(T)
    U = float(U)
    i1 = product_integral(T, U, 1, F_ONE, table, rel_tol=rel_tol)
    i2 = product_integral(T, U, 2, F_ONE, table, rel_tol=rel_tol)

    def gap2(t):
        return float(abs_zeta_sq(table.iterate(t, 2)) - i2 / i1)

    def gap1(t):
        return float(abs_zeta_sq(t) * abs_zeta_sq(table(t)) - i1 / U)

    roots = []
    for fn in (gap2, gap1):
        root = _bracket_root(fn, T, T + U, 256)
        if root is None:
            root = _bracket_root(fn, T, T + U, 4096)
        if root is None:
            raise RootBracketError(
                "mean-value ordinate not bracketed; quadrature inconsistency")
        roots.append(root)
    t1, rho = roots
    tau0 = rho
    tau1 = float(table(rho))
    tau2 = float(table.iterate(t1, 2))
    return tau0, tau1, tau2


def tau_ratio_report(T, U, table, rel_tol=1e-6):
    """Report the distribution relation between |zeta| values at the
    witnesses: |zeta(tau_2)|^2 against (g2^{3/2}/g3) |zeta(tau_1)||zeta(tau_0)|."""
    tau0, tau1, tau2 = tau_witness(T, U, table, rel_tol=rel_tol)
    w2 = weights(ProperPartition(n_plus_1=3, parts=(2, 1)), float(T), float(U), table)
    g2 = w2.g[2]
    g3 = w2.g_top
    lhs = float(abs_zeta_sq(tau2))
    rhs = (g2 ** 1.5 / g3) * math.sqrt(float(abs_zeta_sq(tau1))) * math.sqrt(float(abs_zeta_sq(tau0)))
    return make_report("3.10", T, U, 2, lhs=lhs, rhs=rhs, verdict=DIAGNOSTIC,
                       tau0=tau0, tau1=tau1, tau2=tau2)


# ---------------------------------------------------------------------------
# generalized fluctuation-window means
# ---------------------------------------------------------------------------

def selberg_gen_ratio(T, U, n, l, which, table, rel_tol=1e-6):
    """Window means with powered fluctuation weights at the deepest iterate.

    which = "S": ratio against ((2l)!/(4^l l!)) (ln ln T)^l ln^{n+1} T
    (diagnostic only; ln ln T converges far too slowly to assert).
    which = "S1": the empirical coefficient d_hat = LHS / ln^{n+1} T is
    reported; the limiting constants are unknown, so nothing is asserted.
    """
    if which not in ("S", "S1"):
        raise DomainError("which must be 'S' or 'S1'")
    if l < 1:
        raise DomainError("l must be >= 1")
    T = float(T)
    U = float(U)
    lo = T ** 0.51
    hi = admissible_u_max(T)
    admissible = lo <= U <= hi * (1.0 + 1e-12)
    F = s_pow(l) if which == "S" else s1_pow(l)
    lhs = product_integral(T, U, n, F, table, rel_tol=rel_tol) / U
    ln_t = math.log(T)
    if which == "S":
        const = math.factorial(2 * l) / (4 ** l * math.factorial(l))
        rhs = const * math.log(ln_t) ** l * ln_t ** (n + 1)
        fid = "5.8" if (l == 1 and n == 0) else "5.5"
        return make_report(fid, T, U, n, lhs=lhs, rhs=rhs, verdict=DIAGNOSTIC,
                           F=F.label, l=l, admissible_U=admissible,
                           constant_note="corollary constant (2l)!/(4^l l!); the "
                                         "displayed intermediate forms disagree")
    rhs = ln_t ** (n + 1)
    fid = "5.8" if (l == 1 and n == 0) else "5.7"
    return make_report(fid, T, U, n, lhs=lhs, rhs=rhs, verdict=DIAGNOSTIC,
                       F=F.label, l=l, admissible_U=admissible,
                       empirical_coefficient=lhs / rhs)


# ---------------------------------------------------------------------------
# sixth-order window diagnostic
# ---------------------------------------------------------------------------

def sixth_order_ratio(T, table, epsilon=1.0 / 64.0, rel_tol=1e-6):
    """Sixth-power window diagnostic over U1 = T^{7/8 + 2 eps}.

    Integrates Z(phi1(t))^4 Z(t)^2 and compares with U1 ln^5 T / (2 pi^2).
    Purely diagnostic: the fourth-power factor converges slowly.  Practical
    only for T up to ~1e5 (a warning fires above).
    """
    T = float(T)
    if T > 5e5:
        raise DomainError("sixth_order_ratio is limited to T <= 5e5")
    if T > 1.1e5:
        warnings.warn("sixth_order_ratio above T=1e5 exceeds the intended "
                      "runtime budget", stacklevel=2)
    u1 = T ** (7.0 / 8.0 + 2.0 * epsilon)

    def integrand(t):
        z2 = abs_zeta_sq(t, fast=True)
        z2_phi = abs_zeta_sq(table(t), fast=True)
        return z2_phi * z2_phi * z2

    def cap(t):
        return zeta_oscillation_cap(t) / 2.0

    lhs = integrate_adaptive(integrand, T, T + u1, rel_tol=rel_tol,
                             panel_cap=cap).value
    rhs = u1 * math.log(T) ** 5 / (2.0 * math.pi ** 2)
    return make_report("1.8", T, u1, 0, lhs=lhs, rhs=rhs, verdict=DIAGNOSTIC,
                       F="one", epsilon=epsilon)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def sweep(build_report, t_values):
    """Run one formula across increasing T and attach the trend verdict.

    build_report maps T to a RatioReport.  Returns (reports, verdict); the
    returned reports carry the sweep verdict in place of the single-point
    one.
    """
    reports = [build_report(float(t)) for t in t_values]
    verdict = trend_verdict(reports)
    stamped = [make_report(r.formula_id, r.T, r.U, r.n, r.lhs, r.rhs,
                           verdict=verdict, **r.meta) for r in reports]
    return stamped, verdict
