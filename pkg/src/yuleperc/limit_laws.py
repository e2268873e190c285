"""Closed forms for the limit laws: kappa constants, Yule characteristic
functions, the mutant-mass integral, the continuous Luria-Delbrueck law and
the recentred fluctuation statistics, plus Gil-Pelaez inversion to CDFs."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import quad
from scipy.special import digamma, polygamma

from .errors import ConvergenceError, ParameterError, SeriesDivergenceError

MAX_TERMS = 10**6


@dataclass(frozen=True)
class SeriesResult:
    value: Union[float, complex]
    tail_bound: float
    terms: int


def falling_factorial(x: float, k: int) -> float:
    """``x (x-1) ... (x-k+1)``; 1 for ``k == 0``."""
    if k < 0 or int(k) != k:
        raise ParameterError("k must be a non-negative integer")
    out = 1.0
    for j in range(int(k)):
        out *= x - j
    return out


# ---------------------------------------------------------------------------
# kappa constants


def _euler_maclaurin_tail(shape: float, big_k: int, t_big_k: float) -> tuple[float, float]:
    """``sum_{k >= K} t_k`` and an error bound.

    On x > 1 the terms extend to ``f(x) = t_K Gamma(x-s) Gamma(K+1) (K-1) /
    (Gamma(K-s) Gamma(x+1) (x-1))``, a constant times a logarithmically
    completely monotone function (``psi(x+1) - psi(x-s)`` and ``1/(x-1)`` are
    completely monotone).  For such f the Euler-Maclaurin remainder after the
    ``f'`` term is bounded by ``|f'''(K)| / 720``.
    """
    k = float(big_k)
    lg_k = math.lgamma(k - shape) - math.lgamma(k + 1.0)

    def f(x):
        return t_big_k * math.exp(math.lgamma(x - shape) - math.lgamma(x + 1.0) - lg_k) \
            * (k - 1.0) / (x - 1.0)

    g1 = float(digamma(k - shape) - digamma(k + 1.0)) - 1.0 / (k - 1.0)
    g2 = float(polygamma(1, k - shape) - polygamma(1, k + 1.0)) + 1.0 / (k - 1.0) ** 2
    g3 = float(polygamma(2, k - shape) - polygamma(2, k + 1.0)) - 2.0 / (k - 1.0) ** 3
    d1 = t_big_k * g1
    d3 = t_big_k * (g1 ** 3 + 3.0 * g1 * g2 + g3)
    integral, err = quad(f, k, np.inf, epsabs=0.0, epsrel=1e-12, limit=200, full_output=1)[:2]
    value = integral + 0.5 * t_big_k - d1 / 12.0
    return value, abs(d3) / 720.0 + abs(err)


def _kappa_series(shape: float, tol: float, max_terms: int, direct_terms: int = 4096,
                  accelerate: bool = True) -> SeriesResult:
    """``1 - 1/s + (1/s) sum_{k>=2} (s)_k / k! (-1)^k / (k-1)`` for s in (0, 2].

    For k >= 3 the terms share one sign and satisfy
    ``|t_{k+1} / t_k| = (k - s)(k - 1) / (k (k + 1)) <= (k / (k + 1))**(s + 2)``,
    so ``sum_{k > K} |t_k| <= |t_{K+1}| (1 + (K + 1) / (s + 1))``.  When that
    bound has not reached ``tol`` after ``direct_terms`` terms the remaining
    tail is evaluated by Euler-Maclaurin (see :func:`_euler_maclaurin_tail`);
    with ``accelerate=False`` summation continues up to ``max_terms``.
    """
    if not tol > 0:
        raise ParameterError("tol must be positive")
    limit = min(direct_terms, max_terms) if accelerate else max_terms
    partial = 0.0
    k0 = 2  # index of the next unsummed term
    t_k = shape * (shape - 1.0) / 2.0
    block = 1024
    while k0 - 2 < limit:
        count = min(block, limit - (k0 - 2))
        ks = np.arange(k0, k0 + count, dtype=float)
        ratios = (ks - shape) * (ks - 1.0) / (ks * (ks + 1.0))
        # terms[i] = t_{k0+i}; nxt[i] = t_{k0+i+1}
        nxt = t_k * np.cumprod(ratios)
        terms = np.concatenate(([t_k], nxt[:-1]))
        sums = partial + np.cumsum(terms)
        bounds = np.abs(nxt) * (1.0 + (ks + 1.0) / (shape + 1.0)) / shape
        hit = np.nonzero(bounds <= tol)[0]
        if hit.size:
            i = int(hit[0])
            value = 1.0 - 1.0 / shape + sums[i] / shape
            return SeriesResult(float(value), float(bounds[i]), int(k0 + i - 1))
        partial = float(sums[-1])
        t_k = float(nxt[-1])
        k0 += count
        block = min(block * 2, 1 << 16)
    if accelerate and k0 > 3:
        tail, bound = _euler_maclaurin_tail(shape, k0, t_k)
        bound /= shape
        if bound <= tol:
            value = 1.0 - 1.0 / shape + (partial + tail) / shape
            return SeriesResult(float(value), float(bound), int(k0 - 2))
    raise ConvergenceError(
        f"kappa series for shape {shape} did not reach tol={tol} within {limit} terms"
    )


def kappa_beta(beta: float, tol: float = 1e-12, max_terms: int = MAX_TERMS) -> SeriesResult:
    """Centring constant for b-ary trees, ``beta = b / (b - 1)`` in (1, 2]."""
    if not (1.0 < beta <= 2.0):
        raise ParameterError(f"beta must lie in (1, 2], got {beta!r}")
    return _kappa_series(beta, tol, max_terms)


def kappa_alpha_prime(alpha: float, tol: float = 1e-10, max_terms: int = MAX_TERMS) -> SeriesResult:
    """Centring constant for scale-free trees, ``alpha = (1 + a) / (2 + a)`` in (0, 1)."""
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")
    return _kappa_series(alpha, tol, max_terms)


# ---------------------------------------------------------------------------
# Yule characteristic functions


def _yule_cf(theta, t, jump: float, shape: float):
    """CF of a pure-birth process with jumps ``jump`` started from ``jump * shape``.

    Evaluated as ``exp(shape * (i theta jump - jump t - Log D))`` with
    ``D = 1 - y + y e^{-jump t}``, ``y = e^{i theta jump}``.  ``Re D > 0`` for
    all arguments, so the principal Log is the analytic branch everywhere.
    """
    if np.any(np.asarray(t) < 0):
        raise ParameterError("t must be >= 0")
    theta = np.asarray(theta, dtype=float)
    y = np.exp(1j * theta * jump)
    x = np.exp(-jump * np.asarray(t, dtype=float))
    d = 1.0 - y + y * x
    small = (np.abs(d) < 1e-14) & (theta != 0)
    if np.any(small):
        raise ConvergenceError("Yule CF denominator below 1e-14; t too large for double precision")
    d = np.where(theta == 0, 1.0, d)
    out = np.exp(shape * (1j * theta * jump - jump * np.asarray(t, dtype=float) - np.log(d)))
    out = np.where(theta == 0, 1.0 + 0j, out)
    return complex(out) if out.ndim == 0 else out


def yule_cf(theta, t: float, b: int):
    """CF of the Yule process Z(t) with jumps b-1 started from Z(0) = b."""
    if int(b) != b or b < 2:
        raise ParameterError("b must be an integer >= 2")
    return _yule_cf(theta, t, float(b - 1), b / (b - 1))


def yule_cf_scalefree(theta, t: float, a: float):
    """CF at time t of a mutant family of the scale-free system (jumps 2+a, start 1+a)."""
    if not a > -1:
        raise ParameterError("a must be > -1")
    return _yule_cf(theta, t, 2.0 + a, (1.0 + a) / (2.0 + a))


# ---------------------------------------------------------------------------
# mutant-mass integral  int_0^t e^{-jump s} (phi_s(u) - 1) ds


def _g_power_series(z: complex, shape: float, tol: float) -> complex:
    # sum_{k>=2} (shape)_k / k! z^{k-1} / (k-1); term ratio is at most |z|
    r = abs(z)
    coef = shape * (shape - 1.0) / 2.0
    zp = z
    total = 0j
    k = 2
    while True:
        term = coef * zp / (k - 1)
        total += term
        coef *= (shape - k) / (k + 1)
        zp *= z
        nxt = abs(coef * zp) / k
        if nxt / (1.0 - r) <= tol:
            return total
        k += 1
        if k > MAX_TERMS:
            raise ConvergenceError("mutant-integral power series did not converge")


def _g_branch_series(z: complex, shape: float, tol: float) -> complex:
    # Same function continued through the branch point z = -1 via
    # J_s(z) = -H_s - sum_m [E^{s+m+1}/(s+m+1) - E^{m+1}/(m+1)],  E = 1 + z,
    # g(z) = -((1+z)^shape - 1 - shape z)/z + shape J_{shape-1}(z).
    s = shape - 1.0
    e = 1.0 + z
    r = abs(e)
    harmonic = float(digamma(s + 1.0)) + np.euler_gamma
    e_s = e ** s if e != 0 else 0j
    acc = 0j
    e_pow = e  # E^{m+1}
    m = 0
    while True:
        acc += e_s * e_pow / (s + m + 1.0) - e_pow / (m + 1.0)
        e_pow *= e
        m += 1
        bound = abs(e_pow) / (1.0 - r) * (abs(e_s) / (s + m + 1.0) + 1.0 / (m + 1.0))
        if bound <= tol:
            break
        if m > MAX_TERMS:
            raise ConvergenceError("branch-point expansion did not converge")
    j = -harmonic - acc
    return -((e ** shape if e != 0 else 0j) - 1.0 - shape * z) / z + shape * j


def _g(z: complex, shape: float, tol: float) -> complex:
    if z == 0:
        return 0j
    if abs(z) <= abs(1.0 + z):
        if abs(z) >= 1.0:
            raise SeriesDivergenceError(f"|z|={abs(z):.3g}: series diverges, use quadrature")
        return _g_power_series(z, shape, tol)
    if abs(1.0 + z) >= 1.0:
        raise SeriesDivergenceError(f"|1+z|={abs(1 + z):.3g}: series diverges, use quadrature")
    return _g_branch_series(z, shape, tol)


def _mutant_integral_closed(u: float, t: float, jump: float, shape: float, tol: float) -> complex:
    if t < 0:
        raise ParameterError("t must be >= 0")
    if not tol > 0:
        raise ParameterError("tol must be positive")
    if u == 0 or t == 0:
        return 0j
    y = cmath.exp(1j * u * jump)
    w = y - 1.0
    if abs(w) >= 1.0:
        raise SeriesDivergenceError(f"|e^(iu jump) - 1| = {abs(w):.3g} >= 1; use quadrature")
    d = 1.0 - y + y * math.exp(-jump * t)
    # kappa_{b,u}(t) = sum_k (shape)_k/k! w^{k-1}/(k-1) (1 - D^{-(k-1)}) = g(w) - g(w/D)
    kappa = _g(w, shape, tol) - _g(w / d, shape, tol)
    return (1.0 - y) / (jump * y) * (shape * cmath.log(d) + kappa)


def mutant_integral_closed(u: float, t: float, b: int, tol: float = 1e-14) -> complex:
    """``int_0^t e^{-(b-1)s} (phi_s(u) - 1) ds`` in closed form.

    ``(1-y)/((b-1)y) * (beta Log D + kappa_{b,u}(t))`` with ``y = e^{iu(b-1)}``
    and ``D = 1 - y + y e^{-(b-1)t}``.  ``kappa_{b,u}(t)`` is split as
    ``g(y-1) - g((y-1)/D)``; each ``g`` is summed as a power series when
    ``|z| < |1+z|`` and otherwise expanded about its branch point ``z = -1``
    (where the power series itself stops converging once
    ``e^{-(b-1)t} < |y-1|^2``).  Raises :class:`SeriesDivergenceError` when
    neither expansion converges; callers then fall back to
    :func:`mutant_integral_quadrature`.
    """
    if int(b) != b or b < 2:
        raise ParameterError("b must be an integer >= 2")
    return _mutant_integral_closed(u, t, float(b - 1), b / (b - 1), tol)


def mutant_integral_closed_scalefree(u: float, t: float, a: float, tol: float = 1e-14) -> complex:
    """Scale-free analogue with jumps 2+a and exponent alpha."""
    if not a > -1:
        raise ParameterError("a must be > -1")
    return _mutant_integral_closed(u, t, 2.0 + a, (1.0 + a) / (2.0 + a), tol)


def mutant_integral_quadrature(u: float, t: float, b: int, tol: float = 1e-12,
                               limit: int = 200) -> complex:
    """Adaptive Gauss-Kronrod (QUADPACK) evaluation of the same integral."""
    if t < 0:
        raise ParameterError("t must be >= 0")
    if u == 0 or t == 0:
        return 0j
    jump = float(b - 1)

    def f(s):
        return math.exp(-jump * s) * (yule_cf(u, s, b) - 1.0)

    parts = []
    for part in (lambda s: f(s).real, lambda s: f(s).imag):
        res = quad(part, 0.0, t, epsabs=0.0, epsrel=tol, limit=limit, full_output=1)
        if len(res) > 3:
            raise ConvergenceError(f"quadrature did not reach tol={tol} within {limit} subintervals")
        parts.append(res[0])
    return complex(parts[0], parts[1])


# ---------------------------------------------------------------------------
# continuous Luria-Delbrueck law and the theorem limits


def ld_cf(theta):
    """``exp(-(pi/2)|theta| - i theta ln|theta|)``, equal to 1 at theta = 0."""
    th = np.asarray(theta, dtype=float)
    absth = np.abs(th)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = np.where(absth > 0, th * np.log(np.where(absth > 0, absth, 1.0)), 0.0)
    out = np.exp(-0.5 * np.pi * absth - 1j * log_term)
    return complex(out) if out.ndim == 0 else out


class Theorem(str, Enum):
    T1_BARY = "T1"          # root cluster of b-ary trees
    T2_BRANCHING = "T2"     # clone population G_n of the b-ary system
    T3_SCALEFREE = "T3"     # root cluster of scale-free trees
    T3_BRANCHING = "T3G"    # clone population of the scale-free system
    E19_URT = "E19"         # uniform recursive trees


@dataclass(frozen=True)
class LimitSpec:
    theorem: Theorem
    c: float
    shape: Optional[float] = None  # beta for T1/T2, alpha for T3/T3G

    def __post_init__(self):
        object.__setattr__(self, "theorem", Theorem(self.theorem))
        if not (self.c > 0) or not math.isfinite(self.c):
            raise ParameterError("c must be a finite positive real")
        th = self.theorem
        if th in (Theorem.T1_BARY, Theorem.T2_BRANCHING):
            if self.shape is None or not (1.0 < self.shape <= 2.0):
                raise ParameterError("beta must lie in (1, 2]")
        elif th in (Theorem.T3_SCALEFREE, Theorem.T3_BRANCHING):
            if self.shape is None or not (0.0 < self.shape < 1.0):
                raise ParameterError("alpha must lie in (0, 1)")
        elif self.shape is not None:
            raise ParameterError("the uniform recursive tree limit has no shape parameter")

    @property
    def is_beta(self) -> bool:
        return self.theorem in (Theorem.T1_BARY, Theorem.T2_BRANCHING)

    def kappa(self, tol: float = 1e-10) -> SeriesResult:
        if self.theorem is Theorem.E19_URT:
            return SeriesResult(0.0, 0.0, 0)
        if self.is_beta:
            return kappa_beta(self.shape, tol)
        return kappa_alpha_prime(self.shape, tol)

    @property
    def rate(self) -> float:
        """Exponent multiplying c in the law of large numbers."""
        return 1.0 if self.theorem is Theorem.E19_URT else self.shape * 1.0

    @property
    def center(self) -> float:
        """Limit of the ratio (cluster or clone mass over n)."""
        e = math.exp(-self.rate * self.c)
        if self.theorem is Theorem.T2_BRANCHING:
            return e / (self.shape - 1.0)
        if self.theorem is Theorem.T3_BRANCHING:
            return e / (1.0 - self.shape)
        return e

    @property
    def scale(self) -> float:
        """Coefficient s of ln ln n and of the limit ``-s (Z + shift)``."""
        c = self.c
        e = math.exp(-self.rate * c)
        if self.theorem is Theorem.T2_BRANCHING:
            return self.shape / (self.shape - 1.0) * c * e
        if self.theorem is Theorem.T3_BRANCHING:
            return self.shape / (1.0 - self.shape) * c * e
        return self.rate * c * e

    def shift(self, tol: float = 1e-10) -> float:
        c = self.c
        if self.theorem is Theorem.E19_URT:
            return math.log(c)
        base = math.log(self.shape * c) - self.kappa(tol).value
        if self.theorem in (Theorem.T2_BRANCHING, Theorem.T3_BRANCHING):
            base += 1.0 - 1.0 / self.shape
        return base

    @property
    def germ_factor(self) -> float:
        if self.is_beta:
            return self.shape / (self.shape - 1.0)
        if self.theorem is Theorem.E19_URT:
            raise ParameterError("no germ statistic is defined for uniform recursive trees")
        return self.shape / (1.0 - self.shape)


def limit_variable_cf(theta, spec: LimitSpec, tol: float = 1e-10):
    """CF of the weak limit ``-s (Z + shift)`` of the recentred statistic."""
    s = spec.scale
    shift = spec.shift(tol)
    th = np.asarray(theta, dtype=float)
    out = np.exp(-1j * th * s * shift) * np.asarray(ld_cf(-s * th))
    return complex(out) if out.ndim == 0 else out


def germ_limit_cf(theta, spec: LimitSpec, tol: float = 1e-10):
    """CF of ``k c (Z - kappa + ln(shape c) + 1 - 1/shape)``, the germ limit."""
    if spec.theorem is Theorem.E19_URT:
        raise ParameterError("no germ statistic is defined for uniform recursive trees")
    g = spec.germ_factor * spec.c
    shift = math.log(spec.shape * spec.c) - spec.kappa(tol).value + 1.0 - 1.0 / spec.shape
    th = np.asarray(theta, dtype=float)
    out = np.exp(1j * th * g * shift) * np.asarray(ld_cf(g * th))
    return complex(out) if out.ndim == 0 else out


def recenter(sample_ratio, n: int, spec: LimitSpec):
    """``(ratio - center) ln n - s ln ln n``."""
    if n < 3:
        raise ParameterError("recentring needs n >= 3")
    log_n = math.log(n)
    out = (np.asarray(sample_ratio, dtype=float) - spec.center) * log_n - spec.scale * math.log(log_n)
    return float(out) if out.ndim == 0 else out


def germ_recenter(delta, n: int, spec: LimitSpec):
    """``delta / ln^3 n - 3 k c ln ln n`` with k = beta/(beta-1) or alpha/(1-alpha)."""
    if n < 3:
        raise ParameterError("recentring needs n >= 3")
    log_n = math.log(n)
    k = spec.germ_factor
    out = np.asarray(delta, dtype=float) / log_n**3 - 3.0 * k * spec.c * math.log(log_n)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Gil-Pelaez inversion


def _tail_cutoff(decay: float, budget: float) -> float:
    # smallest Theta >= 1 with e^{-decay Theta} / (decay Theta) <= budget
    def bound(x):
        return math.exp(-decay * x) / (decay * x)

    lo, hi = 1.0, 1.0
    while bound(hi) > budget:
        lo, hi = hi, hi * 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if bound(mid) > budget:
            lo = mid
        else:
            hi = mid
    return hi


def gil_pelaez_cdf(x: float, cf: Callable[[float], complex], decay: float,
                   tol: float = 1e-8, limit: int = 1000) -> float:
    """``F(x) = 1/2 - (1/pi) int_0^inf Im[e^{-i theta x} cf(theta)] / theta d theta``.

    ``decay`` is a rate with ``|cf(theta)| <= exp(-decay theta)`` for theta >= 1;
    it fixes the truncation point.  Error budget: tol/4 on [0, 1], tol/4 on
    [1, Theta] and tol/2 for the discarded tail.
    """
    if not (1e-12 < tol < 1e-2):
        raise ParameterError("tol must lie in (1e-12, 1e-2)")
    if not decay > 0:
        raise ParameterError("decay must be positive")

    def integrand(th):
        if th == 0.0:
            return 0.0  # Kronrod nodes are interior; never evaluated
        return (cmath.exp(-1j * th * x) * cf(th)).imag / th

    budget = math.pi * tol / 4.0
    theta_max = _tail_cutoff(decay, math.pi * tol / 2.0)
    head = quad(integrand, 0.0, 1.0, epsabs=budget, epsrel=0.0, limit=limit, full_output=1)
    if len(head) > 3:
        raise ConvergenceError(f"Gil-Pelaez head integral failed at x={x}: {head[3]}")
    # split the oscillatory part into unit pieces so each stays well resolved
    edges = np.linspace(1.0, theta_max, max(2, int(math.ceil(theta_max - 1.0)) + 1))
    piece_budget = budget / (len(edges) - 1)
    tail = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        res = quad(integrand, lo, hi, epsabs=piece_budget, epsrel=0.0, limit=limit, full_output=1)
        if len(res) > 3:
            raise ConvergenceError(f"Gil-Pelaez tail integral failed at x={x}: {res[3]}")
        tail += res[0]
    f = 0.5 - (head[0] + tail) / math.pi
    return min(1.0, max(0.0, f))


def ld_cdf(z: float, tol: float = 1e-8) -> float:
    """CDF of the continuous Luria-Delbrueck variable Z."""
    return gil_pelaez_cdf(z, lambda th: complex(ld_cf(th)), math.pi / 2.0, tol)


def limit_cdf(x: float, spec: LimitSpec, tol: float = 1e-8) -> float:
    """CDF at ``x`` of the limit law selected by ``spec``."""
    if not (1e-12 < tol < 1e-2):
        raise ParameterError("tol must lie in (1e-12, 1e-2)")
    s = spec.scale
    shift = spec.shift(min(tol, 1e-10))

    def cf(th):
        return cmath.exp(-1j * th * s * shift) * complex(ld_cf(-s * th))

    return gil_pelaez_cdf(x, cf, math.pi * s / 2.0, tol)
