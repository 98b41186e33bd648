"""Special functions behind the closed-form energy-efficiency expressions.

Everything here is self-contained: Lambert W by Halley iteration, the
first-kind modified Bessel function by its power series (asymptotic form
for large argument), and the first-order Marcum Q both as a noncentral
chi-square series and as adaptive quadrature of its defining integral.
The two Marcum routes cross-check each other; neither is derived from
the other.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, NumericDomainError
from .params import QuadratureSpec

# Euler-Mascheroni constant to full double precision.
EULER_GAMMA = 0.5772156649015328606065120900824024

_HALLEY_MAX_ITER = 60


def _lambert_w_scalar(y: float) -> float:
    if y == 0.0:
        return 0.0
    if y > math.e:
        log_y = math.log(y)
        w = log_y - math.log(log_y)
    else:
        w = y / (1.0 + y)
    for _ in range(_HALLEY_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - y
        # Halley step: cubic convergence near the root.
        dw = f / (ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0))
        w -= dw
        if abs(dw) <= 1e-15 * (1.0 + abs(w)):
            break
    return w


def lambert_w(y):
    """Principal branch of the Lambert W function for y >= 0.

    Returns x >= 0 with x e^x = y.  Accepts scalars or arrays.
    """
    arr = np.asarray(y, dtype=float)
    if np.any(arr < 0.0) or np.any(np.isnan(arr)):
        raise NumericDomainError("lambert_w requires y >= 0")
    if arr.ndim == 0:
        return _lambert_w_scalar(float(arr))
    if arr.size == 0:
        return np.empty_like(arr)
    w = np.where(arr > math.e,
                 np.log(np.maximum(arr, 1e-300)),
                 arr / (1.0 + arr))
    big = arr > math.e
    if np.any(big):
        w[big] -= np.log(w[big])
    for _ in range(_HALLEY_MAX_ITER):
        ew = np.exp(w)
        f = w * ew - arr
        dw = f / (ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0))
        w -= dw
        if np.max(np.abs(dw)) <= 1e-15 * (1.0 + np.max(np.abs(w))):
            break
    return w


def lambert_w_of_exp(z):
    """W(e^z) without forming e^z, safe for arguments beyond overflow.

    For large z, W(e^z) solves w + log w = z; fixed-point sweeps of
    w = z - log w converge rapidly from w0 = z - log z.  Accepts scalars
    or arrays.
    """
    arr = np.asarray(z, dtype=float)
    if arr.ndim == 0:
        zf = float(arr)
        if zf < 500.0:
            return _lambert_w_scalar(math.exp(zf))
        w = zf - math.log(zf)
        for _ in range(50):
            w_new = zf - math.log(w)
            if abs(w_new - w) <= 1e-15 * w_new:
                return w_new
            w = w_new
        return w
    out = np.empty_like(arr)
    small = arr < 500.0
    if np.any(small):
        out[small] = lambert_w(np.exp(arr[small]))
    if np.any(~small):
        zb = arr[~small]
        w = zb - np.log(zb)
        for _ in range(50):
            w_new = zb - np.log(w)
            if np.max(np.abs(w_new - w)) <= 1e-15 * np.max(w_new):
                w = w_new
                break
            w = w_new
        out[~small] = w
    return out


def bessel_i0(x: float) -> float:
    """Modified Bessel function of the first kind, order zero."""
    if x < 0:
        raise NumericDomainError("bessel_i0 requires x >= 0")
    if x < 30.0:
        return _i0_series(x)
    try:
        return bessel_i0e(x) * math.exp(x)
    except OverflowError:
        return math.inf


def _i0_series(x: float) -> float:
    # sum_k (x^2/4)^k / (k!)^2, all terms positive
    q = 0.25 * x * x
    term = 1.0
    total = 1.0
    k = 1
    while True:
        term *= q / (k * k)
        total += term
        if term < total * 1e-18:
            return total
        k += 1


def bessel_i0e(x: float) -> float:
    """Exponentially scaled I0: exp(-x) I0(x)."""
    if x < 0:
        raise NumericDomainError("bessel_i0e requires x >= 0")
    if x < 30.0:
        return _i0_series(x) * math.exp(-x)
    # Asymptotic expansion; truncation error is below 1e-13 for x >= 30.
    total = 1.0
    term = 1.0
    for k in range(1, 40):
        term *= (2 * k - 1) ** 2 / (8.0 * x * k)
        total += term
        if term < 1e-18 * total:
            break
    return total / math.sqrt(2.0 * math.pi * x)


def marcum_q1(a: float, b: float) -> float:
    """First-order Marcum Q: Q1(a, b) = int_b^inf x exp(-(x^2+a^2)/2) I0(ax) dx.

    Evaluated by the canonical noncentral chi-square series
    Q1(a,b) = sum_n Pois(n; a^2/2) * Pr(Pois(b^2/2) <= n),
    with both weights built in log space so large arguments neither
    overflow nor lose the answer.  Absolute accuracy ~1e-14.
    """
    if a < 0 or b < 0:
        raise NumericDomainError("marcum_q1 requires a >= 0 and b >= 0")
    if b == 0.0:
        return 1.0
    la = 0.5 * a * a
    lb = 0.5 * b * b
    log_la = math.log(la) if la > 0.0 else -math.inf
    log_lb = math.log(lb)
    total = 0.0
    pois_cum = 0.0
    tail_cdf = 0.0
    n = 0
    n_max = int(la + 40.0 * math.sqrt(la + 1.0) + 200.0)
    while n <= n_max:
        log_t = -lb + n * log_lb - math.lgamma(n + 1)
        if log_t > -745.0:
            tail_cdf += math.exp(log_t)
        if la == 0.0:
            p = 1.0 if n == 0 else 0.0
        else:
            log_p = -la + n * log_la - math.lgamma(n + 1)
            p = math.exp(log_p) if log_p > -745.0 else 0.0
        total += p * tail_cdf
        pois_cum += p
        if n >= la and (1.0 - pois_cum < 1e-15 or p < 1e-18):
            # remaining terms are bounded by the unaccounted Poisson mass
            return min(1.0, total + max(0.0, 1.0 - pois_cum))
        n += 1
    raise ConvergenceError(
        f"marcum_q1 series did not converge for a={a}, b={b}", last_iterate=total,
        iterations=n_max,
    )


def marcum_q1_quadrature(a: float, b: float, truncation: float = 1e-16) -> float:
    """Marcum Q1 by adaptive quadrature of the defining integral.

    Independent of :func:`marcum_q1`; paired with it as an in-repo oracle.
    The integrand x exp(-(x-a)^2/2) * [e^{-ax} I0(ax)] is evaluated in
    scaled form and the tail is dropped where it falls below ``truncation``.
    """
    if a < 0 or b < 0:
        raise NumericDomainError("marcum_q1_quadrature requires a >= 0 and b >= 0")
    if b == 0.0:
        return 1.0

    def integrand(x):
        return x * math.exp(-0.5 * (x - a) ** 2) * bessel_i0e(a * x)

    hi = max(a, b) + 2.0
    while integrand(hi) > truncation:
        hi += 2.0
    if hi <= b:
        return 0.0
    value, _ = integrate.quad(integrand, b, hi, limit=200, epsabs=1e-13, epsrel=1e-12)
    return min(1.0, max(0.0, value))


def _c1_marcum_args(mu_norm: float, eta: float, t: float):
    a = mu_norm / (eta * (1.0 + math.exp(-t / 2.0)))
    denom = eta * (1.0 - math.exp(-t))
    return a, denom


def c1_integrand(x: float, mu_norm: float, eta: float, t: float) -> float:
    """Integrand of the semi-infinite rate-constant integral at abscissa x."""
    a, denom = _c1_marcum_args(mu_norm, eta, t)
    return marcum_q1(a, math.exp(x) / denom)


def c1(channel, t: float, quad: QuadratureSpec | None = None) -> float:
    """Rate constant: alpha (gamma + log pi)/2 plus twice the Marcum integral.

    The integrand is Q1 with a fixed first argument and a second argument
    growing like e^x, so it lies in (0, 1], decreases monotonically in x,
    and the tail may be truncated once below the quadrature threshold.
    ``t`` is the fading elapsed time; the caller fixes the evaluation
    convention (the closed forms use one shared t).
    """
    quad = quad or QuadratureSpec()
    if channel.eta == 0.0:
        raise NumericDomainError(
            "c1 is undefined for eta = 0 (degenerate channel: the Marcum "
            "argument diverges for every abscissa)")
    if t <= 0.0:
        raise NumericDomainError("c1 requires t > 0")
    const = channel.alpha * (EULER_GAMMA + math.log(math.pi)) / 2.0
    mu_norm = channel.mu_norm

    def f(x):
        return c1_integrand(x, mu_norm, channel.eta, t)

    # Monotone decreasing integrand: scan for the truncation point.
    hi = 0.0
    while f(hi) > quad.truncation_threshold:
        hi += 0.5
        if hi > 700.0:
            raise ConvergenceError("c1 integrand failed to decay", last_iterate=hi)
    if hi == 0.0:
        return const
    value, _ = integrate.quad(f, 0.0, hi, limit=200,
                              epsabs=quad.abs_tol, epsrel=quad.rel_tol)
    return const + 2.0 * value
