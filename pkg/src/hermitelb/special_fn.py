"""Special functions: Pochhammer symbols, symmetric polynomials, and the
mu-generalized Hermite polynomials and exponential."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

BESSEL_MAX_TERMS = 200
BESSEL_REL_TOL = 1e-16
# beyond this the float series loses too many digits to cancellation/overflow
EXP_ARG_BOUND = 50.0


def pochhammer(x, m: int):
    """Rising factorial x(x+1)...(x+m-1); 1 for m == 0.

    Works for floats, Fractions and mpmath numbers alike.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    out = x * 0 + 1
    for j in range(m):
        out = out * (x + j)
    return out


def q_pochhammer(a: float, q: float, z: int) -> float:
    if z < 0:
        raise ValueError("z must be non-negative")
    out = 1.0
    for k in range(z):
        out *= 1.0 - a * q**k
    return out


def double_factorial(n: int) -> int:
    if n < 0:
        raise ValueError("n must be non-negative")
    return math.prod(range(n, 0, -2))


def elementary_symmetric_all(values: Sequence) -> list:
    """All e_0..e_n of `values`, read off the expansion of prod(t + v)."""
    e = [values[0] * 0 + 1 if len(values) else 1]
    for v in values:
        e.append(e[-1] * 0)
        for j in range(len(e) - 1, 0, -1):
            e[j] = e[j] + v * e[j - 1]
    return e


def elementary_symmetric(values: Sequence, k: int):
    if not 0 <= k <= len(values):
        raise ValueError(f"k={k} out of range for {len(values)} values")
    return elementary_symmetric_all(list(values))[k]


def gen_laguerre(n: int, alpha: float, x):
    """L_n^alpha(x) by the three-term recurrence; x may be an array."""
    if n < 0:
        raise ValueError("n must be non-negative")
    prev = np.ones_like(x, dtype=float) if isinstance(x, np.ndarray) else 1.0
    if n == 0:
        return prev
    cur = 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def validate_mu(mu: float) -> None:
    """Reject mu outside the Szego domain mu > -1/2.

    The pole set mu = 1/2 - m (m = 1, 2, ...) lies inside the rejected region.
    """
    if not math.isfinite(mu) or mu <= -0.5:
        raise ValueError(f"mu={mu} outside the admissible domain mu > -1/2")


def hermite_norm(n_half: int, a: float, mu: float) -> float:
    """Normalization Gamma(n+a)Gamma(mu+1/2) / (Gamma(mu+n+a)Gamma(1/2)).

    For a in {1/2, 3/2} this is the Pochhammer ratio (1/2)_m / (mu+1/2)_m with
    m = n + a - 1/2, which is finite and exactly 1 at mu = 0.
    """
    m = int(round(n_half + a - 0.5))
    return pochhammer(0.5, m) / pochhammer(mu + 0.5, m)


def gen_hermite(n: int, mu: float, x):
    """Normalized generalized Hermite polynomial H_n^(mu)(x).

    Even order 2m: (-1)^m 4^m m! L_m^(mu-1/2)(x^2), odd order 2m+1:
    (-1)^m 2^(2m+1) m! x L_m^(mu+1/2)(x^2), each scaled so that mu = 0 gives
    the physicists' Hermite polynomial.
    """
    validate_mu(mu)
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=float) if not np.isscalar(x) else float(x)
    m, odd = divmod(n, 2)
    sign = -1.0 if m % 2 else 1.0
    if odd:
        raw = sign * 2.0 ** (2 * m + 1) * math.factorial(m) * x * gen_laguerre(m, mu + 0.5, x * x)
        return hermite_norm(m, 1.5, mu) * raw
    if m == 0:
        return np.ones_like(x) if isinstance(x, np.ndarray) else 1.0
    raw = sign * 4.0**m * math.factorial(m) * gen_laguerre(m, mu - 0.5, x * x)
    return hermite_norm(m, 0.5, mu) * raw


def bessel_i_series(nu: float, x: float) -> float:
    """Modified Bessel I_nu(x) for x >= 0 by its power series."""
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0 if nu == 0 else 0.0
    half = 0.5 * x
    term = half**nu / math.gamma(nu + 1)
    total = term
    q = half * half
    for m in range(1, BESSEL_MAX_TERMS):
        term *= q / (m * (m + nu))
        total += term
        if abs(term) < BESSEL_REL_TOL * abs(total):
            return total
    raise ArithmeticError(f"Bessel series for nu={nu}, x={x} did not converge")


def gen_exponential(mu: float, x: float) -> float:
    """Generalized exponential e_mu(x).

    Equals Gamma(mu+1/2) (x/2)^(1/2-mu) [I_(mu-1/2)(x) + I_(mu+1/2)(x)]; the
    prefactor is folded into the two Bessel series so negative x needs no
    fractional powers. Reduces to exp(x) at mu = 0.
    """
    validate_mu(mu)
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    if abs(x) > EXP_ARG_BOUND:
        raise ArithmeticError(f"|x|={abs(x)} exceeds the supported bound {EXP_ARG_BOUND}")
    if x < 0 and mu >= 0:
        return _exponential_kummer(mu, x)
    half = 0.5 * x
    q = half * half
    a = mu + 0.5
    even = 1.0  # (x/2)^(2m) / (m! (mu+1/2)_m)
    odd = half / a  # (x/2)^(2m+1) / (m! (mu+1/2)_(m+1))
    total = even + odd
    scale = abs(even) + abs(odd)  # relative to the absolute series for x < 0
    for m in range(1, BESSEL_MAX_TERMS):
        even *= q / (m * (a + m - 1))
        odd *= q / (m * (a + m))
        total += even + odd
        scale += abs(even) + abs(odd)
        if abs(even) + abs(odd) < BESSEL_REL_TOL * scale:
            return total
    raise ArithmeticError(f"exponential series for mu={mu}, x={x} did not converge")


def _exponential_kummer(mu: float, x: float) -> float:
    # e_mu(x) = exp(x) 1F1(mu; 2mu+1; -2x). For x < 0 and mu >= 0 every term of
    # the confluent series is non-negative, which avoids the cosh/sinh-style
    # cancellation of the direct series.
    t = -2.0 * x
    b = 2 * mu + 1
    term = total = 1.0
    for n in range(4 * BESSEL_MAX_TERMS):
        term *= (mu + n) * t / ((b + n) * (n + 1))
        total += term
        if term <= BESSEL_REL_TOL * total:
            return math.exp(x) * total
    raise ArithmeticError(f"exponential series for mu={mu}, x={x} did not converge")
