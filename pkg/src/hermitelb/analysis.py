"""Cumulative distributions of the weights and tail diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice_model import ModelParams, WeightVector, weights

CDF_AGREE_TOL = 1e-12


def heaviside(x: float, a: float = 1.0) -> float:
    """Unit step with H(0) = a."""
    if x > 0:
        return 1.0
    if x < 0:
        return 0.0
    return a


def sgn(x: float) -> float:
    return 2.0 * heaviside(x, 0.5) - 1.0


def _values(w: WeightVector):
    """Exact rationals when available, otherwise floats."""
    return list(w.exact) if w.exact is not None else [float(v) for v in w.values]


def _check_member(w: WeightVector, c_n: float) -> None:
    if not np.any(w.velocities == c_n):
        raise KeyError(f"velocity {c_n} not in lattice")


def _cdf_naive(vel, vals, c_n):
    return sum((v for c, v in zip(vel, vals) if c <= c_n), vals[0] * 0)


def _cdf_step_form(vel, vals, c_n):
    """Negative-side sum, positive-side partial sum and unit steps combined."""
    h1 = heaviside(c_n, 1.0)
    zero = vals[0] * 0
    neg = sum((v for c, v in zip(vel, vals) if c < 0 and c <= c_n), zero)
    pos = sum((v for c, v in zip(vel, vals) if 0 < c <= c_n), zero)
    sign = -1 if h1 else 1
    step = sgn(c_n) if c_n != 0 else 0.0
    out = sign * neg + int(h1) * int(step) * pos + int(h1)
    return out


def cdf(w: WeightVector, c_n: float) -> float:
    """F(c_n) = sum of weights at velocities <= c_n, checked against the step-function form."""
    _check_member(w, c_n)
    vel = w.velocities.tolist()
    vals = _values(w)
    naive = _cdf_naive(vel, vals, c_n)
    stepped = _cdf_step_form(vel, vals, c_n)
    if abs(float(naive) - float(stepped)) > CDF_AGREE_TOL:
        raise ArithmeticError(f"cdf forms disagree at {c_n}: {naive} vs {stepped}")
    return float(naive)


def ccdf(w: WeightVector, c_n: float) -> float:
    """1 - F(c_n); for c_n > 0 read off as the sum of the weights beyond c_n."""
    _check_member(w, c_n)
    vel = w.velocities.tolist()
    vals = _values(w)
    comp = 1 - _cdf_naive(vel, vals, c_n)
    if c_n > 0:
        tail = sum((v for c, v in zip(vel, vals) if c > c_n), vals[0] * 0)
        if abs(float(tail) - float(comp)) > CDF_AGREE_TOL:
            raise ArithmeticError(f"tail sum disagrees with 1 - F at {c_n}")
        return float(tail)
    return float(comp)


def exp_ccdf(s: float, x: float) -> float:
    if s <= 0:
        raise ValueError("rate must be positive")
    return math.exp(-s * x) if x >= 0 else 1.0


@dataclass
class TailReport:
    ccdf: list
    kurtosis: float
    skewness: float
    extreme_weights: list
    exp_comparison: list
    long_tail_ratio: list = field(default_factory=list)
    subexp_sequence: list = field(default_factory=list)
    extreme_log10: list = field(default_factory=list)
    local_maxima: int = 0
    negative_weights: list = field(default_factory=list)


def standardized_moments(w: WeightVector) -> tuple:
    """(skewness, kurtosis) of the weight distribution over the velocities."""
    c = w.velocities
    p = w.values
    mean = float(np.sum(p * c))
    d = c - mean
    m2 = float(np.sum(p * d**2))
    return float(np.sum(p * d**3)) / m2**1.5, float(np.sum(p * d**4)) / m2**2


def _count_local_maxima(v: np.ndarray) -> int:
    n = 0
    for i in range(len(v)):
        left = v[i - 1] if i > 0 else -math.inf
        right = v[i + 1] if i < len(v) - 1 else -math.inf
        if v[i] > left and v[i] > right:
            n += 1
    return n


def tail_report(model: ModelParams, n_extreme: int | None = None, s: float = 1.0) -> TailReport:
    w = weights(model)
    z = model.lattice.z
    if n_extreme is None:
        n_extreme = min(z, 2 if z <= 6 else 11)
    vel = w.velocities.tolist()
    vals = _values(w)
    # tail sums from the outside in, exact when rationals are available
    tails = {}
    acc = vals[0] * 0
    for c, v in zip(reversed(vel), reversed(vals)):
        tails[c] = acc
        acc = acc + v
    cc = []
    for c in vel:
        if c > 0:
            cc.append((c, float(tails[c])))
        else:
            cc.append((c, float(1 - _cdf_naive(vel, vals, c))))
    skew, kurt = standardized_moments(w)
    logs = w.log10_abs()
    pos = [(c, float(v)) for c, v in zip(vel, vals) if c > 0]
    extreme = pos[-n_extreme:]
    extreme_log = [(c, float(lg)) for c, lg in zip(vel, logs) if c > 0][-n_extreme:]
    ccd = dict(cc)
    comp = [(c, ccd[c], exp_ccdf(s, c)) for c in vel if c >= 0]
    speeds = model.lattice.speeds
    ratios = []
    for k in range(1, z):
        cn, prev = speeds[k - 1], (speeds[k - 2] if k >= 2 else 0.0)
        ratios.append((cn, ccd[prev] / ccd[cn] if ccd[cn] != 0 else math.inf))
    subexp = [(c, math.exp(s * c) * ccd[c]) for c in vel if 0 <= c < speeds[-1]]
    negative = [c for c, v in zip(vel, vals) if v < 0]
    return TailReport(
        ccdf=cc,
        kurtosis=kurt,
        skewness=skew,
        extreme_weights=extreme,
        exp_comparison=comp,
        long_tail_ratio=ratios,
        subexp_sequence=subexp,
        extreme_log10=extreme_log,
        local_maxima=_count_local_maxima(np.asarray(w.values)),
        negative_weights=negative,
    )


def first_velocity_below(report: TailReport, level: float) -> float:
    for c, v in report.ccdf:
        if c >= 0 and v < level:
            return c
    return math.inf
