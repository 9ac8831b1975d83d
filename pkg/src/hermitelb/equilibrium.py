"""Generalized Hermite equilibrium distribution and population positivity."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice_model import ModelParams, WeightVector, weights
from .special_fn import gen_hermite

NEG_ZERO_GUARD = 1e-13
DEFAULT_ORDER = {3: 3, 5: 3, 7: 4, 9: 5, 11: 6}


@dataclass(frozen=True)
class FlowState:
    rho: float
    u: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"density must be positive, got {self.rho}")


# populations share the velocity-indexed layout of the weights
Populations = WeightVector


def default_order(n_q: int) -> int:
    """Hermite truncation order used for each lattice size (n_q + 1) // 2 beyond the table."""
    return DEFAULT_ORDER.get(n_q, (n_q + 1) // 2)


class EquilibriumKernel:
    """Precomputed W_i H_n(c_i/sqrt(2 theta)) / n! so that f_i = rho sum_n K[n, i] b^n."""

    def __init__(self, model: ModelParams, order_n: int, w: WeightVector | None = None):
        if order_n < 2:
            raise ValueError("Hermite order must be at least 2")
        self.model = model
        self.order_n = order_n
        self.weights = w if w is not None else weights(model)
        self.velocities = model.lattice.velocities
        self.scale = math.sqrt(2.0 * model.theta)
        a = self.velocities / self.scale
        self.K = np.array(
            [self.weights.values * gen_hermite(n, model.mu, a) / math.factorial(n) for n in range(order_n + 1)]
        )

    def evaluate(self, rho, u):
        """Populations for scalar or array (rho, u); trailing axis is the velocity."""
        rho = np.asarray(rho, dtype=float)[..., None]
        b = np.asarray(u, dtype=float)[..., None] / self.scale
        # Horner in b: elementwise, so results do not depend on array partitioning
        acc = np.broadcast_to(self.K[-1], np.broadcast(b, self.K[-1]).shape).copy()
        for n in range(self.order_n - 1, -1, -1):
            acc = acc * b + self.K[n]
        return rho * acc

    def populations(self, state: FlowState) -> Populations:
        return Populations(self.velocities, self.evaluate(state.rho, state.u))


def edf(model: ModelParams, state: FlowState, order_n: int) -> Populations:
    return EquilibriumKernel(model, order_n).populations(state)


def edf_d1q3_closed(model: ModelParams, state: FlowState, include_n3: bool = True) -> Populations:
    """Three-velocity equilibrium written out term by term."""
    lat = model.lattice
    if lat.z != 1:
        raise ValueError("closed form applies to three-velocity lattices only")
    mu, th = model.mu, model.theta
    if mu in (-0.5, -1.5):
        raise ValueError("mu at a pole of the closed form")
    c1 = lat.speeds[0]
    rho, u = state.rho, state.u
    g1 = 2 * mu + 1
    w0 = 1 - th * g1 / c1**2
    w1 = th * g1 / (2 * c1**2)
    out = []
    for c, w in ((-c1, w1), (0.0, w0), (c1, w1)):
        s = 1 + c * u / (th * g1) - u * u / (2 * th) + c * c * u * u / (2 * th * th * g1)
        if include_n3:
            s += c**3 * u**3 / (2 * th**3 * g1 * (2 * mu + 3)) - c * u**3 / (2 * th * th * g1)
        out.append(rho * w * s)
    return Populations(lat.velocities, np.array(out))


def negative_mask(values: np.ndarray, rho: float) -> np.ndarray:
    return values < -NEG_ZERO_GUARD * rho


def first_negative_population(model: ModelParams, order_n: int, u: float, rho: float = 1.0) -> list:
    """Velocities whose equilibrium population is negative at this u."""
    f = edf(model, FlowState(rho, u), order_n)
    return [float(c) for c in f.velocities[negative_mask(f.values, rho)]]


def max_speed(model: ModelParams, order_n: int, rho: float = 1.0, tol: float = 1e-4, grid_step: float = 1e-2) -> float:
    """Largest u* with every population non-negative for all |u| <= u*.

    A coarse scan over [0, c_z] finds the first failing grid point (both signs
    of u), then bisection refines the crossing to `tol`.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    kern = EquilibriumKernel(model, order_n)
    if not kern.weights.positive:
        raise ValueError("weights are not all positive at this theta")

    def ok(u):
        f = kern.evaluate(rho, np.array([u, -u]))
        return not bool(np.any(negative_mask(f, rho)))

    c_max = model.lattice.speeds[-1]
    grid = np.arange(grid_step, c_max + grid_step, grid_step)
    lo = 0.0
    hi = None
    for g in grid:
        g = min(float(g), c_max)
        if ok(g):
            lo = g
        else:
            hi = g
            break
    if hi is None:
        return c_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo
