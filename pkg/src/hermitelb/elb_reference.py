"""Entropic product-form equilibrium on three velocities and the moment
comparison against the Hermite equilibria."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import FlowState, Populations, edf
from .lattice_model import LatticeSet, ModelParams
from .moments import mu_for_d1q3, raw_moment


@dataclass(frozen=True)
class ElbInput:
    """Constraint data. For m_max = 1 the temperature is pinned at c1^2/3 and
    p_trace is implied by mass conservation, so it may be left as None."""

    rho: float
    j: float
    theta: float
    c1: float = 1.0
    m_max: int = 2
    p_trace: float | None = None

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("density must be positive")
        if self.m_max not in (1, 2):
            raise ValueError("m_max must be 1 or 2")
        if abs(self.j) >= self.rho * self.c1:
            raise ValueError("|j| must stay below rho*c1")
        if self.m_max == 1 and not math.isclose(self.theta, self.c1**2 / 3, rel_tol=1e-12):
            raise ValueError("m_max=1 fixes theta = c1^2/3")
        if self.m_max == 2 and self.theta == self.c1**2:
            raise ValueError("theta must differ from c1^2")

    @property
    def u(self) -> float:
        return self.j / self.rho

    def pressure_trace(self) -> float:
        if self.m_max == 2:
            return self.p_trace if self.p_trace is not None else self.theta + self.u**2
        # mass closure of the first-order entropic solution
        s = math.sqrt(1 + 3 * (self.u / self.c1) ** 2)
        return self.c1**2 * (2 * s - 1) / 3


def _lattice(c1: float) -> LatticeSet:
    return LatticeSet((c1,))


def _weights(theta: float, c1: float) -> np.ndarray:
    w1 = theta / (2 * c1**2)
    return np.array([w1, 1 - theta / c1**2, w1])


def elb_edf(inp: ElbInput) -> Populations:
    rho, j, c1, th = inp.rho, inp.j, inp.c1, inp.theta
    P = inp.pressure_trace()
    arg = rho**2 * P**2 - j**2 * c1**2
    if arg < 0:
        raise ValueError("square-root argument negative: rho*P below |j|*c1")
    root = math.sqrt(arg)
    denom = rho * P - j * c1
    if denom == 0 or th == c1**2:
        raise ZeroDivisionError("degenerate product form")
    lat = _lattice(c1)
    ratio = lat.velocities / c1
    amp = (P - c1**2) / (th - c1**2)
    f = rho * _weights(th, c1) * amp * (root / denom) ** ratio
    if inp.m_max == 2:
        if P == c1**2:
            raise ZeroDivisionError("pressure trace equals c1^2")
        f = f * ((th - c1**2) * root / (rho * th * (P - c1**2))) ** (ratio**2)
    return Populations(lat.velocities, f)


def elb_lagrange_oracle(inp: ElbInput, max_iter: int = 100, tol: float = 1e-14) -> Populations:
    """Minimize sum f log(f/W) under the moment constraints by damped Newton
    on the Lagrange multipliers of f_i = W_i exp(sum_m lam_m c_i^m)."""
    c = _lattice(inp.c1).velocities
    W = _weights(inp.theta, inp.c1)
    nm = inp.m_max + 1
    targets = np.array([inp.rho, inp.j, inp.rho * inp.pressure_trace()][:nm])
    if inp.m_max == 2 and inp.rho * inp.pressure_trace() <= abs(inp.j) * inp.c1:
        raise ValueError("constraints outside the realizable set")
    basis = np.array([c**m for m in range(nm)])
    lam = np.zeros(nm)
    lam[0] = math.log(inp.rho)

    def residual(lm):
        f = W * np.exp(lm @ basis)
        return f, basis @ f - targets

    f, r = residual(lam)
    for _ in range(max_iter):
        if np.max(np.abs(r)) <= tol * max(1.0, inp.rho):
            return Populations(c, f)
        J = (basis * f) @ basis.T
        step = np.linalg.solve(J, r)
        t = 1.0
        while True:
            trial = lam - t * step
            f_new, r_new = residual(trial)
            if np.all(np.isfinite(r_new)) and np.linalg.norm(r_new) < np.linalg.norm(r) or t < 1e-8:
                break
            t *= 0.5
        lam, f, r = trial, f_new, r_new
    if np.max(np.abs(r)) <= 1e3 * tol * max(1.0, inp.rho):
        return Populations(c, f)
    raise ArithmeticError("Lagrange multiplier iteration did not converge")


def entropy(pops: Populations, theta: float, c1: float = 1.0) -> float:
    W = _weights(theta, c1)
    return float(np.sum(pops.values * np.log(pops.values / W)))


TABLE_ROWS = ("H2_mu0", "H3_mu0", "H2_mu", "H3_mu", "E1", "E2")


@dataclass(frozen=True)
class ElbRow:
    row: str
    rho: float
    u: float
    theta: float
    mu: float
    j: float
    P: float
    Q: float
    res_j: float
    res_P_mb: float
    res_P_mu: float
    res_Q_mb: float


def table_row(row: str, rho: float, u: float, theta: float, c1: float = 1.0) -> ElbRow:
    """Moments J, P, Q of one equilibrium and their residuals.

    res_P_mb is measured against rho(theta + u^2); res_P_mu against
    rho(c1^2 - 2 theta) + rho u^2; res_Q_mb against rho(3 theta u + u^3).
    """
    lat = _lattice(c1)
    mu = 0.0
    if row in ("H2_mu0", "H3_mu0", "H2_mu", "H3_mu"):
        order = 2 if row.startswith("H2") else 3
        if row.endswith("_mu"):
            mu = mu_for_d1q3(theta, c1)
        pops = edf(ModelParams(lat, mu, theta), FlowState(rho, u), order)
    elif row == "E1":
        theta = c1**2 / 3
        pops = elb_edf(ElbInput(rho, rho * u, theta, c1, 1))
    elif row == "E2":
        pops = elb_edf(ElbInput(rho, rho * u, theta, c1, 2))
    else:
        raise ValueError(f"unknown row {row!r}")
    J, P, Q = (raw_moment(pops, m) for m in (1, 2, 3))
    return ElbRow(
        row, rho, u, theta, mu, J, P, Q,
        J - rho * u,
        P - rho * (theta + u * u),
        P - (rho * (c1**2 - 2 * theta) + rho * u * u),
        Q - rho * (3 * theta * u + u**3),
    )


def compare_table(rho: float, u: float, theta: float, c1: float = 1.0) -> list:
    return [table_row(r, rho, u, theta, c1) for r in TABLE_ROWS]


def pressure_plateau(us=(0.02, 0.01, 0.005), rho: float = 1.0, c1: float = 1.0) -> list:
    """Pressure residual / u^4 of the first-order entropic equilibrium."""
    out = []
    th = c1**2 / 3
    for u in us:
        f = elb_edf(ElbInput(rho, rho * u, th, c1, 1))
        out.append((raw_moment(f, 2) - rho * (th + u * u)) / u**4)
    return out
