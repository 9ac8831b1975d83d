"""Moments of the equilibrium, Gaussian and mu-generalized target moments,
coefficient extraction and reference-temperature polynomials."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .equilibrium import EquilibriumKernel, Populations, default_order
from .lattice_model import LatticeSet, ModelParams, ThetaPolynomial, all_weights_positive
from .special_fn import elementary_symmetric, elementary_symmetric_all, pochhammer, validate_mu

MATCH_RTOL = 1e-9
MOMENT_LETTERS = {0: "N", 1: "J", 2: "P", 3: "Q", 4: "R", 5: "S", 6: "V"}


def raw_moment(pops: Populations, M: int) -> float:
    if M < 0:
        raise ValueError("M must be non-negative")
    return float(np.sum(pops.values * pops.velocities**M))


def mb_moment_terms(M: int) -> dict:
    """Gaussian raw moment as {(u_power, theta_power): coefficient}, per unit density."""
    prev: dict = {}
    cur = {(0, 0): 1.0}
    for m in range(M):
        nxt: dict = {}
        for (j, k), c in cur.items():
            nxt[(j + 1, k)] = nxt.get((j + 1, k), 0.0) + c
        for (j, k), c in prev.items():
            nxt[(j, k + 1)] = nxt.get((j, k + 1), 0.0) + m * c
        prev, cur = cur, nxt
    return cur


def mb_target_moment(M: int, rho: float, u: float, theta: float) -> float:
    if M < 0:
        raise ValueError("M must be non-negative")
    prev, cur = 0.0, rho
    for m in range(M):
        prev, cur = cur, u * cur + m * theta * prev
    return cur


def script_f(n: int, m: int, mu: float) -> float:
    """prod_{j<m} (n - 2j + 2 mu) / (n - 2j); equals 1 at mu = 0."""
    out = 1.0
    for j in range(m):
        out *= (n - 2 * j + 2 * mu) / (n - 2 * j)
    return out


def m_moment_terms(M: int, mu: float) -> dict:
    """Target moment of the mu-generalized system as {(u_power, theta_power): coefficient}."""
    n = M - (M + 1) % 2
    return {(j, k): c * script_f(n, k, mu) for (j, k), c in mb_moment_terms(M).items()}


def m_target_moment(M: int, rho: float, u: float, theta: float, mu: float) -> float:
    validate_mu(mu)
    if mu == 0:
        return mb_target_moment(M, rho, u, theta)
    return rho * sum(c * u**j * theta**k for (j, k), c in m_moment_terms(M, mu).items())


def coefficient_name(M: int, u_power: int) -> str:
    return f"{MOMENT_LETTERS.get(M, f'M{M}_')}{u_power}"


@dataclass
class MomentPolynomial:
    """Equilibrium moment of order M as coefficients of rho theta^k u^j."""

    order: int
    terms: dict = field(default_factory=dict)
    theta: float = 1.0

    def evaluate(self, rho: float, u: float, theta: float | None = None) -> float:
        th = self.theta if theta is None else theta
        return rho * sum(c * u**j * th**k for (j, k), c in self.terms.items())

    def named(self) -> dict:
        return {coefficient_name(self.order, j): c for (j, k), c in sorted(self.terms.items())}


def _chebyshev_nodes(n: int, half_width: float = 0.5) -> np.ndarray:
    k = np.arange(n)
    return half_width * np.cos((2 * k + 1) * np.pi / (2 * n))


def moment_coefficients(model: ModelParams, order_n: int, M: int, kernel: EquilibriumKernel | None = None) -> MomentPolynomial:
    """Fit the M-th equilibrium moment as a polynomial in u and divide each
    u^j coefficient by theta^((M-j)/2) at the model temperature."""
    if M < 0:
        raise ValueError("M must be non-negative")
    kern = kernel or EquilibriumKernel(model, order_n)
    deg = max(M, order_n)
    us = _chebyshev_nodes(deg + 1)
    vel_pow = kern.velocities**M
    vals = kern.evaluate(1.0, us) @ vel_pow
    V = np.vander(us, deg + 1, increasing=True)
    coef = np.linalg.solve(V, vals)
    check = _chebyshev_nodes(deg + 3, 0.37)
    resid = np.max(np.abs(np.vander(check, deg + 1, increasing=True) @ coef - kern.evaluate(1.0, check) @ vel_pow))
    if resid > 1e-8 * max(1.0, float(np.max(np.abs(vals)))):
        raise ArithmeticError(f"moment fit residual {resid:.3e} too large")
    th = model.theta
    terms = {}
    for j, c in enumerate(coef):
        if (M - j) % 2:
            continue
        k = (M - j) // 2
        terms[(j, k)] = float(c) / th**k if k >= 0 else float(c)
    return MomentPolynomial(M, terms, th)


def _e(values: Sequence, k: int):
    return elementary_symmetric(list(values), k)


def coefficient_formulas_d1q5(theta: float, c1: float, c2: float) -> dict:
    th = theta
    e2 = _e([c1**2, c2**2, -3 * th], 2)
    s3 = -(
        c1**2 * c2**4 + 9 * c1**2 * th**2 - 3 * c1**4 * th + c1**4 * c2**2
        - 3 * c2**4 * th - 6 * th * c1**2 * c2**2 + 9 * c2**2 * th**2
    ) / (6 * th**3)
    return {
        "Q3": e2 / (-6 * th**2) - 1.5,
        "R2": e2 / (-2 * th**2) - 1.5,
        "S1": e2 / (-(th**2)),
        "S3": s3,
        "R4": 0.0,
        "S5": 0.0,
    }


def coefficient_formulas_d1q7(theta: float, c1: float, c2: float, c3: float) -> dict:
    th = theta
    a, b, c = c1**2, c2**2, c3**2
    e3 = _e([a, b, c, -3 * th], 3)
    e1 = a + b + c
    base = e3 + 15 * th**2 * e1
    v4 = (
        -90 * b * th**3 - 12 * a * th * b * c - 3 * c * a**2 * th - 3 * c**2 * a * th
        - 3 * c**2 * b * th + a**2 * c * b + b * a * c**2 - 3 * a**2 * th * b
        + 33 * b * th**2 * a + 33 * b * th**2 * c + 33 * a * th**2 * c + 15 * th**2 * b**2
        - 3 * c * th * b**2 - 3 * a * th * b**2 + a * c * b**2 + 45 * th**4
        + 15 * a**2 * th**2 - 90 * th**3 * c - 90 * th**3 * a + 15 * c**2 * th**2
    ) / (24 * th**4)
    return {
        "R4": (base - 81 * th**3) / (24 * th**3),
        "S3": (base - 45 * th**3) / (6 * th**3),
        "S5": 0.0,
        "V2": (base - 15 * th**3) / (2 * th**3),
        "V4": v4,
        "V6": 0.0,
    }


def reference_polynomial(lattice: LatticeSet, mu: float) -> ThetaPolynomial:
    """Polynomial whose roots make the (z+1)-th moment match its target.

    Coefficient of theta^(z-k) is (-1)^k 2^(z+1-k) (mu+1/2)_(z+1-k) e_k(c^2).
    Five-speed lattices carry an extra theta^5 term -36(1+2mu)(3+2mu)(5+2mu).
    """
    validate_mu(mu)
    z = lattice.z
    if z > 5:
        raise ValueError("reference temperature is defined for z <= 5")
    e = elementary_symmetric_all([c * c for c in lattice.speeds])
    coeffs = [0.0] * (z + 1)
    for k in range(z + 1):
        coeffs[z - k] = (-1) ** k * 2 ** (z + 1 - k) * pochhammer(mu + 0.5, z + 1 - k) * e[k]
    if z == 5:
        coeffs[5] += -36 * (1 + 2 * mu) * (3 + 2 * mu) * (5 + 2 * mu)
    return ThetaPolynomial(tuple(coeffs))


@dataclass(frozen=True)
class ReferenceRoot:
    value: complex
    is_real: bool
    positive_weights: bool

    @property
    def real(self) -> float:
        return float(self.value.real)


def reference_theta(lattice: LatticeSet, mu: float) -> list:
    """Every root of the reference polynomial; real ones flagged for weight positivity.

    Real roots come first in ascending order, then complex ones.
    """
    poly = reference_polynomial(lattice, mu)
    out = []
    for r in poly.roots():
        if abs(r.imag) < 1e-9 * (1 + abs(r)):
            x = float(r.real)
            pos = x > 0 and all_weights_positive(lattice, mu, x)
            out.append(ReferenceRoot(complex(x, 0.0), True, pos))
        else:
            out.append(ReferenceRoot(complex(r), False, False))
    out.sort(key=lambda rr: (not rr.is_real, rr.value.real, rr.value.imag))
    return out


def admissible_reference_thetas(lattice: LatticeSet, mu: float) -> list:
    """Real positive-weight reference temperatures, ascending."""
    return [r.real for r in reference_theta(lattice, mu) if r.is_real and r.positive_weights]


def mu_for_d1q3(theta: float, c1: float) -> float:
    if not 0 < theta < c1 * c1 / 2:
        raise ValueError(f"theta={theta} outside (0, c1^2/2)")
    return -(3 * theta - c1 * c1) / (2 * theta) + 0.0


def speed_of_sound(model: ModelParams, system: str) -> float:
    th = model.theta
    if system == "low_order_mu":
        arg = model.lattice.speeds[0] ** 2 - 2 * th
    elif system == "mb":
        arg = th
    elif system == "m_system":
        arg = (1 + 2 * model.mu) * th
    else:
        raise ValueError(f"unknown system {system!r}")
    if arg <= 0:
        raise ValueError("negative radicand for the speed of sound")
    return math.sqrt(arg)


def theta_from_gamma(d_m: float, c1: float) -> float:
    return d_m * c1 * c1 / (3 * d_m + 2)


@dataclass(frozen=True)
class CoefficientRow:
    name: str
    M: int
    u_power: int
    theta_power: int
    computed: float
    target: float
    matched: bool
    condition: str


@dataclass
class CoefficientReport:
    model: ModelParams
    order_n: int
    theta_ref: float
    rows: list

    def by_name(self) -> dict:
        return {r.name: r for r in self.rows}

    def as_text(self) -> str:
        head = f"{'coef':>5} {'M':>2} {'computed':>22} {'target':>22} {'match':>5}  condition"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            lines.append(
                f"{r.name:>5} {r.M:>2} {r.computed:>22.15g} {r.target:>22.15g} {('yes' if r.matched else 'no'):>5}  {r.condition}"
            )
        return "\n".join(lines)


def _matches(computed: float, target: float) -> bool:
    return abs(computed - target) <= MATCH_RTOL * (1 + abs(target))


def coefficient_report(model: ModelParams, order_n: int | None = None, max_moment: int | None = None) -> CoefficientReport:
    """Coefficients of every moment up to min(6, 2z+1), each compared with its
    target and classified by whether the match depends on the temperature."""
    lat, mu = model.lattice, model.mu
    N = order_n if order_n is not None else default_order(lat.n_q)
    top = max_moment if max_moment is not None else min(6, 2 * lat.z + 1)
    refs = admissible_reference_thetas(lat, mu) if lat.z <= 5 else []
    theta_ref = min(refs, key=lambda r: abs(r - model.theta)) if refs else model.theta
    probes = [theta_ref * 1.07, theta_ref * 0.93]
    fits_model = [moment_coefficients(model, N, M) for M in range(top + 1)]
    fits_ref = [moment_coefficients(ModelParams(lat, mu, theta_ref), N, M) for M in range(top + 1)]
    fits_probe = [[moment_coefficients(ModelParams(lat, mu, t), N, M) for M in range(top + 1)] for t in probes]
    rows = []
    for M in range(top + 1):
        targets = m_moment_terms(M, mu)
        for (j, k), c in fits_model[M].terms.items():
            # u-powers above M are exact zeros in the weights' symmetric quadrature
            if j > M and abs(c) < 1e-9:
                continue
            tgt = targets.get((j, k), 0.0)
            at_ref = _matches(fits_ref[M].terms[(j, k)], tgt)
            off = all(_matches(fp[M].terms[(j, k)], tgt) for fp in fits_probe)
            if at_ref and off:
                cond = "unconditional"
            elif at_ref:
                cond = "requires theta0"
            else:
                cond = "never"
            rows.append(CoefficientRow(coefficient_name(M, j), M, j, k, c, tgt, _matches(c, tgt), cond))
    rows.sort(key=lambda r: (r.M, r.u_power))
    return CoefficientReport(model, N, theta_ref, rows)
