"""Lattice sets, thermal quadrature weights and their temperature ranges."""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .special_fn import elementary_symmetric_all, gen_hermite, pochhammer, validate_mu

# above this z the float closed form cancels catastrophically; use exact rationals
FLOAT_CLOSED_FORM_MAX_Z = 8
REAL_ROOT_IMAG_TOL = 1e-9
POSITIVITY_TOL = -1e-12


@dataclass(frozen=True)
class LatticeSet:
    """Positive speeds c_1 < ... < c_z; the full set is {0, +-c_k}."""

    speeds: tuple

    def __post_init__(self):
        sp = tuple(float(c) for c in self.speeds)
        if not sp:
            raise ValueError("lattice needs at least one positive speed")
        if any(not math.isfinite(c) or c <= 0 for c in sp):
            raise ValueError(f"speeds must be positive and finite: {sp}")
        if any(b <= a for a, b in zip(sp, sp[1:])):
            raise ValueError(f"speeds must be strictly increasing: {sp}")
        object.__setattr__(self, "speeds", sp)

    @property
    def z(self) -> int:
        return len(self.speeds)

    @property
    def n_q(self) -> int:
        return 2 * self.z + 1

    @property
    def on_cartesian(self) -> bool:
        return all(float(c).is_integer() for c in self.speeds)

    @property
    def velocities(self) -> np.ndarray:
        """Signed velocities ordered -c_z, ..., 0, ..., c_z."""
        c = np.array(self.speeds)
        return np.concatenate([-c[::-1], [0.0], c])

    @classmethod
    def consecutive(cls, z: int) -> "LatticeSet":
        return cls(tuple(range(1, z + 1)))

    @classmethod
    def parse(cls, text: str) -> "LatticeSet":
        """Parse "0,±1,±2", "1 2 3", "1,3" or a range "1..5"."""
        text = text.strip()
        m = re.fullmatch(r"(\d+)\s*\.\.\s*(\d+)", text)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            return cls(tuple(range(lo, hi + 1)))
        tokens = [t for t in re.split(r"[,\s;]+", text) if t]
        speeds = set()
        for tok in tokens:
            tok = tok.replace("±", "").replace("+-", "").lstrip("+")
            try:
                v = abs(float(tok))
            except ValueError as exc:
                raise ValueError(f"cannot parse lattice token {tok!r}") from exc
            if v != 0:
                speeds.add(v)
        return cls(tuple(sorted(speeds)))

    def label(self) -> str:
        return f"D1Q{self.n_q}"


@dataclass(frozen=True)
class ModelParams:
    lattice: LatticeSet
    mu: float
    theta: float

    def __post_init__(self):
        validate_mu(self.mu)
        if not (math.isfinite(self.theta) and self.theta > 0):
            raise ValueError(f"theta must be positive, got {self.theta}")


@dataclass(frozen=True)
class WeightVector:
    """Values indexed by signed velocity (arrays ordered like LatticeSet.velocities)."""

    velocities: np.ndarray
    values: np.ndarray
    exact: tuple | None = field(default=None, compare=False, repr=False)

    def __getitem__(self, velocity: float) -> float:
        idx = np.flatnonzero(self.velocities == velocity)
        if idx.size == 0:
            raise KeyError(velocity)
        return float(self.values[idx[0]])

    def as_dict(self) -> dict:
        return {float(c): float(w) for c, w in zip(self.velocities, self.values)}

    @property
    def positive(self) -> bool:
        return bool(np.all(self.values > 0))

    def log10_abs(self) -> np.ndarray:
        """log10|W_i|, taken from the exact rationals when present."""
        if self.exact is None:
            with np.errstate(divide="ignore"):
                return np.log10(np.abs(self.values))
        out = []
        for w in self.exact:
            if w == 0:
                out.append(-math.inf)
            else:
                out.append(math.log10(abs(w.numerator)) - math.log10(w.denominator))
        return np.array(out)


@dataclass(frozen=True)
class ThetaPolynomial:
    """Polynomial in theta; coeffs[k] multiplies theta**k."""

    coeffs: tuple

    def __post_init__(self):
        c = [float(v) for v in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, theta):
        out = 0.0 * theta
        for c in reversed(self.coeffs):
            out = out * theta + c
        return out

    def derivative(self) -> "ThetaPolynomial":
        return ThetaPolynomial(tuple(k * c for k, c in enumerate(self.coeffs))[1:] or (0.0,))

    def roots(self) -> np.ndarray:
        """All complex roots: companion eigenvalues plus one Newton polish."""
        c = np.array(self.coeffs)
        # zero roots factor out exactly
        nz = 0
        while nz < len(c) - 1 and c[nz] == 0:
            nz += 1
        c = c[nz:]
        n = len(c) - 1
        found = [0j] * nz
        if n >= 1:
            comp = np.zeros((n, n))
            comp[0, :] = -c[-2::-1] / c[-1]
            comp[1:, :-1] = np.eye(n - 1)
            dp = self.derivative()
            for r in np.linalg.eigvals(comp):
                d = dp(r)
                if d != 0:
                    step = self(r) / d
                    if abs(step) < 1e-3 * (1 + abs(r)):
                        r = r - step
                found.append(complex(r))
        return np.array(found, dtype=complex)

    def real_roots(self) -> list:
        out = []
        for r in self.roots():
            if abs(r.imag) < REAL_ROOT_IMAG_TOL * (1 + abs(r)):
                out.append(float(r.real))
        return sorted(out)


def _squares(lattice: LatticeSet) -> list:
    return [c * c for c in lattice.speeds]


def _w0_coeffs(sq: Sequence, mu) -> list:
    """Coefficients (ascending in theta) of the centre-weight numerator."""
    z = len(sq)
    e = elementary_symmetric_all(list(sq))
    half = mu + Fraction(1, 2) if isinstance(mu, Fraction) else mu + 0.5
    coeffs = [0] * (z + 1)
    for i in range(z + 1):
        p = z - i
        coeffs[p] = (-1) ** p * 2**p * pochhammer(half, p) * e[i]
    return coeffs


def _wk_coeffs(sq: Sequence, mu, k: int) -> list:
    z = len(sq)
    rest = [s for j, s in enumerate(sq) if j != k - 1]
    e = elementary_symmetric_all(rest)
    half = mu + Fraction(1, 2) if isinstance(mu, Fraction) else mu + 0.5
    coeffs = [0] * (z + 1)
    for i in range(z):
        p = z - i
        coeffs[p] = (-1) ** (z - 1 - i) * 2**p * pochhammer(half, p) * e[i]
    return coeffs


def w0_numerator(lattice: LatticeSet, mu: float) -> ThetaPolynomial:
    validate_mu(mu)
    return ThetaPolynomial(tuple(_w0_coeffs(_squares(lattice), mu)))


def wk_numerator(lattice: LatticeSet, mu: float, k: int) -> ThetaPolynomial:
    validate_mu(mu)
    if not 1 <= k <= lattice.z:
        raise ValueError(f"k={k} out of range 1..{lattice.z}")
    return ThetaPolynomial(tuple(_wk_coeffs(_squares(lattice), mu, k)))


def _wk_denominator(sq: Sequence, k: int):
    ck2 = sq[k - 1]
    d = 2 * ck2
    for j, s in enumerate(sq):
        if j != k - 1:
            d = d * (s - ck2)
    return d


def _poly_eval(coeffs: Sequence, x):
    out = 0 * x
    for c in reversed(coeffs):
        out = out * x + c
    return out


def _assemble(lattice: LatticeSet, w0, wk: list, exact=None) -> WeightVector:
    vals = np.array(list(reversed(wk)) + [w0] + list(wk), dtype=float)
    return WeightVector(lattice.velocities, vals, exact)


def weights_exact(model: ModelParams) -> tuple:
    """Closed-form weights in exact rational arithmetic on the float inputs.

    Returns Fractions ordered -c_z..c_z. Used for large z where the float
    closed form suffers cancellation among terms of very different size.
    """
    sq = [Fraction(c) ** 2 for c in model.lattice.speeds]
    mu = Fraction(model.mu)
    th = Fraction(model.theta)
    e = elementary_symmetric_all(sq)
    w0 = _poly_eval(_w0_coeffs(sq, mu), th) / e[-1]
    wk = [_poly_eval(_wk_coeffs(sq, mu, k), th) / _wk_denominator(sq, k) for k in range(1, len(sq) + 1)]
    return tuple(list(reversed(wk)) + [w0] + wk)


def weights(model: ModelParams) -> WeightVector:
    lat = model.lattice
    if lat.z > FLOAT_CLOSED_FORM_MAX_Z:
        ex = weights_exact(model)
        return WeightVector(lat.velocities, np.array([float(w) for w in ex]), ex)
    sq = _squares(lat)
    th = model.theta
    e = elementary_symmetric_all(sq)
    w0 = _poly_eval(_w0_coeffs(sq, model.mu), th) / e[-1]
    wk = []
    for k in range(1, lat.z + 1):
        den = _wk_denominator(sq, k)
        if den == 0:
            raise ZeroDivisionError("repeated speeds in lattice")
        wk.append(_poly_eval(_wk_coeffs(sq, model.mu, k), th) / den)
    out = _assemble(lat, w0, wk)
    total = float(np.sum(out.values))
    assert abs(total - 1.0) < 1e-8 * max(1.0, float(np.max(np.abs(out.values)))), total
    return out


def weights_oracle(model: ModelParams, max_order: int | None = None) -> WeightVector:
    """Weights from the quadrature conditions sum_i W_i H_n(c_i/sqrt(2 theta)) = delta_n0.

    Orders 0..max_order are imposed (default n_q, one past the square system)
    and solved in the least-squares sense.
    """
    lat = model.lattice
    if max_order is None:
        max_order = lat.n_q
    if max_order < lat.n_q - 1:
        raise ValueError("max_order must be at least n_q - 1")
    a = lat.velocities / math.sqrt(2.0 * model.theta)
    A = np.array([gen_hermite(n, model.mu, a) for n in range(max_order + 1)])
    b = np.zeros(max_order + 1)
    b[0] = 1.0
    sol, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < lat.n_q:
        raise np.linalg.LinAlgError("singular quadrature system (degenerate lattice)")
    return WeightVector(lat.velocities, sol)


def weight_numerators(lattice: LatticeSet, mu: float) -> list:
    """[P_0, N_1, ..., N_z]."""
    return [w0_numerator(lattice, mu)] + [wk_numerator(lattice, mu, k) for k in range(1, lattice.z + 1)]


def all_weights_positive(lattice: LatticeSet, mu: float, theta: float, tol: float = POSITIVITY_TOL) -> bool:
    w = weights(ModelParams(lattice, mu, theta)).values
    return bool(np.all(w > tol * max(1.0, float(np.max(np.abs(w))))) and np.all(w != 0))


def theta_validity_range(lattice: LatticeSet, mu: float) -> list:
    """Open theta intervals on which every weight is positive, largest first."""
    validate_mu(mu)
    cuts = {0.0}
    for poly in weight_numerators(lattice, mu):
        cuts.update(r for r in poly.real_roots() if r > 0)
    edges = sorted(cuts)
    intervals = []
    for lo, hi in zip(edges, edges[1:] + [math.inf]):
        probe = 0.5 * (lo + hi) if math.isfinite(hi) else 2.0 * lo + 1.0
        if hi - lo < 1e-14 * (1 + hi):
            continue
        if all_weights_positive(lattice, mu, probe, tol=0.0):
            intervals.append((lo, hi))
    intervals.sort(key=lambda iv: iv[1] - iv[0], reverse=True)
    return intervals


def tensor_weights(one_d: WeightVector, d: int) -> dict:
    if d not in (2, 3):
        raise ValueError("d must be 2 or 3")
    pairs = list(zip(one_d.velocities.tolist(), one_d.values.tolist()))
    out = {}
    for combo in itertools.product(pairs, repeat=d):
        vel = tuple(c for c, _ in combo)
        out[vel] = math.prod(w for _, w in combo)
    return out


def velocity_index(lattice: LatticeSet, velocity: float) -> int:
    idx = np.flatnonzero(lattice.velocities == velocity)
    if idx.size == 0:
        raise KeyError(f"velocity {velocity} not in lattice")
    return int(idx[0])


def iter_speeds(text_or_lattice) -> Iterable:
    lat = text_or_lattice if isinstance(text_or_lattice, LatticeSet) else LatticeSet.parse(text_or_lattice)
    return lat.speeds
