"""Acceptance checks, one group per numbered criterion.

Every test carries a ``criterion(n)`` marker; the terminal summary prints a
PASS/FAIL line per criterion from these outcomes.
"""
import math
import time
from functools import lru_cache

import numpy as np
import pytest

from grids import LATTICES, MUS, interior_thetas, model_grid
from hermitelb.elb_reference import ElbInput, elb_lagrange_oracle, pressure_plateau, table_row
from hermitelb.equilibrium import FlowState, default_order, edf, first_negative_population, max_speed
from hermitelb.lattice_model import LatticeSet, ModelParams, theta_validity_range, weights, weights_oracle
from hermitelb.moments import (
    admissible_reference_thetas,
    coefficient_report,
    m_target_moment,
    mb_target_moment,
    raw_moment,
    reference_polynomial,
    reference_theta,
)
from hermitelb.special_fn import double_factorial, elementary_symmetric_all, gen_exponential, gen_hermite, pochhammer
from shock_checks import profile_structure

SQ10 = math.sqrt(10)
R5 = (1, 2, 3, 4, 5)

# (speeds, mu, expected reference temperature)
REFERENCE_CASES = [
    ((1, 3), 0.0, 1 + SQ10 / 5),
    ((1, 2, 3), 0.0, 0.697953322019683088),
    ((1, 2, 3, 5), 0.0, 0.756080852594268582),
    (R5, 0.0, 2.123517542924955553),
    ((1, 2), 1 / 3, 15 / 34 + 3 * math.sqrt(33) / 374),
    ((1, 2, 3), 0.2, 0.498011143151771857),
    ((1, 2, 3, 4), 0.2, 0.531822832492398970),
    (R5, 0.1, 2.056245985122330338),
]


def case_id(speeds, mu):
    return f"D1Q{2 * len(speeds) + 1}{{{','.join(map(str, speeds))}}}-mu{mu:.3g}"


def model_at(speeds, mu, theta):
    return ModelParams(LatticeSet(speeds), mu, theta)


# ---------------------------------------------------------------- criterion 1

@pytest.fixture(scope="module")
def reference_roots():
    t0 = time.perf_counter()
    roots = {(s, mu): reference_theta(LatticeSet(s), mu) for s, mu, _ in REFERENCE_CASES}
    return roots, time.perf_counter() - t0


@pytest.mark.criterion(1)
@pytest.mark.parametrize("speeds,mu,expected", REFERENCE_CASES, ids=[case_id(s, m) for s, m, _ in REFERENCE_CASES])
def test_reference_temperature(reference_roots, speeds, mu, expected):
    roots = reference_roots[0][(speeds, mu)]
    real = [r.real for r in roots if r.is_real and r.positive_weights]
    assert min(abs(r - expected) for r in real) <= 1e-12, real


@pytest.mark.criterion(1)
def test_reference_temperature_runtime(reference_roots):
    assert reference_roots[1] < 1.0


# ---------------------------------------------------------------- criterion 2

@pytest.mark.criterion(2)
@pytest.mark.parametrize("speeds", [(1, 2), (1, 2, 3, 4)])
def test_complex_reference_at_mu_zero(speeds):
    roots = reference_theta(LatticeSet(speeds), 0.0)
    assert roots and all(not r.is_real for r in roots)
    assert all(abs(r.value.imag) > 1e-3 for r in roots)
    assert admissible_reference_thetas(LatticeSet(speeds), 0.0) == []


@pytest.mark.criterion(2)
@pytest.mark.parametrize("speeds,mu,expected", [REFERENCE_CASES[4], REFERENCE_CASES[6]], ids=["D1Q5", "D1Q9"])
def test_real_reference_at_positive_mu(speeds, mu, expected):
    match = [r for r in reference_theta(LatticeSet(speeds), mu) if r.is_real and abs(r.real - expected) < 1e-10]
    assert len(match) == 1 and match[0].positive_weights
    assert weights(model_at(speeds, mu, match[0].real)).positive


# ---------------------------------------------------------------- criterion 3

UNCO, REQU, NEVER = "unconditional", "requires theta0", "never"


def expected_coefficients(n_q, mu):
    """{name: (value or None, condition)}; None means 'equals the target'."""
    a, b, c = 3 + 2 * mu, 5 + 2 * mu, 2 * (3 + 2 * mu)
    if n_q == 5:
        return {"Q3": (1, REQU), "R2": (c, REQU), "R4": (0, NEVER), "S1": (a * b, REQU),
                "S3": (6.1257 if mu == 0 else None, NEVER), "S5": (0, NEVER)}
    if n_q == 7:
        return {"Q3": (1, UNCO), "R2": (None, UNCO), "R4": (1, REQU), "S1": (None, UNCO),
                "S3": (2 * b, REQU), "S5": (0, NEVER), "V2": (3 * a * b, REQU),
                "V4": (13.7497 if mu == 0 else None, NEVER), "V6": (0, NEVER)}
    if n_q == 9:
        return {"Q3": (None, UNCO), "R2": (None, UNCO), "R4": (None, UNCO), "S1": (None, UNCO),
                "S3": (None, UNCO), "S5": (1, REQU), "V2": (None, UNCO), "V4": (3 * b, REQU), "V6": (0, NEVER)}
    names = ("Q3", "R2", "R4", "S1", "S3", "S5", "V2", "V4")
    return {**{k: (None, UNCO) for k in names}, "V6": (1, REQU)}


# lattice per column: the zero-mu column uses the reference
# temperatures; the mu columns take the first lattice of each size with a
# real reference temperature
COLUMN_LATTICES = {5: [(1, 2), (1, 3)], 7: [(1, 2, 3)], 9: [(1, 2, 3, 4), (1, 2, 3, 5)], 11: [R5]}
ZERO_MU_REFERENCE = {5: ((1, 3), 1 + SQ10 / 5), 7: ((1, 2, 3), REFERENCE_CASES[1][2]),
                     9: ((1, 2, 3, 5), REFERENCE_CASES[2][2]), 11: (R5, REFERENCE_CASES[3][2])}


def column_model(n_q, mu):
    if mu == 0:
        speeds, th = ZERO_MU_REFERENCE[n_q]
        return model_at(speeds, 0.0, th)
    for speeds in COLUMN_LATTICES[n_q]:
        roots = admissible_reference_thetas(LatticeSet(speeds), mu)
        if roots:
            return model_at(speeds, mu, roots[0])
    return None


@lru_cache(maxsize=None)
def column_report(n_q, mu):
    m = column_model(n_q, mu)
    return None if m is None else coefficient_report(m).by_name()


COEFF_ITEMS = [
    (n_q, mu, name)
    for mu in (0.0, 0.1, 0.2, 1 / 3)
    for n_q in (5, 7, 9, 11)
    for name in expected_coefficients(n_q, mu)
]


@pytest.mark.criterion(3)
@pytest.mark.parametrize("n_q,mu,name", COEFF_ITEMS, ids=[f"mu{m:.3g}-D1Q{n}-{k}" for n, m, k in COEFF_ITEMS])
def test_coefficient_entry(n_q, mu, name):
    rep = column_report(n_q, mu)
    if rep is None:
        pytest.skip(f"no real reference temperature for D1Q{n_q} at mu={mu:.4g}")
    value, condition = expected_coefficients(n_q, mu)[name]
    row = rep[name]
    if value is None:
        if condition == NEVER:
            assert abs(row.computed - row.target) > 1e-6
        else:
            assert row.computed == pytest.approx(row.target, abs=1e-9)
    else:
        tol = 5e-4 if name in ("S3", "V4") and condition == NEVER else 1e-9
        assert row.computed == pytest.approx(value, abs=tol)
    assert row.condition == condition, (row.computed, row.target)


@pytest.mark.criterion(3)
def test_coefficient_runtime():
    column_report.cache_clear()
    t0 = time.perf_counter()
    for mu in (0.0, 0.1, 0.2, 1 / 3):
        for n_q in (5, 7, 9, 11):
            column_report(n_q, mu)
    assert time.perf_counter() - t0 < 5.0


# ---------------------------------------------------------------- criterion 4

MOMENT_CASES = [
    (speeds, mu)
    for n_q in (5, 7, 9, 11)
    for speeds in LATTICES[n_q]
    for mu in MUS
    if theta_validity_range(LatticeSet(speeds), mu)
]
SPEEDS_U = (0.0, 0.1, -0.1, 0.25, -0.25)
RHO = 1.3


def moment_mismatches(model, moments):
    N = default_order(model.lattice.n_q)
    bad = []
    for u in SPEEDS_U:
        f = edf(model, FlowState(RHO, u), N)
        for M in moments:
            target = m_target_moment(M, RHO, u, model.theta, model.mu)
            scale = max(abs(target), RHO * (model.theta + u * u) ** (M / 2))
            if abs(raw_moment(f, M) - target) > 1e-10 * scale:
                bad.append((model.theta, u, M, raw_moment(f, M), target))
    return bad


@pytest.mark.criterion(4)
@pytest.mark.parametrize("speeds,mu", MOMENT_CASES, ids=[case_id(s, m) for s, m in MOMENT_CASES])
def test_moments_through_z(speeds, mu):
    lat = LatticeSet(speeds)
    bad = []
    for th in interior_thetas(theta_validity_range(lat, mu)[0], 5):
        bad += moment_mismatches(ModelParams(lat, mu, th), range(lat.z + 1))
    assert not bad, bad[:3]


REFERENCE_MOMENT_CASES = [
    (speeds, mu, th)
    for speeds, mu in MOMENT_CASES
    for th in admissible_reference_thetas(LatticeSet(speeds), mu)
]


@pytest.mark.criterion(4)
@pytest.mark.parametrize(
    "speeds,mu,theta", REFERENCE_MOMENT_CASES,
    ids=[f"{case_id(s, m)}-th{t:.4f}" for s, m, t in REFERENCE_MOMENT_CASES],
)
def test_next_moment_at_reference(speeds, mu, theta):
    lat = LatticeSet(speeds)
    bad = moment_mismatches(ModelParams(lat, mu, theta), [lat.z + 1])
    assert not bad, bad[:3]


# ---------------------------------------------------------------- criterion 5

GRID = model_grid()


@pytest.mark.criterion(5)
@pytest.mark.parametrize("nq", [3, 5, 7, 9, 11])
def test_closed_form_equals_linear_system(nq):
    cases = [g for g in GRID if 2 * len(g[0]) + 1 == nq]
    assert cases
    for speeds, mu, th in cases:
        m = model_at(speeds, mu, th)
        assert np.allclose(weights(m).values, weights_oracle(m).values, rtol=1e-10, atol=1e-12), (speeds, mu, th)


@pytest.mark.criterion(5)
def test_hermite_root_lattice():
    lat = LatticeSet((math.sqrt(5 - SQ10), math.sqrt(5 + SQ10)))
    w = weights(ModelParams(lat, 0.0, 1.0))
    expected = [(7 - 2 * SQ10) / 60, (7 + 2 * SQ10) / 60, 8 / 15, (7 + 2 * SQ10) / 60, (7 - 2 * SQ10) / 60]
    assert np.max(np.abs(w.values - expected)) <= 1e-12


# ---------------------------------------------------------------- criterion 6

RANGE_CASES = [
    ((1, 3), 0.0, (1 / 3, 3.0), 1e-12),
    ((1, 2), 1 / 3, (3 / 11, 12 / 11), 1e-12),
    ((1, 2, 3), 0.0, (1 - SQ10 / 5, 1 + SQ10 / 5), 1e-12),
    ((1, 2, 3), 0.2, (25 / 27 - 5 * math.sqrt(3094) / 459, 1.4012838319803405639), 1e-10),
    ((1, 2, 3, 5), 0.0, (0.69795332201968308824, 2.8813110617160394282), 1e-10),
    ((1, 2, 3, 4), 0.2, (0.4980111431517718576, 1.8296369738811011412), 1e-10),
    (R5, 0.0, (0.75608085259426858231, 2.1753823865730406947), 1e-10),
    (R5, 0.1, (0.963908781629469643, 2.141493081363463722), 1e-10),
]


@pytest.mark.criterion(6)
@pytest.mark.parametrize("speeds,mu,interval,tol", RANGE_CASES, ids=[case_id(s, m) for s, m, _, _ in RANGE_CASES])
def test_validity_range(speeds, mu, interval, tol):
    lo, hi = theta_validity_range(LatticeSet(speeds), mu)[0]
    assert abs(lo - interval[0]) <= tol and abs(hi - interval[1]) <= tol, (lo, hi)


@pytest.mark.criterion(6)
def test_range_chaining():
    th0 = admissible_reference_thetas(LatticeSet((1, 2, 3)), 0.0)[0]
    lo = theta_validity_range(LatticeSet((1, 2, 3, 5)), 0.0)[0][0]
    assert abs(th0 - lo) <= 1e-12


# ---------------------------------------------------------------- criterion 7

SPEED_CASES = [(s, mu, th, u) for (s, mu, th), u in zip(REFERENCE_CASES, (1.145, 0.761, 0.346, 1.117, 0.802, 1.081, 0.443, 1.323))]


@pytest.fixture(scope="module")
def speed_limits():
    t0 = time.perf_counter()
    out = {}
    for s, mu, th, _ in SPEED_CASES:
        m = model_at(s, mu, th)
        out[(s, mu)] = max_speed(m, default_order(m.lattice.n_q))
    return out, time.perf_counter() - t0


@pytest.mark.criterion(7)
@pytest.mark.parametrize("speeds,mu,theta,expected", SPEED_CASES, ids=[case_id(s, m) for s, m, _, _ in SPEED_CASES])
def test_max_speed(speed_limits, speeds, mu, theta, expected):
    got = speed_limits[0][(speeds, mu)]
    assert abs(got - expected) <= 0.005, got


@pytest.mark.criterion(7)
def test_max_speed_runtime(speed_limits):
    assert speed_limits[1] < 10.0


# ---------------------------------------------------------------- criterion 8

def approx5(x):
    return pytest.approx(x, rel=0.05)


@pytest.mark.criterion(8)
def test_tail_d1q11_unit_temperature():
    w = weights(ModelParams(LatticeSet.consecutive(5), 0.0, 1.0))
    assert 1.25e-4 <= w[4.0] <= 1.35e-4
    assert 1.55e-6 <= w[5.0] <= 1.65e-6


@pytest.mark.criterion(8)
def test_tail_d1q11_reference():
    w = weights(ModelParams(LatticeSet.consecutive(5), 0.0, REFERENCE_CASES[3][2]))
    assert w[4.0] == approx5(8.2e-4)
    assert w[5.0] == approx5(1.6e-3)


@pytest.mark.criterion(8)
def test_tail_d1q13():
    w = weights(ModelParams(LatticeSet.consecutive(6), 0.0, 2.0))
    assert w[5.0] == approx5(3.9e-4)
    assert w[6.0] == approx5(5.7e-5)


@pytest.mark.criterion(8)
@pytest.mark.parametrize(
    "z,theta,first,last,bracket",
    [(40, 9.0, 30, 40, (-40, -25)), (100, 12.0, 90, 100, (-100, -80)), (100, 20.0, 90, 100, (-100, -80))],
    ids=["D1Q81-th9", "D1Q201-th12", "D1Q201-th20"],
)
def test_extreme_exponents(z, theta, first, last, bracket):
    logs = weights(ModelParams(LatticeSet.consecutive(z), 0.0, theta)).log10_abs()
    exps = [math.floor(logs[z + k]) for k in range(first, last + 1)]
    assert all(bracket[0] <= b <= bracket[1] for b in exps), exps


# ---------------------------------------------------------------- criterion 9

ONSETS = [
    (1.0, 0.75, [-3]), (1.0, 1.1, [-3, -2]), (1.0, 1.35, [-3, -2, 0]),
    ("ref", 1.12, [-4]), ("ref", 1.5, [-4, -3]), ("ref", 2.0, [-4, -3, 0]),
]


@pytest.mark.criterion(9)
@pytest.mark.parametrize("theta,u,expected", ONSETS, ids=[f"th{t}-u{u}" for t, u, _ in ONSETS])
@pytest.mark.parametrize("sign", [1, -1], ids=["pos", "neg"])
def test_negative_onsets(theta, u, expected, sign):
    th = REFERENCE_CASES[3][2] if theta == "ref" else theta
    got = first_negative_population(ModelParams(LatticeSet.consecutive(5), 0.0, th), 6, sign * u)
    assert sorted(got) == sorted(sign * c for c in expected), got


# ---------------------------------------------------------------- criterion 10

@pytest.mark.criterion(10)
def test_second_order_hermite_pressure():
    assert abs(table_row("H2_mu0", 1.0, 0.1, 1 / 3).res_P_mb) <= 1e-12
    for th in (0.2, 0.3, 0.4, 0.45):
        assert abs(table_row("H2_mu0", 1.0, 0.1, th).res_P_mb) > 1e-3


@pytest.mark.criterion(10)
@pytest.mark.parametrize("theta", [0.2, 0.3, 0.45])
def test_tied_mu_third_order(theta):
    for rho, u in ((1.0, 0.1), (1.4, -0.2), (0.7, 0.05)):
        r = table_row("H3_mu", rho, u, theta)
        assert r.j == pytest.approx(rho * u, abs=1e-13)
        assert r.P == pytest.approx(rho * (1 - 2 * theta) + rho * u * u, abs=1e-13)
        assert r.Q == pytest.approx(rho * u, abs=1e-13)


@pytest.mark.criterion(10)
def test_first_order_entropic_plateau():
    ratios = pressure_plateau()
    assert (max(ratios) - min(ratios)) / min(abs(r) for r in ratios) < 0.2
    # the same plateau from the Lagrange-multiplier oracle
    oracle = []
    for u in (0.02, 0.01, 0.005):
        f = elb_lagrange_oracle(ElbInput(1.0, u, 1 / 3, m_max=1))
        oracle.append((raw_moment(f, 2) - (1 / 3 + u * u)) / u**4)
    assert (max(oracle) - min(oracle)) / min(abs(r) for r in oracle) < 0.2


@pytest.mark.criterion(10)
def test_second_order_entropic_pressure():
    for rho, u, th in ((1.0, 0.1, 1 / 3), (1.2, -0.15, 0.3), (0.8, 0.2, 0.4)):
        assert abs(table_row("E2", rho, u, th).res_P_mb) <= 1e-12


# ---------------------------------------------------------------- criterion 11

@pytest.mark.criterion(11)
@pytest.mark.parametrize("key", ["mu0", "mu02"])
def test_shock_tube_finite_and_conservative(shock_runs, key):
    res, _ = shock_runs[key]
    assert res.last.step == 3000
    assert np.all(np.isfinite(res.final.f))
    assert abs(res.last.mass / res.initial_mass - 1) <= 1e-10
    assert abs(res.last.momentum) <= 1e-8


@pytest.mark.criterion(11)
@pytest.mark.parametrize("key", ["mu0", "mu02"])
def test_shock_tube_profile(shock_runs, key):
    res, _ = shock_runs[key]
    st = profile_structure(res.last.rho, 1.0, 0.5)
    assert st["plateau"] and st["monotone"] and st["front"], st


@pytest.mark.criterion(11)
@pytest.mark.parametrize("key", ["mu0", "mu02"])
def test_shock_tube_runtime(shock_runs, key):
    assert shock_runs[key][1] < 60.0


# ---------------------------------------------------------------- criterion 12

def classical_hermite(n, x):
    h0, h1 = 1.0, 2 * x
    if n == 0:
        return h0
    for k in range(1, n):
        h0, h1 = h1, 2 * x * h1 - 2 * k * h0
    return h1


@pytest.mark.criterion(12)
@pytest.mark.parametrize("mu", [0.0, 0.1, 1 / 3])
def test_generating_function(mu):
    for a in np.linspace(-0.5, 0.5, 9):
        for x in np.linspace(-2, 2, 9):
            series = sum(gen_hermite(n, mu, x) * a**n / math.factorial(n) for n in range(21))
            assert abs(series - gen_exponential(mu, 2 * x * a) * math.exp(-a * a)) <= 1e-8


@pytest.mark.criterion(12)
def test_hermite_reduction():
    for n in range(9):
        for x in np.linspace(-3, 3, 25):
            ref = classical_hermite(n, float(x))
            assert abs(gen_hermite(n, 0.0, float(x)) - ref) <= 1e-12 * max(1.0, abs(ref))


@pytest.mark.criterion(12)
def test_exponential_reduction():
    for x in np.linspace(-10, 10, 41):
        assert gen_exponential(0.0, float(x)) == pytest.approx(math.exp(x), rel=1e-13)


@pytest.mark.criterion(12)
def test_moment_reduction():
    for M in range(9):
        for u in (-0.4, 0.0, 0.3):
            for th in (0.3, 1.0, 2.2):
                assert m_target_moment(M, 1.1, u, th, 0.0) == mb_target_moment(M, 1.1, u, th)
                assert m_target_moment(M, 1.1, u, th, 1e-12) == pytest.approx(mb_target_moment(M, 1.1, u, th), rel=1e-9, abs=1e-12)


@pytest.mark.criterion(12)
def test_reference_condition_reduction():
    for m in range(10):
        assert 2 ** (m + 1) * pochhammer(0.5, m + 1) == double_factorial(2 * m + 1)
    for speeds in ((1,), (1, 2), (1, 3), (1, 2, 3), (1, 2, 3, 4), (1, 2, 3, 5), R5):
        lat = LatticeSet(speeds)
        z = lat.z
        e = elementary_symmetric_all([c * c for c in speeds])
        coeffs = reference_polynomial(lat, 0.0).coeffs
        for k in range(z + 1):
            expected = (-1) ** k * double_factorial(lat.n_q - 2 * k) * e[k]
            if z == 5 and k == 0:
                # five-speed lattices carry an extra top-power correction -36(1+2mu)(3+2mu)(5+2mu)
                expected -= 540
            assert coeffs[z - k] == pytest.approx(expected, rel=1e-13), (speeds, k)
