import numpy as np
import pytest
from scipy.integrate import quad

from nsplab import (
    Grid,
    NonPositiveVolume,
    State,
    ValidationError,
    ZeroDenominator,
    elliptic_ratio,
    eta_density,
    eta_integral,
    eval_profile,
    good_terms,
    rel_bounds_check,
    rel_p,
    rel_q,
    sobolev_norm,
    solve_phi,
)
from nsplab.physics import mod_pressure
from nsplab.relent import RelConstants, eta_envelope, eta_pointwise
from nsplab.shift import ShiftedFrame, shifted_frame


def constant_frame(n, v0=1.0, u0=0.0):
    ones = np.ones(n)
    zeros = np.zeros(n)
    return ShiftedFrame(vbarX=v0 * ones, ubarX=u0 * ones,
                        phibarX=-np.log(v0) * ones,
                        dvbarX=zeros, dubarX=zeros, aX=ones)


# ---------------------------------------------------------------------------
# relative quantities
# ---------------------------------------------------------------------------

def test_rel_q_hand_value():
    assert rel_q(1.2, 1.0) == pytest.approx(-2.0 * np.log(1.2) + 0.4, rel=1e-14)
    assert rel_q(1.2, 1.0) == pytest.approx(0.0353569, abs=1e-6)


def test_rel_p_hand_value():
    assert rel_p(1.2, 1.0) == pytest.approx(2.0 / 1.2 - 2.0 + 0.4, rel=1e-13)
    assert rel_p(1.2, 1.0) == pytest.approx(0.0666667, abs=1e-6)


def test_relative_quantities_vanish_at_coincidence(rng):
    v = rng.uniform(0.5, 2.0, 40)
    assert np.allclose(rel_q(v, v), 0.0, atol=1e-15)
    assert np.allclose(rel_p(v, v), 0.0, atol=1e-15)


def test_relative_quantities_strictly_positive(rng):
    for _ in range(200):
        vbar = rng.uniform(0.5, 2.0)
        v = vbar + rng.uniform(-0.4, 0.4) * vbar
        if abs(v - vbar) < 1e-12:
            continue
        assert rel_q(v, vbar) > 0.0
        assert rel_p(v, vbar) > 0.0


def test_relative_quantities_reject_nonpositive():
    with pytest.raises(NonPositiveVolume):
        rel_q(-1.0, 1.0)
    with pytest.raises(NonPositiveVolume):
        rel_p(1.0, 0.0)


# ---------------------------------------------------------------------------
# sampled bounds
# ---------------------------------------------------------------------------

def test_bounds_hand_values_at_reference_pair():
    q = rel_q(1.2, 1.0)
    dpt = mod_pressure(1.2) - mod_pressure(1.0)
    rhs_p = dpt ** 2 / mod_pressure(1.0) ** 2 \
        - 4.0 * dpt ** 3 / (3.0 * mod_pressure(1.0) ** 3)
    rhs_v = 0.2 ** 2 - (2.0 / 3.0) * 0.2 ** 3
    assert q == pytest.approx(0.0353569, abs=1e-6)
    assert rhs_p == pytest.approx(0.0339506, abs=1e-6)
    assert rhs_v == pytest.approx(0.0346667, abs=1e-6)
    assert rhs_p <= q and rhs_v <= q


def test_bounds_hold_on_sample_square():
    rep = rel_bounds_check(1.0, 0.2, samples=201)
    assert rep.lower_p_ok and rep.lower_v_ok
    assert rep.lower_p_min_margin >= -1e-13
    assert rep.lower_v_min_margin >= -1e-13
    assert rep.upper_p_constant > 0.0
    assert rep.upper_v_constant > 0.0


def test_bounds_degenerate_diagonal_is_equality():
    rep = rel_bounds_check(1.0, 1e-9, samples=5)
    assert rep.lower_p_ok and rep.lower_v_ok


def test_bounds_reject_large_radius():
    with pytest.raises(ValidationError):
        rel_bounds_check(1.0, 0.3)


# ---------------------------------------------------------------------------
# eta
# ---------------------------------------------------------------------------

def test_eta_zero_at_coincidence():
    frame = constant_frame(11)
    eta = eta_density(frame.vbarX, frame.ubarX, frame,
                      np.zeros(11), np.zeros(11))
    assert np.allclose(eta, 0.0, atol=1e-16)


def test_eta_pure_kinetic_value():
    frame = constant_frame(7)
    eta = eta_density(frame.vbarX, frame.ubarX + 0.1, frame,
                      np.zeros(7), np.zeros(7))
    assert np.allclose(eta, 0.005, atol=1e-15)


def test_eta_electric_terms():
    # for vbar=1, phibar=0: eta gains ptxx^2/2 + ptx^2/2 - vt*ptxx
    frame = constant_frame(5)
    ptx = np.full(5, 0.2)
    ptxx = np.full(5, 0.1)
    eta = eta_density(frame.vbarX + 0.01, frame.ubarX, frame, ptx, ptxx)
    expected = rel_q(1.01, 1.0) - 0.01 * 0.1 + 0.5 * 0.01 + 0.5 * 0.04
    assert np.allclose(eta, expected, rtol=1e-12)


def test_eta_integral_unperturbed_wave(ref_profile):
    es = ref_profile.endstates
    grid = Grid(90.0 / es.delta_S, 2048)
    frame = shifted_frame(ref_profile, 0.0, 0.0, grid)
    state = State(v=frame.vbarX, u=frame.ubarX, t=0.0)
    phif = solve_phi(frame.vbarX, grid, (es.phi_minus, es.phi_plus))
    snap = eta_integral(state, phif, frame, grid)
    assert 0.0 <= snap.eta_plain <= snap.eta_weighted < 1e-8


def test_eta_integral_quadratic_scaling(ref_profile):
    es = ref_profile.endstates
    grid = Grid(90.0 / es.delta_S, 1024)
    frame = shifted_frame(ref_profile, 0.0, 0.0, grid)
    base_phi = solve_phi(frame.vbarX, grid, (es.phi_minus, es.phi_plus))
    shape_u = np.exp(-0.5 * (grid.x / 5.0) ** 2)
    shape_v = np.exp(-0.5 * ((grid.x - 2.0) / 4.0) ** 2)
    vals = {}
    for eps in (0.01, 0.005, 0.0025):
        state = State(v=frame.vbarX + eps * shape_v,
                      u=frame.ubarX + eps * shape_u, t=0.0)
        phif = solve_phi(state.v, grid, (es.phi_minus, es.phi_plus),
                         guess=base_phi.phi)
        vals[eps] = eta_integral(state, phif, frame, grid).eta_weighted
    assert vals[0.01] / vals[0.005] == pytest.approx(4.0, rel=0.05)
    assert vals[0.005] / vals[0.0025] == pytest.approx(4.0, rel=0.05)


def test_eta_weighted_dominates_plain(ref_profile, rng):
    es = ref_profile.endstates
    grid = Grid(90.0 / es.delta_S, 512)
    frame = shifted_frame(ref_profile, 1.0, 0.2, grid)
    state = State(v=frame.vbarX,
                  u=frame.ubarX + 0.01 * np.exp(-0.5 * (grid.x / 6.0) ** 2),
                  t=1.0)
    phif = solve_phi(state.v, grid, (es.phi_minus, es.phi_plus))
    snap = eta_integral(state, phif, frame, grid)
    assert snap.eta_weighted >= snap.eta_plain >= 0.0


def test_eta_envelope_positive_on_perturbed_wave(ref_profile):
    es = ref_profile.endstates
    grid = Grid(90.0 / es.delta_S, 1024)
    frame = shifted_frame(ref_profile, 0.0, 0.0, grid)
    state = State(v=frame.vbarX + 0.004 * np.exp(-0.5 * ((grid.x + 3) / 4.0) ** 2),
                  u=frame.ubarX + 0.01 * np.exp(-0.5 * (grid.x / 5.0) ** 2),
                  t=0.0)
    phif = solve_phi(state.v, grid, (es.phi_minus, es.phi_plus))
    eta, quadv = eta_pointwise(state, phif, frame, grid)
    c, C = eta_envelope(eta, quadv)
    assert 0.0 < c <= C < np.inf
    mask = quadv > 1e-10 * quadv.max()
    assert np.all(eta[mask] >= c * quadv[mask] * (1 - 1e-12))
    assert np.all(eta[mask] <= C * quadv[mask] * (1 + 1e-12))


# ---------------------------------------------------------------------------
# good terms
# ---------------------------------------------------------------------------

def test_good_terms_zero_perturbation(ref_profile):
    es = ref_profile.endstates
    grid = Grid(90.0 / es.delta_S, 512)
    frame = shifted_frame(ref_profile, 0.0, 0.0, grid)
    state = State(v=frame.vbarX, u=frame.ubarX, t=0.0)
    phif = solve_phi(frame.vbarX, grid, (es.phi_minus, es.phi_plus))
    gt = good_terms(state, phif, frame, grid, RelConstants.from_endstates(es))
    assert gt.G1 == 0.0 and gt.GS == 0.0 and gt.D == 0.0


def test_good_terms_unit_velocity_telescopes(ref_profile):
    # ut == 1: GS = int vbar^X_x = v+ - v-; with vt = 0 the pressure deviation
    # is -1/(2 C*) pointwise so G1 = (sigma/sqrt(delta)) (v+ - v-) / (4 C*^2)
    es = ref_profile.endstates
    grid = Grid(90.0 / es.delta_S, 2048)
    frame = shifted_frame(ref_profile, 0.0, 0.0, grid)
    state = State(v=frame.vbarX, u=frame.ubarX + 1.0, t=0.0)
    phif = solve_phi(frame.vbarX, grid, (es.phi_minus, es.phi_plus))
    constants = RelConstants.from_endstates(es)
    gt = good_terms(state, phif, frame, grid, constants)
    jump = es.v_plus - es.v_minus
    assert gt.GS == pytest.approx(jump, abs=1e-4)
    expected_g1 = es.sigma / np.sqrt(es.delta_S) * jump / (4 * constants.C_star ** 2)
    assert gt.G1 == pytest.approx(expected_g1, rel=1e-3)
    assert gt.D == pytest.approx(0.0, abs=1e-12)


def test_good_terms_dissipation_oracle(ref_profile):
    # D for a smooth localized velocity profile vs adaptive quadrature
    es = ref_profile.endstates
    k, w = 0.7, 6.0

    def ut(x):
        return np.sin(k * x) * np.exp(-0.5 * (x / w) ** 2)

    def dut(x):
        return (k * np.cos(k * x) - x / w ** 2 * np.sin(k * x)) \
            * np.exp(-0.5 * (x / w) ** 2)

    oracle, _ = quad(lambda x: dut(x) ** 2, -60, 60, limit=300)
    errs = {}
    for n in (1024, 2048):
        grid = Grid(130.0, n)
        frame = shifted_frame(ref_profile, 0.0, 0.0, grid)
        state = State(v=frame.vbarX, u=frame.ubarX + ut(grid.x), t=0.0)
        phif = solve_phi(frame.vbarX, grid, (es.phi_minus, es.phi_plus))
        gt = good_terms(state, phif, frame, grid,
                        RelConstants.from_endstates(es))
        errs[n] = abs(gt.D - oracle)
    assert errs[2048] < 5e-3 * oracle
    assert 3.0 < errs[1024] / errs[2048] < 5.0


def test_rel_constants_from_endstates(ref_endstates):
    rc = RelConstants.from_endstates(ref_endstates)
    assert rc.C_star == pytest.approx(
        (1.0 - np.sqrt(ref_endstates.delta_S) / 2.0) * 1.0, rel=1e-14)
    assert rc.C_star > 0
    assert rc.M == pytest.approx(5.0 * np.sqrt(2.0) / 2.0, rel=1e-14)
    assert rc.delta_S == ref_endstates.delta_S
    assert rc.sigma == ref_endstates.sigma


# ---------------------------------------------------------------------------
# Sobolev norms
# ---------------------------------------------------------------------------

def test_sobolev_constant_field():
    grid = Grid(7.5, 64)
    c = -2.25
    f = np.full(grid.n_nodes, c)
    assert sobolev_norm(f, 0, grid) == pytest.approx(abs(c) * np.sqrt(15.0), rel=1e-14)
    assert sobolev_norm(f, 2, grid) == pytest.approx(abs(c) * np.sqrt(15.0), rel=1e-14)


def test_sobolev_windowed_sine_matches_analytic():
    k, w = 1.3, 4.0

    def f(x):
        return np.sin(k * x) * np.exp(-0.5 * (x / w) ** 2)

    def df(x):
        return (k * np.cos(k * x) - x / w ** 2 * np.sin(k * x)) \
            * np.exp(-0.5 * (x / w) ** 2)

    target = np.sqrt(quad(lambda x: f(x) ** 2, -40, 40, limit=200)[0]
                     + quad(lambda x: df(x) ** 2, -40, 40, limit=200)[0])
    errs = {}
    for n in (512, 1024):
        grid = Grid(40.0, n)
        errs[n] = abs(sobolev_norm(f(grid.x), 1, grid) - target)
    assert errs[1024] < 5e-4 * target
    assert 3.0 < errs[512] / errs[1024] < 5.0


def test_sobolev_nesting(rng):
    grid = Grid(10.0, 256)
    f = rng.standard_normal(grid.n_nodes)
    n0 = sobolev_norm(f, 0, grid)
    n1 = sobolev_norm(f, 1, grid)
    n2 = sobolev_norm(f, 2, grid)
    assert n2 >= n1 >= n0 > 0


def test_sobolev_multiple_fields(rng):
    grid = Grid(10.0, 128)
    f = rng.standard_normal(grid.n_nodes)
    g = rng.standard_normal(grid.n_nodes)
    combined = sobolev_norm([f, g], 1, grid)
    expected = np.sqrt(sobolev_norm(f, 1, grid) ** 2 + sobolev_norm(g, 1, grid) ** 2)
    assert combined == pytest.approx(expected, rel=1e-14)


def test_sobolev_rejects_bad_order():
    grid = Grid(10.0, 128)
    with pytest.raises(ValidationError):
        sobolev_norm(np.zeros(grid.n_nodes), 3, grid)


# ---------------------------------------------------------------------------
# elliptic ratio
# ---------------------------------------------------------------------------

def test_elliptic_ratio_zero_denominator():
    grid = Grid(10.0, 128)
    with pytest.raises(ZeroDenominator):
        elliptic_ratio(np.ones(grid.n_nodes), np.zeros(grid.n_nodes), grid, k=1)


def test_elliptic_ratio_amplitude_near_linearity(ref_profile):
    es = ref_profile.endstates
    grid = Grid(90.0 / es.delta_S, 1024)
    vbar, _, _ = eval_profile(ref_profile, grid.x)
    base = solve_phi(vbar, grid, (es.phi_minus, es.phi_plus))
    ratios = {}
    for eps in (0.01, 0.005):
        vt = eps * np.exp(-0.5 * ((grid.x - 5.0) / 3.0) ** 2)
        phif = solve_phi(vbar + vt, grid, (es.phi_minus, es.phi_plus),
                         guess=base.phi)
        ratios[eps] = elliptic_ratio(phif.phi - base.phi, vt, grid, k=1)
    assert ratios[0.01] == pytest.approx(ratios[0.005], rel=0.10)


def test_elliptic_ratio_orders(ref_profile):
    es = ref_profile.endstates
    grid = Grid(90.0 / es.delta_S, 1024)
    vbar, _, _ = eval_profile(ref_profile, grid.x)
    base = solve_phi(vbar, grid, (es.phi_minus, es.phi_plus))
    vt = 0.01 * np.exp(-0.5 * (grid.x / 4.0) ** 2)
    phif = solve_phi(vbar + vt, grid, (es.phi_minus, es.phi_plus), guess=base.phi)
    pt = phif.phi - base.phi
    for k in (1, 2, 3):
        r = elliptic_ratio(pt, vt, grid, k=k)
        assert np.isfinite(r) and r > 0
    with pytest.raises(ValidationError):
        elliptic_ratio(pt, vt, grid, k=4)
