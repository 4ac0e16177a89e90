"""Standalone property suites exposed by the ``check`` CLI verb.

Each suite returns a JSON-ready dict with a ``pass`` flag and its measured
values: relative-quantity bounds on a sample square, the divergence-form
flux identity under grid refinement, the elliptic gain of the potential on
an ensemble of compact bumps, and the weight-function bounds.
"""

import numpy as np

from . import fd
from .errors import ValidationError
from .grid import Grid
from .poisson import flux_identity_residual, solve_phi
from .profile import eval_profile, solve_profile
from .relent import elliptic_ratio, rel_bounds_check
from .shift import weight_a


def check_rel_bounds(config, samples=200):
    """Verify the relative-quantity bounds around v_minus."""
    bar_delta = min(0.1, 0.25 * config.v_minus)
    rep = rel_bounds_check(config.v_minus, bar_delta, samples)
    return {
        "suite": "rel-bounds",
        "pass": bool(rep.lower_p_ok and rep.lower_v_ok),
        "report": rep.as_dict(),
    }


def check_flux_identity(config, profile=None):
    """Flux identity residual on the profile pair at two resolutions."""
    es = config.endstates()
    if profile is None:
        profile = solve_profile(es, config.profile_params())
    span = max(-profile.xi_min, profile.xi_max) + 5.0
    ratios = {}
    res = {}
    for n in (2048, 4096):
        grid = Grid(span, n)
        v, _, phi = eval_profile(profile, grid.x)
        res[n] = flux_identity_residual(v, phi, grid)
    ratio = res[2048] / res[4096]
    return {
        "suite": "flux-identity",
        "pass": bool(2.5 <= ratio <= 6.0),
        "residuals": {str(n): float(r) for n, r in res.items()},
        "refinement_ratio": float(ratio),
    }


def check_elliptic_ratio(config, n_bumps=20, profile=None):
    """Max H1/L2 elliptic gain over an ensemble of compact volume bumps.

    The ensemble is drawn from the configured seed; stability is measured
    against a once-refined grid.
    """
    es = config.endstates()
    if profile is None:
        profile = solve_profile(es, config.profile_params())
    rng = np.random.default_rng(config.seed)
    L = max(60.0, profile.xi_max + 10.0)
    centers = rng.uniform(-L / 3.0, L / 3.0, n_bumps)
    widths = rng.uniform(1.0, 5.0, n_bumps)
    amps = rng.uniform(0.002, 0.01, n_bumps) * rng.choice([-1.0, 1.0], n_bumps)

    def max_ratio(n_cells):
        grid = Grid(L, n_cells)
        vbar, _, _ = eval_profile(profile, grid.x)
        base = solve_phi(vbar, grid, (es.phi_minus, es.phi_plus))
        worst = 0.0
        for c, w, a in zip(centers, widths, amps):
            z = (grid.x - c) / w
            vt = a * np.exp(-0.5 * z * z)
            phif = solve_phi(vbar + vt, grid, (es.phi_minus, es.phi_plus),
                             guess=base.phi)
            worst = max(worst, elliptic_ratio(phif.phi - base.phi, vt, grid, k=1))
        return worst

    r_coarse = max_ratio(2048)
    r_fine = max_ratio(4096)
    drift = abs(r_fine / r_coarse - 1.0)
    return {
        "suite": "elliptic-ratio",
        "pass": bool(np.isfinite(r_fine) and drift <= 0.2),
        "max_ratio_coarse": float(r_coarse),
        "max_ratio_fine": float(r_fine),
        "relative_drift": float(drift),
        "n_bumps": int(n_bumps),
    }


def check_weight_bounds(config, profile=None):
    """Weight stays in [1, 1 + sqrt(delta_S)] and is nondecreasing."""
    es = config.endstates()
    if profile is None:
        profile = solve_profile(es, config.profile_params())
    xi = np.linspace(profile.xi_min - 10.0, profile.xi_max + 10.0, 20001)
    a = weight_a(profile, xi)
    root = np.sqrt(es.delta_S)
    in_bounds = bool(a.min() >= 1.0 and a.max() <= 1.0 + root)
    nondecreasing = bool(np.all(np.diff(a) >= 0.0))
    reaches = bool(a[0] <= 1.0 + 1e-9 and a[-1] >= 1.0 + root - 1e-9)
    return {
        "suite": "weight-bounds",
        "pass": in_bounds and nondecreasing and reaches,
        "min": float(a.min()),
        "max": float(a.max()),
        "upper_bound": float(1.0 + root),
        "nondecreasing": nondecreasing,
    }


SUITES = {
    "rel-bounds": check_rel_bounds,
    "flux-identity": check_flux_identity,
    "elliptic-ratio": check_elliptic_ratio,
    "weight-bounds": check_weight_bounds,
}


def run_checks(config, names=None):
    """Run the named suites (all by default); reuse one profile build."""
    names = list(names or SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValidationError([f"unknown check suite {n!r}" for n in unknown])
    profile = None
    if any(n != "rel-bounds" for n in names):
        profile = solve_profile(config.endstates(), config.profile_params())
    out = {}
    for name in names:
        fn = SUITES[name]
        out[name] = fn(config) if name == "rel-bounds" else fn(config, profile=profile)
    return out
