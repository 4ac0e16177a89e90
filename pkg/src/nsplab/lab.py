"""Experiment orchestration: perturbed runs, diagnostics, verdicts, emission.

A single experiment builds the reference wave, perturbs it, advances the
PDE and the shift ODE in lockstep, and assembles one DiagnosticsRecord per
observer tick. Empirical stability constants (energy ratio, shift bound,
functional-equivalence envelope, elliptic ratio) are measured from the
record series alone, so every verdict can be re-checked offline from the
emitted CSV.
"""

import csv
import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import fd
from .errors import NewtonDiverged, NonPositiveVolume, ValidationError
from .evolve import State, Stepper, cfl_dt
from .profile import eval_profile, solve_profile, verify_profile
from .relent import (
    RelConstants,
    _hk_norm_sq,
    eta_envelope,
    eta_pointwise,
    good_terms,
)
from .shift import ShiftState, advance_shift, shift_rate_from_velocity, shifted_frame

FLOAT_FMT = "%.17g"


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------

def make_initial(profile, grid, pert):
    """Sample the reference wave on the grid and superpose a perturbation.

    Families: ``none`` (exact wave), ``gaussian`` (nonzero-mass bump),
    ``dipole`` (zero-mass derivative of a gaussian) and ``shifted_profile``
    (wave translated by the amplitude). Gaussian and dipole bumps apply to
    u, v or both per ``apply_to``.
    """
    radius = pert.support_radius()
    if radius >= grid.half_width:
        raise ValidationError(
            f"perturbation support radius {radius:.1f} does not fit inside "
            f"the domain half-width {grid.half_width:.1f}"
        )
    if pert.family == "shifted_profile":
        vbar, ubar, _ = eval_profile(profile, grid.x - pert.amplitude)
        return State(v=vbar, u=ubar, t=0.0)

    vbar, ubar, _ = eval_profile(profile, grid.x)
    v = np.array(vbar)
    u = np.array(ubar)
    if pert.family != "none":
        z = (grid.x - pert.center) / pert.width
        if pert.family == "gaussian":
            bump = pert.amplitude * np.exp(-0.5 * z * z)
        elif pert.family == "dipole":
            bump = -pert.amplitude * z * np.exp(-0.5 * z * z)
        else:
            raise ValidationError(f"unknown perturbation family {pert.family!r}")
        if pert.apply_to in ("u", "both"):
            u = u + bump
        if pert.apply_to in ("v", "both"):
            v = v + bump
    return State(v=v, u=u, t=0.0)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagnosticsRecord:
    """Per-tick snapshot of the shift, perturbation norms and functionals."""

    t: float
    X: float
    Xdot: float
    linf_v: float
    linf_u: float
    l2_v: float
    l2_u: float
    h1_v: float
    h1_u: float
    h2_v: float
    h2_u: float
    phi_h1: float
    phi_h2: float
    phi_h3: float
    eta_weighted: float
    eta_plain: float
    quad_norm: float
    env_min: float
    env_max: float
    G1: float
    GS: float
    D: float
    cumulative: float
    g: float
    delta_mass: float
    delta_momentum: float
    newton_iters: int


CSV_FIELDS = tuple(DiagnosticsRecord.__dataclass_fields__)


@dataclass
class ExperimentResult:
    """Record series plus measured constants and (optional) verdicts."""

    records: list
    config: dict
    derived: dict
    profile_report: dict
    profile_meta: dict
    empirical: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    failed: bool = False
    failure: str = ""
    snapshots: list = field(default_factory=list, repr=False)

    def series(self, name):
        return np.array([getattr(r, name) for r in self.records])


def _assemble_record(state, phifield, profile, shift, grid, constants,
                     flux, mass0, mom0, prev):
    frame = shifted_frame(profile, state.t, shift.X, grid)
    vt = state.v - frame.vbarX
    ut = state.u - frame.ubarX
    pt = phifield.phi - frame.phibarX
    dx = grid.dx

    eta, quad = eta_pointwise(state, phifield, frame, grid)
    env_min, env_max = eta_envelope(eta, quad)
    gt = good_terms(state, phifield, frame, grid, constants)

    h1_v_sq = _hk_norm_sq(vt, dx, 1)
    h1_u_sq = _hk_norm_sq(ut, dx, 1)
    g_val = (h1_v_sq - _hk_norm_sq(vt, dx, 0)) \
        + (h1_u_sq - _hk_norm_sq(ut, dx, 0)) \
        + (_hk_norm_sq(pt, dx, 1) - _hk_norm_sq(pt, dx, 0))

    integrand = constants.delta_S * shift.Xdot ** 2 + gt.G1 + gt.GS + gt.D
    if prev is None:
        cumulative = 0.0
    else:
        prev_rec, prev_integrand = prev
        cumulative = prev_rec.cumulative \
            + 0.5 * (integrand + prev_integrand) * (state.t - prev_rec.t)

    rec = DiagnosticsRecord(
        t=float(state.t),
        X=float(shift.X),
        Xdot=float(shift.Xdot),
        linf_v=float(np.abs(vt).max()),
        linf_u=float(np.abs(ut).max()),
        l2_v=fd.l2norm(vt, dx),
        l2_u=fd.l2norm(ut, dx),
        h1_v=float(np.sqrt(h1_v_sq)),
        h1_u=float(np.sqrt(h1_u_sq)),
        h2_v=float(np.sqrt(_hk_norm_sq(vt, dx, 2))),
        h2_u=float(np.sqrt(_hk_norm_sq(ut, dx, 2))),
        phi_h1=float(np.sqrt(_hk_norm_sq(pt, dx, 1))),
        phi_h2=float(np.sqrt(_hk_norm_sq(pt, dx, 2))),
        phi_h3=float(np.sqrt(_hk_norm_sq(pt, dx, 3))),
        eta_weighted=float(fd.trapz(frame.aX * eta, dx)),
        eta_plain=float(fd.trapz(eta, dx)),
        quad_norm=float(fd.trapz(quad, dx)),
        env_min=float(env_min),
        env_max=float(env_max),
        G1=gt.G1,
        GS=gt.GS,
        D=gt.D,
        cumulative=float(cumulative),
        g=float(g_val),
        delta_mass=float(fd.trapz(state.v, dx) - mass0 - flux.mass),
        delta_momentum=float(fd.trapz(state.u, dx) - mom0 - flux.momentum),
        newton_iters=int(phifield.newton_iters),
    )
    return rec, integrand


def _empirical_constants(records, delta_S):
    out = {}
    if not records:
        return out
    linf_u = np.array([r.linf_u for r in records])
    xdot = np.array([r.Xdot for r in records])
    h2_sq = np.array([r.h2_v ** 2 + r.h2_u ** 2 for r in records])
    cum = np.array([r.cumulative for r in records])

    den = h2_sq[0]
    out["C_emp"] = float((h2_sq + cum).max() / den) if den > 1e-30 else float("nan")

    live = linf_u > 1e-13
    out["C_shift"] = float((np.abs(xdot)[live] / linf_u[live]).max()) if live.any() \
        else float("nan")

    env_min = np.array([r.env_min for r in records])
    env_max = np.array([r.env_max for r in records])
    ok = np.isfinite(env_min)
    out["entsim_c"] = float(env_min[ok].min()) if ok.any() else float("nan")
    out["entsim_C"] = float(env_max[ok].max()) if ok.any() else float("nan")

    l2_v = np.array([r.l2_v for r in records])
    phi_h1 = np.array([r.phi_h1 for r in records])
    livev = l2_v > 1e-13
    out["elliptic_ratio_max"] = float((phi_h1[livev] / l2_v[livev]).max()) \
        if livev.any() else float("nan")
    out["max_abs_X"] = float(np.abs([r.X for r in records]).max())
    out["max_newton_iters"] = int(max(r.newton_iters for r in records))
    return out


def run_experiment(config, profile=None):
    """Run one configured experiment and measure its stability diagnostics.

    The PDE and the shift ODE advance in lockstep (shared SSP-RK2 stages);
    steps land exactly on observer ticks so record times are reproducible
    across resolutions. A run aborted by loss of positivity or a failed
    Poisson solve returns a result flagged ``failed`` with the partial series.
    """
    config.validate()
    es = config.endstates()
    if profile is None:
        profile = solve_profile(es, config.profile_params())
    report = verify_profile(profile)
    grid = config.grid()
    constants = RelConstants.from_endstates(es)
    state = make_initial(profile, grid, config.perturbation)
    stepper = Stepper(grid, config.form)
    shift = ShiftState()
    shift.Xdot = shift_rate_from_velocity(state.u, profile, shift.X, 0.0, grid)

    mass0 = fd.trapz(state.v, grid.dx)
    mom0 = fd.trapz(state.u, grid.dx)

    result = ExperimentResult(
        records=[],
        config=config.as_dict(),
        derived=config.derived(),
        profile_report=report.as_dict(),
        profile_meta=dict(profile.meta),
    )

    prev = None

    def observe():
        nonlocal prev
        phif = stepper.phi_for(state)
        rec, integ = _assemble_record(state, phif, profile, shift, grid,
                                      constants, stepper.flux, mass0, mom0, prev)
        result.records.append(rec)
        shift.record(state.t)
        prev = (rec, integ)
        if config.emit_fields:
            result.snapshots.append((state.t, np.array(state.v),
                                     np.array(state.u), np.array(phif.phi)))

    rates = [0.0, 0.0]
    step_t0 = [0.0]

    def hook(stage, t_stage, _v, u, _phi):
        if stage == 0:
            step_t0[0] = t_stage
            rates[0] = shift_rate_from_velocity(u, profile, shift.X, t_stage, grid)
        else:
            dt_stage = t_stage - step_t0[0]
            x_stage = shift.X + dt_stage * rates[0]
            rates[1] = shift_rate_from_velocity(u, profile, x_stage, t_stage, grid)

    try:
        observe()
        next_tick = config.observer_interval
        while state.t < config.t_final - 1e-12:
            dt = min(cfl_dt(state, grid, config.safety),
                     next_tick - state.t, config.t_final - state.t)
            state = stepper.step(state, dt, stage_hook=hook)
            advance_shift(shift, rates, dt)
            shift.Xdot = shift_rate_from_velocity(state.u, profile, shift.X,
                                                  state.t, grid)
            if state.t >= next_tick - 1e-12:
                observe()
                while next_tick <= state.t + 1e-12:
                    next_tick += config.observer_interval
    except (NonPositiveVolume, NewtonDiverged) as exc:
        result.failed = True
        result.failure = f"{type(exc).__name__}: {exc}"

    if not result.failed and (not result.records
                              or result.records[-1].t < state.t - 1e-12):
        observe()

    result.empirical = _empirical_constants(result.records, es.delta_S)
    result.verdicts = acceptance_report(result, config.tolerances)
    return result


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

DEFAULT_THRESHOLDS = {
    "linf_final_over_max": 0.5,     # final sup-norm vs running max
    "shift_quarter_ratio": 0.25,    # mean |Xdot| last vs first quarter
    "conservation_tol": 1e-6,       # budget defects net of fluxes
    "unperturbed_linf_tol": 1e-3,   # scheme-error ceiling for exact-wave runs
    "unperturbed_shift_tol": 0.02,  # spurious-shift ceiling for exact-wave runs
}


def acceptance_report(result, thresholds=None):
    """Machine-readable pass/fail per decay criterion with measured values.

    Thresholds are relative (factor reductions, quarter averages) because the
    underlying claims are rate-free limits. Exact-wave runs (family ``none``)
    are judged on staying on the wave instead of on decay.
    """
    thr = dict(DEFAULT_THRESHOLDS)
    thr.update(thresholds or {})
    if result.failed:
        return {"verdict": "failed", "failure": result.failure,
                "criteria": {}, "thresholds": thr}

    recs = result.records
    t = np.array([r.t for r in recs])
    linf_u = np.array([r.linf_u for r in recs])
    xdot = np.abs([r.Xdot for r in recs])
    crit = {}

    family = result.config.get("perturbation", {}).get("family", "gaussian")
    if family == "none":
        peak = float(linf_u.max())
        crit["stays_on_wave"] = {
            "value": peak,
            "threshold": thr["unperturbed_linf_tol"],
            "pass": bool(peak <= thr["unperturbed_linf_tol"]),
        }
        max_x = float(np.abs([r.X for r in recs]).max())
        crit["shift_stays_small"] = {
            "value": max_x,
            "threshold": thr["unperturbed_shift_tol"],
            "pass": bool(max_x <= thr["unperturbed_shift_tol"]),
        }
        worst = max(abs(recs[-1].delta_mass), abs(recs[-1].delta_momentum))
        crit["conservation"] = {
            "value": float(worst),
            "threshold": thr["conservation_tol"],
            "pass": bool(worst <= thr["conservation_tol"]),
        }
        verdict = "pass" if all(c["pass"] for c in crit.values()) else "fail"
        return {"verdict": verdict, "criteria": crit, "thresholds": thr}

    peak = linf_u.max()
    value = float(linf_u[-1] / peak) if peak > 0 else 0.0
    crit["linf_decay"] = {
        "value": value,
        "threshold": thr["linf_final_over_max"],
        "pass": bool(value <= thr["linf_final_over_max"]),
    }

    q = max(len(recs) // 4, 1)
    first, last = float(np.mean(xdot[:q])), float(np.mean(xdot[-q:]))
    value = last / first if first > 0 else 0.0
    crit["shift_rate_decay"] = {
        "value": value,
        "threshold": thr["shift_quarter_ratio"],
        "pass": bool(value <= thr["shift_quarter_ratio"]),
    }

    half = t > 0.5 * t[-1]
    if half.sum() >= 4:
        s = np.abs(np.array([r.X for r in recs])[half] / t[half])
        slope = float(np.polyfit(t[half], s, 1)[0])
        nq = max(half.sum() // 2, 1)
        trend = float(np.mean(s[-nq:]) - np.mean(s[:nq]))
        crit["sublinear_shift"] = {
            "value": slope,
            "threshold": 0.0,
            "pass": bool(slope <= 0.0 and trend <= 0.0),
        }
    else:
        crit["sublinear_shift"] = {"value": float("nan"), "threshold": 0.0,
                                   "pass": False}

    worst = max(abs(recs[-1].delta_mass), abs(recs[-1].delta_momentum))
    crit["conservation"] = {
        "value": float(worst),
        "threshold": thr["conservation_tol"],
        "pass": bool(worst <= thr["conservation_tol"]),
    }

    c_shift = result.empirical.get("C_shift", float("nan"))
    crit["shift_bound_finite"] = {
        "value": float(c_shift),
        "threshold": float("inf"),
        "pass": bool(np.isfinite(c_shift) or np.isnan(c_shift)),
    }

    c, C = result.empirical.get("entsim_c"), result.empirical.get("entsim_C")
    ok = (c is not None and C is not None and np.isfinite(c)
          and np.isfinite(C) and 0.0 < c <= C)
    crit["eta_envelope"] = {
        "value": [c, C],
        "threshold": 0.0,
        "pass": bool(ok or (c is not None and np.isnan(c))),
    }

    verdict = "pass" if all(c["pass"] for c in crit.values()) else "fail"
    return {"verdict": verdict, "criteria": crit, "thresholds": thr}


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

SUMMARY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["format", "version", "config", "derived", "empirical",
                 "verdicts", "profile"],
    "properties": {
        "format": {"const": "nsplab-summary"},
        "version": {"const": 1},
        "config": {"type": "object"},
        "derived": {"type": "object"},
        "empirical": {"type": "object"},
        "profile": {
            "type": "object",
            "required": ["report", "meta"],
            "properties": {"report": {"type": "object"}, "meta": {"type": "object"}},
        },
        "verdicts": {
            "type": "object",
            "required": ["verdict", "criteria"],
            "properties": {
                "verdict": {"enum": ["pass", "fail", "failed"]},
                "criteria": {"type": "object"},
            },
        },
        "failed": {"type": "boolean"},
        "failure": {"type": "string"},
    },
}

PLOT_SERIES = ("linf_u", "X", "Xdot", "eta_weighted", "g")


def summary_dict(result):
    return {
        "format": "nsplab-summary",
        "version": 1,
        "config": result.config,
        "derived": result.derived,
        "empirical": result.empirical,
        "profile": {"report": result.profile_report, "meta": result.profile_meta},
        "verdicts": result.verdicts,
        "failed": result.failed,
        "failure": result.failure,
    }


def emit(result, out_dir):
    """Write diagnostics CSV, summary JSON and plot-ready series files.

    Outputs are deterministic: identical config and seed reproduce them
    byte-for-byte. Returns the list of written paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []

    csv_path = os.path.join(out_dir, "diagnostics.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for rec in result.records:
            row = []
            for name in CSV_FIELDS:
                val = getattr(rec, name)
                row.append(str(val) if isinstance(val, int) else FLOAT_FMT % val)
            writer.writerow(row)
    written.append(csv_path)

    summary_path = os.path.join(out_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary_dict(result), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(summary_path)

    t = result.series("t") if result.records else np.array([])
    for name in PLOT_SERIES:
        path = os.path.join(out_dir, f"series_{name}.dat")
        with open(path, "w", encoding="utf-8") as fh:
            for ti, yi in zip(t, result.series(name)):
                fh.write((FLOAT_FMT + " " + FLOAT_FMT + "\n") % (ti, yi))
        written.append(path)

    if result.snapshots:
        fields_dir = os.path.join(out_dir, "fields")
        os.makedirs(fields_dir, exist_ok=True)
        for k, (tk, v, u, phi) in enumerate(result.snapshots):
            path = os.path.join(fields_dir, f"snapshot_{k:05d}.csv")
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["t", FLOAT_FMT % tk])
                writer.writerow(["v", "u", "phi"])
                for row in zip(v, u, phi):
                    writer.writerow([FLOAT_FMT % x for x in row])
            written.append(path)
    return written


def read_diagnostics_csv(path):
    """Re-parse an emitted diagnostics CSV into DiagnosticsRecord objects."""
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            kwargs = {k: (int(row[k]) if k == "newton_iters" else float(row[k]))
                      for k in CSV_FIELDS}
            records.append(DiagnosticsRecord(**kwargs))
    return records


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def run_sweep(config, kind="amplitude", factors=(1.0, 0.5, 0.25), out_dir=None):
    """Run a family of experiments scaled by ``factors``.

    ``amplitude`` scales the perturbation amplitude; ``strength`` scales the
    jump v_plus - v_minus. Returns (per-factor results, sweep summary dict);
    the summary reports the spread of the measured energy ratio.
    """
    from dataclasses import replace

    if kind not in ("amplitude", "strength"):
        raise ValidationError(f"sweep kind must be amplitude or strength, got {kind!r}")
    results = {}
    for f in factors:
        if kind == "amplitude":
            pert = replace(config.perturbation, amplitude=config.perturbation.amplitude * f)
            cfg = replace(config, perturbation=pert)
        else:
            cfg = replace(config, v_plus=config.v_minus
                          + f * (config.v_plus - config.v_minus))
        res = run_experiment(cfg)
        results[f] = res
        if out_dir is not None:
            emit(res, os.path.join(out_dir, f"{kind}_{f:g}"))

    c_emps = {f: results[f].empirical.get("C_emp") for f in factors}
    finite = [v for v in c_emps.values() if v is not None and np.isfinite(v)]
    if finite:
        spread = (max(finite) - min(finite)) / max(finite)
    else:
        spread = float("nan")
    summary = {
        "format": "nsplab-sweep",
        "version": 1,
        "kind": kind,
        "factors": list(factors),
        "C_emp": {f"{f:g}": c_emps[f] for f in factors},
        "C_emp_spread": spread,
        "verdicts": {f"{f:g}": results[f].verdicts.get("verdict") for f in factors},
    }
    if out_dir is not None:
        with open(os.path.join(out_dir, "sweep.json"), "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return results, summary
