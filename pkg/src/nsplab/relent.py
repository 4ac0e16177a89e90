"""Relative quantities, the modulated relative functional, and good terms.

Conventions: internal energy Q(v) = -2 log v, modified pressure pt(v) = 2/v,
and for a convex f the relative quantity is

    f(w1 | w2) = f(w1) - f(w2) - f'(w2) (w1 - w2) >= 0.

The modulated functional eta measures the distance of W = (v, u, phi) to the
shifted reference wave; its electric terms use derivatives of the nodal
difference phi - phibar^X (differencing the difference preserves the
cancellation that makes the perturbation small).
"""

from dataclasses import dataclass

import numpy as np

from . import fd
from .errors import NonPositiveVolume, ValidationError, ZeroDenominator
from .physics import mod_pressure
from .shift import shift_gain


@dataclass(frozen=True)
class RelConstants:
    """Constants of the weighted energy estimate, derived from end states."""

    C_star: float
    M: float
    delta_S: float
    sigma: float

    @classmethod
    def from_endstates(cls, endstates):
        return cls(
            C_star=(1.0 - np.sqrt(endstates.delta_S) / 2.0) * endstates.v_minus,
            M=shift_gain(endstates.v_minus),
            delta_S=endstates.delta_S,
            sigma=endstates.sigma,
        )


@dataclass(frozen=True)
class GoodTerms:
    """Nonnegative dissipation functionals of the energy inequality."""

    G1: float
    GS: float
    D: float


@dataclass(frozen=True)
class EtaSnapshot:
    """Integrated relative functional and its quadratic comparison norm."""

    eta_weighted: float
    eta_plain: float
    quad_norm: float


def _require_positive(*fields):
    for f in fields:
        if np.any(np.asarray(f) <= 0):
            raise NonPositiveVolume("relative quantities require positive volumes")


def rel_q(v, vbar):
    """Relative internal energy Q(v|vbar) = -2 log(v/vbar) + (2/vbar)(v - vbar)."""
    _require_positive(v, vbar)
    v = np.asarray(v, dtype=float)
    vbar = np.asarray(vbar, dtype=float)
    return -2.0 * np.log(v) + 2.0 * np.log(vbar) + (2.0 / vbar) * (v - vbar)


def rel_p(v, vbar):
    """Relative modified pressure pt(v|vbar) = 2/v - 2/vbar + (2/vbar^2)(v - vbar)."""
    _require_positive(v, vbar)
    v = np.asarray(v, dtype=float)
    vbar = np.asarray(vbar, dtype=float)
    return 2.0 / v - 2.0 / vbar + (2.0 / vbar ** 2) * (v - vbar)


# ---------------------------------------------------------------------------
# Sampled bounds on the relative quantities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RelBoundsReport:
    """Pointwise verification of the four relative-quantity bounds on a sample."""

    vbar_center: float
    bar_delta: float
    n_samples: int
    lower_p_ok: bool          # Q >= pt-quadratic - cubic correction
    lower_v_ok: bool          # Q >= v-quadratic - cubic correction
    lower_p_min_margin: float
    lower_v_min_margin: float
    upper_p_constant: float   # smallest C closing the cubic upper bound on pt(v|vbar)
    upper_v_constant: float   # smallest C closing the cubic upper bound on Q(v|vbar)

    def as_dict(self):
        return dict(self.__dict__)


def rel_bounds_check(vbar_center, bar_delta, samples=200):
    """Sample the admissible square and check the relative-quantity bounds.

    The two constant-free lower bounds are verified pointwise (round-off
    slack 1e-13); for the two cubic upper bounds the smallest admissible
    constant on the sample is reported.
    """
    if bar_delta > 0.25 * vbar_center:
        raise ValidationError(
            f"bar_delta={bar_delta} exceeds the admissible radius "
            f"{0.25 * vbar_center} for vbar_center={vbar_center}"
        )
    vbars = np.linspace(vbar_center - bar_delta, vbar_center + bar_delta, samples)
    offsets = np.linspace(-bar_delta, bar_delta, samples)
    vb, dv = np.meshgrid(vbars, offsets, indexing="ij")
    v = vb + dv

    q = rel_q(v, vb)
    pt_rel = rel_p(v, vb)
    dpt = mod_pressure(v) - mod_pressure(vb)
    ptb = mod_pressure(vb)

    margin_p = q - (dpt ** 2 / ptb ** 2 - 4.0 * dpt ** 3 / (3.0 * ptb ** 3))
    margin_v = q - (dv ** 2 / vb ** 2 - 2.0 * dv ** 3 / (3.0 * vb ** 3))

    eps = 1e-13
    nz = np.abs(dpt) > 0
    c_upper_p = np.zeros_like(v)
    c_upper_p[nz] = (pt_rel[nz] - dpt[nz] ** 2 / ptb[nz]) / np.abs(dpt[nz]) ** 3
    nzv = np.abs(dv) > 0
    c_upper_v = np.zeros_like(v)
    c_upper_v[nzv] = (q[nzv] - dv[nzv] ** 2 / vb[nzv] ** 2) / np.abs(dv[nzv]) ** 3

    return RelBoundsReport(
        vbar_center=float(vbar_center),
        bar_delta=float(bar_delta),
        n_samples=int(samples),
        lower_p_ok=bool(np.all(margin_p >= -eps)),
        lower_v_ok=bool(np.all(margin_v >= -eps)),
        lower_p_min_margin=float(margin_p.min()),
        lower_v_min_margin=float(margin_v.min()),
        upper_p_constant=float(max(c_upper_p.max(), 0.0)),
        upper_v_constant=float(max(c_upper_v.max(), 0.0)),
    )


# ---------------------------------------------------------------------------
# Modulated relative functional
# ---------------------------------------------------------------------------

def eta_density(v, u, frame, phi_tilde_x, phi_tilde_xx):
    """Pointwise modulated relative functional against a shifted frame.

    eta = |u - ubar|^2/2 + Q(v|vbar) - (v - vbar) ptxx / vbar^2
          + e^{-phibar} ptxx^2 / (2 vbar^3) + e^{-phibar} ptx^2 / (2 vbar^2)

    where ptx, ptxx are the supplied derivatives of phi - phibar^X.
    """
    vb = frame.vbarX
    _require_positive(v, vb)
    ut = np.asarray(u, dtype=float) - frame.ubarX
    vt = np.asarray(v, dtype=float) - vb
    expf = np.exp(-frame.phibarX)
    return (0.5 * ut * ut + rel_q(v, vb)
            - vt * phi_tilde_xx / vb ** 2
            + expf * phi_tilde_xx ** 2 / (2.0 * vb ** 3)
            + expf * phi_tilde_x ** 2 / (2.0 * vb ** 2))


def eta_pointwise(state, phi, frame, grid):
    """Nodewise (eta, quad) with quad = ut^2 + vt^2 + ptxx^2 + ptx^2."""
    phi_arr = getattr(phi, "phi", phi)
    pt = np.asarray(phi_arr, dtype=float) - frame.phibarX
    ptx = fd.gradient(pt, grid.dx)
    ptxx = fd.second(pt, grid.dx)
    eta = eta_density(state.v, state.u, frame, ptx, ptxx)
    ut = state.u - frame.ubarX
    vt = state.v - frame.vbarX
    quad = ut * ut + vt * vt + ptxx * ptxx + ptx * ptx
    return eta, quad


def eta_integral(state, phi, frame, grid):
    """Weighted and plain integrals of eta plus the quadratic comparison norm."""
    eta, quad = eta_pointwise(state, phi, frame, grid)
    return EtaSnapshot(
        eta_weighted=float(fd.trapz(frame.aX * eta, grid.dx)),
        eta_plain=float(fd.trapz(eta, grid.dx)),
        quad_norm=float(fd.trapz(quad, grid.dx)),
    )


def eta_envelope(eta, quad, floor_rel=1e-10):
    """Pointwise envelope constants (c, C) with eta/quad measured where
    quad carries signal (above floor_rel times its maximum)."""
    quad_max = float(np.max(quad))
    if quad_max <= 0.0:
        return np.nan, np.nan
    mask = quad > floor_rel * quad_max
    ratio = eta[mask] / quad[mask]
    return float(ratio.min()), float(ratio.max())


def good_terms(state, phi, frame, grid, constants):
    """The three nonnegative quadratures G1, G^S, D of the energy estimate."""
    ut = state.u - frame.ubarX
    dpt = mod_pressure(state.v) - mod_pressure(frame.vbarX)
    dev = dpt - ut / (2.0 * constants.C_star)
    g1 = (constants.sigma / np.sqrt(constants.delta_S)) \
        * fd.trapz(frame.dvbarX * dev * dev, grid.dx)
    gs = fd.trapz(frame.dvbarX * ut * ut, grid.dx)
    utx = fd.gradient(ut, grid.dx)
    d = fd.trapz(utx * utx, grid.dx)
    return GoodTerms(G1=float(g1), GS=float(gs), D=float(d))


# ---------------------------------------------------------------------------
# Discrete Sobolev norms
# ---------------------------------------------------------------------------

def _hk_norm_sq(f, dx, k):
    f = np.asarray(f, dtype=float)
    total = fd.trapz(f * f, dx)
    for _ in range(k):
        f = np.diff(f) / dx
        total += fd.trapz(f * f, dx)
    return total


def sobolev_norm(fields, k, grid):
    """Discrete H^k norm (k = 0, 1, 2) with forward-difference derivatives.

    ``fields`` may be a single array or a sequence; multiple fields combine
    as the root of the summed squares.
    """
    if k not in (0, 1, 2):
        raise ValidationError(f"k must be 0, 1 or 2, got {k}")
    if isinstance(fields, np.ndarray) and fields.ndim == 1:
        fields = (fields,)
    return float(np.sqrt(sum(_hk_norm_sq(f, grid.dx, k) for f in fields)))


def elliptic_ratio(phi_tilde, v_tilde, grid, k=1):
    """Ratio ||phi_tilde||_{H^k} / ||v_tilde||_{H^{k-1}} for k = 1, 2, 3."""
    if k not in (1, 2, 3):
        raise ValidationError(f"k must be 1, 2 or 3, got {k}")
    den = np.sqrt(_hk_norm_sq(v_tilde, grid.dx, k - 1))
    if den == 0.0:
        raise ZeroDenominator("v_tilde is identically zero; the ratio is undefined")
    num = np.sqrt(_hk_norm_sq(phi_tilde, grid.dx, k))
    return float(num / den)
