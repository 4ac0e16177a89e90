"""Nonlinear elliptic constraint for the electric potential.

Solves -(phi_x / v)_x = 1 - v e^phi on a uniform grid with Dirichlet data,
by damped Newton iteration with an exactly tridiagonal Jacobian: the flux
term is discretized in conservative form with arithmetic interface volumes,
and the Boltzmann term contributes the diagonal v e^phi, which keeps the
Jacobian strictly diagonally dominant for v > 0.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import fd
from .errors import NewtonDiverged, NonPositiveVolume


@dataclass(frozen=True)
class PhiField:
    """Converged potential with solver counters."""

    phi: np.ndarray
    newton_iters: int
    residual_norm: float

    def __post_init__(self):
        arr = np.ascontiguousarray(self.phi, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "phi", arr)


def _interior_residual(phi, v, w, dx):
    """Residual of the discrete equation on interior nodes (zero at the ends)."""
    flux = np.diff(phi) * w
    res = np.zeros_like(phi)
    res[1:-1] = -(flux[1:] - flux[:-1]) / dx - 1.0 + v[1:-1] * np.exp(phi[1:-1])
    return res


def solve_phi(v, grid, bc, guess=None, tol=1e-11, max_iter=50):
    """Solve the potential constraint for a given volume field.

    ``bc`` is the Dirichlet pair (phi_left, phi_right). A warm-start ``guess``
    is used when provided, otherwise the linear interpolant of the boundary
    data. Newton steps are damped (halved up to 10 times) whenever the
    residual norm would grow.
    """
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise NonPositiveVolume("solve_phi requires v > 0 everywhere")
    dx = grid.dx
    n = v.size
    phi_l, phi_r = float(bc[0]), float(bc[1])
    if guess is not None:
        phi = np.array(guess, dtype=float, copy=True)
    else:
        phi = np.linspace(phi_l, phi_r, n)
    phi[0], phi[-1] = phi_l, phi_r

    vh = 0.5 * (v[1:] + v[:-1])
    w = 1.0 / (dx * vh)

    res = _interior_residual(phi, v, w, dx)
    nrm = fd.l2norm(res, dx)
    iters = 0
    for _ in range(max_iter):
        if nrm < tol:
            return PhiField(phi=phi, newton_iters=iters, residual_norm=nrm)
        diag = (w[:-1] + w[1:]) / dx + v[1:-1] * np.exp(phi[1:-1])
        off = -w[1:-1] / dx
        ab = np.zeros((3, n - 2))
        ab[0, 1:] = off
        ab[1] = diag
        ab[2, :-1] = off
        dphi = solve_banded((1, 1), ab, -res[1:-1])

        lam = 1.0
        for _ in range(10):
            trial = phi.copy()
            trial[1:-1] += lam * dphi
            trial_res = _interior_residual(trial, v, w, dx)
            trial_nrm = fd.l2norm(trial_res, dx)
            if trial_nrm < nrm or trial_nrm < tol:
                break
            lam *= 0.5
        phi, res, nrm = trial, trial_res, trial_nrm
        iters += 1

    if nrm < tol:
        return PhiField(phi=phi, newton_iters=iters, residual_norm=nrm)
    raise NewtonDiverged(
        f"Poisson Newton did not converge in {max_iter} iterations "
        f"(last residual {nrm:.3e})",
        residual=nrm,
    )


def poisson_residual(v, phi, grid):
    """Discrete L2 norm of -(phi_x/v)_x - 1 + v e^phi on interior nodes.

    Uses the same conservative central stencil as the solver, so the norm of
    a converged PhiField restates the solver's own convergence criterion.
    """
    v = np.asarray(v, dtype=float)
    phi = np.asarray(phi, dtype=float)
    dx = grid.dx
    vh = 0.5 * (v[1:] + v[:-1])
    w = 1.0 / (dx * vh)
    return fd.l2norm(_interior_residual(phi, v, w, dx), dx)


def flux_identity_residual(v, phi, grid):
    """Residual of the divergence-form identity relating phi_x/v to a flux.

    For pairs satisfying the Poisson equation, phi_x/v equals the derivative
    of 1/v + (1/v)(phi_x/v)_x - (phi_x/v)^2/2, up to O(dx^2).
    """
    v = np.asarray(v, dtype=float)
    phi = np.asarray(phi, dtype=float)
    dx = grid.dx
    g = fd.gradient(phi, dx) / v
    bracket = 1.0 / v + fd.gradient(g, dx) / v - 0.5 * g * g
    r = g - fd.gradient(bracket, dx)
    return fd.l2norm(r[2:-2], dx)


def electric_force(v, phi, grid):
    """Non-neutral force Phi = (phi_x/v)^2 / 2 - (1/v)(phi_x/v)_x."""
    v = np.asarray(v, dtype=float)
    phi = np.asarray(phi, dtype=float)
    dx = grid.dx
    g = fd.gradient(phi, dx) / v
    return 0.5 * g * g - fd.gradient(g, dx) / v
