"""Method-of-lines evolution of the ion system on a truncated domain.

Explicit SSP-RK2 in time; second-order central stencils in space with the
viscous term in compact conservative form. The potential is a constraint,
not a state: it is re-solved at every stage with a warm start and Dirichlet
data phi = -log(v) taken from the instantaneous boundary volumes. Boundary
nodes of (v, u) are pinned to their far-field constants; the domain is sized
so that waves never reach them.

Two interchangeable spatial forms of the momentum equation are provided:

    primitive:   u_t = -p(v)_x  + (u_x/v)_x - phi_x / v
    divergence:  u_t = -pt(v)_x + (u_x/v)_x + Phi(v, phi)_x

which agree up to the discretization error of the flux identity relating
them. Boundary fluxes of mass and momentum are accumulated with the exact
discrete telescoping of the scheme, so conservation defects net of fluxes
sit at round-off for the divergence form.
"""

from dataclasses import dataclass, field

import numpy as np

from . import fd
from .errors import NonPositiveVolume, ValidationError
from .physics import mod_pressure, pressure, quasi_neutral_phi
from .poisson import electric_force, solve_phi

FORMS = ("primitive", "divergence")


@dataclass(frozen=True)
class State:
    """Evolved fields on the grid nodes at time t."""

    v: np.ndarray
    u: np.ndarray
    t: float

    def __post_init__(self):
        for name in ("v", "u"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if np.any(self.v <= 0):
            raise NonPositiveVolume(f"state at t={self.t} has min(v) <= 0")


@dataclass
class FluxHistory:
    """Accumulated discrete boundary fluxes of a run."""

    mass: float = 0.0
    momentum: float = 0.0


@dataclass(frozen=True)
class ConservationReport:
    """Budget defects net of accumulated boundary fluxes."""

    delta_mass: float
    delta_momentum: float


def cfl_dt(state, grid, safety=0.4):
    """Stable explicit step from the parabolic and acoustic restrictions.

    dt = safety * min(dx^2 min(v)/2, dx min(v)/sqrt(2)): the first bound comes
    from the diffusion coefficient 1/v, the second from the acoustic speed
    sqrt(2)/v of the modified pressure.
    """
    if not 0.0 < safety <= 1.0:
        raise ValidationError(f"safety must lie in (0, 1], got {safety}")
    vmin = float(state.v.min())
    if vmin <= 0:
        raise NonPositiveVolume("cfl_dt requires min(v) > 0")
    dx = grid.dx
    return safety * min(dx * dx * vmin / 2.0, dx * vmin / np.sqrt(2.0))


class Stepper:
    """Stage-level integrator carrying the Poisson warm start and flux tallies.

    ``stage_hook(stage, t, v, u, phi)`` is invoked after each stage's Poisson
    solve and before the stage update; the shift ODE integrates in lockstep
    through it.
    """

    def __init__(self, grid, form="divergence"):
        if form not in FORMS:
            raise ValidationError(f"form must be one of {FORMS}, got {form!r}")
        self.grid = grid
        self.form = form
        self.flux = FluxHistory()
        self._phi_guess = None
        self.last_newton_iters = 0
        self.max_newton_iters = 0

    def _solve_phi(self, v):
        bc = (quasi_neutral_phi(v[0]), quasi_neutral_phi(v[-1]))
        out = solve_phi(v, self.grid, bc, guess=self._phi_guess)
        self._phi_guess = np.array(out.phi)
        self.last_newton_iters = out.newton_iters
        self.max_newton_iters = max(self.max_newton_iters, out.newton_iters)
        return out

    def _rhs(self, v, u, phi):
        dx = self.grid.dx
        dv = fd.gradient(u, dx)
        visc = fd.flux_divergence(u, v, dx)
        if self.form == "divergence":
            du = -fd.gradient(mod_pressure(v), dx) + visc \
                + fd.gradient(electric_force(v, phi, self.grid), dx)
        else:
            du = -fd.gradient(pressure(v), dx) + visc - fd.gradient(phi, dx) / v
        dv[0] = dv[-1] = 0.0
        du[0] = du[-1] = 0.0
        return dv, du

    def _boundary_flux_rates(self, v, u, phi):
        # physical fluxes at the two boundary nodes; while the fields stay
        # flat there these match the interior telescoping to round-off, and
        # they drift visibly if a wave contaminates the boundary
        dx = self.grid.dx
        mass = u[-1] - u[0]
        f = -mod_pressure(v) + fd.gradient(u, dx) / v \
            + electric_force(v, phi, self.grid)
        mom = f[-1] - f[0]
        return mass, mom

    def step(self, state, dt, stage_hook=None):
        """One SSP-RK2 step; returns the new State and updates flux tallies."""
        v0, u0, t = state.v, state.u, state.t

        phi0 = self._solve_phi(v0)
        if stage_hook is not None:
            stage_hook(0, t, v0, u0, phi0)
        dv0, du0 = self._rhs(v0, u0, phi0.phi)
        m0, p0 = self._boundary_flux_rates(v0, u0, phi0.phi)
        v1 = v0 + dt * dv0
        u1 = u0 + dt * du0
        if np.any(v1 <= 0):
            raise NonPositiveVolume(f"stage update at t={t} produced v <= 0")

        phi1 = self._solve_phi(v1)
        if stage_hook is not None:
            stage_hook(1, t + dt, v1, u1, phi1)
        dv1, du1 = self._rhs(v1, u1, phi1.phi)
        m1, p1 = self._boundary_flux_rates(v1, u1, phi1.phi)
        v_new = 0.5 * (v0 + v1 + dt * dv1)
        u_new = 0.5 * (u0 + u1 + dt * du1)
        v_new[0], v_new[-1] = v0[0], v0[-1]
        u_new[0], u_new[-1] = u0[0], u0[-1]

        self.flux.mass += 0.5 * dt * (m0 + m1)
        self.flux.momentum += 0.5 * dt * (p0 + p1)
        return State(v=v_new, u=u_new, t=t + dt)

    def phi_for(self, state):
        """Poisson solve consistent with a given state (warm-started)."""
        return self._solve_phi(state.v)


def step(state, grid, dt, form="divergence"):
    """Single SSP-RK2 step without persistent warm start or flux history."""
    return Stepper(grid, form).step(state, dt)


def run(initial, grid, t_final, form="divergence", observer=None,
        safety=0.4, observer_interval=None, stage_hook=None):
    """Advance to t_final with adaptive CFL steps.

    The observer, when given, receives (State, PhiField) at t = initial.t,
    then at every ``observer_interval`` (defaults to (t_final - t0)/100), and
    at the final time. Returns (final_state, stepper) so that callers can
    inspect flux tallies and Newton counters.
    """
    if t_final < initial.t:
        raise ValidationError(f"t_final={t_final} precedes initial time {initial.t}")
    stepper = Stepper(grid, form)
    state = initial
    if observer_interval is None:
        observer_interval = max((t_final - initial.t) / 100.0, 1e-30)

    last_emit = None

    def emit():
        nonlocal last_emit
        last_emit = state.t
        if observer is not None:
            observer(state, stepper.phi_for(state))

    emit()
    next_tick = initial.t + observer_interval
    while state.t < t_final - 1e-13:
        # land exactly on observer ticks so record times are reproducible
        dt = min(cfl_dt(state, grid, safety), next_tick - state.t,
                 t_final - state.t)
        state = stepper.step(state, dt, stage_hook=stage_hook)
        if state.t >= next_tick - 1e-12:
            emit()
            while next_tick <= state.t + 1e-12:
                next_tick += observer_interval
    if last_emit < state.t - 1e-12:
        emit()
    return state, stepper


def conservation_report(initial, final, flux_history, grid):
    """Mass and momentum changes net of the accumulated boundary fluxes."""
    dx = grid.dx
    dm = fd.trapz(final.v, dx) - fd.trapz(initial.v, dx) - flux_history.mass
    dp = fd.trapz(final.u, dx) - fd.trapz(initial.u, dx) - flux_history.momentum
    return ConservationReport(delta_mass=float(dm), delta_momentum=float(dp))
