"""Second-order finite-difference stencils and quadrature on uniform grids.

All operators assume a uniform node spacing ``dx``. Interior stencils are
central; boundary closures are one-sided and second order, so every operator
here is uniformly O(dx^2).
"""

import numpy as np


def gradient(f, dx):
    """First derivative: central interior, 2nd-order one-sided at the ends."""
    f = np.asarray(f, dtype=float)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dx)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dx)
    return out


def second(f, dx):
    """Second derivative: central interior, 2nd-order one-sided at the ends."""
    f = np.asarray(f, dtype=float)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (dx * dx)
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (dx * dx)
    out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / (dx * dx)
    return out


def flux_divergence(u, v, dx):
    """Compact conservative form of (u_x / v)_x on interior nodes.

    Uses interface values v_{i+1/2} = (v_i + v_{i+1})/2, which keeps the
    operator a perfect difference of interface fluxes (no odd-even decoupling).
    Boundary entries are zero; callers pin those nodes.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    flux = interface_flux(u, v, dx)
    out = np.zeros_like(u)
    out[1:-1] = (flux[1:] - flux[:-1]) / dx
    return out


def interface_flux(u, v, dx):
    """Interface fluxes u_x/v at the N midpoints of an (N+1)-node grid."""
    vh = 0.5 * (v[1:] + v[:-1])
    return np.diff(u) / (dx * vh)


def trapz(f, dx):
    """Trapezoidal integral of nodal values on a uniform grid."""
    return np.trapezoid(np.asarray(f, dtype=float), dx=dx)


def l2norm(f, dx):
    """Discrete L2 norm sqrt(trapz(f^2))."""
    f = np.asarray(f, dtype=float)
    return float(np.sqrt(np.trapezoid(f * f, dx=dx)))
