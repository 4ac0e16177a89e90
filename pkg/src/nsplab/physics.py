"""Closed-form constitutive pieces of the isothermal ion model.

Normalization: temperature, viscosity and Debye length are all 1. The
pressure is p(v) = 1/v; the electron contribution absorbed into the flux
gives the modified pressure 2/v. Electrons follow the Boltzmann relation,
so quasi-neutral far fields satisfy phi = -log(v).
"""

import numpy as np


def pressure(v):
    """Ion pressure p(v) = 1/v."""
    return 1.0 / np.asarray(v, dtype=float)


def mod_pressure(v):
    """Modified pressure p(v) + 1/v = 2/v."""
    return 2.0 / np.asarray(v, dtype=float)


def dmod_pressure(v):
    """Derivative of the modified pressure, -2/v^2."""
    v = np.asarray(v, dtype=float)
    return -2.0 / (v * v)


def sound_speed(v):
    """Lagrangian acoustic speed sqrt(-dmod_pressure) = sqrt(2)/v."""
    return np.sqrt(2.0) / np.asarray(v, dtype=float)


def quasi_neutral_phi(v):
    """Potential balancing electron and ion densities, phi = -log(v)."""
    return -np.log(np.asarray(v, dtype=float))
