"""Limit problem on the line: thresholds, frequency roots, reduced energy.

Collapsing the planar nonlocal term onto a circle of large radius leaves
a one-dimensional functional whose critical points among solitons are
classified by a scalar equation for the concentration frequency k,

    k = omega + (m**2 / 4) * k**((5 - p) / (p - 1)),

with m the unit-soliton mass.  Two frequency thresholds organize the
picture: above ``omega1`` the scalar equation has no root, at it a
tangent double root, below it a pair k1 < k2; below ``omega0`` the
energy of the k2 branch turns negative, which is what later drives
concentration at the boundary.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .soliton import SolitonConstants, soliton_constants

TANGENT_TOL = 1e-9  # width of the frequency window treated as the tangent case


@dataclass(frozen=True)
class Thresholds:
    """Frequency thresholds of the limit problem.

    omega0: below it the lower-energy branch has negative limit energy.
    omega1: above it no concentration frequency exists; omega0 < omega1.
    """

    omega0: float
    omega1: float


@dataclass(frozen=True)
class LimitRoots:
    """Roots of the scalar frequency equation.

    kind is one of "none", "tangent", "pair".  For a pair, k1 < k2; the
    tangent case stores the double root in both slots.
    """

    kind: str
    k1: float | None
    k2: float | None


def thresholds(p: float, m: float | None = None) -> Thresholds:
    """Closed-form thresholds for exponent p and unit-soliton mass m."""
    if m is None:
        m = soliton_constants(p).mass
    s = 2.0 * (3.0 - p)
    omega0 = (
        (3.0 - p) / (3.0 + p)
        * 3.0 ** ((p - 1.0) / s)
        * 2.0 ** (2.0 / (3.0 - p))
        * (m * m * (3.0 + p) / (p - 1.0)) ** (-(p - 1.0) / s)
    )
    base = (5.0 - p) * m * m / (4.0 * (p - 1.0))
    omega1 = base ** (-(p - 1.0) / s) - 0.25 * m * m * base ** (-(5.0 - p) / s)
    return Thresholds(omega0=float(omega0), omega1=float(omega1))


def critical_frequency(p: float, m: float | None = None) -> float:
    """Frequency where the root function attains its minimum (tangent root)."""
    if m is None:
        m = soliton_constants(p).mass
    return float((4.0 * (p - 1.0) / (m * m * (5.0 - p))) ** ((p - 1.0) / (2.0 * (3.0 - p))))


def root_function(p: float, omega: float, m: float, k) -> np.ndarray:
    """Residual of the scalar frequency equation; roots are admissible k."""
    q = (5.0 - p) / (p - 1.0)
    k = np.asarray(k, dtype=float)
    return 0.25 * m * m * k**q - k + omega


def concentration_roots(p: float, omega: float, m: float | None = None,
                        tol: float = 1e-12) -> LimitRoots:
    """Classify and solve the scalar frequency equation.

    The residual is strictly convex in k with a single interior minimum,
    so bisection brackets on either side of the critical frequency are
    guaranteed.  Frequencies within TANGENT_TOL of the upper threshold
    are reported as the tangent case.
    """
    if m is None:
        m = soliton_constants(p).mass
    if not omega > 0.0:
        raise ValueError(f"frequency must be positive, got {omega}")
    omega1 = thresholds(p, m).omega1
    kc = critical_frequency(p, m)
    if abs(omega - omega1) <= TANGENT_TOL:
        return LimitRoots(kind="tangent", k1=kc, k2=kc)
    if omega > omega1:
        return LimitRoots(kind="none", k1=None, k2=None)

    f = lambda k: float(root_function(p, omega, m, k))
    lo = min(omega, kc) / 2.0
    while f(lo) <= 0.0:  # residual tends to omega > 0 at k -> 0
        lo *= 0.5
    hi = 2.0 * kc
    while f(hi) <= 0.0:
        hi *= 2.0
    k1 = brentq(f, lo, kc, xtol=tol, rtol=4.0 * np.finfo(float).eps)
    k2 = brentq(f, kc, hi, xtol=tol, rtol=4.0 * np.finfo(float).eps)
    return LimitRoots(kind="pair", k1=float(k1), k2=float(k2))


def limit_energy(p: float, omega: float, r: np.ndarray, u: np.ndarray) -> float:
    """Quadrature evaluation of the line functional on a sampled field.

    One half of gradient-plus-frequency mass, plus one twenty-fourth of
    the cubed mass (the collapsed nonlocal term), minus the potential
    well.  Warns when the field has not decayed at the grid ends, since
    the value then depends on the truncation.
    """
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    if r.shape != u.shape or r.ndim != 1 or r.size < 2:
        raise ValueError("need matching one-dimensional r and u samples")
    scale = float(np.max(np.abs(u))) or 1.0
    if max(abs(u[0]), abs(u[-1])) > 1e-8 * scale:
        warnings.warn("field has not decayed at the grid ends; "
                      "truncation error may dominate", stacklevel=2)
    du = np.gradient(u, r)
    mass = float(np.trapezoid(u * u, r))
    grad = float(np.trapezoid(du * du, r))
    pot = float(np.trapezoid(np.abs(u) ** (p + 1.0), r))
    return 0.5 * (grad + omega * mass) + mass**3 / 24.0 - pot / (p + 1.0)


def limit_energy_closed(p: float, omega: float, k: float,
                        constants: SolitonConstants | None = None) -> float:
    """Closed-form line energy of the frequency-k soliton."""
    if constants is None:
        constants = soliton_constants(p)
    mass, kinetic, potential = constants.scaled(k)
    return 0.5 * (kinetic + omega * mass) + mass**3 / 24.0 - potential / (p + 1.0)


def locate_energy_sign_change(p: float, m: float | None = None,
                              tol: float = 1e-10) -> float:
    """Bisect for the frequency where the k2-branch energy changes sign.

    Independent check of the closed-form omega0: the energy of the upper
    root is negative for small frequencies and positive near the
    existence threshold, and crosses zero exactly once in between.
    """
    constants = soliton_constants(p)
    if m is None:
        m = constants.mass
    omega1 = thresholds(p, m).omega1

    def branch_energy(omega: float) -> float:
        roots = concentration_roots(p, omega, m)
        if roots.kind != "pair":
            raise RuntimeError("expected a root pair below the existence threshold")
        return limit_energy_closed(p, omega, roots.k2, constants)

    lo, hi = 1e-6 * omega1, omega1 * (1.0 - 1e-6)
    if not (branch_energy(lo) < 0.0 < branch_energy(hi)):
        raise RuntimeError("sign-change bracket failed; unexpected energy landscape")
    return float(brentq(branch_energy, lo, hi, xtol=tol))
