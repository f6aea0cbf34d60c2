"""Radial energy on the disk: discrete functional, exact gradient, Hessian.

The planar functional restricted to radial fields on a disk of radius R
is, per unit angle times two pi,

    2*pi * integral_0^R [ (u'**2 + omega u**2) / 2
                          + (u**2 / (2 r)) * H(r)**2
                          - |u|**(p+1) / (p+1) ] ... r-weighted,

where H(r) = (1/2) integral_0^r s u(s)**2 ds is the accumulated charge.
The discretization is fixed once (midpoint fluxes for the gradient term,
trapezoid for everything else, prefix/suffix trapezoid sums for the
nonlocal pieces) and the gradient and Hessian action below are the exact
derivatives of that discrete value, not re-discretized continuum
formulas.  That exactness is what the finite-difference cross-checks in
the test suite pin down.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Uniform radial mesh on (0, R) with n interior nodes.

    Node i sits at r_i = i * h with h = R / (n + 1).  The endpoints are
    not degrees of freedom: fields carry a structural zero at R and a
    zero-slope (regularity) closure at the origin.
    """

    R: float
    n: int
    r: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.R > 0.0:
            raise ValueError(f"radius must be positive, got {self.R}")
        if self.n < 16:
            raise ValueError(f"need at least 16 interior nodes, got {self.n}")
        r = self.h * np.arange(1, self.n + 1)
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @property
    def h(self) -> float:
        return self.R / (self.n + 1)


def _prefix_charge(grid: Grid, u: np.ndarray) -> np.ndarray:
    # H_i = (1/2) * trapezoid of s u^2 over [0, r_i]; the integrand
    # vanishes at the origin, so the prefix sum needs no boundary term.
    g = grid.r * u * u
    return 0.25 * grid.h * (2.0 * np.cumsum(g) - g)


def _suffix_coupling(grid: Grid, u: np.ndarray, H: np.ndarray) -> np.ndarray:
    # Tail_i = trapezoid of (H/s) u^2 over [r_i, R]; the integrand is
    # structurally zero at R.
    psi = u * u * H / grid.r
    return grid.h * (np.cumsum(psi[::-1])[::-1] - 0.5 * psi)


@dataclass(frozen=True)
class RadialField:
    """Nodal samples of a radial field plus its nonlocal caches.

    H holds the accumulated charge and Tail the downstream coupling,
    both as the trapezoid sums the discrete energy differentiates, so
    H[0] corresponds to a zero charge at the origin and Tail at R is
    zero by construction.  Instances are immutable; build new ones
    through from_values.
    """

    grid: Grid
    u: np.ndarray
    H: np.ndarray
    Tail: np.ndarray

    @classmethod
    def from_values(cls, grid: Grid, u) -> "RadialField":
        u = np.asarray(u, dtype=float).copy()
        if u.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} interior values, got shape {u.shape}")
        H = _prefix_charge(grid, u)
        Tail = _suffix_coupling(grid, u, H)
        for a in (u, H, Tail):
            a.setflags(write=False)
        return cls(grid=grid, u=u, H=H, Tail=Tail)


@dataclass(frozen=True)
class EnergyReport:
    """Energy split into its four parts; total = kinetic + mass + nonlocal - potential."""

    total: float
    kinetic: float
    mass: float
    nonlocal_: float
    potential: float

    def as_dict(self) -> dict[str, float]:
        return {
            "total": self.total,
            "kinetic": self.kinetic,
            "mass": self.mass,
            "nonlocal": self.nonlocal_,
            "potential": self.potential,
        }


def _check_field(u: np.ndarray) -> None:
    if not np.all(np.isfinite(u)):
        warnings.warn("field contains non-finite values; energy will propagate them",
                      stacklevel=3)


def energy(params, fld: RadialField) -> EnergyReport:
    """Evaluate the discrete disk energy of a radial field.

    Negative samples are legitimate (the potential term uses |u|); a
    non-finite sample only warns, and then propagates.
    """
    grid, u = fld.grid, fld.u
    _check_field(u)
    r, h = grid.r, grid.h
    # midpoint fluxes: slope is zero across the first half-cell by the
    # regularity closure, and the last difference runs into u(R) = 0
    du = np.diff(u) / h
    rmid = r[:-1] + 0.5 * h
    kinetic = TWO_PI * 0.5 * h * (
        float(np.sum(du * du * rmid)) + (u[-1] / h) ** 2 * (grid.R - 0.5 * h)
    )
    mass = TWO_PI * 0.5 * params.omega * h * float(np.sum(u * u * r))
    nl = TWO_PI * 0.5 * h * float(np.sum(u * u * fld.H * fld.H / r))
    potential = TWO_PI / (params.p + 1.0) * h * float(np.sum(np.abs(u) ** (params.p + 1.0) * r))
    return EnergyReport(
        total=kinetic + mass + nl - potential,
        kinetic=kinetic,
        mass=mass,
        nonlocal_=nl,
        potential=potential,
    )


def _kinetic_gradient(grid: Grid, u: np.ndarray) -> np.ndarray:
    # Exact derivative of the midpoint-flux kinetic sum.  Ghost closure
    # u_0 = u_1 makes the first flux identically zero (a constant of the
    # minimization), and u at R is structurally zero.
    h = grid.h
    u_ext = np.concatenate(([u[0]], u, [0.0]))
    d = np.diff(u_ext) / h
    rmid = (np.arange(grid.n + 1) + 0.5) * h
    flux = d * rmid
    return -np.diff(flux)


def gradient(params, fld: RadialField, route: str = "suffix") -> np.ndarray:
    """Exact gradient of the discrete energy at the stored nodal values.

    route picks the assembly order of the downstream coupling: "suffix"
    accumulates it right to left, "prefix" forms the total sum minus a
    left prefix.  They are the same sum reordered (the discrete face of
    swapping the order of the double integral) and must agree to
    rounding; keeping both makes that check executable.
    """
    grid, u, H = fld.grid, fld.u, fld.H
    r, h = grid.r, grid.h
    if route == "suffix":
        tail = fld.Tail
    elif route == "prefix":
        psi = u * u * H / r
        csum = np.cumsum(psi)
        tail = h * (csum[-1] - csum + 0.5 * psi)
    else:
        raise ValueError(f"unknown assembly route {route!r}")
    local = params.omega * u * r - np.abs(u) ** (params.p - 1.0) * u * r
    nonlocal_part = u * H * H / r + r * u * tail
    return TWO_PI * (_kinetic_gradient(grid, u) + h * (local + nonlocal_part))


def hessian_apply(params, fld: RadialField, v) -> np.ndarray:
    """Action of the second derivative of the discrete energy on v.

    Directional derivative of `gradient` in closed form: the charge and
    coupling perturbations are the same prefix/suffix trapezoid sums
    with linearized integrands, so the cost stays linear in n.
    """
    grid, u, H = fld.grid, fld.u, fld.H
    v = np.asarray(v, dtype=float)
    if v.shape != u.shape:
        raise ValueError(f"direction shape {v.shape} does not match field {u.shape}")
    r, h = grid.r, grid.h
    g = r * u * v
    dH = h * (np.cumsum(g) - 0.5 * g)
    psi = u * u * H / r
    dpsi = (2.0 * u * v * H + u * u * dH) / r
    dtail = h * (np.cumsum(dpsi[::-1])[::-1] - 0.5 * dpsi)
    local = params.omega * v * r - params.p * np.abs(u) ** (params.p - 1.0) * v * r
    nonlocal_part = (v * H * H + 2.0 * u * H * dH) / r + r * (v * fld.Tail + u * dtail)
    return TWO_PI * (_kinetic_gradient(grid, v) + h * (local + nonlocal_part))


def equation_residual(params, fld: RadialField) -> np.ndarray:
    """Strong-form residual of the Euler-Lagrange equation at the nodes.

    -(u'' + u'/r) + (omega + H**2/r**2 + Tail) u - |u|**(p-1) u, with
    second-order differences.  The origin stencil uses the even
    (zero-slope) quadratic extrapolant, consistent with the regularized
    radial Laplacian at r = 0.
    """
    grid, u = fld.grid, fld.u
    r, h = grid.r, grid.h
    u0 = (4.0 * u[0] - u[1]) / 3.0  # even quadratic through the first two nodes
    u_ext = np.concatenate(([u0], u, [0.0]))
    upp = (u_ext[2:] - 2.0 * u_ext[1:-1] + u_ext[:-2]) / h**2
    up = (u_ext[2:] - u_ext[:-2]) / (2.0 * h)
    potential = params.omega + (fld.H / r) ** 2 + fld.Tail
    return -(upp + up / r) + potential * u - np.abs(u) ** (params.p - 1.0) * u


def weighted_norm(grid: Grid, values: np.ndarray) -> float:
    """Norm of nodal values in the radial measure 2 pi r dr."""
    return float(np.sqrt(TWO_PI * grid.h * np.sum(values * values * grid.r)))


def gradient_norm(params, fld: RadialField, g: np.ndarray | None = None) -> float:
    """Riesz norm of the energy gradient in the radial measure.

    The raw gradient represents the first variation against nodal
    perturbations; dividing out the quadrature weight 2 pi r h turns it
    into a field, whose radial-measure norm is the stopping quantity.
    """
    if g is None:
        g = gradient(params, fld)
    ghat = g / (TWO_PI * fld.grid.r * fld.grid.h)
    return weighted_norm(fld.grid, ghat)
