"""Line solitons of the subcritical wave profile and their integrals.

Everything downstream is built from the positive even solution of
``-u'' + u = u**p`` on the line and its rescalings: the limit-problem
classification needs its mass, the ansatz needs pointwise values far
into the exponential tail, and the linearized analysis needs exact
derivatives.  Profiles are evaluated in log form so deep tails underflow
to zero instead of overflowing inside ``cosh``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LOG_EPS = 36.04365338911715  # -log(2**-52), double-precision tail cutoff


class QuadratureError(RuntimeError):
    """Composite quadrature failed its panel-doubling consistency check."""


def _check_p(p: float) -> None:
    if not 1.0 < p < 3.0:
        raise ValueError(f"nonlinearity exponent must lie in (1, 3), got {p}")


@dataclass(frozen=True)
class Params:
    """Model parameters: nonlinearity exponent and frequency.

    The exponent is restricted to the open interval (1, 3); the planar
    problem degenerates at both ends.  The frequency must be positive.
    """

    p: float
    omega: float

    def __post_init__(self) -> None:
        _check_p(self.p)
        if not self.omega > 0.0:
            raise ValueError(f"frequency must be positive, got {self.omega}")


def unit_soliton(p: float, r) -> np.ndarray:
    """Even positive solution of -u'' + u = u**p on the line, peaked at 0."""
    _check_p(p)
    r = np.asarray(r, dtype=float)
    x = 0.5 * (p - 1.0) * np.abs(r)
    logcosh = x + np.log1p(np.exp(-2.0 * x)) - np.log(2.0)
    return np.exp((np.log(2.0 / (p + 1.0)) + 2.0 * logcosh) / (1.0 - p))


def unit_soliton_prime(p: float, r) -> np.ndarray:
    """Derivative of the unit soliton; odd, negative for r > 0."""
    r = np.asarray(r, dtype=float)
    return -np.tanh(0.5 * (p - 1.0) * r) * unit_soliton(p, r)


def scaled_soliton(p: float, k: float, r) -> np.ndarray:
    """Soliton with frequency k: solves -u'' + k u = u**p on the line."""
    if not k > 0.0:
        raise ValueError(f"soliton frequency must be positive, got {k}")
    sk = np.sqrt(k)
    return k ** (1.0 / (p - 1.0)) * unit_soliton(p, sk * np.asarray(r, dtype=float))


def scaled_soliton_prime(p: float, k: float, r) -> np.ndarray:
    """Derivative of the frequency-k soliton."""
    if not k > 0.0:
        raise ValueError(f"soliton frequency must be positive, got {k}")
    sk = np.sqrt(k)
    return k ** (1.0 / (p - 1.0)) * sk * unit_soliton_prime(p, sk * np.asarray(r, dtype=float))


def decay_rate(p: float, k: float = 1.0) -> float:
    """Exponential decay rate of the frequency-k soliton tail."""
    return float(np.sqrt(k))


def tail_amplitude(p: float, k: float = 1.0) -> float:
    """Asymptotic prefactor: soliton(r) ~ amplitude * exp(-sqrt(k) r)."""
    _check_p(p)
    return float((2.0 * (p + 1.0) * k) ** (1.0 / (p - 1.0)))


def truncation_length(p: float, k: float = 1.0) -> float:
    """Domain half-width beyond which the squared tail is below roundoff."""
    return 2.0 / ((p - 1.0) * np.sqrt(k)) * LOG_EPS + 10.0


def panel_quadrature(f, a: float, b: float, panels: int, order: int = 12) -> float:
    """Composite Gauss-Legendre quadrature of f over [a, b]."""
    if panels < 1:
        raise ValueError("need at least one panel")
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    pts = 0.5 * (edges[:-1] + edges[1:])[:, None] + half * x[None, :]
    return float(half * np.sum(w[None, :] * f(pts)))


@dataclass(frozen=True)
class SolitonConstants:
    """Whole-line integrals of the unit soliton.

    mass      = integral of u**2
    kinetic   = integral of u'(r)**2   (equals mass * (p-1)/(p+3))
    potential = integral of |u|**(p+1) (equals mass * 2(p+1)/(p+3))

    The mass comes from quadrature; the companions follow from exact
    identities of the profile and are cross-checked in the test suite.
    """

    p: float
    mass: float
    kinetic: float
    potential: float

    @classmethod
    def from_mass(cls, p: float, mass: float) -> "SolitonConstants":
        return cls(
            p=p,
            mass=mass,
            kinetic=mass * (p - 1.0) / (p + 3.0),
            potential=mass * 2.0 * (p + 1.0) / (p + 3.0),
        )

    def scaled(self, k: float) -> tuple[float, float, float]:
        """(mass, kinetic, potential) of the frequency-k soliton."""
        e_mass = (5.0 - self.p) / (2.0 * (self.p - 1.0))
        e_grad = (self.p + 3.0) / (2.0 * (self.p - 1.0))
        return (
            self.mass * k**e_mass,
            self.kinetic * k**e_grad,
            self.potential * k**e_grad,
        )


def soliton_constants(p: float, tol: float = 1e-10) -> SolitonConstants:
    """Integrate the unit soliton's mass, with a panel-doubling check.

    The profile is even, so the integral runs over [0, T] and is
    doubled; T cuts the tail below machine precision.  The panel count
    is doubled once as a self-check and a mismatch beyond `tol` raises
    QuadratureError rather than returning a silently wrong constant.
    """
    _check_p(p)
    T = truncation_length(p)
    f = lambda s: unit_soliton(p, s) ** 2
    panels = max(16, int(np.ceil(T)))
    coarse = 2.0 * panel_quadrature(f, 0.0, T, panels)
    fine = 2.0 * panel_quadrature(f, 0.0, T, 2 * panels)
    if abs(fine - coarse) > tol * max(1.0, abs(fine)):
        raise QuadratureError(
            f"soliton mass quadrature did not settle: {coarse!r} vs {fine!r}"
        )
    return SolitonConstants.from_mass(p, fine)


def soliton_integrals(p: float, k: float, constants: SolitonConstants | None = None,
                      tol: float = 1e-10) -> tuple[float, float, float]:
    """(mass, kinetic, potential) of the frequency-k soliton."""
    if constants is None:
        constants = soliton_constants(p, tol=tol)
    return constants.scaled(k)
