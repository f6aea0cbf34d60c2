"""Second variation of the limit energy at a scaled soliton.

The limit functional couples a local Schroedinger operator to the cube of
the total mass, so its second variation at a soliton splits into a
tridiagonal core (second difference plus the potential omega + mass^2/4
- p w^(p-1)) and a rank-one term built from the soliton column.  This
module assembles that operator on a symmetric Dirichlet grid, extracts
its low spectrum, and probes the two structural directions: the
translation mode, which costs nothing, and the shape direction, whose
energy crosses zero exactly when the scalar frequency equation has a
double root.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, solve_banded
from scipy.sparse.linalg import LinearOperator, eigsh

from .soliton import Params, scaled_soliton, scaled_soliton_prime

DENSE_LIMIT = 3000
DEGENERACY_TOL = 1e-6  # relative to the Gershgorin norm estimate
COARSE_TOL = 1e-2  # translation residual relative to k


@dataclass(frozen=True)
class LineGrid:
    """Interior nodes of a uniform mesh on [-half_width, half_width].

    Both endpoints carry homogeneous Dirichlet values and are not stored.
    """

    half_width: float
    n: int

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if self.n < 16:
            raise ValueError(f"n={self.n} is too coarse; need at least 16 nodes")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / (self.n + 1)

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.h * np.arange(1, self.n + 1)


def line_grid(k: float, half_width: float | None = None, n: int = 2000) -> LineGrid:
    """Grid sized to the soliton decay: half width 40/sqrt(k) by default.

    The profile decays like exp(-sqrt(k)|x|), so the default truncation
    error sits at exp(-40), far below double precision.
    """
    if not k > 0:
        raise ValueError("k must be positive")
    if half_width is None:
        half_width = 40.0 / float(np.sqrt(k))
    return LineGrid(half_width=float(half_width), n=int(n))


@dataclass(frozen=True)
class SecondVariation:
    """Discrete second variation: tridiagonal core plus one rank-one term.

    The quadratic form is phi . apply(phi) in the plain Euclidean inner
    product; the mesh weight h is uniform, so it rescales every
    eigenvalue problem identically and is dropped.
    """

    params: Params
    k: float
    grid: LineGrid
    soliton: np.ndarray  # w_k on the nodes
    mass: float  # trapezoid integral of soliton^2
    diagonal: np.ndarray  # 2/h^2 + omega + mass^2/4 - p soliton^(p-1)
    coupling: float  # rank-one coefficient, mass * h

    def __post_init__(self):
        self.soliton.flags.writeable = False
        self.diagonal.flags.writeable = False

    def apply(self, phi: np.ndarray) -> np.ndarray:
        h2 = self.grid.h ** 2
        out = self.diagonal * phi
        out[1:] -= phi[:-1] / h2
        out[:-1] -= phi[1:] / h2
        out += self.coupling * float(np.dot(self.soliton, phi)) * self.soliton
        return out

    def dense(self) -> np.ndarray:
        off = np.full(self.grid.n - 1, -1.0 / self.grid.h ** 2)
        mat = np.diag(self.diagonal) + np.diag(off, 1) + np.diag(off, -1)
        mat += self.coupling * np.outer(self.soliton, self.soliton)
        return mat

    def norm_estimate(self) -> float:
        # Gershgorin bound for the dense matrix, cheap and always valid
        row = float(np.max(np.abs(self.diagonal))) + 2.0 / self.grid.h ** 2
        return row + self.coupling * float(np.sum(self.soliton ** 2))


def second_variation(params: Params, k: float, grid: LineGrid | None = None,
                     warn: bool = True) -> SecondVariation:
    """Assemble the operator at the scaled soliton with frequency k.

    k need not solve the frequency equation; off a root the potential
    shifts by omega + mass^2/4 - k and the translation mode picks up
    exactly that multiple of itself, which translation_residual removes
    before judging the grid.
    """
    if not k > 0:
        raise ValueError("k must be positive")
    if grid is None:
        grid = line_grid(k)
    w = scaled_soliton(params.p, k, grid.x)
    mass = float(grid.h * np.sum(w * w))  # trapezoid; boundary values vanish
    diag = (2.0 / grid.h ** 2 + params.omega + 0.25 * mass ** 2
            - params.p * w ** (params.p - 1.0))
    op = SecondVariation(params=params, k=k, grid=grid, soliton=w, mass=mass,
                         diagonal=diag, coupling=mass * grid.h)
    if warn:
        res = translation_residual(op)
        if res > COARSE_TOL * k:
            warnings.warn(
                f"grid too coarse: translation residual {res:.3e} exceeds "
                f"{COARSE_TOL:g} of k={k:.6g}",
                RuntimeWarning, stacklevel=2)
    return op


def translation_mode(params: Params, k: float, grid: LineGrid) -> np.ndarray:
    """Soliton derivative, the direction a shift of the profile costs nothing."""
    return scaled_soliton_prime(params.p, k, grid.x)


def degenerate_direction(params: Params, k: float, grid: LineGrid) -> np.ndarray:
    """Shape direction 2 w/(p-1) + x w', even in x.

    Applying the operator to it returns a multiple of the soliton whose
    coefficient is proportional to the derivative of the scalar frequency
    map, so it spans the extra kernel exactly at a double root.
    """
    x = grid.x
    w = scaled_soliton(params.p, k, x)
    return (2.0 / (params.p - 1.0)) * w + x * scaled_soliton_prime(params.p, k, x)


def translation_residual(op: SecondVariation) -> float:
    """Relative residual of the translation mode, a pure grid-quality gauge.

    The continuum identity leaves the frequency-equation mismatch
    (omega + mass^2/4 - k) times the mode itself; subtracting it isolates
    the discretization error, which decays like h^2.
    """
    t = translation_mode(op.params, op.k, op.grid)
    shift = op.params.omega + 0.25 * op.mass ** 2 - op.k
    res = op.apply(t) - shift * t
    return float(np.linalg.norm(res) / np.linalg.norm(t))


def _lowest_dense(mat: np.ndarray, count: int):
    vals, vecs = eigh(mat, subset_by_index=(0, count - 1))
    return vals, vecs


def _woodbury_solver(op: SecondVariation, terms, sigma: float):
    """Factor (T + sum c_j v_j v_j^T - sigma I)^{-1} over the tridiagonal core."""
    n = op.grid.n
    h2 = op.grid.h ** 2
    ab = np.zeros((3, n))
    ab[0, 1:] = -1.0 / h2
    ab[1] = op.diagonal - sigma
    ab[2, :-1] = -1.0 / h2

    def base(b):
        return solve_banded((1, 1), ab, b, check_finite=False)

    if not terms:
        return base
    coeffs = np.array([c for c, _ in terms])
    V = np.column_stack([v for _, v in terms])
    Z = base(V)
    cap = np.diag(1.0 / coeffs) + V.T @ Z  # capacitance matrix

    def apply(b):
        y = base(b)
        return y - Z @ np.linalg.solve(cap, V.T @ y)

    return apply


def _lowest_shift_invert(op: SecondVariation, terms, matvec, count: int):
    """Lowest eigenpairs by shift-invert Lanczos below the spectrum."""
    n = op.grid.n
    p = op.params.p
    # Gershgorin-style floor: potential >= k - p(p+1)k/2 plus the off-root
    # shift, and every correction term is handled exactly by Woodbury
    sigma = -(1.0 + p * (p + 1.0)) * op.k - 1.0
    solver = _woodbury_solver(op, terms, sigma)
    lin = LinearOperator((n, n), matvec=matvec, dtype=float)
    inv = LinearOperator((n, n), matvec=solver, dtype=float)
    v0 = op.soliton + translation_mode(op.params, op.k, op.grid)
    vals, vecs = eigsh(lin, k=count, sigma=sigma, OPinv=inv, which="LM", v0=v0)
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def low_spectrum(op: SecondVariation, count: int = 6, method: str = "auto"):
    """Lowest eigenvalues and eigenvectors, ascending.

    Dense symmetric eigensolve up to DENSE_LIMIT nodes, shift-invert
    Lanczos with an exact rank-corrected tridiagonal factorization above;
    method can force either route.
    """
    if not 1 <= count < op.grid.n:
        raise ValueError("count must be at least 1 and below the node count")
    if method == "auto":
        method = "dense" if op.grid.n <= DENSE_LIMIT else "shift-invert"
    if method == "dense":
        return _lowest_dense(op.dense(), count)
    if method == "shift-invert":
        terms = [(op.coupling, op.soliton)]
        return _lowest_shift_invert(op, terms, op.apply, count)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class CoercivityReport:
    """Smallest energy on the complement of the translation mode."""

    value: float  # minimal Rayleigh quotient once translation is deflated
    flag_threshold: float  # degeneracy cut, DEGENERACY_TOL * norm estimate
    degenerate: bool  # value sits inside the flag window around zero
    alignment: float  # |cos| of the minimizer with the shape direction
    translation_residual: float  # grid-quality witness for the deflated mode
    vector: np.ndarray  # the minimizing direction itself

    def __post_init__(self):
        self.vector.flags.writeable = False


def coercivity_constant(op: SecondVariation, method: str = "auto") -> CoercivityReport:
    """Deflate the translation mode and return the minimal Rayleigh quotient.

    The translation direction is projected out on both sides and refilled
    at the top of the spectrum, so the smallest eigenvalue of the
    deflated operator is the constant in the coercivity bound.  A value
    inside the scaled flag window is reported as degenerate rather than
    returned silently, since it signals the double-root regime where the
    shape direction turns flat.
    """
    t = translation_mode(op.params, op.k, op.grid)
    that = t / np.linalg.norm(t)
    mu = op.norm_estimate()  # park the deflated direction above everything

    def deflated(v):
        pv = v - float(np.dot(that, v)) * that
        w = op.apply(pv)
        w -= float(np.dot(that, w)) * that
        return w + mu * float(np.dot(that, v)) * that

    if method == "auto":
        method = "dense" if op.grid.n <= DENSE_LIMIT else "shift-invert"
    if method == "dense":
        mat = op.dense()
        a = mat @ that
        tau = float(np.dot(that, a))
        mat -= np.outer(that, a) + np.outer(a, that)
        mat += (tau + mu) * np.outer(that, that)
        vals, vecs = _lowest_dense(mat, 1)
    elif method == "shift-invert":
        a = op.apply(that)
        tau = float(np.dot(that, a))
        s = that + a
        # P A P + mu t t^T as symmetric rank-one corrections of the core
        terms = [(op.coupling, op.soliton), (-1.0, s), (1.0, a),
                 (1.0 + tau + mu, that)]
        vals, vecs = _lowest_shift_invert(op, terms, deflated, 1)
    else:
        raise ValueError(f"unknown method {method!r}")

    value = float(vals[0])
    vector = vecs[:, 0].copy()
    shape = degenerate_direction(op.params, op.k, op.grid)
    alignment = abs(float(np.dot(vector, shape / np.linalg.norm(shape))))
    threshold = DEGENERACY_TOL * op.norm_estimate()
    return CoercivityReport(
        value=value, flag_threshold=threshold,
        degenerate=bool(abs(value) < threshold), alignment=alignment,
        translation_residual=translation_residual(op), vector=vector,
    )
