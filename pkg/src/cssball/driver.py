"""Boundary-layer ansatz, reduced-energy scan, and full minimization.

The candidate profile is a soliton recentred at radius rho, corrected by
a pure exponential so the Dirichlet value at R vanishes, and cut off
away from the boundary layer:

    z_rho(r) = cutoff(r) * [ soliton_k(r - rho)
                             - soliton_k(R - rho) * exp(sqrt(k) (r - R)) ].

Scanning the disk energy over rho in a logarithmic window near R traces
the competition between the negative line energy (linear in rho) and the
Dirichlet repulsion (exponentially small in R - rho); minimizing the
full discrete energy from the best scanned ansatz produces the
concentrated solution itself.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import limit
from .radial import (Grid, RadialField, EnergyReport, energy, gradient,
                     gradient_norm, hessian_apply, TWO_PI)
from .soliton import (SolitonConstants, scaled_soliton, scaled_soliton_prime,
                      soliton_constants)


def default_exponents(p: float) -> tuple[float, float]:
    """Admissible scan-window exponents (alpha, beta) for exponent p.

    The window constraints are max(1/2, 1/p) < alpha < 1 and
    1 < beta < min(2, p) * alpha.  Both are taken at 99% of their upper
    limits: at desk-scale radii the energy minimum sits several units
    deeper than the crude logarithmic balance suggests (the soliton tail
    amplitude exceeds one), so only a maximal window can contain it at
    moderate R; asymptotically any admissible choice works.
    """
    lo = max(0.5, 1.0 / p)
    alpha = lo + 0.99 * (1.0 - lo)
    beta = 1.0 + 0.99 * (min(2.0, p) * alpha - 1.0)
    return alpha, beta


def check_exponents(p: float, alpha: float, beta: float) -> None:
    lo = max(0.5, 1.0 / p)
    if not lo < alpha < 1.0:
        raise ValueError(f"alpha must lie in ({lo}, 1), got {alpha}")
    if not 1.0 < beta < min(2.0, p) * alpha:
        raise ValueError(
            f"beta must lie in (1, {min(2.0, p) * alpha}), got {beta}")


def scan_window(R: float, k: float, alpha: float, beta: float) -> tuple[float, float]:
    """Radial window [R - beta L, R - alpha L] with L = log(R)/(2 sqrt k)."""
    L = np.log(R) / (2.0 * np.sqrt(k))
    lo, hi = R - beta * L, R - alpha * L
    if not 0.0 < lo < hi < R:
        raise ValueError(f"radius {R} too small for a boundary-layer window")
    return float(lo), float(hi)


@dataclass(frozen=True)
class AnsatzSpec:
    """Placement of the boundary-layer ansatz: centre rho, frequency k,
    and (when drawn from a scan) the window exponents used."""

    rho: float
    k: float
    alpha: float | None = None
    beta: float | None = None


def boundary_cutoff(r, R: float) -> np.ndarray:
    """Quintic ramp: 0 below R/4, 1 above R/2, C^2 across the bridge.

    The slope is bounded by a constant over R, so the cutoff cost in the
    energy vanishes as the disk grows.
    """
    t = np.clip((np.asarray(r, dtype=float) - 0.25 * R) / (0.25 * R), 0.0, 1.0)
    return t * t * t * (10.0 + t * (6.0 * t - 15.0))


def _check_spec(params, grid: Grid, spec: AnsatzSpec) -> None:
    # window checks apply only when the spec records its exponents;
    # solver-internal respecs carry just (rho, k)
    if spec.alpha is None or spec.beta is None:
        return
    check_exponents(params.p, spec.alpha, spec.beta)
    lo, hi = scan_window(grid.R, spec.k, spec.alpha, spec.beta)
    slack = 1e-9 * grid.R
    if not lo - slack <= spec.rho <= hi + slack:
        raise ValueError(
            f"rho={spec.rho} outside the scan window [{lo}, {hi}]")


def build_ansatz(params, grid: Grid, spec: AnsatzSpec) -> RadialField:
    """Sample the recentred, boundary-corrected, cut-off soliton."""
    _check_spec(params, grid, spec)
    r = grid.r
    sk = np.sqrt(spec.k)
    corrector = scaled_soliton(params.p, spec.k, grid.R - spec.rho) * np.exp(sk * (r - grid.R))
    vals = boundary_cutoff(r, grid.R) * (
        scaled_soliton(params.p, spec.k, r - spec.rho) - corrector)
    return RadialField.from_values(grid, vals)


def tangent_direction(params, grid: Grid, spec: AnsatzSpec) -> RadialField:
    """Derivative of the ansatz with respect to its centre.

    Only the recentred soliton and the corrector amplitude move with
    rho; the cutoff does not.  Used to deflate the near-flat translation
    direction out of Newton corrections.
    """
    _check_spec(params, grid, spec)
    r = grid.r
    sk = np.sqrt(spec.k)
    dcorr = scaled_soliton_prime(params.p, spec.k, grid.R - spec.rho) * np.exp(sk * (r - grid.R))
    vals = boundary_cutoff(r, grid.R) * (
        -scaled_soliton_prime(params.p, spec.k, r - spec.rho) + dcorr)
    return RadialField.from_values(grid, vals)


@dataclass(frozen=True)
class ScanResult:
    """Reduced-energy scan over the ansatz centre.

    phi[i] is the disk energy of the ansatz centred at rho[i]; model[i]
    is the two-term prediction: line energy times the circumference
    factor plus the exponential Dirichlet repulsion.  rho_star refines
    the sampled argmin by golden section; interior is False when the
    argmin sits on a window edge, meaning the construction is not
    self-consistent at this radius.
    """

    rho: np.ndarray
    phi: np.ndarray
    model: np.ndarray
    rho_star: float
    phi_star: float
    interior: bool
    k: float
    limit_value: float
    alpha: float
    beta: float


def reduced_model(rho, k: float, limit_value: float, R: float) -> np.ndarray:
    """Two-term reduced energy: 2 pi rho (J + sqrt(k) exp(-2 sqrt(k) (R - rho)))."""
    rho = np.asarray(rho, dtype=float)
    return TWO_PI * rho * (limit_value + np.sqrt(k) * np.exp(-2.0 * np.sqrt(k) * (R - rho)))


def _golden_refine(f, a: float, b: float, tol: float) -> tuple[float, float]:
    """Golden-section minimum of f on [a, b] to width tol."""
    invphi = 0.5 * (np.sqrt(5.0) - 1.0)
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while d - c > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def reduced_scan(params, grid: Grid, samples: int = 64,
                 alpha: float | None = None, beta: float | None = None,
                 refine_tol: float = 1e-3,
                 constants: SolitonConstants | None = None) -> ScanResult:
    """Scan the ansatz energy over the boundary-layer window.

    Requires a frequency pair to exist (omega below the existence
    threshold); the upper root is the concentration frequency.  The
    sampled argmin is refined by golden section between its neighbours.
    A boundary argmin is reported, not raised: it is what an
    inconsistent construction at too small a radius looks like.
    """
    if constants is None:
        constants = soliton_constants(params.p)
    a_def, b_def = default_exponents(params.p)
    alpha = a_def if alpha is None else alpha
    beta = b_def if beta is None else beta
    check_exponents(params.p, alpha, beta)
    if samples < 8:
        raise ValueError("need at least 8 scan samples")

    roots = limit.concentration_roots(params.p, params.omega, constants.mass)
    if roots.kind != "pair":
        raise ValueError(
            f"no frequency pair at omega={params.omega} (classification: {roots.kind})")
    k = roots.k2
    limit_value = limit.limit_energy_closed(params.p, params.omega, k, constants)

    lo, hi = scan_window(grid.R, k, alpha, beta)
    rho_grid = np.linspace(lo, hi, samples)

    def phi_at(rho: float) -> float:
        spec = AnsatzSpec(rho=float(rho), k=k, alpha=alpha, beta=beta)
        return energy(params, build_ansatz(params, grid, spec)).total

    phi = np.array([phi_at(rho) for rho in rho_grid])
    i_min = int(np.argmin(phi))
    interior = 0 < i_min < samples - 1
    a = rho_grid[max(i_min - 1, 0)]
    b = rho_grid[min(i_min + 1, samples - 1)]
    rho_star, phi_star = _golden_refine(phi_at, float(a), float(b), refine_tol)
    if phi[i_min] < phi_star:  # sampled point beat the refinement bracket
        rho_star, phi_star = float(rho_grid[i_min]), float(phi[i_min])

    return ScanResult(
        rho=rho_grid, phi=phi,
        model=reduced_model(rho_grid, k, limit_value, grid.R),
        rho_star=rho_star, phi_star=phi_star, interior=interior,
        k=k, limit_value=limit_value, alpha=alpha, beta=beta,
    )


@dataclass(frozen=True)
class SolveReport:
    """Outcome of the energy minimization.

    grad_norm is the radial-measure Riesz norm of the final gradient;
    rho_fit locates the profile peak by parabolic interpolation; and
    profile_error is the sup distance to the recentred line soliton over
    the outer half of the disk.
    """

    field: RadialField
    energy: EnergyReport
    grad_norm: float
    iterations: int
    converged: bool
    rho_fit: float
    profile_error: float
    min_value: float
    k: float
    message: str


def _peak_location(grid: Grid, u: np.ndarray) -> float:
    i = int(np.argmax(u))
    if 0 < i < grid.n - 1:
        denom = u[i - 1] - 2.0 * u[i] + u[i + 1]
        if denom < 0.0:
            return float(grid.r[i] + 0.5 * grid.h * (u[i - 1] - u[i + 1]) / denom)
    return float(grid.r[i])


def _deflated_cg(apply_h, b: np.ndarray, t: np.ndarray, tol: float,
                 max_iter: int) -> np.ndarray:
    """CG on the complement of the deflation direction t."""
    that = t / np.linalg.norm(t)
    project = lambda v: v - np.dot(that, v) * that
    b = project(b)
    x = np.zeros_like(b)
    res = b.copy()
    d = res.copy()
    rr = float(np.dot(res, res))
    b_norm = np.sqrt(rr) or 1.0
    for _ in range(max_iter):
        hd = project(apply_h(d))
        dhd = float(np.dot(d, hd))
        if dhd <= 0.0:  # curvature lost; fall back to the current iterate
            break
        a = rr / dhd
        x += a * d
        res -= a * hd
        rr_new = float(np.dot(res, res))
        if np.sqrt(rr_new) <= tol * b_norm:
            break
        d = res + (rr_new / rr) * d
        rr = rr_new
    return x


def solve(params, grid: Grid, init: RadialField, tol: float = 1e-8,
          max_iter: int = 20000, newton: bool = False,
          newton_switch: float = 1e-2, newton_steps: int = 60,
          trace: list | None = None) -> SolveReport:
    """Minimize the disk energy from a given starting field.

    Spectral-step gradient descent: steps follow the inverse Rayleigh
    quotient of the last displacement pair, safeguarded by a halving
    backtrack that enforces strict energy decrease.  With newton=True a
    Newton correction takes over once the gradient is moderately small:
    conjugate-gradient inner solves run on the complement of the
    near-flat translation direction (deflation keeps them well
    conditioned), and the translation component is corrected separately
    through its own one-dimensional Newton step, so the slow manifold
    still relaxes.  Non-convergence returns the best iterate with a
    diagnostic message rather than raising.

    When a list is passed as trace, the energy of every accepted iterate
    is appended to it, starting with the initial value.
    """
    k = _concentration_k(params)
    u = init.u.astype(float).copy()
    fld = RadialField.from_values(grid, u)
    e = energy(params, fld).total
    g = gradient(params, fld)
    gnorm = gradient_norm(params, fld, g)
    if trace is not None:
        trace.append(e)
    tau = grid.h**2 / 8.0  # safe against the stiffest (flux) mode
    u_prev = None
    g_prev = None
    iterations = 0
    message = "converged"

    bb_target = max(tol, newton_switch) if newton else tol
    while gnorm > bb_target and iterations < max_iter:
        if u_prev is not None:
            s = u - u_prev
            y = g - g_prev
            sy = float(np.dot(s, y))
            if sy > 0.0:
                tau = float(np.dot(s, s)) / sy
            else:
                tau *= 2.0
        tau = float(np.clip(tau, 1e-16, 1e6))
        gg = float(np.dot(g, g))
        step = tau
        for _ in range(60):
            trial = RadialField.from_values(grid, u - step * g)
            e_trial = energy(params, trial).total
            if np.isfinite(e_trial) and e_trial <= e - 1e-4 * step * gg:
                break
            step *= 0.5
        else:
            message = "line search stalled"
            break
        u_prev, g_prev = u, g
        u = u - step * g
        fld = trial
        e = e_trial
        if trace is not None:
            trace.append(e)
        g = gradient(params, fld)
        gnorm = gradient_norm(params, fld, g)
        iterations += 1

    if newton and gnorm > tol and message == "converged":
        for _ in range(newton_steps):
            if gnorm <= tol:
                break
            spec = AnsatzSpec(rho=_peak_location(grid, u), k=k)
            t = tangent_direction(params, grid, spec).u
            that = t / (np.linalg.norm(t) or 1.0)
            apply_h = lambda v: hessian_apply(params, fld, v)
            delta = _deflated_cg(apply_h, -g, that, tol=min(0.1, np.sqrt(gnorm)),
                                 max_iter=400)
            # one-dimensional Newton correction along the slow direction
            curvature = float(np.dot(that, apply_h(that)))
            if curvature > 0.0:
                delta = delta - (float(np.dot(g, that)) / curvature) * that
            if not np.any(delta):
                message = "newton step vanished"
                break
            gd = float(np.dot(g, delta))
            if gd >= 0.0:  # not a descent direction; retreat to steepest descent
                delta = -g
                gd = -float(np.dot(g, g))
            # near the minimum the predicted decrease can drop below the
            # floating-point resolution of the total energy; fall back to
            # progress in the gradient norm there instead of stalling
            resolution = 8.0 * np.finfo(float).eps * (1.0 + abs(e))
            step = 1.0
            accepted = False
            for _ in range(40):
                trial = RadialField.from_values(grid, u + step * delta)
                e_trial = energy(params, trial).total
                if not np.isfinite(e_trial):
                    step *= 0.5
                    continue
                if e_trial <= e + 1e-4 * step * gd:
                    accepted = True
                    break
                if -step * gd < resolution:
                    g_trial = gradient(params, trial)
                    if gradient_norm(params, trial, g_trial) < gnorm:
                        accepted = True
                        break
                step *= 0.5
            if not accepted:
                message = "newton line search stalled"
                break
            u = u + step * delta
            fld = trial
            e = e_trial
            if trace is not None:
                trace.append(e)
            g = gradient(params, fld)
            gnorm = gradient_norm(params, fld, g)
            iterations += 1

    converged = gnorm <= tol
    if not converged and message == "converged":
        message = f"iteration budget exhausted at gradient norm {gnorm:.3e}"

    rho_fit = _peak_location(grid, u)
    outer = grid.r >= 0.5 * grid.R
    profile_error = float(np.max(np.abs(
        u[outer] - scaled_soliton(params.p, k, grid.r[outer] - rho_fit))))
    return SolveReport(
        field=fld, energy=energy(params, fld), grad_norm=gnorm,
        iterations=iterations, converged=converged, rho_fit=rho_fit,
        profile_error=profile_error, min_value=float(np.min(u)), k=k,
        message=message,
    )


def _concentration_k(params) -> float:
    roots = limit.concentration_roots(params.p, params.omega)
    if roots.kind != "pair":
        raise ValueError(f"no frequency pair at omega={params.omega}")
    return roots.k2


def grid_for(R: float, nodes_per_unit: float = 40.0) -> Grid:
    """Default mesh density: about nodes_per_unit interior nodes per unit radius."""
    return Grid(R=R, n=int(np.ceil(nodes_per_unit * R)))


@dataclass
class SweepCell:
    """One (p, omega, R) cell of a parameter sweep."""

    p: float
    omega: float
    R: float
    n: int
    scan: ScanResult | None = None
    report: SolveReport | None = None
    error: str | None = None


def _worker_count(threads: int | None) -> int:
    cap = os.environ.get("CSSBALL_THREADS")
    workers = threads if threads is not None else (os.cpu_count() or 1)
    if cap is not None:
        workers = min(workers, max(1, int(cap)))
    return max(1, workers)


def sweep(cells, nodes_per_unit: float = 40.0, do_solve: bool = False,
          tol: float = 1e-8, threads: int | None = None) -> list[SweepCell]:
    """Run reduced scans (and optionally solves) over a parameter grid.

    cells is an iterable of (p, omega, R) triples.  Independent cells
    run concurrently; CSSBALL_THREADS caps the worker count.  A failing
    cell records its error and does not abort the sweep.
    """
    from .soliton import Params  # local import to keep module load light

    todo = [tuple(map(float, c)) for c in cells]
    results = [SweepCell(p=c[0], omega=c[1], R=c[2], n=0) for c in todo]

    def run(i: int) -> None:
        cell = results[i]
        try:
            params = Params(p=cell.p, omega=cell.omega)
            grid = grid_for(cell.R, nodes_per_unit)
            cell.n = grid.n
            cell.scan = reduced_scan(params, grid)
            if do_solve:
                spec = AnsatzSpec(rho=cell.scan.rho_star, k=cell.scan.k,
                                  alpha=cell.scan.alpha, beta=cell.scan.beta)
                init = build_ansatz(params, grid, spec)
                cell.report = solve(params, grid, init, tol=tol, newton=True)
        except Exception as exc:  # per-cell isolation by design
            cell.error = f"{type(exc).__name__}: {exc}"

    workers = _worker_count(threads)
    if workers == 1:
        for i in range(len(todo)):
            run(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, range(len(todo))))
    return results
