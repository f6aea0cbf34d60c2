"""Second variation on the line: spectrum, kernel, and coercivity checks."""
import warnings

import numpy as np
import pytest

from cssball.limit import concentration_roots, critical_frequency, thresholds
from cssball.linearized import (
    LineGrid,
    coercivity_constant,
    degenerate_direction,
    line_grid,
    low_spectrum,
    second_variation,
    translation_mode,
    translation_residual,
)
from cssball.soliton import Params, soliton_constants

P, OMEGA = 2.0, 0.05
ROOTS = concentration_roots(P, OMEGA)

# frozen reference values at n=2000, half width 40/sqrt(k2)
COERCIVITY_K2 = 0.1972719762
COERCIVITY_K1 = -0.05930099


def fprime(k: float) -> float:
    # derivative of the scalar frequency residual at p=2, m=6
    return 27.0 * k * k - 1.0


def test_line_grid_geometry_and_defaults():
    g = line_grid(0.25)
    assert g.half_width == pytest.approx(80.0, rel=1e-15)
    grid = LineGrid(half_width=5.0, n=99)
    assert grid.h == pytest.approx(0.1, rel=1e-15)
    x = grid.x
    assert x[0] == pytest.approx(-5.0 + grid.h, rel=1e-13)
    assert np.allclose(x + x[::-1], 0.0, atol=1e-12)  # symmetric mesh


def test_line_grid_validation():
    with pytest.raises(ValueError):
        line_grid(0.0)
    with pytest.raises(ValueError):
        LineGrid(half_width=-1.0, n=100)
    with pytest.raises(ValueError):
        LineGrid(half_width=1.0, n=15)
    with pytest.raises(ValueError):
        second_variation(Params(p=P, omega=OMEGA), 0.0)


def test_discrete_mass_matches_scaling_law():
    op = second_variation(Params(p=P, omega=OMEGA), ROOTS.k2)
    m = soliton_constants(P).mass
    assert op.mass == pytest.approx(m * ROOTS.k2 ** 1.5, rel=1e-12)


def test_apply_matches_dense():
    grid = line_grid(ROOTS.k2, n=400)
    op = second_variation(Params(p=P, omega=OMEGA), ROOTS.k2, grid)
    mat = op.dense()
    rng = np.random.default_rng(3)
    for _ in range(4):
        v = rng.standard_normal(grid.n)
        assert np.allclose(op.apply(v.copy()), mat @ v, rtol=1e-12, atol=1e-12)


def test_norm_estimate_bounds_spectrum():
    grid = line_grid(ROOTS.k2, n=400)
    op = second_variation(Params(p=P, omega=OMEGA), ROOTS.k2, grid)
    eigs = np.linalg.eigvalsh(op.dense())
    assert np.max(np.abs(eigs)) <= op.norm_estimate()


@pytest.mark.parametrize("k", [ROOTS.k1, ROOTS.k2])
def test_translation_residual_is_second_order(k):
    params = Params(p=P, omega=OMEGA)
    res = []
    for n in (500, 1000, 2000):
        op = second_variation(params, k, line_grid(k, n=n), warn=False)
        res.append(translation_residual(op))
    assert res[0] / res[1] == pytest.approx(4.0, abs=0.5)
    assert res[1] / res[2] == pytest.approx(4.0, abs=0.5)


def test_structural_parities():
    grid = line_grid(ROOTS.k2, n=800)
    params = Params(p=P, omega=OMEGA)
    t = translation_mode(params, ROOTS.k2, grid)
    psi = degenerate_direction(params, ROOTS.k2, grid)
    op = second_variation(params, ROOTS.k2, grid)
    assert np.allclose(op.soliton, op.soliton[::-1], rtol=1e-13)
    assert np.allclose(t, -t[::-1], atol=1e-13 * np.max(np.abs(t)))
    assert np.allclose(psi, psi[::-1], atol=1e-12 * np.max(np.abs(psi)))


@pytest.mark.parametrize("k", [ROOTS.k1, ROOTS.k2])
def test_shape_direction_image_identity(k):
    # applying the operator to (2/(p-1)) w + x w' lands on a multiple of
    # the soliton, with coefficient 2 k f'(k); this links the spectrum
    # directly to the slope of the scalar frequency equation
    params = Params(p=P, omega=OMEGA)
    grid = line_grid(k, n=2000)
    op = second_variation(params, k, grid)
    psi = degenerate_direction(params, k, grid)
    img = op.apply(psi.copy())
    target = 2.0 * k * fprime(k)
    coef = float(np.dot(op.soliton, img) / np.dot(op.soliton, op.soliton))
    assert coef == pytest.approx(target, rel=1e-4)
    residual = img - target * op.soliton
    assert np.linalg.norm(residual) < 1e-3 * np.linalg.norm(img)


def test_kernel_appears_exactly_at_tangency():
    # at the tangent frequency f'(k0) = 0 the shape direction joins the
    # kernel; the discrete image shrinks at second order in h
    om1 = thresholds(P).omega1
    k0 = critical_frequency(P)
    params = Params(p=P, omega=om1)
    norms = []
    for n in (1000, 2000):
        grid = line_grid(k0, n=n)
        op = second_variation(params, k0, grid)
        psi = degenerate_direction(params, k0, grid)
        norms.append(np.linalg.norm(op.apply(psi.copy())) / np.linalg.norm(psi))
    assert norms[0] < 4e-4
    assert norms[0] / norms[1] == pytest.approx(4.0, abs=0.7)
    # away from tangency the same direction is far from the kernel
    op2 = second_variation(Params(p=P, omega=OMEGA), ROOTS.k2, line_grid(ROOTS.k2, n=1000))
    psi2 = degenerate_direction(Params(p=P, omega=OMEGA), ROOTS.k2, op2.grid)
    assert np.linalg.norm(op2.apply(psi2.copy())) / np.linalg.norm(psi2) > 0.1


def test_low_spectrum_methods_agree():
    grid = line_grid(ROOTS.k2, n=1200)
    op = second_variation(Params(p=P, omega=OMEGA), ROOTS.k2, grid)
    dvals, dvecs = low_spectrum(op, count=6, method="dense")
    svals, svecs = low_spectrum(op, count=6, method="shift-invert")
    assert np.allclose(dvals, svals, atol=1e-8)
    for i in range(6):
        assert abs(abs(float(np.dot(dvecs[:, i], svecs[:, i]))) - 1.0) < 1e-6
    with pytest.raises(ValueError):
        low_spectrum(op, method="cholesky")


def test_spectrum_structure_at_upper_root():
    grid = line_grid(ROOTS.k2, n=2000)
    op = second_variation(Params(p=P, omega=OMEGA), ROOTS.k2, grid)
    vals, vecs = low_spectrum(op, count=6)
    # translation mode: a single near-zero eigenvalue, then a gap
    assert abs(vals[0]) < 1e-3
    assert vals[1] > 0.15
    t = translation_mode(Params(p=P, omega=OMEGA), ROOTS.k2, grid)
    cos = abs(float(np.dot(vecs[:, 0], t))) / np.linalg.norm(t)
    assert cos > 0.999
    assert np.all(np.diff(vals) >= -1e-12)


def test_coercivity_positive_on_upper_root():
    op = second_variation(Params(p=P, omega=OMEGA), ROOTS.k2, line_grid(ROOTS.k2, n=2000))
    rep = coercivity_constant(op)
    assert rep.value == pytest.approx(COERCIVITY_K2, rel=1e-3)
    assert rep.value > 0.0
    assert not rep.degenerate
    # away from tangency the minimizer is not the shape direction
    assert rep.alignment < 0.9
    # deflation really removed the translation direction
    t = translation_mode(Params(p=P, omega=OMEGA), ROOTS.k2, op.grid)
    cos = abs(float(np.dot(rep.vector, t))) / (
        np.linalg.norm(rep.vector) * np.linalg.norm(t))
    assert cos < 1e-6


def test_coercivity_negative_on_lower_root():
    # f'(k1) < 0 makes the deflated form indefinite on the lower branch
    op = second_variation(Params(p=P, omega=OMEGA), ROOTS.k1, line_grid(ROOTS.k1, n=2000))
    rep = coercivity_constant(op)
    assert rep.value == pytest.approx(COERCIVITY_K1, abs=2e-3)
    assert rep.value < 0.0
    assert not rep.degenerate


def test_coercivity_methods_agree():
    op = second_variation(Params(p=P, omega=OMEGA), ROOTS.k2, line_grid(ROOTS.k2, n=1500))
    a = coercivity_constant(op, method="dense")
    b = coercivity_constant(op, method="shift-invert")
    assert a.value == pytest.approx(b.value, abs=1e-9)
    with pytest.raises(ValueError):
        coercivity_constant(op, method="qr")


def test_degeneracy_flag_at_tangency():
    om1 = thresholds(P).omega1
    k0 = critical_frequency(P)
    params = Params(p=P, omega=om1)
    values = []
    for n in (1000, 2000):
        op = second_variation(params, k0, line_grid(k0, n=n))
        rep = coercivity_constant(op)
        assert rep.degenerate
        assert abs(rep.value) < 1e-4
        assert abs(rep.value) < rep.flag_threshold
        assert rep.alignment > 0.99
        values.append(abs(rep.value))
    # the flagged eigenvalue is pure discretization, vanishing at O(h^2)
    assert values[0] / values[1] == pytest.approx(4.0, abs=0.7)


def test_coarse_grid_warning():
    params = Params(p=P, omega=OMEGA)
    with pytest.warns(RuntimeWarning, match="translation"):
        second_variation(params, ROOTS.k2, LineGrid(half_width=40.0 / np.sqrt(ROOTS.k2), n=64))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        second_variation(params, ROOTS.k2,
                         LineGrid(half_width=40.0 / np.sqrt(ROOTS.k2), n=64), warn=False)
        second_variation(params, ROOTS.k2)  # default grid is fine enough
