import numpy as np
import pytest
from hypothesis import given, settings

from nks import model as mdl
from nks import reduced_kw as rkw
from nks import weitzenbock as wz
from nks.grid import Axis, Grid, observed_order

from conftest import unitary


@pytest.fixture(scope="module")
def torus_pair():
    return wz.random_band_limited_pair(wz.torus_grid(16), seed=0, kmax=3)


@pytest.fixture(scope="module")
def small_torus_pair():
    return wz.random_band_limited_pair(wz.torus_grid(8), seed=1, kmax=1)


@pytest.fixture(scope="module")
def halfspace_pair():
    return wz.interior_supported_pair(wz.halfspace_grid(32), seed=0)


def test_zero_fields_torus():
    g = wz.torus_grid(8)
    pair = rkw.GaugePair(g, (None,) * 4, (None,) * 4, method="spectral")
    chk = wz.identity_closed_torus(pair)
    assert chk.lhs == 0 and chk.rhs == 0 and chk.rel_error == 0


def test_torus_identity(torus_pair):
    assert wz.identity_closed_torus(torus_pair).rel_error <= 1e-8


def test_torus_identity_pure_connection(torus_pair):
    pair = rkw.GaugePair(torus_pair.grid, torus_pair.A, (None,) * 4, method="spectral")
    chk = wz.identity_closed_torus(pair)
    assert chk.lhs > 0 and chk.rel_error <= 1e-8


def test_torus_identity_improves_with_resolution():
    errs = [wz.identity_closed_torus(wz.random_band_limited_pair(wz.torus_grid(n), seed=2, kmax=3)).rel_error
            for n in (8, 16)]
    assert errs[1] < errs[0]
    assert errs[1] <= 1e-12


def test_band_limit_must_fit():
    with pytest.raises(ValueError):
        wz.random_band_limited_pair(wz.torus_grid(8), kmax=4)


@settings(max_examples=10)
@given(unitary())
def test_vv_density_gauge_invariant(small_torus_pair, g):
    pair = small_torus_pair
    gg = np.broadcast_to(g, pair.grid.shape + (2, 2))
    before = wz.vv_density(pair)
    after = wz.vv_density(rkw.gauge_transform(gg, pair))
    assert np.allclose(after, before, rtol=0, atol=1e-12 * max(1.0, np.abs(before).max()))


def test_densities_nonnegative(small_torus_pair):
    dens = wz.action_densities(small_torus_pair)
    scale = max(1.0, np.abs(dens.vv).max())
    assert dens.vv.min() >= -1e-12 * scale
    assert dens.ipp.min() >= -1e-12 * scale


def test_pointwise_identity_torus():
    pair = wz.random_band_limited_pair(wz.torus_grid(16), seed=3, kmax=2)
    defect, scale = wz.pointwise_defect(pair)
    assert defect <= 1e-10 * scale


def test_halfspace_identity(halfspace_pair):
    chk = wz.identity_halfspace(halfspace_pair)
    assert chk.rel_error <= 1e-6
    assert abs(chk.omega) <= 1e-10 * abs(chk.lhs)


def test_halfspace_refuses_margin_violation(halfspace_pair):
    with pytest.raises(ValueError):
        wz.identity_halfspace(halfspace_pair, margin=7)


def test_model_densities_vanish_under_refinement():
    p = mdl.ModelParams(2)
    vv, ipp = [], []
    for n in (16, 32, 64):
        g = Grid((Axis("r", 0.4, 0.6, n), Axis("theta", 0.0, 0.2, n), Axis("x4", 0.4, 0.6, n)))
        dens = wz.action_densities(rkw.model_pair(p, g))
        inner = (slice(2, -2),) * 3
        vv.append(np.abs(dens.vv[inner]).max())
        ipp.append(np.abs(dens.ipp[inner]).max())
    # squares of second-order residuals
    assert observed_order(*vv) >= 3 and observed_order(*ipp) >= 3


@pytest.mark.parametrize("w", [0, 1, 2])
def test_model_flux_vanishes(w):
    res = wz.boundary_term_scaling(wz.model_fields_fn(mdl.ModelParams(w)))
    assert res.vanishes


@pytest.mark.parametrize("w", [1, 2])
def test_exceptional_alpha_mode_flux_vanishes(w):
    p = mdl.ModelParams(w)
    res = wz.boundary_term_scaling(wz.model_fields_fn(p, wz.exceptional_alpha_mode(p, 0, 0.3)))
    assert res.vanishes


@pytest.mark.parametrize("lam", [0.5, -1.5])
def test_synthetic_control_scaling(lam):
    res = wz.boundary_term_scaling(wz.model_fields_fn(mdl.ModelParams(1), wz.synthetic_control_mode(lam, 0.3)))
    assert res.exponent == pytest.approx(wz.control_exponent(lam), abs=0.01)
    assert res.vanishes == (lam > -0.5)
    expect = wz.control_flux_oracle(lam, res.radii[-1], 0.3)
    assert res.fluxes[-1] == pytest.approx(expect, rel=1e-3)


def test_sphere_flux_matches_ball_integral():
    p = mdl.ModelParams(2)
    fn = wz.model_fields_fn(p, wz.synthetic_control_mode(-1.5, 0.3))
    center, radius = (0.5, 0.2, 0.8), 0.3
    surf = wz.sphere_flux(fn, center, radius)
    vol = wz.ball_integral(fn, center, radius)
    assert surf == pytest.approx(vol, rel=1e-5)
