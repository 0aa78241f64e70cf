import numpy as np
import pytest
from hypothesis import given

from nks import model as mdl
from nks import reduced_kw as rkw
from nks.grid import Axis, Grid
from nks.lie import H, X, Y, E, bracket, conjugate, norm2, su2_from_coords

from conftest import unitary


def cart_grid(n=16):
    return Grid(tuple(Axis(f"x{i}", 0.1, 1.1, n) for i in (2, 3, 4)))


def random_pair(seed=0, n=16, smooth=True):
    g = cart_grid(n)
    rng = np.random.default_rng(seed)
    x2, x3, x4 = (g.coords(f"x{i}") for i in (2, 3, 4))

    def comp():
        c = [sum(rng.uniform(-1, 1) * np.cos(k * (x2 + 2 * x3 - x4) + rng.uniform(0, 6)) for k in (1, 2))
             + rng.uniform(-1, 1) * x2 * x4 for _ in range(3)]
        return su2_from_coords(np.stack(np.broadcast_arrays(*c), axis=-1))

    return rkw.GaugePair(g, (None, comp(), comp(), comp()), (comp(), comp(), comp(), None))


def test_zero_fields_have_zero_residuals():
    pair = rkw.GaugePair(cart_grid(), (None,) * 4, (None,) * 4)
    res = rkw.reduced_residuals(pair)
    assert all(np.all(v == 0) for v in (res.X, res.Y, res.Z, res.mu))
    vf, v0 = rkw.kw_residual(pair)
    assert all(np.all(v == 0) for v in vf.values()) and np.all(v0 == 0)


def test_constant_higgs_pair():
    g = cart_grid()
    shape = g.shape + (2, 2)
    p2 = np.broadcast_to(su2_from_coords([0.3, -1.0, 0.5]), shape)
    p3 = np.broadcast_to(su2_from_coords([1.2, 0.4, -0.7]), shape)
    res = rkw.reduced_residuals(rkw.GaugePair(g, (None,) * 4, (None, p2, p3, None)))
    assert np.allclose(res.X, 0) and np.allclose(res.Y, 0) and np.allclose(res.Z, 0)
    assert np.allclose(res.mu, -bracket(p2, p3), atol=1e-15)


def test_refuses_coarse_grid_and_bad_components():
    g = Grid(tuple(Axis(f"x{i}", 0, 1, 8) for i in (2, 3, 4)))
    with pytest.raises(ValueError):
        rkw.reduced_residuals(rkw.GaugePair(g, (None,) * 4, (None,) * 4))
    g = cart_grid()
    one = np.broadcast_to(E, g.shape + (2, 2))
    with pytest.raises(ValueError):
        rkw.reduced_residuals(rkw.GaugePair(g, (one, None, None, None), (None,) * 4))
    with pytest.raises(ValueError):
        rkw.reduced_residuals(rkw.GaugePair(g, (None,) * 4, (None, None, None, one)))
    g4 = Grid(tuple(Axis(f"x{i}", 0, 1, 16) for i in (1, 2, 3, 4)))
    with pytest.raises(ValueError):
        rkw.reduced_residuals(rkw.GaugePair(g4, (None,) * 4, (None,) * 4))


def test_pair_validation():
    g = cart_grid()
    with pytest.raises(ValueError):
        rkw.GaugePair(g, (None,) * 4, (None,) * 4, chart="polar")
    with pytest.raises(ValueError):
        rkw.GaugePair(g, (None,) * 4, (None,) * 4, method="spectral")
    with pytest.raises(ValueError):
        rkw.GaugePair(g, (None,) * 3, (None,) * 4)
    with pytest.raises(ValueError):
        rkw.GaugePair(g, (np.zeros((3, 2, 2)), None, None, None), (None,) * 4)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_four_dimensional_residuals_recombine(seed):
    pair = random_pair(seed)
    res = rkw.reduced_residuals(pair)
    rec = rkw.recombine(*rkw.kw_residual(pair))
    for got, want in zip(rec, (res.X, res.Y, res.Z, res.mu)):
        assert np.allclose(got, want, rtol=0, atol=1e-12 * max(1.0, np.abs(want).max()))


@given(unitary())
def test_gauge_covariance_constant(g):
    pair = random_pair(3)
    gg = np.broadcast_to(g, pair.grid.shape + (2, 2))
    res = rkw.reduced_residuals(pair)
    moved = rkw.reduced_residuals(rkw.gauge_transform(gg, pair))
    for a, b in zip((moved.X, moved.Y, moved.Z, moved.mu), (res.X, res.Y, res.Z, res.mu)):
        assert np.allclose(a, conjugate(g, b), rtol=0, atol=1e-12 * max(1.0, np.abs(b).max()))
    vf, _ = rkw.kw_residual(pair)
    vf2, _ = rkw.kw_residual(rkw.gauge_transform(gg, pair))
    for k in rkw.PAIRS:
        assert np.allclose(norm2(vf2[k]), norm2(vf[k]), rtol=0, atol=1e-12 * max(1.0, norm2(vf[k]).max()))


def test_identity_gauge_and_non_unitary():
    pair = random_pair(4)
    eye = np.broadcast_to(np.eye(2, dtype=complex), pair.grid.shape + (2, 2))
    same = rkw.gauge_transform(eye, pair)
    assert all(np.array_equal(a, b) for a, b in zip(same.A + same.phi, pair.A + pair.phi))
    with pytest.raises(ValueError):
        rkw.gauge_transform(2 * eye, pair)
    with pytest.raises(ValueError):
        rkw.gauge_transform(eye[:-1], pair)


def test_nahm_gauge_on_sampled_model():
    # near the boundary the gauge-rotated y * varphi approaches X
    grid = Grid((Axis("r", 0.5, 0.9, 16), Axis("theta", 0.0, 2 * np.pi, 16, periodic=True),
                 Axis("x4", 1e-6, 1e-5, 16)))
    p = mdl.ModelParams(3)
    pair = rkw.model_pair(p, grid)
    h = mdl.nahm_gauge_h(p, np.broadcast_to(grid.coords("theta"), grid.shape))
    moved = rkw.gauge_transform(h, pair)
    y = grid.coords("x4")[..., None, None]
    varphi = moved.phi[1] - 1j * moved.phi[2]
    assert np.allclose(y * varphi, X, atol=1e-4)


class ExactYDerivativePair(rkw.GaugePair):
    """Weight-zero fields all scale as 1/y, so d_4 f = -f / y exactly and the others vanish."""

    def d(self, f, i):
        if i == 4:
            return -f / self.grid.coords("x4")[..., None, None]
        return np.zeros_like(f)


def test_weight_zero_is_the_nahm_pole_exactly():
    g = cart_grid()
    x2, x3, y = np.broadcast_arrays(*(g.coords(f"x{i}") for i in (2, 3, 4)))
    a2, a3, a4, p1, p2, p3 = mdl.cartesian_fields(mdl.ModelParams(0), x2, x3, y)
    assert not np.any(a2) and not np.any(a3) and not np.any(a4)
    pair = ExactYDerivativePair(g, (None, a2, a3, a4), (p1, p2, p3, None))
    res = rkw.reduced_residuals(pair)
    for v in (res.X, res.Y, res.Z, res.mu):
        assert np.max(np.abs(v * y[..., None, None] ** 2)) < 1e-14


def test_model_residuals_converge_weight_one():
    p = mdl.ModelParams(1)
    norms = [rkw.model_residual_norms(p, n, theta_windows=1)[0] for n in (64, 128, 256)]
    from nks.grid import observed_order
    for k in range(4):
        assert observed_order(*(row[k] for row in norms)) >= 1.8


def test_phi1_sign_resolution():
    sign, mus = rkw.resolve_phi1_sign()
    assert sign == mdl.PHI1_SIGN
    assert mus[-sign] > 50 * mus[sign]


def test_verify_model_requires_doubling():
    with pytest.raises(ValueError):
        rkw.verify_model(mdl.ModelParams(1), grids=(64, 96, 128))
