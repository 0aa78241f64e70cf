import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nks import model as mdl
from nks import spectral as sp

# gamma0 at weight 1 after the Richardson study (grids 256, 512, 1024); see README
GAMMA0_WEIGHT_ONE = 4.0


@pytest.mark.parametrize("gamma, family, expected", [
    (2, "I", [-2, 1]), (2, "II", [-3, 0]), (6, "I", [-3, 2])])
def test_type_roots_table(gamma, family, expected):
    assert sp.type_roots([gamma], family) == pytest.approx(expected)


def test_type_roots_complex_flag():
    with pytest.raises(ValueError):
        sp.type_roots([-0.3], "I")


@pytest.mark.parametrize("gamma, expected", [(3, -3), (0, -2)])
def test_decay_exponent(gamma, expected):
    assert sp.decay_exponent(gamma) == pytest.approx(expected)


@given(st.floats(3.0001, 1e6))
def test_decay_exponent_beyond_three(gamma):
    assert sp.decay_exponent(gamma) < -3


@pytest.mark.parametrize("g0, expected", [(3, (-1.5, 2.5, -3, 1)), (0, (-0.5, 1.5, -2, 0))])
def test_weight_windows(g0, expected):
    assert sp.weight_windows(g0) == pytest.approx(expected)


@given(st.floats(2.0001, 100))
def test_window_below_threshold(g0):
    assert sp.weight_windows(g0)[0] < 0.5 - np.sqrt(3)


@given(st.floats(2.0001, 100))
def test_roots_avoid_intervals_when_gamma_above_two(g):
    assert not any(-2 <= r <= 1 for r in sp.type_roots([g], "I"))
    assert not any(-3 <= r <= 0 for r in sp.type_roots([g], "II"))


def test_weight_zero_potential_closed_form():
    prob = sp.build_ms_mode(mdl.ModelParams(0), "H", 0, 64)
    psi = prob.psi
    assert np.all(prob.a == 0)
    assert np.allclose(sp.ms_potential(mdl.ModelParams(0), "H", 0, psi), 2 / np.cos(psi) ** 2, rtol=1e-14)


@given(st.integers(0, 8), st.sampled_from(["H", "X", "Y"]), st.integers(-10, 10))
def test_potentials_finite_and_equator_inverse_square(w, comp, m):
    p = mdl.ModelParams(w)
    psi = sp.build_ms_mode(p, comp, m, 64).psi
    assert np.all(np.isfinite(sp.ms_potential(p, comp, m, psi)))
    s = 1e-5
    assert s ** 2 * sp.ms_potential(p, comp, m, np.pi / 2 - s) == pytest.approx(2.0, abs=1e-3)


def test_build_rejects():
    with pytest.raises(ValueError):
        sp.build_ms_mode(mdl.ModelParams(1), "Z", 0, 64)
    with pytest.raises(ValueError):
        sp.build_ms_mode(mdl.ModelParams(1), "H", 0, 16)


def test_sturm_liouville_rejects():
    one = np.ones_like
    with pytest.raises(ValueError):
        sp.sturm_liouville(0, 1, 16, one, one, one, right="robin")
    with pytest.raises(ValueError):
        sp.sturm_liouville(0, 1, 16, one, one, one, left="natural")
    with pytest.raises(ValueError):
        sp.sturm_liouville(0, 1, 16, one, one, one, left="dirichlet_quadratic")


@given(st.integers(0, 6), st.sampled_from(["H", "X", "Y"]), st.integers(-6, 6),
       st.sampled_from(["even", "dirichlet"]))
def test_symmetric_form_is_exact(w, comp, m, boundary):
    op = sp.build_ms_mode(mdl.ModelParams(w), comp, m, 48, boundary=boundary).operator
    dense = np.diag(op.d) + np.diag(op.e, 1) + np.diag(op.e, -1)
    assert np.array_equal(dense, dense.T)
    # the banded L is the similarity transform of the symmetric form
    sw = np.sqrt(op.w)
    ab = op.banded()
    full = np.diag(ab[1]) + np.diag(ab[0, 1:], 1) + np.diag(ab[2, :-1], -1)
    back = sw[:, None] * full / sw[None, :]
    assert np.allclose(back, dense, rtol=1e-13, atol=1e-13 * np.abs(dense).max())
    assert np.all(np.isreal(op.eigvals(3)))


def test_quadratic_ghost_is_not_symmetric():
    one = np.ones_like
    op = sp.sturm_liouville(0, 1, 32, one, one, lambda x: 0 * x, left="even", right="dirichlet_quadratic")
    assert not op.symmetric
    with pytest.raises(ValueError):
        op.eigvals(1)
    # exact for u = a s + b s^2 near the right face, so -u'' of a quadratic is reproduced in the last cell
    s = 1 - op.x
    u = 3 * s - 2 * s ** 2
    assert op.apply(u)[-1] == pytest.approx(4.0, rel=1e-10)


def test_solve_inverts_apply():
    p = mdl.ModelParams(2)
    for boundary in ("even", "dirichlet_quadratic"):
        op = sp.build_ms_mode(p, "Y", -1, 64, boundary=boundary).operator
        f = np.cos(op.x)
        assert np.allclose(op.apply(op.solve(f)), f, atol=1e-12)


def test_bessel_oracle():
    z = sp.j1_first_zero()
    assert abs(sp.spherical_j1(z)) < 1e-14
    assert 4.4934 < z < 4.4935
    vals = [sp.inverse_square_oracle(n).eigvals(1)[0] for n in (512, 1024)]
    assert sp.richardson(*vals) == pytest.approx(z ** 2, rel=1e-6)


def test_bisect_requires_bracket():
    with pytest.raises(ValueError):
        sp.bisect(np.cos, 0.0, 1.0)
    assert sp.bisect(lambda x: x - 0.25, 0.0, 1.0) == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("m, exact", [(0, 2.0), (1, 6.0)])
def test_scalar_hemisphere(m, exact):
    cv = sp.converge(lambda n: sp.scalar_hemisphere(m, n).eigvals(1)[0], 256)
    assert cv.estimate == pytest.approx(exact, rel=1e-6)
    assert cv.converged and cv.order == pytest.approx(2.0, abs=0.05)


def test_scalar_eigenfunction_is_cos():
    op = sp.scalar_hemisphere(0, 512)
    _, vec = op.eigpairs(1)
    assert sp.weighted_correlation(vec[:, 0], np.cos(op.x), op.w) >= 0.999


@given(st.integers(0, 6), st.integers(-4, 4), st.sampled_from(["even", "dirichlet"]))
def test_dropping_nonnegative_terms_lowers_eigenvalue(w, m, boundary):
    full = sp.build_ms_mode(mdl.ModelParams(w), "H", m, 128, boundary=boundary).operator.eigvals(1)[0]
    bare = sp.scalar_hemisphere(m, 128, boundary=boundary).eigvals(1)[0]
    assert full >= bare


@given(st.integers(0, 5), st.integers(-6, 6))
def test_x_and_y_spectra_mirror(w, m):
    p = mdl.ModelParams(w)
    ex = sp.build_ms_mode(p, "X", m, 128).operator.eigvals(2)
    ey = sp.build_ms_mode(p, "Y", -m, 128).operator.eigvals(2)
    assert np.allclose(ex, ey, rtol=1e-12)


def test_gamma0_weight_one_fixture():
    scan = sp.gamma0(mdl.ModelParams(1))
    assert scan.converged and scan.monotone
    assert scan.argmin == ("H", 0)
    assert scan.gamma0 == pytest.approx(GAMMA0_WEIGHT_ONE, abs=1e-6)


def test_gamma0_validates_m_max():
    with pytest.raises(ValueError):
        sp.gamma0(mdl.ModelParams(3), m_max=4)


def test_richardson_and_order():
    f = lambda n: 1.0 + 3.0 / n ** 2
    cv = sp.converge(f, 32)
    assert cv.estimate == pytest.approx(1.0, abs=1e-14)
    assert cv.order == pytest.approx(2.0)
    assert sp.refinement_order(1.0, 1.0, 1.0) == float("inf")


def test_csv_rows_layout():
    scan = sp.scan_modes(mdl.ModelParams(0), 2, n=64)
    rows = sp.csv_rows(0, scan)
    assert len(rows) == 3 * 5 * 2
    assert all(len(r) == len(sp.CSV_COLUMNS) for r in rows)
