"""Residuals of the four-dimensional equations and of their x^1-invariant reduction.

Fields are stored as Cartesian components (A_1..A_4, phi_1..phi_4), each an
array of 2x2 matrices over the grid.  A grid is read in one of two charts:

* ``cartesian``: axes named among x1, x2, x3, x4; a missing axis means the
  fields do not depend on that coordinate.
* ``cylindrical``: axes (r, theta, x4) with x2 + i x3 = r e^{i theta}; fields
  are x^1-invariant by construction.

Derivatives are second-order finite differences by default, or Fourier
derivatives (``method="spectral"``) when every axis is periodic.
"""
from dataclasses import dataclass, field

import numpy as np

from .grid import Axis, Grid, LatticeField, fd_derivative, spectral_derivative, observed_order
from .lie import bracket, dagger, sup_norm, norm2, is_su2
from . import model as mdl

MIN_REDUCED_POINTS = 16
ROUNDOFF_FLOOR = 1e-10
CARTESIAN_AXES = ("x1", "x2", "x3", "x4")
CYLINDRICAL_AXES = ("r", "theta", "x4")

# (i, j) pairs of the six independent curvature-type components, 1-based
PAIRS = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))


def _levi_civita(i, j, k, l):
    perm = [i, j, k, l]
    if len(set(perm)) < 4:
        return 0
    sign = 1
    for a in range(4):
        for b in range(a + 1, 4):
            if perm[a] > perm[b]:
                sign = -sign
    return sign


@dataclass
class GaugePair:
    """Connection and Higgs field components on a shared grid.

    ``A`` and ``phi`` are 4-tuples of arrays (grid.shape + (2, 2)), index 0
    holding the x^1 component.  None entries are zero fields.
    """

    grid: Grid
    A: tuple
    phi: tuple
    chart: str = "cartesian"
    method: str = "fd"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.chart not in ("cartesian", "cylindrical"):
            raise ValueError(f"unknown chart {self.chart!r}")
        if self.method not in ("fd", "spectral"):
            raise ValueError(f"unknown derivative method {self.method!r}")
        names = tuple(a.name for a in self.grid.axes)
        allowed = CARTESIAN_AXES if self.chart == "cartesian" else CYLINDRICAL_AXES
        if self.chart == "cylindrical" and names != CYLINDRICAL_AXES:
            raise ValueError(f"cylindrical chart needs axes {CYLINDRICAL_AXES}, got {names}")
        if not set(names) <= set(allowed):
            raise ValueError(f"axes {names} not valid for chart {self.chart!r}")
        if self.method == "spectral" and not all(a.periodic for a in self.grid.axes):
            raise ValueError("spectral derivatives need every axis periodic")
        if len(self.A) != 4 or len(self.phi) != 4:
            raise ValueError("need four components of A and of phi")
        shape = self.grid.shape + (2, 2)
        zero = np.zeros(shape, dtype=complex)

        def fill(seq):
            out = []
            for k, v in enumerate(seq):
                if isinstance(v, LatticeField):
                    v = v.values
                v = zero if v is None else np.asarray(v, dtype=complex)
                if v.shape != shape:
                    raise ValueError(f"component {k + 1}: shape {v.shape}, expected {shape}")
                out.append(v)
            return tuple(out)

        self.A = fill(self.A)
        self.phi = fill(self.phi)

    def fields(self, label):
        """LatticeField view of one component, e.g. 'A2' or 'phi3'."""
        kind, idx = label[:-1], int(label[-1])
        src = self.A if kind == "A" else self.phi
        return LatticeField(self.grid, src[idx - 1], label)

    @property
    def x1_invariant(self):
        return self.chart == "cylindrical" or not self.grid.has("x1")

    def d(self, f, i):
        """Partial derivative along Cartesian direction i (1..4) of an array field."""
        f = np.asarray(f)
        if self.chart == "cartesian":
            name = f"x{i}"
            if not self.grid.has(name):
                return np.zeros_like(f)
            return self._axis_derivative(f, name)
        if i == 1:
            return np.zeros_like(f)
        if i == 4:
            return self._axis_derivative(f, "x4")
        r = self.grid.coords("r")[..., None, None]
        th = self.grid.coords("theta")[..., None, None]
        dr = self._axis_derivative(f, "r")
        dth = self._axis_derivative(f, "theta")
        if i == 2:
            return np.cos(th) * dr - np.sin(th) / r * dth
        return np.sin(th) * dr + np.cos(th) / r * dth

    def _axis_derivative(self, f, name):
        if self.method == "spectral":
            return spectral_derivative(f, name, self.grid)
        return fd_derivative(f, name, self.grid)

    def covariant(self, i, f):
        """D_i f = d_i f + [A_i, f]."""
        return self.d(f, i) + bracket(self.A[i - 1], f)

    def curvature(self, i, j):
        """F_ij = d_i A_j - d_j A_i + [A_i, A_j]."""
        ai, aj = self.A[i - 1], self.A[j - 1]
        return self.d(aj, i) - self.d(ai, j) + bracket(ai, aj)

    @property
    def is_real(self):
        return all(is_su2(v) for v in self.A + self.phi)


@dataclass
class ReducedResiduals:
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    mu: np.ndarray
    sup_norms: tuple = ()

    def __post_init__(self):
        self.sup_norms = tuple(sup_norm(v) for v in (self.X, self.Y, self.Z, self.mu))


def _check_resolution(grid):
    for ax in grid.axes:
        if ax.n < MIN_REDUCED_POINTS:
            raise ValueError(f"axis {ax.name!r} has {ax.n} points; "
                             f"reduced residuals need at least {MIN_REDUCED_POINTS}")


def reduced_residuals(pair):
    """Curvatures of the three commuting operators and the moment map.

    With A_zbar = A_2 + i A_3, B = A_4 - i phi_1, varphi = phi_2 - i phi_3 and
    dbar = d_2 + i d_3:

        X  = dbar B - d_4 A_zbar + [A_zbar, B]
        Y  = d_4 varphi + [B, varphi]
        Z  = -(dbar varphi + [A_zbar, varphi])
        mu = F_23 - [phi_2, phi_3] - D_4 phi_1
    """
    _check_resolution(pair.grid)
    if not pair.x1_invariant:
        raise ValueError("reduced residuals need x^1-invariant fields")
    a1, a2, a3, a4 = pair.A
    p1, p2, p3, p4 = pair.phi
    if np.any(a1) or np.any(p4):
        raise ValueError("reduced residuals need A_1 = phi_4 = 0")
    azb = a2 + 1j * a3
    bb = a4 - 1j * p1
    vp = p2 - 1j * p3

    def dbar(f):
        return pair.d(f, 2) + 1j * pair.d(f, 3)

    res_x = dbar(bb) - pair.d(azb, 4) + bracket(azb, bb)
    res_y = pair.d(vp, 4) + bracket(bb, vp)
    res_z = -(dbar(vp) + bracket(azb, vp))
    res_mu = pair.curvature(2, 3) - bracket(p2, p3) - pair.covariant(4, p1)
    return ReducedResiduals(res_x, res_y, res_z, res_mu)


def kw_residual(pair):
    """V_ij = F_ij - [phi_i, phi_j] + eps_ijkl D_k phi_l and V0 = sum_i D_i phi_i.

    Returns (dict keyed by the pairs in PAIRS, V0).
    """
    dphi = {}

    def dk(k, l):
        if (k, l) not in dphi:
            dphi[(k, l)] = pair.covariant(k, pair.phi[l - 1])
        return dphi[(k, l)]

    out = {}
    for i, j in PAIRS:
        v = pair.curvature(i, j) - bracket(pair.phi[i - 1], pair.phi[j - 1])
        for k in range(1, 5):
            for l in range(1, 5):
                s = _levi_civita(i, j, k, l)
                if s:
                    v = v + s * dk(k, l)
        out[(i, j)] = v
    v0 = sum(dk(i, i) for i in range(1, 5))
    return out, v0


def recombine(vfields, v0):
    """Reduced residuals expressed through the four-dimensional ones (x^1-invariant, A_1 = phi_4 = 0)."""
    return (vfields[(2, 4)] + 1j * vfields[(3, 4)],
            vfields[(1, 3)] + 1j * vfields[(1, 2)],
            -v0 + 1j * vfields[(1, 4)],
            vfields[(2, 3)])


def gauge_transform(g, pair):
    """A_i -> g A_i g^-1 - (d_i g) g^-1, phi_i -> g phi_i g^-1."""
    g = np.asarray(g, dtype=complex)
    if g.shape != pair.grid.shape + (2, 2):
        raise ValueError(f"gauge field shape {g.shape} does not match grid {pair.grid.shape}")
    ginv = np.linalg.inv(g)
    if pair.is_real:
        unitary = np.allclose(g @ dagger(g), np.eye(2), rtol=0, atol=1e-12)
        if not unitary:
            raise ValueError("non-unitary gauge transformation would leave su(2)")
    new_a = tuple(g @ a @ ginv - pair.d(g, i + 1) @ ginv for i, a in enumerate(pair.A))
    new_phi = tuple(g @ p @ ginv for p in pair.phi)
    return GaugePair(pair.grid, new_a, new_phi, pair.chart, pair.method, dict(pair.meta))


def model_pair(p, grid, phi1_sign=None):
    """The model solution sampled on a cylindrical (r, theta, x4) grid.

    ``phi1_sign`` overrides the orientation of phi_1 (used to test both choices).
    """
    r = grid.coords("r")
    th = grid.coords("theta")
    y = grid.coords("x4")
    r, th, y = np.broadcast_arrays(r, th, y)
    a2, a3, a4, p1, p2, p3 = mdl.cartesian_fields(p, r * np.cos(th), r * np.sin(th), y)
    if phi1_sign is not None:
        p1 = p1 * (phi1_sign * mdl.PHI1_SIGN)
    return GaugePair(grid, (None, a2, a3, a4), (p1, p2, p3, None), chart="cylindrical")


def annulus_grid(n, r_range=(0.2, 1.0), y_range=(0.2, 1.0), n_theta=None):
    return Grid((Axis("r", r_range[0], r_range[1], n),
                 Axis("theta", 0.0, 2 * np.pi, n_theta or n, periodic=True),
                 Axis("x4", y_range[0], y_range[1], n)))


def _window_axis(ax, i0, i1):
    return Axis(ax.name, ax.lo + i0 * ax.h, ax.lo + i1 * ax.h, i1 - i0, periodic=False)


def _tiles(n, width, halo=1, min_len=MIN_REDUCED_POINTS):
    """Owned ranges [start, stop) of length <= width, each padded by a halo (clipped at 0, n)."""
    out = []
    for start in range(0, n, width):
        stop = min(start + width, n)
        lo, hi = max(start - halo, 0), min(stop + halo, n)
        if hi - lo < min_len:
            lo = max(0, hi - min_len)
        out.append((lo, hi, start, stop))
    return out


def model_residual_norms(p, n, theta_windows=3, window_width=16, slab=64, phi1_sign=None):
    """Sup norms of (X, Y, Z, mu) for the model on the n^3 annular box.

    The theta axis is periodic and the model is rotation covariant: a shift
    by one grid step maps every stencil onto another and conjugates each
    residual by a constant unitary, so the sup over any theta window equals
    the sup over the full circle.  A few windows spread around the circle are
    evaluated anyway.  The y axis is processed in slabs with a one-cell halo
    so the whole box never sits in memory.  Returns (norms, field_scale)
    where field_scale is the largest squared field norm in the box.
    """
    grid = annulus_grid(n)
    r_ax, th_ax, y_ax = grid.axes
    width = min(window_width, th_ax.n)
    starts = np.unique(np.linspace(0, th_ax.n - width, max(1, theta_windows)).astype(int))
    norms = np.zeros(4)
    scale = 0.0
    for t0 in starts:
        # one halo cell each side; the periodic wrap is simply unrolled
        th_win = _window_axis(th_ax, t0 - 1, t0 + width + 1)
        for lo, hi, start, stop in _tiles(y_ax.n, slab):
            sub = Grid((r_ax, th_win, _window_axis(y_ax, lo, hi)))
            pair = model_pair(p, sub, phi1_sign)
            res = reduced_residuals(pair)
            own = (slice(None), slice(1, 1 + width), slice(start - lo, stop - lo))
            for k, v in enumerate((res.X, res.Y, res.Z, res.mu)):
                norms[k] = max(norms[k], sup_norm(v[own]))
            scale = max(scale, float(np.max(sum(norm2(f[own]) for f in pair.A + pair.phi))))
    return norms, scale


@dataclass
class ModelVerification:
    weight: int
    grids: tuple
    norms: np.ndarray      # (len(grids), 4): X, Y, Z, mu
    scale: float
    orders: tuple          # observed order per residual
    passed: bool


def verify_model(p, grids=(64, 128, 256), min_order=1.8, rel_tol=1e-3, **kw):
    """Refinement study of the model residuals on the annular box."""
    if len(grids) != 3 or grids[1] != 2 * grids[0] or grids[2] != 2 * grids[1]:
        raise ValueError(f"need grids n, 2n, 4n, got {grids}")
    rows, scale = [], 0.0
    for n in grids:
        norms, sc = model_residual_norms(p, n, **kw)
        rows.append(norms)
        scale = max(scale, sc)
    rows = np.array(rows)
    # a residual sitting at roundoff on every grid is exact; its order is the +inf sentinel
    floor = ROUNDOFF_FLOOR * scale
    orders = tuple(float("inf") if np.all(rows[:, k] <= floor) else observed_order(*rows[:, k])
                   for k in range(4))
    fine_ok = bool(np.all(rows[-1] <= rel_tol * scale))
    passed = fine_ok and all(o >= min_order for o in orders)
    return ModelVerification(p.weight, tuple(grids), rows, scale, orders, passed)


def resolve_phi1_sign(p=None, n=32):
    """Pick the orientation of phi_1 for which the moment map is smaller.

    The two candidates differ by O(1) in mu, so a coarse grid settles it.
    """
    p = p or mdl.ModelParams(1)
    mus = {}
    for s in (+1, -1):
        norms, _ = model_residual_norms(p, n, theta_windows=1, phi1_sign=s)
        mus[s] = norms[3]
    return min(mus, key=mus.get), mus
