"""Per-mode spectra of the hemisphere operator and the exponents derived from them.

Every problem here is a one-dimensional operator in flux form,

    L u = (1/w) [ -(p u')' ] + V u,

discretized by cell-centered finite volumes.  With W = diag(w) the matrix
L = W^-1 K has a symmetric similar form S = W^-1/2 K W^-1/2 (tridiagonal),
which is what the eigensolver sees.  Boundary faces take a ghost value:

    natural               p = 0 on the face, nothing to impose (the pole)
    even                  ghost = u_1: zero flux, selects the s^2 branch at the equator
    dirichlet             ghost = -u_1: u = 0 on the face
    dirichlet_quadratic   ghost = -2 u_1 + u_2 / 3: exact for a s + b s^2, not symmetric
"""
from dataclasses import dataclass, field
from math import sqrt

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded

from .grid import Axis
from . import model as mdl

COMPONENT_WEIGHT = {"H": 0, "X": +1, "Y": -1}
BOUNDARY_KINDS = ("natural", "even", "dirichlet", "dirichlet_quadratic")
MIN_MS_POINTS = 32


@dataclass
class SturmLiouville:
    x: np.ndarray          # cell centers
    h: float
    w: np.ndarray          # weight at cell centers
    d: np.ndarray          # diagonal of the symmetric form
    e: np.ndarray          # off-diagonal of the symmetric form
    right: str = "even"
    right_flux: float = 0.0   # p on the right face, needed by the quadratic ghost

    @property
    def symmetric(self):
        return self.right != "dirichlet_quadratic"

    def banded(self):
        """L = W^-1 K in (1, 1) banded storage, including any non-symmetric boundary row."""
        n = len(self.x)
        sw = np.sqrt(self.w)
        ab = np.zeros((3, n))
        ab[1] = self.d
        ab[0, 1:] = self.e * sw[1:] / sw[:-1]
        ab[2, :-1] = self.e * sw[:-1] / sw[1:]
        if self.right == "dirichlet_quadratic":
            # base row carries ghost 0; the quadratic ghost adds p (2 u_N - u_{N-1}/3) / (w h^2)
            c = self.right_flux / (self.w[-1] * self.h ** 2)
            ab[1, -1] += 2 * c
            ab[2, -2] += -c / 3
        return ab

    def apply(self, u):
        ab = self.banded()
        out = ab[1] * u
        out[:-1] += ab[0, 1:] * u[1:]
        out[1:] += ab[2, :-1] * u[:-1]
        return out

    def solve(self, f):
        """Solve L u = f."""
        f = np.asarray(f, dtype=float)
        if self.symmetric:
            sw = np.sqrt(self.w)
            ab = np.zeros((3, len(self.x)))
            ab[0, 1:] = self.e
            ab[1] = self.d
            ab[2, :-1] = self.e
            return solve_banded((1, 1), ab, sw * f) / sw
        return solve_banded((1, 1), self.banded(), f)

    def eigvals(self, k=1):
        if not self.symmetric:
            raise ValueError("eigenvalues need a symmetric boundary realization")
        return eigh_tridiagonal(self.d, self.e, select="i", select_range=(0, k - 1),
                                eigvals_only=True)

    def eigpairs(self, k=1):
        """Smallest k eigenvalues and eigenfunctions of L (columns, unnormalized)."""
        vals, vecs = eigh_tridiagonal(self.d, self.e, select="i", select_range=(0, k - 1))
        return vals, vecs / np.sqrt(self.w)[:, None]


def sturm_liouville(lo, hi, n, weight, flux, potential, left="natural", right="even"):
    """Assemble L = (1/w)(-(p u')') + V on n cells of (lo, hi)."""
    for side in (left, right):
        if side not in BOUNDARY_KINDS:
            raise ValueError(f"unknown boundary kind {side!r}")
    if left == "dirichlet_quadratic":
        raise ValueError("the quadratic ghost is only implemented on the right face")
    ax = Axis("s", lo, hi, n)
    x, h = ax.points, ax.h
    faces = lo + np.arange(n + 1) * h
    pf = np.asarray(flux(faces), dtype=float)
    diag = (pf[:-1] + pf[1:]) / h ** 2
    off = -pf[1:-1] / h ** 2
    for idx, face_p, kind in ((0, pf[0], left), (-1, pf[-1], right)):
        if kind == "natural" and face_p > 1e-12:
            raise ValueError("a natural boundary needs a vanishing flux coefficient")
        if kind == "even":
            diag[idx] -= face_p / h ** 2
        elif kind == "dirichlet":
            diag[idx] += face_p / h ** 2
    w = np.asarray(weight(x), dtype=float)
    d = diag / w + np.asarray(potential(x), dtype=float)
    e = off / np.sqrt(w[:-1] * w[1:])
    return SturmLiouville(x, h, w, d, e, right, float(pf[-1]))


# ---------------------------------------------------------------- hemisphere modes

def ms_potential(p, component, m, psi):
    """(m + q a)^2 / sin^2 psi plus the diagonal entry of the zeroth-order term."""
    q = COMPONENT_WEIGHT[component]
    a = mdl.a_profile(p, psi)
    c2 = mdl.c_rho_profile(p, psi) ** 2
    if component == "H":
        ns = 2 * c2
    else:
        ns = mdl.b_rho_profile(p, psi) ** 2 + c2
    return (m + q * a) ** 2 / np.sin(psi) ** 2 + ns


@dataclass
class SpectralProblem:
    params: mdl.ModelParams
    component: str
    fourier_mode: int
    n: int
    boundary: str
    shift: float
    operator: SturmLiouville
    a: np.ndarray = field(repr=False, default=None)
    b_rho: np.ndarray = field(repr=False, default=None)
    c_rho: np.ndarray = field(repr=False, default=None)

    @property
    def psi(self):
        return self.operator.x


def build_ms_mode(p, component, m, n, boundary="even", shift=0.0):
    """One Fourier mode of one Lie component of the hemisphere operator, minus `shift`.

    The frame removes the e^{i w theta} factor of the Higgs field, so the
    potentials do not depend on theta and modes decouple.
    """
    if component not in COMPONENT_WEIGHT:
        raise ValueError(f"component must be one of H, X, Y, got {component!r}")
    if n < MIN_MS_POINTS:
        raise ValueError(f"need at least {MIN_MS_POINTS} cells, got {n}")
    op = sturm_liouville(0.0, np.pi / 2, n, np.sin, np.sin,
                         lambda psi: ms_potential(p, component, m, psi) - shift,
                         left="natural", right=boundary)
    psi = op.x
    return SpectralProblem(p, component, int(m), n, boundary, float(shift), op,
                           mdl.a_profile(p, psi), mdl.b_rho_profile(p, psi),
                           mdl.c_rho_profile(p, psi))


def richardson(v_n, v_2n, order=2):
    return (2 ** order * v_2n - v_n) / (2 ** order - 1)


def refinement_order(v_n, v_2n, v_4n):
    """log2 of successive difference ratios; +inf when the sequence is already converged."""
    d1, d2 = abs(v_n - v_2n), abs(v_2n - v_4n)
    if d2 == 0:
        return float("inf")
    if d1 == 0:
        return float("-inf")
    return float(np.log2(d1 / d2))


@dataclass
class ConvergedValue:
    values: tuple          # raw values on n, 2n, 4n
    grids: tuple
    estimate: float        # Richardson over the two finest grids
    order: float
    converged: bool


def converge(fn, n, min_order=1.5, levels=3):
    """Evaluate fn at n, 2n, 4n (or n, 2n) and extrapolate."""
    grids = tuple(n * 2 ** j for j in range(levels))
    vals = tuple(float(fn(g)) for g in grids)
    est = richardson(vals[-2], vals[-1])
    order = refinement_order(*vals[-3:]) if levels >= 3 else float("nan")
    ok = levels < 3 or order >= min_order
    return ConvergedValue(vals, grids, float(est), order, bool(ok))


def eigen_smallest(sp, k=1):
    """k smallest eigenvalues of the symmetric discretization, ascending."""
    return sp.operator.eigvals(k)


def converged_eigenvalue(p, component, m, n=256, boundary="even", index=0, levels=3):
    def fn(g):
        return eigen_smallest(build_ms_mode(p, component, m, g, boundary), index + 1)[index]
    return converge(fn, n, levels=levels)


# ---------------------------------------------------------------- scalar oracles

def scalar_hemisphere(m, n, boundary="dirichlet"):
    """Scalar Laplacian on the hemisphere for Fourier mode m, without any potential."""
    return sturm_liouville(0.0, np.pi / 2, n, np.sin, np.sin,
                           lambda psi: m ** 2 / np.sin(psi) ** 2,
                           left="natural", right=boundary)


def inverse_square_oracle(n):
    """-u'' + 2 u / s^2 on (0, 1): s^2 branch at 0 (even ghost), Dirichlet at 1."""
    one = np.ones_like
    return sturm_liouville(0.0, 1.0, n, one, one, lambda s: 2.0 / s ** 2,
                           left="even", right="dirichlet")


def spherical_j1(x):
    return np.sin(x) / x ** 2 - np.cos(x) / x


def bisect(fn, lo, hi, tol=1e-15, max_iter=200):
    """Plain bisection on a sign change."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0 or hi - lo < tol * max(1.0, abs(mid)):
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def j1_first_zero():
    # j1 > 0 on (0, pi) and changes sign once between pi and 3 pi / 2
    return bisect(spherical_j1, np.pi, 1.5 * np.pi)


def weighted_correlation(u, v, w):
    """|<u, v>_w| / (|u|_w |v|_w)."""
    num = abs(np.sum(w * u * v))
    return float(num / np.sqrt(np.sum(w * u * u) * np.sum(w * v * v)))


# ---------------------------------------------------------------- gamma0 and exponents

@dataclass
class ModeScan:
    weight: int
    m_max: int
    table: list            # rows (component, m, ConvergedValue)
    gamma0: float
    argmin: tuple
    monotone: bool
    converged: bool
    widened: int


def scan_modes(p, m_max, n=256, components=("H", "X", "Y"), levels=2):
    rows = []
    for comp in components:
        for m in range(-m_max, m_max + 1):
            rows.append((comp, m, converged_eigenvalue(p, comp, m, n, levels=levels)))
    return rows


def _monotone_tail(rows, m_max):
    """Each component's eigenvalue grows over the last two |m| shells."""
    ok = True
    for comp in {r[0] for r in rows}:
        by_m = {m: cv.estimate for c, m, cv in rows if c == comp}
        for sign in (+1, -1):
            ok &= by_m[sign * m_max] > by_m[sign * (m_max - 1)]
    return bool(ok)


def gamma0(p, m_max=None, n=256, cap=4, levels=3):
    """Smallest eigenvalue over components and |m| <= m_max, widening the scan if needed."""
    m_max = p.weight + 16 if m_max is None else m_max
    if m_max < p.weight + 2:
        raise ValueError(f"m_max must be at least weight + 2 = {p.weight + 2}")
    widened = 0
    while True:
        rows = scan_modes(p, m_max, n, levels=levels)
        best = min(rows, key=lambda r: r[2].estimate)
        at_edge = abs(best[1]) == m_max
        monotone = _monotone_tail(rows, m_max)
        if (not at_edge and monotone) or widened >= cap:
            break
        m_max *= 2
        widened += 1
    converged = all(cv.converged for _, _, cv in rows) and not at_edge and monotone
    return ModeScan(p.weight, m_max, rows, best[2].estimate, (best[0], best[1]),
                    monotone, converged, widened)


def diagonal_gamma0(p, n=512, levels=2):
    """Smallest eigenvalue for diagonal (H) perturbations, attained at m = 0."""
    return converged_eigenvalue(p, "H", 0, n, levels=levels).estimate


def type_roots(gammas, family):
    """Indicial roots -1/2 +- sqrt(gamma + 1/4) (family I) or -3/2 +- ... (family II)."""
    offset = {"I": -0.5, "II": -1.5}[family]
    out = []
    for g in np.atleast_1d(gammas):
        if g <= -0.25:
            raise ValueError(f"gamma = {g} gives complex roots")
        r = sqrt(g + 0.25)
        out += [offset - r, offset + r]
    return sorted(out)


def decay_exponent(gamma):
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    return -1.0 - sqrt(1.0 + gamma)


def weight_windows(gamma0_value):
    """(delta-, delta+, eta-, eta+) for which the model operators are invertible."""
    if gamma0_value <= -1:
        raise ValueError("gamma0 must exceed -1")
    r = sqrt(1.0 + gamma0_value)
    return 0.5 - r, 0.5 + r, -1.0 - r, -1.0 + r


CSV_COLUMNS = ("r_weight", "component", "m", "n_grid", "k", "eigenvalue",
               "richardson_estimate", "observed_order")


def csv_rows(weight, rows, k=0):
    out = []
    for comp, m, cv in rows:
        for g, v in zip(cv.grids, cv.values):
            out.append((weight, comp, m, g, k, v, cv.estimate, cv.order))
    return out
