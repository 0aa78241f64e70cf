"""Commutativity-preserving deformations that are not gauge generated.

Three families perturb the Higgs operator of the model by a holomorphic
matrix: an upper-right entry z^sigma (beta family), a diagonal z^t (alpha
family) or a lower-left z^k (gamma family).  The first two need a
compensating complexified gauge parameter chi solving a linear equation on
the hemisphere; the third needs none.

beta family (sigma < w):  chi = rho^(sigma-w) e^{i(sigma-w) theta} f(psi) H
    [hemisphere operator, H component, m = sigma - w] f
        - (w - sigma)(w - sigma - 1) f = sin^(w+sigma)(psi) k(psi)^2
    f is even in s = pi/2 - psi and f(0) = 1/2 cancels the pole of the
    perturbed Higgs field.

alpha family (t < w):  chi = rho^(t+1) e^{i(t-w) theta} h(psi) Y
    [hemisphere operator, Y component, m = t - w] h - (t+1)(t+2) h = -2 k_t(psi)
    with k_t = 2n sin^(w+t)(psi) / P_n(cos psi).  h vanishes linearly at the
    equator with slope -1.

Here k(psi)^2 = 4 n^2 / P_n(cos psi)^2 = rho^(2n) e^{2v}, n = w + 1.
"""
from dataclasses import dataclass, field, asdict
from math import isfinite

import numpy as np

from . import model as mdl
from . import spectral as sp

SIGN_CONVENTIONS = {
    "phi1_sign": mdl.PHI1_SIGN,
    "beta_rhs_sign": +1,
    "alpha_rhs_sign": -1,
}

DEFAULT_GRIDS = (256, 512, 1024)


@dataclass(frozen=True)
class DeformationProblem:
    params: mdl.ModelParams
    case: str              # "alpha", "beta" or "gamma"
    exponent: int          # t, sigma or k

    def __post_init__(self):
        w = self.params.weight
        if self.case not in ("alpha", "beta", "gamma"):
            raise ValueError(f"unknown deformation case {self.case!r}")
        if self.case == "gamma":
            if self.exponent < 0:
                raise ValueError("gamma family needs k >= 0")
        elif not 0 <= self.exponent < w:
            raise ValueError(f"{self.case} family needs 0 <= exponent < weight = {w}, got {self.exponent}")

    @property
    def component(self):
        return {"beta": "H", "alpha": "Y"}.get(self.case)

    @property
    def fourier_mode(self):
        return self.exponent - self.params.weight

    @property
    def shift(self):
        w, e = self.params.weight, self.exponent
        if self.case == "beta":
            return float((w - e) * (w - e - 1))
        if self.case == "alpha":
            # chi grows like rho^(t+1), so the radial part contributes (t+1)(t+2)
            return float((e + 1) * (e + 2))
        return 0.0

    @property
    def boundary(self):
        return {"beta": "even", "alpha": "dirichlet_quadratic"}.get(self.case)

    def rhs(self, psi):
        if self.case == "beta":
            return SIGN_CONVENTIONS["beta_rhs_sign"] * np.sin(psi) ** (
                self.params.weight + self.exponent) * rhs_beta(self.params, self.exponent, psi)
        if self.case == "alpha":
            return SIGN_CONVENTIONS["alpha_rhs_sign"] * 2 * rhs_alpha(self.params, self.exponent, psi)
        raise ValueError("the gamma family has no equation to solve")

    def operator(self, n):
        return sp.build_ms_mode(self.params, self.component, self.fourier_mode, n,
                                boundary=self.boundary, shift=self.shift).operator


def rhs_beta(p, sigma, psi):
    """k(psi)^2 = 4 n^2 / P_n(cos psi)^2; behaves like 1/s^2 at the equator."""
    if not 0 <= sigma < p.weight:
        raise ValueError(f"sigma must satisfy 0 <= sigma < {p.weight}")
    return _k_squared(p, psi)


def _k_squared(p, psi):
    pn, _ = mdl.stable_pq(p.n, np.cos(psi))
    return 4.0 * p.n ** 2 / pn ** 2


def rhs_alpha(p, t, psi):
    """k_t(psi) = 2n sin^(w+t)(psi) / P_n(cos psi); behaves like 1/s at the equator."""
    if not 0 <= t < p.weight:
        raise ValueError(f"t must satisfy 0 <= t < {p.weight}")
    pn, _ = mdl.stable_pq(p.n, np.cos(psi))
    return 2.0 * p.n * np.sin(psi) ** (p.weight + t) / pn


def mu_nu(p, psi):
    """(|mu|^2, |nu|^2): the entries of the zeroth-order term on the Y component."""
    psi = np.asarray(psi, dtype=float)
    pn, qn = mdl.stable_pq(p.n, np.cos(psi))
    mu = -p.n * qn / pn
    nu = 2.0 * p.n * np.sin(psi) ** p.weight / pn
    return mu ** 2, nu ** 2


def _edge_fit(s, v, powers):
    """Least-squares fit of v ~ sum c_j s^powers[j] on the four cells nearest s = 0."""
    idx = np.argsort(s)[:4]
    A = np.stack([s[idx] ** k for k in powers], axis=1)
    return np.linalg.lstsq(A, v[idx], rcond=None)[0]


@dataclass
class BoundarySolve:
    problem: DeformationProblem
    grids: tuple
    raw: tuple             # per-grid boundary estimate
    value: float           # Richardson over the two finest grids
    order: float
    residual: float        # max relative residual of the linear solves
    min_eigenvalue: float  # smallest eigenvalue of the shifted operator (symmetric realization)
    psi: np.ndarray = field(repr=False, default=None)
    profile: np.ndarray = field(repr=False, default=None)


def _solve_one(prob, n):
    op = prob.operator(n)
    rhs = prob.rhs(op.x)
    u = op.solve(rhs)
    res = np.max(np.abs(op.apply(u) - rhs)) / np.max(np.abs(rhs))
    return op, u, float(res)


def _shifted_min_eig(prob, n, boundary):
    op = sp.build_ms_mode(prob.params, prob.component, prob.fourier_mode, n,
                          boundary=boundary, shift=prob.shift).operator
    return float(op.eigvals(1)[0])


def _solve_boundary(prob, grids, extract, eig_boundary):
    min_eig = _shifted_min_eig(prob, grids[0], eig_boundary)
    if not min_eig > 0:
        raise ArithmeticError(f"shifted operator for {prob} is not positive: smallest eigenvalue {min_eig}")
    raw, res = [], 0.0
    for n in grids:
        op, u, r = _solve_one(prob, n)
        raw.append(extract(np.pi / 2 - op.x, u))
        res = max(res, r)
    value = sp.richardson(raw[-2], raw[-1])
    order = sp.refinement_order(*raw[-3:]) if len(raw) >= 3 else float("nan")
    return BoundarySolve(prob, tuple(grids), tuple(raw), float(value), order, res, min_eig, op.x, u)


def solve_f(p, sigma, grids=DEFAULT_GRIDS):
    """beta family: f at the equator, from f ~ f0 + f1 s on the last cells, then Richardson."""
    prob = DeformationProblem(p, "beta", sigma)
    return _solve_boundary(prob, grids, lambda s, f: _edge_fit(s, f, (0, 1))[0], "even")


def solve_h(p, t, grids=DEFAULT_GRIDS):
    """alpha family: lim h/s at the equator, from h ~ h1 s + h2 s^2, then Richardson."""
    prob = DeformationProblem(p, "alpha", t)
    return _solve_boundary(prob, grids, lambda s, h: _edge_fit(s, h, (1, 2))[0], "dirichlet")


def alpha_lower_bound_margin(p, t, n=512):
    """Smallest eigenvalue of the unshifted alpha operator minus (w+1)^2 (nonnegative up to slack)."""
    prob = DeformationProblem(p, "alpha", t)
    op = sp.build_ms_mode(p, "Y", prob.fourier_mode, n, boundary="dirichlet").operator
    return float(op.eigvals(1)[0]) - (p.weight + 1) ** 2


def literal_variant_boundary_value(p, case, exponent, grids=DEFAULT_GRIDS):
    """Boundary value with the alternative literal operator: angular term (m + a)^2 and shift e(e+1)
    for alpha, and no sin factor on the beta right-hand side.  Used to show insensitivity."""
    prob = DeformationProblem(p, case, exponent)
    raw = []
    for n in grids:
        if case == "beta":
            op = prob.operator(n)
            rhs = rhs_beta(p, exponent, op.x)
            u = op.solve(rhs)
            raw.append(_edge_fit(np.pi / 2 - op.x, u, (0, 1))[0])
        else:
            m = prob.fourier_mode

            def potential(psi):
                a = mdl.a_profile(p, psi)
                mu2, nu2 = mu_nu(p, psi)
                return (m + a) ** 2 / np.sin(psi) ** 2 + mu2 + nu2 - exponent * (exponent + 1)

            op = sp.sturm_liouville(0.0, np.pi / 2, n, np.sin, np.sin, potential,
                                    left="natural", right="dirichlet_quadratic")
            u = op.solve(prob.rhs(op.x))
            raw.append(_edge_fit(np.pi / 2 - op.x, u, (1, 2))[0])
    return sp.richardson(raw[-2], raw[-1])


# ---------------------------------------------------------------- root sets and report

def type2prime_sets(weight):
    """(negative, middle, tail_start) of the non-gauge deformation roots."""
    negative = [sigma - weight - 1 for sigma in range(weight)]
    middle = list(range(weight))
    return sorted(negative), middle, weight + 1


def gamma_case_roots(weight, count):
    """First `count` roots w + 1 + k of the lower-triangular family (chi = 0, no solve)."""
    return [weight + 1 + k for k in range(count)]


@dataclass
class IndicialReport:
    r_weight: int
    gamma_list: list
    type_I: list
    type_II: list
    type_II_prime: dict
    gamma0: float
    exclusions: dict
    boundary_values: dict
    details: dict = field(default_factory=dict)

    @property
    def ok(self):
        bv_ok = all(v["within_tolerance"] for v in self.details.get("boundary_checks", []))
        return all(self.exclusions.values()) and bv_ok

    def to_json(self):
        d = asdict(self)
        d.pop("details")
        d.pop("gamma_list")
        d["gamma_list"] = [{"component": c, "m": m, "gamma": g} for c, m, g in self.gamma_list]
        d.update(self.details)
        return d


def _in_interval(roots, lo, hi, closed_right=True):
    if closed_right:
        return any(lo <= x <= hi for x in roots)
    return any(lo <= x < hi for x in roots)


def indicial_report(p, n=256, m_max=None, grids=DEFAULT_GRIDS, tol=1e-3):
    """Assemble all indicial roots for weight w and check the exclusion statements."""
    scan = sp.gamma0(p, m_max=m_max, n=n)
    gammas = [(c, m, cv.estimate) for c, m, cv in scan.table]
    values = [g for _, _, g in gammas]
    roots_i = sp.type_roots(values, "I")
    roots_ii = sp.type_roots(values, "II")
    negative, middle, tail = type2prime_sets(p.weight)
    all_roots = roots_i + roots_ii + negative + middle + [tail]
    exclusions = {
        "no_roots_in_[-1,0)": not _in_interval(all_roots, -1.0, 0.0, closed_right=False),
        "type_I_avoids_[-2,1]": not _in_interval(roots_i, -2.0, 1.0),
        "type_II_avoids_[-3,0]": not _in_interval(roots_ii, -3.0, 0.0),
    }
    checks = []
    for sigma in range(p.weight):
        r = solve_f(p, sigma, grids)
        checks.append({"case": "beta", "exponent": sigma, "value": r.value, "target": 0.5,
                       "order": r.order, "residual": r.residual,
                       "within_tolerance": abs(r.value - 0.5) <= tol})
    for t in range(p.weight):
        r = solve_h(p, t, grids)
        checks.append({"case": "alpha", "exponent": t, "value": r.value, "target": -1.0,
                       "order": r.order, "residual": r.residual,
                       "within_tolerance": abs(r.value + 1.0) <= tol})
    first = {c["case"]: c["value"] for c in reversed(checks)}
    boundary_values = {"f_at_equator": first.get("beta"), "h_leading": first.get("alpha")}
    details = {
        "boundary_checks": checks,
        "gamma0_mode": {"component": scan.argmin[0], "m": scan.argmin[1]},
        "mode_scan": {"m_max": scan.m_max, "monotone": scan.monotone,
                      "converged": scan.converged, "widened": scan.widened},
        "type_II_prime_tail": {"start": tail, "extent": "infinite"},
    }
    return IndicialReport(
        r_weight=p.weight,
        gamma_list=gammas,
        type_I=roots_i,
        type_II=roots_ii,
        type_II_prime={"negative": negative, "middle": middle, "tail_start": tail},
        gamma0=scan.gamma0,
        exclusions=exclusions,
        boundary_values=boundary_values,
        details=details,
    )


def finite(x):
    return x is not None and isfinite(x)
