"""Closed-form model knot solution on the half-space.

Coordinates: x^2 + i x^3 = z = r e^{i theta}, y = x^4 > 0, rho^2 = r^2 + y^2,
u = cos(psi) = y / rho.  The axis psi = 0 is the y-axis, the equator
psi = pi/2 is the boundary y = 0.  With n = weight + 1 the solution is

    A     = a(psi) E dtheta,   a   = -n sin^2(psi) P_{n-1}(u) / P_n(u)
    phi_1 = b E,               b   = PHI1_SIGN * (n / rho) Q_n(u) / P_n(u)
    varphi = c X,              c   = 2 n sin^w(psi) e^{i w theta} / (rho P_n(u))

where P_n(u) = (1+u)^n - (1-u)^n, Q_n(u) = (1+u)^n + (1-u)^n.  Every ratio is
evaluated through positive-term binomial sums, so nothing cancels as u -> 0.
"""
from dataclasses import dataclass
from enum import Enum
from math import comb

import numpy as np

from .lie import E, X, dagger, expand, conjugate, sup_norm

# Orientation of phi_1 relative to E.  +1 is the choice for which the moment
# map vanishes; reduced_kw.resolve_phi1_sign re-derives it numerically.
PHI1_SIGN = +1


class Group(str, Enum):
    SU2 = "SU2"
    SO3 = "SO3"


@dataclass(frozen=True)
class ModelParams:
    weight: int
    group: Group = Group.SO3

    def __post_init__(self):
        object.__setattr__(self, "group", Group(self.group))
        if isinstance(self.weight, bool) or int(self.weight) != self.weight or self.weight < 0:
            raise ValueError(f"weight must be a nonnegative integer, got {self.weight!r}")
        object.__setattr__(self, "weight", int(self.weight))
        if self.group is Group.SU2 and self.weight % 2:
            raise ValueError(f"odd weight {self.weight} is only allowed for SO3")

    @property
    def n(self):
        return self.weight + 1


@dataclass(frozen=True)
class ModelFields:
    a_theta: float
    c: complex
    b: float

    def matrices(self):
        """(A_theta, phi_1, varphi) as 2x2 matrices."""
        return self.a_theta * E, self.b * E, self.c * X


def stable_pq(n, u):
    """(P_n(u), Q_n(u)) as sums of nonnegative binomial terms; u in [0, 1]."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise ValueError("u must lie in [0, 1]")
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    p = np.zeros_like(u)
    q = np.zeros_like(u)
    # Horner-free direct sum: n stays small (<= a few dozen) and every term is >= 0
    for k in range(n, -1, -1):
        term = 2.0 * comb(n, k) * u ** k
        if k % 2:
            p = p + term
        else:
            q = q + term
    return p, q


def _p_over_u(n, u):
    """P_n(u) / u, finite at u = 0 (equals 2n there)."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    for k in range(n - (n + 1) % 2, 0, -2):
        out = out + 2.0 * comb(n, k) * u ** (k - 1)
    return out


def _u_of(psi):
    psi = np.asarray(psi, dtype=float)
    if np.any((psi < 0) | (psi > np.pi / 2 + 1e-15)):
        raise ValueError("psi must lie in [0, pi/2]")
    # cos(pi/2) in floating point is 6e-17, snap it so the equator is exact
    return np.where(psi >= np.pi / 2, 0.0, np.cos(np.minimum(psi, np.pi / 2)))


def a_profile(p, psi):
    """Coefficient of E dtheta in A; depends on psi only."""
    u = _u_of(psi)
    if p.weight == 0:
        return np.zeros_like(u)
    ratio = _p_over_u(p.weight, u) / _p_over_u(p.n, u)
    return -p.n * np.sin(psi) ** 2 * ratio


def b_rho_profile(p, psi):
    """rho * b: infinite on the equator (1/s blow-up)."""
    u = _u_of(psi)
    pn, qn = stable_pq(p.n, u)
    with np.errstate(divide="ignore"):
        return PHI1_SIGN * p.n * qn / pn


def c_rho_profile(p, psi):
    """rho * |c|: infinite on the equator, zero on the axis for weight >= 1."""
    u = _u_of(psi)
    pn, _ = stable_pq(p.n, u)
    with np.errstate(divide="ignore"):
        return 2.0 * p.n * np.sin(psi) ** p.weight / pn


def exp_v(p, rho, psi):
    """e^v = rho^{-n} * 2n / P_n(u), so that c = e^v z^weight."""
    rho = _check_rho(rho)
    pn, _ = stable_pq(p.n, _u_of(psi))
    with np.errstate(divide="ignore"):
        return 2.0 * p.n / (rho ** p.n * pn)


def _check_rho(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise ValueError("rho must be positive")
    return rho


def eval_model(p, rho, psi, theta):
    """Profile functions at one point.  On the equator b and c are infinite."""
    rho = float(_check_rho(rho))
    a = float(a_profile(p, psi))
    b = float(b_rho_profile(p, psi)) / rho
    c_abs = float(c_rho_profile(p, psi)) / rho
    c = complex(np.inf) if np.isinf(c_abs) else c_abs * np.exp(1j * p.weight * theta)
    return ModelFields(a_theta=a, c=c, b=b)


def a_psi_limit_equator(p):
    """Limit of -a(psi) at the equator: n * (P_w / u) / (P_n / u) at u = 0 = weight."""
    if p.weight == 0:
        return 0.0
    return float(p.n * _p_over_u(p.weight, 0.0) / _p_over_u(p.n, 0.0))


def nahm_gauge_h(p, theta):
    """diag(e^{-i w theta / 2}, e^{i w theta / 2}); for odd w only defined up to sign."""
    ph = np.exp(-0.5j * p.weight * np.asarray(theta, dtype=float))
    out = np.zeros(np.shape(ph) + (2, 2), dtype=complex)
    out[..., 0, 0] = ph
    out[..., 1, 1] = np.conj(ph)
    return out


def polar_matrices(p, rho, psi, theta):
    """Matrix fields on arrays: (A_theta, phi_1, varphi)."""
    rho = _check_rho(rho)
    theta = np.asarray(theta, dtype=float)
    a = a_profile(p, psi)
    b = b_rho_profile(p, psi) / rho
    c = c_rho_profile(p, psi) / rho * np.exp(1j * p.weight * theta)
    shape = np.broadcast_shapes(np.shape(a), np.shape(b), np.shape(c))
    return (expand(np.broadcast_to(a, shape), E),
            expand(np.broadcast_to(b, shape), E),
            expand(np.broadcast_to(c, shape), X))


def split_varphi(varphi):
    """varphi = phi_2 - i phi_3 with phi_2, phi_3 anti-Hermitian when varphi is nilpotent-type."""
    vd = dagger(varphi)
    return (varphi - vd) / 2, 1j * (varphi + vd) / 2


def cartesian_fields(p, x2, x3, y):
    """Cartesian components (A2, A3, A4, phi1, phi2, phi3) at points with r > 0, y > 0."""
    x2, x3, y = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x2, x3, y)))
    r = np.hypot(x2, x3)
    if np.any(r <= 0) or np.any(y <= 0):
        raise ValueError("Cartesian sampling needs r > 0 and y > 0")
    rho = np.hypot(r, y)
    psi = np.arctan2(r, y)
    theta = np.arctan2(x3, x2)
    a_th, phi1, varphi = polar_matrices(p, rho, psi, theta)
    # A = a dtheta, dtheta = (x2 dx3 - x3 dx2) / r^2
    a2 = a_th * (-x3 / r ** 2)[..., None, None]
    a3 = a_th * (x2 / r ** 2)[..., None, None]
    a4 = np.zeros_like(a2)
    phi2, phi3 = split_varphi(varphi)
    return a2, a3, a4, phi1, phi2, phi3


def verify_rotation_covariance(p, angle, rho, psi, theta):
    """Sup deviation between the model at theta and the rotated, re-gauged model at theta + angle."""
    g = nahm_gauge_h(p, angle)
    base = polar_matrices(p, rho, psi, theta)
    turned = polar_matrices(p, rho, psi, np.asarray(theta) + angle)
    return max(sup_norm(conjugate(g, t) - b0) for t, b0 in zip(turned, base))
