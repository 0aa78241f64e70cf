"""sl(2,C) arithmetic on 2x2 complex matrices.

Everything here works on arrays whose last two axes are (2, 2), so the same
functions serve single elements and whole lattice fields.  ``LieElement`` is a
thin validated wrapper for the single-element case.
"""
from dataclasses import dataclass

import numpy as np

# Distinguished basis.  E generates the rotation of the model solution,
# X is the nilpotent direction of the Higgs field, Y = X^dagger, H = [X, Y].
E = np.array([[0.5j, 0.0], [0.0, -0.5j]])
X = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
Y = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
H = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

TRACE_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class LieElement:
    """A traceless 2x2 complex matrix."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex).reshape(2, 2)
        scale = max(1.0, float(np.max(np.abs(m))))
        if abs(m[0, 0] + m[1, 1]) > TRACE_TOL * scale:
            raise ValueError(f"matrix is not traceless: trace = {m[0, 0] + m[1, 1]}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def from_entries(cls, a, b, c, d):
        return cls(np.array([[a, b], [c, d]], dtype=complex))

    def __array__(self, dtype=None, copy=None):
        return self.entries.astype(dtype) if dtype is not None else self.entries.copy()

    def __add__(self, other):
        return LieElement(self.entries + np.asarray(other))

    def __sub__(self, other):
        return LieElement(self.entries - np.asarray(other))

    def __mul__(self, scalar):
        return LieElement(self.entries * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return LieElement(-self.entries)

    def __eq__(self, other):
        return np.array_equal(self.entries, np.asarray(other))

    def allclose(self, other, atol=1e-14):
        return np.allclose(self.entries, np.asarray(other), rtol=0, atol=atol)

    @property
    def su2_real(self):
        """True when the element lies in the compact real form su(2)."""
        return is_su2(self.entries)

    def __repr__(self):
        return f"LieElement({self.entries.tolist()})"


def _wrap(result, *inputs):
    if any(isinstance(x, LieElement) for x in inputs):
        return LieElement(result)
    return result


def bracket(a, b):
    """Commutator ab - ba, broadcasting over leading axes."""
    ma, mb = np.asarray(a), np.asarray(b)
    return _wrap(ma @ mb - mb @ ma, a, b)


def dagger(a):
    """Conjugate transpose of the trailing 2x2 block."""
    return _wrap(np.conj(np.swapaxes(np.asarray(a), -1, -2)), a)


def trace_pairing(a, b):
    """Tr(ab); complex, with the leading axes of the inputs."""
    return np.einsum("...ij,...ji->...", np.asarray(a), np.asarray(b))


def trace(a):
    return np.einsum("...ii->...", np.asarray(a))


def is_su2(a, atol=1e-12):
    m = np.asarray(a)
    scale = max(1.0, float(np.max(np.abs(m))))
    return bool(np.allclose(m, -dagger(m), rtol=0, atol=atol * scale)
                and np.allclose(trace(m), 0, rtol=0, atol=atol * scale))


def real_imag_split(m):
    """Write m = U + iV with U, V anti-Hermitian; returns (U, V)."""
    m = np.asarray(m)
    md = dagger(m)
    return (m - md) / 2, (m + md) / 2j


def norm2(a):
    """Squared Frobenius norm per element."""
    return np.sum(np.abs(np.asarray(a)) ** 2, axis=(-1, -2))


def sup_norm(a):
    """Largest Frobenius norm over all lattice sites."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.sqrt(np.max(norm2(a))))


def expand(coeff, basis):
    """coeff[..., None, None] * basis, i.e. a scalar field times a fixed matrix."""
    return np.asarray(coeff)[..., None, None] * basis


def conjugate(g, a):
    """g a g^{-1} for (arrays of) invertible g."""
    g = np.asarray(g)
    return g @ np.asarray(a) @ np.linalg.inv(g)


def su2_from_coords(c):
    """Anti-Hermitian traceless matrices from real 3-vectors (..., 3).

    Uses the basis i*sigma_k / 2, so that [T_a, T_b] = -eps_abc T_c.
    """
    c = np.asarray(c, dtype=float)
    x, y, z = c[..., 0], c[..., 1], c[..., 2]
    out = np.empty(c.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = 0.5j * z
    out[..., 1, 1] = -0.5j * z
    out[..., 0, 1] = 0.5j * x + 0.5 * y
    out[..., 1, 0] = 0.5j * x - 0.5 * y
    return out
