"""Cell-centered tensor grids, stencils and quadrature for matrix-valued fields."""
from dataclasses import dataclass, field

import numpy as np

MIN_POINTS = 8


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    n: int
    periodic: bool = False

    def __post_init__(self):
        if self.n < MIN_POINTS:
            raise ValueError(f"axis {self.name!r}: need at least {MIN_POINTS} points, got {self.n}")
        if not self.hi > self.lo:
            raise ValueError(f"axis {self.name!r}: empty interval [{self.lo}, {self.hi}]")

    @property
    def h(self):
        return (self.hi - self.lo) / self.n

    @property
    def points(self):
        # cell centers: the endpoints (where singular coefficients live) are never sampled
        return self.lo + (np.arange(self.n) + 0.5) * self.h


@dataclass(frozen=True)
class Grid:
    axes: tuple

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate axis names: {names}")

    @property
    def shape(self):
        return tuple(a.n for a in self.axes)

    @property
    def ndim(self):
        return len(self.axes)

    def index(self, name):
        for i, a in enumerate(self.axes):
            if a.name == name:
                return i
        raise KeyError(f"axis {name!r} not in grid {[a.name for a in self.axes]}")

    def axis(self, name):
        return self.axes[self.index(name)]

    def has(self, name):
        return any(a.name == name for a in self.axes)

    def coords(self, name):
        """Broadcastable coordinate array for one axis."""
        i = self.index(name)
        shape = [1] * self.ndim
        shape[i] = self.axes[i].n
        return self.axes[i].points.reshape(shape)

    def mesh(self):
        return dict((a.name, np.broadcast_to(self.coords(a.name), self.shape)) for a in self.axes)

    @property
    def cell_volume(self):
        return float(np.prod([a.h for a in self.axes]))


@dataclass
class LatticeField:
    """Matrix-valued samples on a grid; ``values`` has shape grid.shape + (2, 2)."""

    grid: Grid
    values: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape[:self.grid.ndim] != self.grid.shape:
            raise ValueError(f"field {self.label!r}: shape {self.values.shape} "
                             f"does not match grid {self.grid.shape}")
        self.values.setflags(write=False)

    def map(self, fn, label=None):
        return LatticeField(self.grid, fn(self.values), label or self.label)


def _axis_and_values(f, axis, grid):
    if isinstance(f, LatticeField):
        grid, values = f.grid, f.values
    else:
        values = np.asarray(f)
    if grid is None:
        raise ValueError("raw arrays need an explicit grid")
    i = grid.index(axis) if isinstance(axis, str) else int(axis)
    if not 0 <= i < grid.ndim:
        raise KeyError(f"axis {axis!r} not in grid")
    return grid, values, i


def fd_derivative(f, axis, grid=None):
    """Second-order finite difference along one axis.

    Central differences in the interior, one-sided second-order stencils at
    the edges of bounded axes, wrap-around on periodic axes.  Accepts a
    LatticeField (returns one) or a raw array plus its grid.
    """
    grid, v, i = _axis_and_values(f, axis, grid)
    ax = grid.axes[i]
    h = ax.h
    v = np.moveaxis(v, i, 0)
    if ax.periodic:
        d = (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) / (2 * h)
    else:
        d = np.empty_like(v)
        d[1:-1] = (v[2:] - v[:-2]) / (2 * h)
        d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
        d[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    d = np.moveaxis(d, 0, i)
    if isinstance(f, LatticeField):
        return LatticeField(grid, d, f"d{grid.axes[i].name}({f.label})")
    return d


def spectral_derivative(f, axis, grid=None):
    """Fourier derivative along a periodic axis (exact for band-limited data)."""
    grid, v, i = _axis_and_values(f, axis, grid)
    ax = grid.axes[i]
    if not ax.periodic:
        raise ValueError(f"spectral derivative needs a periodic axis, {ax.name!r} is bounded")
    k = 2 * np.pi * np.fft.fftfreq(ax.n, d=ax.h)
    if ax.n % 2 == 0:
        k[ax.n // 2] = 0.0  # Nyquist mode has no well-defined odd derivative
    shape = [1] * v.ndim
    shape[i] = ax.n
    d = np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(v, axis=i), axis=i)
    if not np.iscomplexobj(v):
        d = d.real
    if isinstance(f, LatticeField):
        return LatticeField(grid, d, f"d{ax.name}({f.label})")
    return d


def quadrature(values, grid):
    """Integral of a scalar lattice function.

    Cell-centered samples make the midpoint rule the natural choice on bounded
    axes; on periodic axes the same sum is the rectangle rule, exact for trig
    polynomials below the Nyquist limit.
    """
    values = np.asarray(values)
    if values.shape[:grid.ndim] != grid.shape:
        raise ValueError(f"shape {values.shape} does not match grid {grid.shape}")
    return np.sum(values, axis=tuple(range(grid.ndim))) * grid.cell_volume


def observed_order(e1, e2, e3):
    """Mean of log2(e1/e2) and log2(e2/e3) for errors at n, 2n, 4n."""
    errs = np.array([e1, e2, e3], dtype=float)
    if np.any(errs < 0):
        raise ValueError(f"errors must be nonnegative: {errs}")
    if np.any(errs == 0):
        return float("inf")
    return float(0.5 * (np.log2(errs[0] / errs[1]) + np.log2(errs[1] / errs[2])))
