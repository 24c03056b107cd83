"""Grids, fields, physical parameters and the isentropic pressure law.

The half-space is truncated to x periodic on [0, Lx) and y in [0, y_max];
the wall-normal grid is tanh-stretched toward y = 0 so that viscous runs
at scale eps resolve the O(eps) layer.  The boundary-layer grid carries the
fast variable z = y/eps on [0, z_max] with mild algebraic clustering at the
wall.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .stencils import NodeDerivative


@dataclass(frozen=True)
class SimParams:
    """Physical and numerical constants.

    Pressure law P(rho) = a*rho**gamma with gamma > 1; viscosity enters the
    momentum equations as eps**2*nu (shear) and eps**2*(nu+sigma) (dilatational).
    mu0, lam, delta, eta, kappa, A_weight parameterize the analytic-norm
    diagnostics.
    """

    gamma: float = 2.0
    a: float = 0.5
    nu: float = 1.0
    sigma: float = 0.0
    epsilon: float = 0.1
    delta: float = 0.1
    c0: float = 0.2
    T_final: float = 0.25
    mu0: float = 0.01
    lam: float = 0.02
    eta: float = 0.1
    kappa: float = 0.1
    A_weight: float = 10.0
    cfl_number: float = 0.4
    grad_bound: float = 50.0

    def __post_init__(self):
        checks = [
            (self.gamma > 1, "gamma must be > 1"),
            (self.a > 0, "a must be > 0"),
            (self.nu > 0, "nu must be > 0"),
            (self.nu + self.sigma >= 0, "nu + sigma must be >= 0"),
            (self.epsilon > 0, "epsilon must be > 0"),
            (self.c0 > 0, "c0 must be > 0"),
            (0 < self.mu0 <= 0.01, "mu0 must lie in (0, 1/100]"),
            (0 < self.eta < 1, "eta must lie in (0, 1)"),
            (self.delta > 0, "delta must be > 0"),
            (self.kappa > 0, "kappa must be > 0"),
            (self.A_weight > 1, "A_weight must be > 1"),
            (self.T_final > 0, "T_final must be > 0"),
            (self.lam >= 0, "lam must be >= 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)

    def replace(self, **kw):
        return replace(self, **kw)

    def sound_speed(self, rho):
        return np.sqrt(self.a * self.gamma * np.asarray(rho) ** (self.gamma - 1.0))


class Grid2D:
    """Periodic-x / wall-bounded-y tensor grid.

    y(s) = y_max * (1 - tanh(beta*(1-s))/tanh(beta)) for stretch beta > 0,
    uniform for beta = 0.  Node 0 sits on the wall, node ny-1 on the lid.
    Dual-cell faces at the mapped s-midpoints define the conservative
    control volumes.
    """

    def __init__(self, nx, ny, Lx=2.0 * np.pi, y_max=4.0, stretch=0.0):
        if nx < 4 or ny < 4:
            raise ConfigError("grid needs nx, ny >= 4")
        self.nx = int(nx)
        self.ny = int(ny)
        self.Lx = float(Lx)
        self.y_max = float(y_max)
        self.stretch = float(stretch)
        self.dx = self.Lx / self.nx
        self.x = np.arange(self.nx) * self.dx
        s = np.linspace(0.0, 1.0, self.ny)
        self.ds = s[1] - s[0]
        self.y = self._map(s)
        # mapped dual-face positions; wall/lid faces coincide with the nodes
        s_face = np.concatenate(([0.0], 0.5 * (s[1:] + s[:-1]), [1.0]))
        y_face = self._map(s_face)
        self.y_face = y_face
        self.vol_y = np.diff(y_face)          # dual-cell widths
        self.dy_min = np.min(np.diff(self.y))
        self._cache = {}

    def _map(self, s):
        b = self.stretch
        if b == 0.0:
            return self.y_max * s
        return self.y_max * (1.0 - np.tanh(b * (1.0 - s)) / np.tanh(b))

    # ---- derivative operators on the physical y nodes ------------------

    def dy_op(self):
        if "dy" not in self._cache:
            self._cache["dy"] = NodeDerivative(self.y, 1)
        return self._cache["dy"]

    def d2y_op(self):
        if "d2y" not in self._cache:
            self._cache["d2y"] = NodeDerivative(self.y, 2)
        return self._cache["d2y"]

    def quad_weights_y(self):
        """Trapezoid weights on the y nodes."""
        if "wy" not in self._cache:
            w = np.zeros(self.ny)
            dy = np.diff(self.y)
            w[:-1] += 0.5 * dy
            w[1:] += 0.5 * dy
            self._cache["wy"] = w
        return self._cache["wy"]

    def __eq__(self, other):
        return (isinstance(other, Grid2D)
                and (self.nx, self.ny, self.Lx, self.y_max, self.stretch)
                == (other.nx, other.ny, other.Lx, other.y_max, other.stretch))

    def __hash__(self):
        return hash((self.nx, self.ny, self.Lx, self.y_max, self.stretch))

    def __repr__(self):
        return (f"Grid2D(nx={self.nx}, ny={self.ny}, Lx={self.Lx:.6g}, "
                f"y_max={self.y_max:.6g}, stretch={self.stretch:.6g})")


def stretch_for_wall_spacing(ny, y_max, dy_wall):
    """Stretch parameter beta giving first spacing ~dy_wall on ny nodes."""
    from scipy.optimize import brentq

    ds = 1.0 / (ny - 1)

    def first_dy(b):
        g = Grid2D(4, ny, y_max=y_max, stretch=b)
        return g.y[1] - g.y[0]

    if first_dy(0.0) <= dy_wall:
        return 0.0
    return brentq(lambda b: first_dy(b) - dy_wall, 1e-6, 30.0, xtol=1e-10)


class BLGrid:
    """Boundary-layer grid in (x, z), z = y/eps on [0, z_max].

    z(s) = z_max*(s**2 + b*s)/(1 + b): mild algebraic clustering at the
    wall (b = stretch).
    """

    def __init__(self, nx, nz, Lx=2.0 * np.pi, z_max=12.0, stretch=1.0):
        if z_max < 10.0:
            raise ConfigError("z_max must be >= 10 (Gaussian-decay support)")
        self.nx = int(nx)
        self.nz = int(nz)
        self.Lx = float(Lx)
        self.z_max = float(z_max)
        self.stretch = float(stretch)
        self.dx = self.Lx / self.nx
        self.x = np.arange(self.nx) * self.dx
        s = np.linspace(0.0, 1.0, self.nz)
        b = self.stretch
        self.z = self.z_max * (s ** 2 + b * s) / (1.0 + b)
        self._cache = {}

    def dz_op(self):
        if "dz" not in self._cache:
            self._cache["dz"] = NodeDerivative(self.z, 1)
        return self._cache["dz"]

    def d2z_op(self):
        if "d2z" not in self._cache:
            self._cache["d2z"] = NodeDerivative(self.z, 2)
        return self._cache["d2z"]

    def quad_weights_z(self):
        if "wz" not in self._cache:
            w = np.zeros(self.nz)
            dz = np.diff(self.z)
            w[:-1] += 0.5 * dz
            w[1:] += 0.5 * dz
            self._cache["wz"] = w
        return self._cache["wz"]

    def __eq__(self, other):
        return (isinstance(other, BLGrid)
                and (self.nx, self.nz, self.Lx, self.z_max, self.stretch)
                == (other.nx, other.nz, other.Lx, other.z_max, other.stretch))

    def __hash__(self):
        return hash((self.nx, self.nz, self.Lx, self.z_max, self.stretch))

    def __repr__(self):
        return (f"BLGrid(nx={self.nx}, nz={self.nz}, z_max={self.z_max:.6g}, "
                f"stretch={self.stretch:.6g})")


def _freeze(values):
    values = np.ascontiguousarray(values, dtype=float)
    values.flags.writeable = False
    return values


@dataclass(frozen=True)
class Field2D:
    """Scalar field on a Grid2D; values shaped (nx, ny), immutable."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = _freeze(self.values)
        if v.shape != (self.grid.nx, self.grid.ny):
            raise ConfigError(f"field shape {v.shape} does not match grid")
        if not np.all(np.isfinite(v)):
            raise ConfigError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    def l2(self):
        w = self.grid.quad_weights_y()
        return float(np.sqrt(np.sum(self.values ** 2 * w) * self.grid.dx))

    def linf(self):
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class BLField:
    """Scalar field on a BLGrid; values shaped (nx, nz), immutable.

    decay_rate records the Gaussian envelope used by the far-field
    diagnostics only.
    """

    grid: BLGrid
    values: np.ndarray
    decay_rate: float = 0.125

    def __post_init__(self):
        v = _freeze(self.values)
        if v.shape != (self.grid.nx, self.grid.nz):
            raise ConfigError(f"field shape {v.shape} does not match grid")
        if not np.all(np.isfinite(v)):
            raise ConfigError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    def tail_ratio(self):
        m = np.max(np.abs(self.values))
        if m == 0.0:
            return 0.0
        return float(np.max(np.abs(self.values[:, -1])) / m)

    def l2(self):
        w = self.grid.quad_weights_z()
        return float(np.sqrt(np.sum(self.values ** 2 * w) * self.grid.dx))

    def linf(self):
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class State:
    """A (rho, u, v) snapshot at time t on a shared grid."""

    rho: Field2D
    u: Field2D
    v: Field2D
    t: float = 0.0

    def __post_init__(self):
        if not (self.rho.grid == self.u.grid == self.v.grid):
            raise ConfigError("state fields live on different grids")

    @property
    def grid(self):
        return self.rho.grid


def make_state(grid, rho, u, v, t=0.0):
    return State(Field2D(grid, rho), Field2D(grid, u), Field2D(grid, v), t)


def pressure(rho, params):
    """Isentropic pressure a*rho**gamma, pointwise.

    Raises on non-positive density, naming the offending grid location.
    """
    vals = rho.values
    if np.any(vals <= 0.0):
        i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
        raise ConfigError(
            f"non-positive density {vals[i, j]:.6g} at grid index (i={i}, j={j})")
    return Field2D(rho.grid, params.a * vals ** params.gamma)


def discrete_mass(state):
    """Conserved mass functional: sum over dual cells of rho*vol."""
    g = state.grid
    return float(np.sum(state.rho.values * g.vol_y) * g.dx)
