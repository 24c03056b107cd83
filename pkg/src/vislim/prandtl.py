"""Compressible Prandtl layer: leading order, first-order corrector, and
the second-order density profile.

The leading-order tangential velocity obeys a nonlinear nonlocal parabolic
equation in the fast variable z = y/eps, driven entirely by Euler wall
traces: advection by (u_bar + u_p) in x and by
(-int_0^inf dx(rho_bar u_p) dz'/rho_bar + v_p + z*dvdy_bar) in z, with
diffusion nu/rho_bar * dzz.  The normal velocity is recovered from the
weighted divergence constraint as a tail integral, so it vanishes at
z = infinity by construction.

Time stepping is a second-order predictor-corrector with Crank-Nicolson
z-diffusion (batched tridiagonal solves, one banded system for all x
columns) and explicit advection/nonlocal terms; x-derivatives are spectral
on the periodic grid.

The corrector system is linear in (u_p1, v_p2); the weakly implicit
(v_p2 - vbar_p2) dz u_p0 coupling is lagged by one step (Picard), an
O(dt) error inside the O(dt^2) stepper.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import solve_banded

from .domain import BLField
from .errors import ConfigError, NumericalError
from .stencils import ddx_spectral, fornberg_weights

log = logging.getLogger(__name__)

TAIL_TOL = 1e-7
DECAY_RATE = 0.125


@dataclass
class PrandtlSolution:
    """Layer expansion pieces on a shared (t, x, z) sampling."""

    grid: object
    times: np.ndarray
    up0: list
    vp1: list
    vbar1: np.ndarray
    dt: float
    up1: list = None
    vp2: list = None
    vbar2: np.ndarray = None
    rho_p2: list = None

    @property
    def has_corrector(self):
        return self.up1 is not None

    def up0_arrays(self):
        return np.stack([f.values for f in self.up0])

    def vp1_arrays(self):
        return np.stack([f.values for f in self.vp1])


class _Diffusion:
    """Tridiagonal z-diffusion machinery shared by both layer solvers."""

    def __init__(self, grid):
        z = grid.z
        nz = grid.nz
        lo = np.zeros(nz)
        di = np.zeros(nz)
        up = np.zeros(nz)
        for j in range(1, nz - 1):
            w = fornberg_weights(z[j - 1:j + 2], z[j], 2)
            lo[j], di[j], up[j] = w
        self.lo, self.di, self.up = lo, di, up
        self.nz = nz
        self.grid = grid

    def apply(self, f):
        """L f with zero rows at the Dirichlet boundaries; f is (nx, nz)."""
        out = np.zeros_like(f)
        out[:, 1:-1] = (self.lo[1:-1] * f[:, :-2] + self.di[1:-1] * f[:, 1:-1]
                        + self.up[1:-1] * f[:, 2:])
        return out

    def solve(self, coeff, rhs, wall_value):
        """Solve (I - coeff*L) x = rhs per column with x(0)=wall_value, x(zmax)=0.

        coeff is (nx,), rhs (nx, nz); returns (nx, nz).
        """
        nx, nz = rhs.shape
        c = coeff[:, None]
        main = 1.0 - c * self.di[None, :]
        lower = -c * self.lo[None, :]
        upper = -c * self.up[None, :]
        main[:, 0] = 1.0
        main[:, -1] = 1.0
        lower[:, 0] = 0.0
        lower[:, -1] = 0.0
        upper[:, 0] = 0.0
        upper[:, -1] = 0.0
        b = rhs.copy()
        b[:, 0] = wall_value
        b[:, -1] = 0.0
        ab = np.zeros((3, nx * nz))
        flat = lambda A: A.reshape(-1)
        ab[1] = flat(main)
        # solve_banded layout: ab[0, j] = A[j-1, j], ab[2, j] = A[j+1, j]
        ab[0, 1:] = flat(upper)[:-1]
        ab[2, :-1] = flat(lower)[1:]
        x = solve_banded((1, 1), ab, flat(b))
        return x.reshape(nx, nz)


def _tail_check(integrand, grid, scale):
    """Gaussian tail bound beyond z_max must be negligible."""
    tail = np.max(np.abs(integrand[:, -1])) / (2.0 * grid.z_max)
    if tail > TAIL_TOL * max(scale, 1e-30):
        raise NumericalError(
            f"nonlocal-integral tail {tail:.3e} above tolerance; raise z_max")


def _recover(up_vals, rho_bar, grid):
    """v_p and its wall value from the weighted divergence constraint."""
    q = rho_bar[:, None] * up_vals
    dq = ddx_spectral(q, grid.Lx)
    cum = cumulative_trapezoid(dq, grid.z, axis=1, initial=0.0)
    total = cum[:, -1]
    vp = (total[:, None] - cum) / rho_bar[:, None]
    return vp, total / rho_bar, dq


def recover_vp(up, traces, t):
    """Normal velocity v_p1 = (1/rho_bar) int_z^inf dx(rho_bar u_p0) dz'.

    Returns (field, wall_values); vanishes at z = infinity by construction.
    """
    grid = up.grid
    rho_bar = traces.sample("rho_bar", t)
    vp, vbar, dq = _recover(up.values, rho_bar, grid)
    _tail_check(dq, grid, np.max(np.abs(dq)) + 1e-300)
    return BLField(grid, vp, DECAY_RATE), vbar


def _advection0(up_vals, t, traces, params, grid, dz_op):
    ub = traces.sample("u_bar", t)
    rb = traces.sample("rho_bar", t)
    wb = traces.sample("dvdy_bar", t)
    dxu = ddx_spectral(up_vals, grid.Lx)
    dzu = dz_op.apply(up_vals)
    vp, vbar, _ = _recover(up_vals, rb, grid)
    W = -vbar[:, None] + vp + grid.z[None, :] * wb[:, None]
    return -(ub[:, None] + up_vals) * dxu - W * dzu


def step_prandtl(up, traces, t, dt, params, *, source=None, advection=True):
    """One predictor-corrector step of the leading-order layer equation.

    The wall row is reset to -u_bar(t+dt) through the implicit solve's
    Dirichlet datum.
    """
    grid = up.grid
    dz_op = grid.dz_op()
    diff = _diffusion_for(grid)
    nu = params.nu
    rb_mid = traces.sample("rho_bar", t + 0.5 * dt)
    c_mid = dt * 0.5 * nu / rb_mid
    wall_new = -traces.sample("u_bar", t + dt)
    f = up.values

    def explicit(vals, tt):
        A = np.zeros_like(vals)
        if advection:
            A = _advection0(vals, tt, traces, params, grid, dz_op)
        if source is not None:
            A = A + source(tt)
        return A

    half_l = c_mid[:, None] * diff.apply(f)
    A0 = explicit(f, t)
    pred = diff.solve(c_mid, f + dt * A0 + half_l, wall_new)
    A1 = explicit(pred, t + dt)
    new = diff.solve(c_mid, f + 0.5 * dt * (A0 + A1) + half_l, wall_new)
    return BLField(grid, new, DECAY_RATE)


_DIFF_CACHE = {}


def _diffusion_for(grid):
    key = (grid.nx, grid.nz, grid.z_max, grid.stretch)
    if key not in _DIFF_CACHE:
        _DIFF_CACHE[key] = _Diffusion(grid)
    return _DIFF_CACHE[key]


def solve_prandtl(traces, T, params, grid, *, dt=None):
    """Leading-order layer pair (u_p0, v_p1) on [0, T] from zero data."""
    times = traces.times
    if T > times[-1] + 1e-12:
        raise ConfigError("traces do not cover [0, T]")
    if grid.nx != len(traces.x):
        raise ConfigError("boundary-layer grid nx differs from the trace grid")
    if dt is None:
        dt = times[1] - times[0] if len(times) > 1 else T
    nlev = 1 if T == 0.0 else int(round(T / dt)) + 1
    up = BLField(grid, np.zeros((grid.nx, grid.nz)), DECAY_RATE)
    out_t = [0.0]
    up_list = [up]
    vp, vbar, _ = _recover(up.values, traces.sample("rho_bar", 0.0), grid)
    vp_list = [BLField(grid, vp, DECAY_RATE)]
    vbars = [vbar]
    t = 0.0
    for k in range(nlev - 1):
        up = step_prandtl(up, traces, t, dt, params)
        t = (k + 1) * dt
        vp, vbar, dq = _recover(up.values, traces.sample("rho_bar", t), grid)
        _tail_check(dq, grid, np.max(np.abs(dq)) + 1e-300)
        up_list.append(up)
        vp_list.append(BLField(grid, vp, DECAY_RATE))
        vbars.append(vbar)
        out_t.append(t)
    return PrandtlSolution(grid, np.array(out_t), up_list, vp_list,
                           np.stack(vbars), dt)


# --------------------------------------------------------------------------
# First-order corrector
# --------------------------------------------------------------------------

def _corrector_forcing(up0_vals, vp1_vals, v2_lag, vbar2_lag, t, traces,
                       params, grid, dz_op, d2z_op):
    """Everything explicit in the u_p1 equation except -adv(u_p1) itself."""
    z = grid.z[None, :]
    rb0 = traces.sample("rho_bar", t)[:, None]
    rb1 = traces.sample("rho1_bar", t)[:, None]
    ub1 = traces.sample("u1_bar", t)[:, None]
    dyu0 = traces.sample("dudy_bar", t)[:, None]
    wb0 = traces.sample("dvdy_bar", t)[:, None]
    d2v0 = traces.sample("d2vdy2_bar", t)[:, None]
    dxu1b = traces.sample("dxu1_bar", t)[:, None]
    dxdyv0 = traces.sample("_dxdyv0", t)[:, None]
    dyu0_full = ub1 + z * dyu0
    dx_up0 = ddx_spectral(up0_vals, grid.Lx)
    dz_up0 = dz_op.apply(up0_vals)
    F = -(dyu0_full * dx_up0)
    F -= (v2_lag - vbar2_lag[:, None] + z * wb0) * dz_up0
    F -= 0.5 * z ** 2 * d2v0 * dz_up0
    F += params.nu * rb1 / rb0 ** 2 * d2z_op.apply(up0_vals)
    F -= z * dxdyv0 * up0_vals + up0_vals * dxu1b + vp1_vals * dyu0
    return F, dx_up0


class _TraceView:
    """WallTraces wrapper exposing the derived trace dx(dvdy_bar)."""

    def __init__(self, traces):
        self._tr = traces
        self._dxdyv0 = traces.dxdy_v_bar()

    def sample(self, name, t):
        if name == "_dxdyv0":
            tr, arr = self._tr, self._dxdyv0
            tt = tr.times
            if t <= tt[0]:
                return arr[0]
            if t >= tt[-1]:
                return arr[-1]
            i = int(np.searchsorted(tt, t) - 1)
            w = (t - tt[i]) / (tt[i + 1] - tt[i])
            return (1 - w) * arr[i] + w * arr[i + 1]
        return self._tr.sample(name, t)


def _recover2(up0_vals, up1_vals, vp1_vals, rho_bar, rho1_bar, grid):
    """v_p2 from dx(rho1 u_p0 + rho0 u_p1) + dz(rho1 v_p1 + rho0 v_p2) = 0."""
    q = rho1_bar[:, None] * up0_vals + rho_bar[:, None] * up1_vals
    dq = ddx_spectral(q, grid.Lx)
    cum = cumulative_trapezoid(dq, grid.z, axis=1, initial=0.0)
    total = cum[:, -1]
    v2 = ((total[:, None] - cum) - rho1_bar[:, None] * vp1_vals) / rho_bar[:, None]
    vbar2 = (total - rho1_bar * vp1_vals[:, 0]) / rho_bar
    return v2, vbar2


def step_prandtl_corrector(up1, sol0_at, v2_lag, vbar2_lag, traces, t, dt,
                           params, *, source=None, advection=True):
    """One linear predictor-corrector step for u_p1.

    sol0_at(t) must return (up0_vals, vp1_vals) at arbitrary step times.
    """
    grid = up1.grid
    dz_op = grid.dz_op()
    d2z_op = grid.d2z_op()
    diff = _diffusion_for(grid)
    rb_mid = traces.sample("rho_bar", t + 0.5 * dt)
    c_mid = dt * 0.5 * params.nu / rb_mid
    wall_new = -traces.sample("u1_bar", t + dt)
    f = up1.values

    def explicit(vals, tt):
        if not advection:
            return source(tt) if source is not None else np.zeros_like(vals)
        up0_vals, vp1_vals = sol0_at(tt)
        ub0 = traces.sample("u_bar", tt)[:, None]
        vb1 = traces.sample("v1_bar", tt)[:, None]
        wb0 = traces.sample("dvdy_bar", tt)[:, None]
        z = grid.z[None, :]
        A = -(ub0 + up0_vals) * ddx_spectral(vals, grid.Lx)
        A -= (vb1 + vp1_vals + z * wb0) * dz_op.apply(vals)
        A -= vals * ddx_spectral(up0_vals, grid.Lx)
        F, _ = _corrector_forcing(up0_vals, vp1_vals, v2_lag, vbar2_lag, tt,
                                  traces, params, grid, dz_op, d2z_op)
        A += F
        if source is not None:
            A = A + source(tt)
        return A

    half_l = c_mid[:, None] * diff.apply(f)
    A0 = explicit(f, t)
    pred = diff.solve(c_mid, f + dt * A0 + half_l, wall_new)
    A1 = explicit(pred, t + dt)
    new = diff.solve(c_mid, f + 0.5 * dt * (A0 + A1) + half_l, wall_new)
    return BLField(grid, new, DECAY_RATE)


def solve_prandtl_corrector(sol0, traces, T, params):
    """Populate (u_p1, v_p2) on sol0's time grid from zero initial data."""
    traces.require_corrector()
    grid = sol0.grid
    times = sol0.times
    if T > times[-1] + 1e-12:
        raise ConfigError("leading-order solution does not cover [0, T]")
    tv = _TraceView(traces)
    up0_arr = sol0.up0_arrays()
    vp1_arr = sol0.vp1_arrays()

    def sol0_at(t):
        tt = times
        if t <= tt[0]:
            return up0_arr[0], vp1_arr[0]
        if t >= tt[-1]:
            return up0_arr[-1], vp1_arr[-1]
        i = int(np.searchsorted(tt, t) - 1)
        w = (t - tt[i]) / (tt[i + 1] - tt[i])
        return ((1 - w) * up0_arr[i] + w * up0_arr[i + 1],
                (1 - w) * vp1_arr[i] + w * vp1_arr[i + 1])

    dt = sol0.dt
    nlev = 1 if T == 0.0 else int(round(T / dt)) + 1
    up1 = BLField(grid, np.zeros((grid.nx, grid.nz)), DECAY_RATE)
    v2, vbar2 = _recover2(up0_arr[0], up1.values, vp1_arr[0],
                          traces.sample("rho_bar", 0.0),
                          traces.sample("rho1_bar", 0.0), grid)
    up1_list = [up1]
    vp2_list = [BLField(grid, v2, DECAY_RATE)]
    vbar2s = [vbar2]
    t = 0.0
    for k in range(nlev - 1):
        up1 = step_prandtl_corrector(up1, sol0_at, v2, vbar2, tv, t, dt, params)
        t = (k + 1) * dt
        v2, vbar2 = _recover2(up0_arr[k + 1], up1.values, vp1_arr[k + 1],
                              traces.sample("rho_bar", t),
                              traces.sample("rho1_bar", t), grid)
        up1_list.append(up1)
        vp2_list.append(BLField(grid, v2, DECAY_RATE))
        vbar2s.append(vbar2)
    return PrandtlSolution(grid, times[:nlev].copy(), sol0.up0[:nlev],
                           sol0.vp1[:nlev], sol0.vbar1[:nlev], dt,
                           up1=up1_list, vp2=vp2_list, vbar2=np.stack(vbar2s))


# --------------------------------------------------------------------------
# Second-order density profile
# --------------------------------------------------------------------------

def compute_rho_p2(sol, traces, params):
    """rho_p2(t, x, z) = int_z^inf P_p2 dz' with P_p2 assembled term by term.

    d/dt of v_p1 is centered on the stored times; the endpoint levels fall
    back to one-sided second-order stencils (logged order drop).
    """
    traces.require_corrector()
    grid = sol.grid
    times = sol.times
    nt = len(times)
    vp1 = sol.vp1_arrays()
    up0 = sol.up0_arrays()
    dz_op = grid.dz_op()
    d2z_op = grid.d2z_op()
    nu, sig = params.nu, params.sigma
    if nt >= 3:
        log.debug("rho_p2 endpoint time levels use one-sided stencils "
                  "(order drop from centered)")
    out = []
    for i in range(nt):
        if nt == 1:
            dvdt = np.zeros_like(vp1[0])
        elif i == 0:
            if nt == 2:
                dvdt = (vp1[1] - vp1[0]) / (times[1] - times[0])
            else:
                dt = times[1] - times[0]
                dvdt = (-1.5 * vp1[0] + 2.0 * vp1[1] - 0.5 * vp1[2]) / dt
        elif i == nt - 1:
            if nt == 2:
                dvdt = (vp1[1] - vp1[0]) / (times[1] - times[0])
            else:
                dt = times[-1] - times[-2]
                dvdt = (1.5 * vp1[-1] - 2.0 * vp1[-2] + 0.5 * vp1[-3]) / dt
        else:
            dvdt = (vp1[i + 1] - vp1[i - 1]) / (times[i + 1] - times[i - 1])
        t = times[i]
        ub0 = traces.sample("u_bar", t)[:, None]
        rb0 = traces.sample("rho_bar", t)[:, None]
        wb0 = traces.sample("dvdy_bar", t)[:, None]
        vb1 = traces.sample("v1_bar", t)[:, None]
        dxv1b = traces.sample("dxv1_bar", t)[:, None]
        dx_vp1 = ddx_spectral(vp1[i], grid.Lx)
        dz_vp1 = dz_op.apply(vp1[i])
        d2z_vp1 = d2z_op.apply(vp1[i])
        dxdz_up0 = dz_op.apply(ddx_spectral(up0[i], grid.Lx))
        P2 = (dvdt + ub0 * dx_vp1 + up0[i] * (dxv1b + dx_vp1)
              + vp1[i] * (wb0 + dz_vp1) + vb1 * dz_vp1
              - nu / rb0 * d2z_vp1
              - (nu + sig) / rb0 * (dxdz_up0 + d2z_vp1))
        cum = cumulative_trapezoid(P2, grid.z, axis=1, initial=0.0)
        rho2 = cum[:, -1][:, None] - cum
        out.append(BLField(grid, rho2, DECAY_RATE))
    return out
