"""Compressible Euler solver, its linearization, and wall-trace extraction.

The leading-order system is advanced in conservative variables with the
shared MUSCL-HLL operator and SSP-RK2; the slip condition v = 0 is enforced
strongly on the wall and lid rows after every stage, and mass is conserved
to round-off by the flux form.

The first-order corrector system is linear and is integrated with RK4 on
4th-order centered stencils plus a weak scale-selective 4th-difference
dissipation.  Its only wall datum is the normal velocity (the prescribed
inflow -v_p1(t,x,0)); density and tangential velocity on the wall evolve by
the equations restricted to y = 0, where the background normal velocity
vanishes.  That closure feeds exactly one incoming characteristic, matching
the single scalar condition the system carries.
"""

from dataclasses import dataclass

import numpy as np

from . import fvcore
from .domain import make_state
from .errors import BlowUpError, CFLViolation, ConfigError, DensityFloorError
from .stencils import ddx, ddx_spectral, fornberg_weights


def _enforce_slip(U):
    U[2, :, 0] = 0.0
    U[2, :, -1] = 0.0


def _check_floor(rho, c0, t):
    if np.min(rho) < c0:
        raise DensityFloorError(
            f"density {np.min(rho):.6g} fell below c0={c0} at t={t:.6g}")


def cfl_dt(state, params):
    """Largest admissible step per the advective CFL rule."""
    g = state.grid
    U = fvcore.conservative(state.rho.values, state.u.values, state.v.values)
    lam = fvcore.max_wave_speed(U, params)
    return params.cfl_number * min(g.dx, g.dy_min) / lam


def step_euler(state, dt, params, *, limiter=False, source=None):
    """One SSP-RK2 step of the compressible Euler system with slip walls."""
    g = state.grid
    U = fvcore.conservative(state.rho.values, state.u.values, state.v.values)
    lam = fvcore.max_wave_speed(U, params)
    if dt > params.cfl_number * min(g.dx, g.dy_min) / lam * (1.0 + 1e-12):
        raise CFLViolation(
            f"dt={dt:.3e} exceeds CFL bound "
            f"{params.cfl_number * min(g.dx, g.dy_min) / lam:.3e}")
    t = state.t

    def rhs(U, tt):
        out = fvcore.convective_rhs(U, g, params, limiter)
        if source is not None:
            out = out + source(tt)
        return out

    U1 = U + dt * rhs(U, t)
    _enforce_slip(U1)
    _check_floor(U1[0], params.c0, t + dt)
    U2 = 0.5 * U + 0.5 * (U1 + dt * rhs(U1, t + dt))
    _enforce_slip(U2)
    _check_floor(U2[0], params.c0, t + dt)
    rho, u, v = fvcore.primitive(U2)
    return make_state(g, rho, u, v, t + dt)


@dataclass
class EulerTrajectory:
    """Time-ordered states at uniform spacing dt; order_tag 0 or 1."""

    states: list
    dt: float
    order_tag: int = 0

    @property
    def times(self):
        return np.array([s.t for s in self.states])

    @property
    def grid(self):
        return self.states[0].grid

    def state_arrays(self):
        """(rho, u, v) stacked as (nt, nx, ny) arrays."""
        rho = np.stack([s.rho.values for s in self.states])
        u = np.stack([s.u.values for s in self.states])
        v = np.stack([s.v.values for s in self.states])
        return rho, u, v


def _grad_sup(state):
    """Cheap sup-norm proxy for grad(u, v): forward differences in x."""
    g = state.grid
    du = np.abs(np.diff(state.u.values, axis=0)).max() / g.dx
    dv = np.abs(np.diff(state.v.values, axis=0)).max() / g.dx
    return max(du, dv)


def solve_euler(init, T, params, *, dt=None, store_every=None, limiter=False,
                source=None):
    """March the Euler system to time T, storing every store_every-th step.

    A uniform dt is chosen from the initial CFL bound unless given; store
    intervals always include t=0 and t=T.  A configured sup-gradient bound
    aborts with the blow-up time.
    """
    if T > params.T_final + 1e-12:
        raise ConfigError("T exceeds params.T_final")
    if T == 0.0:
        return EulerTrajectory([init], 0.0, 0)
    if dt is None:
        dt = 0.9 * cfl_dt(init, params)
    n = max(1, int(np.ceil(T / dt - 1e-9)))
    dt = T / n
    if store_every is None:
        store_every = 1
    state = init
    states = [init]
    for k in range(n):
        state = step_euler(state, dt, params, limiter=limiter, source=source)
        gsup = _grad_sup(state)
        if gsup > params.grad_bound:
            raise BlowUpError(state.t, gsup)
        if (k + 1) % store_every == 0 or k == n - 1:
            states.append(state)
    return EulerTrajectory(states, dt * store_every, 0)


# --------------------------------------------------------------------------
# Wall traces
# --------------------------------------------------------------------------

@dataclass
class WallTraces:
    """Wall values and one-sided wall derivatives over (t, x).

    Background (order-0) traces are always present; corrector traces are
    None until a first-order trajectory is supplied, and reading them while
    unset is an error.
    """

    times: np.ndarray
    x: np.ndarray
    Lx: float
    u_bar: np.ndarray
    rho_bar: np.ndarray
    dudy_bar: np.ndarray
    dvdy_bar: np.ndarray
    d2vdy2_bar: np.ndarray
    u1_bar: np.ndarray = None
    rho1_bar: np.ndarray = None
    v1_bar: np.ndarray = None
    dxu1_bar: np.ndarray = None
    dxv1_bar: np.ndarray = None

    @property
    def has_corrector(self):
        return self.u1_bar is not None

    def require_corrector(self):
        if not self.has_corrector:
            raise ConfigError("corrector traces requested but never extracted")

    def dxdy_v_bar(self):
        """x-derivative of the wall trace of dv/dy."""
        return ddx_spectral(self.dvdy_bar.T, self.Lx).T

    def index_of(self, t):
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ConfigError(f"time {t} is not on the trace grid")
        return i

    def sample(self, name, t):
        """Linear-in-time sample of the named trace at arbitrary t."""
        arr = getattr(self, name)
        tt = self.times
        if t <= tt[0]:
            return arr[0]
        if t >= tt[-1]:
            return arr[-1]
        i = int(np.searchsorted(tt, t) - 1)
        w = (t - tt[i]) / (tt[i + 1] - tt[i])
        return (1.0 - w) * arr[i] + w * arr[i + 1]


def _wall_weights(y, m, npts):
    return fornberg_weights(y[:npts], y[0], m)


def extract_traces(traj0, traj1=None):
    """Wall traces of the background (and optionally corrector) trajectory.

    Derivative traces use 3rd-order one-sided stencils on the physical
    nodes (4 nodes for d/dy, 5 for d2/dy2).
    """
    g = traj0.grid
    w1 = _wall_weights(g.y, 1, 4)
    w2 = _wall_weights(g.y, 2, 5)
    rho, u, v = traj0.state_arrays()
    traces = WallTraces(
        times=traj0.times,
        x=g.x,
        Lx=g.Lx,
        u_bar=u[:, :, 0].copy(),
        rho_bar=rho[:, :, 0].copy(),
        dudy_bar=np.einsum("txj,j->tx", u[:, :, :4], w1),
        dvdy_bar=np.einsum("txj,j->tx", v[:, :, :4], w1),
        d2vdy2_bar=np.einsum("txj,j->tx", v[:, :, :5], w2),
    )
    if traj1 is not None:
        if len(traj1.states) != len(traj0.states) or abs(traj1.dt - traj0.dt) > 1e-12:
            raise ConfigError("corrector trajectory is on a different time grid")
        rho1, u1, v1 = traj1.state_arrays()
        traces.u1_bar = u1[:, :, 0].copy()
        traces.rho1_bar = rho1[:, :, 0].copy()
        traces.v1_bar = v1[:, :, 0].copy()
        traces.dxu1_bar = ddx_spectral(traces.u1_bar.T, g.Lx).T
        traces.dxv1_bar = ddx_spectral(traces.v1_bar.T, g.Lx).T
    return traces


# --------------------------------------------------------------------------
# Linearized Euler corrector
# --------------------------------------------------------------------------

def _d4x(f):
    return (np.roll(f, 2, 0) - 4.0 * np.roll(f, 1, 0) + 6.0 * f
            - 4.0 * np.roll(f, -1, 0) + np.roll(f, -2, 0))


def _d4y_interior(f):
    out = np.zeros_like(f)
    out[:, 2:-2] = (f[:, :-4] - 4.0 * f[:, 1:-3] + 6.0 * f[:, 2:-2]
                    - 4.0 * f[:, 3:-1] + f[:, 4:])
    return out


class _Background:
    """Linear-in-time background fields and their space derivatives."""

    def __init__(self, traj, params):
        self.g = traj.grid
        self.times = traj.times
        self.rho, self.u, self.v = traj.state_arrays()
        self.params = params
        self._memo = (None, None)

    def at(self, t):
        if self._memo[0] == t:
            return self._memo[1]
        d = self._at(t)
        self._memo = (t, d)
        return d

    def _at(self, t):
        tt = self.times
        if t <= tt[0]:
            i, w = 0, 0.0
        elif t >= tt[-1]:
            i, w = len(tt) - 2, 1.0
        else:
            i = int(np.searchsorted(tt, t) - 1)
            w = (t - tt[i]) / (tt[i + 1] - tt[i])
        rho = (1 - w) * self.rho[i] + w * self.rho[i + 1]
        u = (1 - w) * self.u[i] + w * self.u[i + 1]
        v = (1 - w) * self.v[i] + w * self.v[i + 1]
        g = self.g
        dy = g.dy_op()
        d = {
            "rho": rho, "u": u, "v": v,
            "rho_x": ddx(rho, g.dx), "rho_y": dy.apply(rho),
            "u_x": ddx(u, g.dx), "u_y": dy.apply(u),
            "v_x": ddx(v, g.dx), "v_y": dy.apply(v),
        }
        return d


def solve_linearized_euler(background, wall_inflow, T, params, *,
                           substeps=None, dissipation=0.02):
    """Solve the first-order Euler corrector with zero initial data.

    wall_inflow holds -v_p1(t,x,0) on the background's stored time grid;
    the solution is returned on that same grid.  The solver is exactly
    linear in wall_inflow.
    """
    g = background.grid
    times = background.times
    if T > times[-1] + 1e-12:
        raise ConfigError("background does not cover [0, T]")
    wall_inflow = np.asarray(wall_inflow, dtype=float)
    if wall_inflow.shape != (len(times), g.nx):
        raise ConfigError(
            f"wall_inflow shape {wall_inflow.shape} does not match the "
            f"background time grid ({len(times)}, {g.nx})")
    bg = _Background(background, params)
    nlev = int(np.argmin(np.abs(times - T))) + 1
    dt_store = background.dt
    if substeps is None:
        lam = 1.5 * float(np.max(params.sound_speed(bg.rho[0])))
        rate = lam * (1.0 / g.dx + 1.0 / g.dy_min)
        substeps = max(1, int(np.ceil(dt_store * rate / 2.0)))
    dt = dt_store / substeps
    dy = g.dy_op()
    a, gam = params.a, params.gamma
    aref = float(np.max(params.sound_speed(bg.rho[0])))

    def inflow_at(t):
        if t <= times[0]:
            return wall_inflow[0]
        if t >= times[nlev - 1]:
            return wall_inflow[nlev - 1]
        i = int(np.searchsorted(times[:nlev], t) - 1)
        w = (t - times[i]) / (times[i + 1] - times[i])
        return (1 - w) * wall_inflow[i] + w * wall_inflow[i + 1]

    def rhs(q, t):
        r1, u1, v1 = q
        b = bg.at(t)
        r1x, u1x, v1x = ddx(r1, g.dx), ddx(u1, g.dx), ddx(v1, g.dx)
        r1y, u1y, v1y = dy.apply(r1), dy.apply(u1), dy.apply(v1)
        rho0 = b["rho"]
        pp = a * gam * rho0 ** (gam - 2.0)
        pp_lin = a * gam * (gam - 2.0) * rho0 ** (gam - 3.0)
        drho = -(b["u"] * r1x + b["v"] * r1y + u1 * b["rho_x"] + v1 * b["rho_y"]
                 + rho0 * (u1x + v1y) + r1 * (b["u_x"] + b["v_y"]))
        du = -(b["u"] * u1x + b["v"] * u1y + u1 * b["u_x"] + v1 * b["u_y"]
               + pp * r1x + pp_lin * r1 * b["rho_x"])
        dv = -(b["u"] * v1x + b["v"] * v1y + u1 * b["v_x"] + v1 * b["v_y"]
               + pp * r1y + pp_lin * r1 * b["rho_y"])
        if dissipation:
            cd = dissipation * aref
            for f, df in ((r1, drho), (u1, du), (v1, dv)):
                df -= cd / g.dx * _d4x(f) / 16.0
                df -= cd / g.dy_min * _d4y_interior(f) / 16.0
        return np.stack([drho, du, dv])

    def set_bc(q, t):
        q[2, :, 0] = inflow_at(t)
        q[2, :, -1] = 0.0

    nx, ny = g.nx, g.ny
    q = np.zeros((3, nx, ny))
    set_bc(q, 0.0)
    states = [make_state(g, q[0].copy(), q[1].copy(), q[2].copy(), 0.0)]
    t = 0.0
    for lev in range(1, nlev):
        for _ in range(substeps):
            k1 = rhs(q, t)
            q2 = q + 0.5 * dt * k1; set_bc(q2, t + 0.5 * dt)
            k2 = rhs(q2, t + 0.5 * dt)
            q3 = q + 0.5 * dt * k2; set_bc(q3, t + 0.5 * dt)
            k3 = rhs(q3, t + 0.5 * dt)
            q4 = q + dt * k3; set_bc(q4, t + dt)
            k4 = rhs(q4, t + dt)
            q = q + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += dt
            set_bc(q, t)
        t = times[lev]
        states.append(make_state(g, q[0].copy(), q[1].copy(), q[2].copy(), t))
    return EulerTrajectory(states, dt_store, 1)
