"""Compressible Navier-Stokes at viscosity eps^2 with non-slip walls.

Strang arrangement per step: half viscous substep, full convective
SSP-RK2 substep (shared MUSCL-HLL operator), half viscous substep.  The
viscous substep solves the momentum diffusion implicitly with
Peaceman-Rachford alternating-direction line solves (periodic cyclic
tridiagonal in x via Sherman-Morrison, plain tridiagonal in y), the mixed
dx(div) / dy(div) coupling handled explicitly with one fixed-point
correction.  The 1/rho coefficient is frozen at the substep start
(Picard); the induced O(dt) error sits inside the O(dt^2) wrapper.

Non-slip is enforced strongly: wall rows of (u, v) are identically zero
after every stage; the lid is free-slip (v = 0, du/dy = 0).  Density
changes only through the conservative convection, so mass conservation is
inherited from the flux form.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from . import fvcore
from .domain import make_state
from .errors import CFLViolation, ConfigError, DensityFloorError, NumericalError
from .stencils import ddx, fornberg_weights

DT_CAP_STEPS = 2000


@dataclass
class CNSTrajectory:
    states: list
    epsilon: float
    dt: float
    wall_flux_log: list = field(default_factory=list)

    @property
    def times(self):
        return np.array([s.t for s in self.states])

    @property
    def grid(self):
        return self.states[0].grid

    def state_arrays(self):
        rho = np.stack([s.rho.values for s in self.states])
        u = np.stack([s.u.values for s in self.states])
        v = np.stack([s.v.values for s in self.states])
        return rho, u, v


class _ViscousSolver:
    """Cached line-solve machinery for one grid."""

    def __init__(self, grid):
        self.g = grid
        y = grid.y
        ny = grid.ny
        lo = np.zeros(ny)
        di = np.zeros(ny)
        up = np.zeros(ny)
        for j in range(1, ny - 1):
            w = fornberg_weights(y[j - 1:j + 2], y[j], 2)
            lo[j], di[j], up[j] = w
        # free-slip lid: symmetric mirror ghost, x_ghost = x[n-2]
        h = y[-1] - y[-2]
        self.lid_mirror = (2.0 / h ** 2, -2.0 / h ** 2)
        self.lo, self.di, self.up = lo, di, up

    def lap_y(self, f, neumann_lid):
        out = np.zeros_like(f)
        out[:, 1:-1] = (self.lo[1:-1] * f[:, :-2] + self.di[1:-1] * f[:, 1:-1]
                        + self.up[1:-1] * f[:, 2:])
        if neumann_lid:
            sub, dia = self.lid_mirror
            out[:, -1] = sub * f[:, -2] + dia * f[:, -1]
        return out

    def lap_x(self, f):
        return (np.roll(f, 1, 0) - 2.0 * f + np.roll(f, -1, 0)) / self.g.dx ** 2

    def solve_y(self, coeff, rhs, neumann_lid):
        """(I - coeff*d2/dy2) x = rhs, Dirichlet 0 at the wall,
        Dirichlet 0 or mirror-Neumann at the lid; coeff is (nx, ny)."""
        nx, ny = rhs.shape
        main = 1.0 - coeff * self.di[None, :]
        lower = -coeff * self.lo[None, :]
        upper = -coeff * self.up[None, :]
        b = rhs.copy()
        main[:, 0] = 1.0
        lower[:, 0] = 0.0
        upper[:, 0] = 0.0
        b[:, 0] = 0.0
        if neumann_lid:
            sub, dia = self.lid_mirror
            main[:, -1] = 1.0 - coeff[:, -1] * dia
            lower[:, -1] = -coeff[:, -1] * sub
            upper[:, -1] = 0.0
        else:
            main[:, -1] = 1.0
            lower[:, -1] = 0.0
            upper[:, -1] = 0.0
            b[:, -1] = 0.0
        ab = np.zeros((3, nx * ny))
        ab[1] = main.reshape(-1)
        ab[0, 1:] = upper.reshape(-1)[:-1]
        ab[2, :-1] = lower.reshape(-1)[1:]
        x = solve_banded((1, 1), ab, b.reshape(-1))
        return x.reshape(nx, ny)

    def solve_x(self, coeff, rhs):
        """(I - coeff*d2/dx2) x = rhs, periodic in x; coeff is (nx, ny).

        Sherman-Morrison on the per-column cyclic tridiagonal systems,
        batched into two banded solves (y columns are independent).
        """
        nx, ny = rhs.shape
        dx2 = self.g.dx ** 2
        c = coeff / dx2
        # work column-major so each y-column is one contiguous system in x
        a = (-c).T.copy()          # sub-diagonal entries (ny, nx)
        bdiag = (1.0 + 2.0 * c).T.copy()
        cs = (-c).T.copy()         # super-diagonal
        d = rhs.T.copy()
        gamma = -bdiag[:, 0].copy()
        # corner terms moved into rank-one update
        b2 = bdiag.copy()
        b2[:, 0] -= gamma
        b2[:, -1] -= cs[:, -1] * a[:, 0] / gamma
        u = np.zeros_like(d)
        u[:, 0] = gamma
        u[:, -1] = cs[:, -1]
        y1 = _banded_noncyclic(a, b2, cs, d)
        y2 = _banded_noncyclic(a, b2, cs, u)
        vy1 = y1[:, 0] + a[:, 0] / gamma * y1[:, -1]
        vy2 = y2[:, 0] + a[:, 0] / gamma * y2[:, -1]
        x = y1 - y2 * (vy1 / (1.0 + vy2))[:, None]
        return x.T.copy()


def _banded_noncyclic(a, b, c, d):
    """Batch-solve tridiagonal systems (rows = systems) via one banded solve."""
    ns, n = d.shape
    ab = np.zeros((3, ns * n))
    ab[1] = b.reshape(-1)
    sup = c.copy()
    sup[:, -1] = 0.0
    sub = a.copy()
    sub[:, 0] = 0.0
    ab[0, 1:] = sup.reshape(-1)[:-1]
    ab[2, :-1] = sub.reshape(-1)[1:]
    return solve_banded((1, 1), ab, d.reshape(-1)).reshape(ns, n)


_VISC_CACHE = {}


def _solver_for(grid):
    key = (grid.nx, grid.ny, grid.Lx, grid.y_max, grid.stretch)
    if key not in _VISC_CACHE:
        _VISC_CACHE[key] = _ViscousSolver(grid)
    return _VISC_CACHE[key]


def viscous_substep(rho, u, v, dt, epsilon, params, grid):
    """Implicit momentum diffusion over dt with frozen 1/rho (Picard).

    Peaceman-Rachford per velocity component; the mixed (nu+sigma) dxdy
    coupling is explicit and corrected once.
    """
    vs = _solver_for(grid)
    nu, sig = params.nu, params.sigma
    at = epsilon ** 2 / rho
    cu_x = at * (2.0 * nu + sig)
    cu_y = at * nu
    cv_x = at * nu
    cv_y = at * (2.0 * nu + sig)
    dy = grid.dy_op()

    def mixed_u(vfield):
        return at * (nu + sig) * ddx(dy.apply(vfield), grid.dx)

    def mixed_v(ufield):
        return at * (nu + sig) * dy.apply(ddx(ufield, grid.dx))

    def pr_solve(f, cx, cy, m, neumann_lid):
        h = 0.5 * dt
        rhs = f + h * (cy * vs.lap_y(f, neumann_lid) + m)
        star = vs.solve_x(h * cx, rhs)
        rhs = star + h * (cx * vs.lap_x(star) + m)
        out = vs.solve_y(h * cy, rhs, neumann_lid)
        return out

    mu, mv = mixed_u(v), mixed_v(u)
    u1 = pr_solve(u, cu_x, cu_y, mu, True)
    v1 = pr_solve(v, cv_x, cv_y, mv, False)
    # one fixed-point correction of the mixed term
    mu2 = mixed_u(0.5 * (v + v1))
    mv2 = mixed_v(0.5 * (u + u1))
    u2 = pr_solve(u, cu_x, cu_y, mu2, True)
    v2 = pr_solve(v, cv_x, cv_y, mv2, False)
    u2[:, 0] = 0.0
    v2[:, 0] = 0.0
    v2[:, -1] = 0.0
    return u2, v2


def _enforce_noslip(U):
    U[1, :, 0] = 0.0
    U[2, :, 0] = 0.0
    U[2, :, -1] = 0.0


def step_cns(state, epsilon, dt, params, *, limiter=False, source=None):
    """One Strang step: viscous half, convective SSP-RK2, viscous half."""
    g = state.grid
    if g.dy_min > epsilon / 4.0 + 1e-12:
        raise ConfigError(
            f"grid dy_min={g.dy_min:.3e} does not resolve the layer at "
            f"eps={epsilon} (need <= eps/4)")
    U = fvcore.conservative(state.rho.values, state.u.values, state.v.values)
    lam = fvcore.max_wave_speed(U, params)
    if dt > params.cfl_number * min(g.dx, g.dy_min) / lam * (1.0 + 1e-12):
        raise CFLViolation(
            f"dt={dt:.3e} exceeds CFL bound "
            f"{params.cfl_number * min(g.dx, g.dy_min) / lam:.3e}")
    t = state.t
    rho = state.rho.values.copy()
    u, v = viscous_substep(rho, state.u.values, state.v.values, 0.5 * dt,
                           epsilon, params, g)

    U = fvcore.conservative(rho, u, v)

    def rhs(U, tt):
        out = fvcore.convective_rhs(U, g, params, limiter)
        if source is not None:
            out = out + source(tt)
        return out

    U1 = U + dt * rhs(U, t)
    _enforce_noslip(U1)
    _check(U1[0], params, t)
    U2 = 0.5 * U + 0.5 * (U1 + dt * rhs(U1, t + dt))
    _enforce_noslip(U2)
    _check(U2[0], params, t)
    rho, u, v = fvcore.primitive(U2)
    u, v = viscous_substep(rho, u, v, 0.5 * dt, epsilon, params, g)
    u[:, 0] = 0.0
    v[:, 0] = 0.0
    v[:, -1] = 0.0
    return make_state(g, rho, u, v, t + dt)


def _check(rho, params, t):
    if not np.all(np.isfinite(rho)):
        raise NumericalError(f"NaN in density at t={t:.6g}")
    if np.min(rho) < params.c0:
        raise DensityFloorError(
            f"density {np.min(rho):.6g} fell below c0={params.c0} at t={t:.6g}")


def total_energy(state, params):
    """Kinetic plus pressure-potential energy over the domain."""
    g = state.grid
    rho, u, v = state.rho.values, state.u.values, state.v.values
    e = 0.5 * rho * (u * u + v * v) + params.a * rho ** params.gamma / (params.gamma - 1.0)
    return float(np.sum(e * g.vol_y) * g.dx)


def solve_cns(init, epsilon, T, params, *, dt=None, store_every=None,
              limiter=False, source=None):
    """March the Navier-Stokes system to T; per-store-step diagnostics.

    dt defaults to min(advective CFL from the initial state, T/2000); the
    fixed cap keeps sweep timings reproducible.
    """
    if np.max(np.hypot(init.u.values[:, 0], init.v.values[:, 0])) > 0.0:
        raise ConfigError("initial data violates non-slip at the wall")
    if T == 0.0:
        return CNSTrajectory([init], epsilon, 0.0)
    g = init.grid
    if dt is None:
        dt = min(0.9 * _cfl(init, params), T / DT_CAP_STEPS)
    n = max(1, int(np.ceil(T / dt - 1e-9)))
    dt = T / n
    if store_every is None:
        store_every = 1
    vs = _solver_for(g)
    wall_du = fornberg_weights(g.y[:4], g.y[0], 1)
    m0 = float(np.sum(init.rho.values * g.vol_y) * g.dx)
    state = init
    states = [init]
    logrows = []
    for k in range(n):
        state = step_cns(state, epsilon, dt, params, limiter=limiter,
                         source=source)
        if (k + 1) % store_every == 0 or k == n - 1:
            shear = epsilon ** 2 * params.nu * np.einsum(
                "xj,j->x", state.u.values[:, :4], wall_du)
            mass = float(np.sum(state.rho.values * g.vol_y) * g.dx)
            logrows.append({
                "t": state.t,
                "wall_shear_mean": float(np.mean(shear)),
                "wall_shear_max": float(np.max(np.abs(shear))),
                "mass_defect": mass - m0,
                "energy": total_energy(state, params),
            })
            states.append(state)
    return CNSTrajectory(states, epsilon, dt * store_every,
                         wall_flux_log=logrows)


def _cfl(state, params):
    g = state.grid
    U = fvcore.conservative(state.rho.values, state.u.values, state.v.values)
    lam = fvcore.max_wave_speed(U, params)
    return params.cfl_number * min(g.dx, g.dy_min) / lam
