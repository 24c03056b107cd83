"""Matched-asymptotic approximate solution and its Navier-Stokes residual.

Composition on the physical grid:

    rho_a = (rho_e0 + eps*rho_e1) + eps^2 * rho_p2(y/eps)
    u_a   = (u_e0 + eps*u_e1) + (u_p0 + eps*u_p1)(y/eps)
    v_a   = (v_e0 + eps*v_e1) + (eps*v_p1 + eps^2*v_p2)(y/eps) - eps^2*vbar_p2

Layer fields are cubic-spline interpolated in z at z = y/eps and clamped to
zero beyond z_max (their Gaussian tails are checked first).  The wall
conditions of the expansion pieces cancel the composed wall traces to
interpolation round-off.

The residual substitutes the composed fields into the eps-scaled
Navier-Stokes operator in density-divided form (pressure term
a*gamma*rho^(gamma-2)*grad rho, the displayed form at gamma=2, a=1/2) using
4th-order centered stencils in the interior, 3rd-order one-sided stencils
at the wall rows, and 2nd-order time differences on the trajectory.
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .domain import Field2D, make_state
from .errors import ConfigError, NumericalError
from .stencils import d2dx2, ddx

LAYER_TAIL_TOL = 1e-8


@dataclass
class AnsatzBundle:
    """All expansion pieces plus the composed (rho_a, u_a, v_a) states."""

    euler0: object
    euler1: object
    prandtl: object
    epsilon: float
    composed: list
    grid: object

    @property
    def times(self):
        return np.array([s.t for s in self.composed])


def _layer_eval(bl_values, bl_grid, zq):
    """Spline a boundary-layer field at the query heights zq (clamped)."""
    m = np.max(np.abs(bl_values))
    if m > 0.0 and np.max(np.abs(bl_values[:, -1])) > LAYER_TAIL_TOL * m:
        raise NumericalError(
            "boundary-layer field tail is not negligible at z_max; raise z_max")
    spline = CubicSpline(bl_grid.z, bl_values, axis=1)
    inside = zq <= bl_grid.z_max
    vals = np.zeros((bl_values.shape[0], len(zq)))
    if np.any(inside):
        vals[:, inside] = spline(zq[inside])
    return vals


def assemble_ansatz(euler0, euler1, prandtl, epsilon, grid):
    """Compose the approximate solution on the physical grid."""
    if epsilon <= 0.0:
        raise ConfigError("epsilon must be positive")
    n = len(euler0.states)
    if len(euler1.states) != n or len(prandtl.times) != n:
        raise ConfigError("expansion pieces live on different time grids")
    if not prandtl.has_corrector or prandtl.rho_p2 is None:
        raise ConfigError("prandtl solution lacks corrector fields or rho_p2")
    if prandtl.grid.nx != grid.nx:
        raise ConfigError("boundary-layer and physical grids differ in nx")
    blg = prandtl.grid
    zq = grid.y / epsilon
    composed = []
    for i in range(n):
        s0, s1 = euler0.states[i], euler1.states[i]
        up0 = _layer_eval(prandtl.up0[i].values, blg, zq)
        up1 = _layer_eval(prandtl.up1[i].values, blg, zq)
        vp1 = _layer_eval(prandtl.vp1[i].values, blg, zq)
        vp2 = _layer_eval(prandtl.vp2[i].values, blg, zq)
        rp2 = _layer_eval(prandtl.rho_p2[i].values, blg, zq)
        rho = s0.rho.values + epsilon * s1.rho.values + epsilon ** 2 * rp2
        u = s0.u.values + epsilon * s1.u.values + up0 + epsilon * up1
        v = (s0.v.values + epsilon * s1.v.values
             + epsilon * vp1 + epsilon ** 2 * vp2
             - epsilon ** 2 * prandtl.vbar2[i][:, None])
        composed.append(make_state(grid, rho, u, v, s0.t))
    bundle = AnsatzBundle(euler0, euler1, prandtl, epsilon, composed, grid)
    _check_bundle(bundle)
    return bundle


def _check_bundle(bundle):
    wall = wall_trace_defect(bundle)
    if wall > 1e-10:
        raise NumericalError(
            f"composed ansatz wall trace {wall:.3e} exceeds 1e-10")
    rho_min = min(np.min(s.rho.values) for s in bundle.composed)
    # c0/2 with the default catalog bound; composed density must stay positive
    if rho_min <= 0.0:
        raise NumericalError("composed density lost positivity")


def wall_trace_defect(bundle):
    """max over time of the composed |u_a|, |v_a| on the wall row."""
    worst = 0.0
    for s in bundle.composed:
        worst = max(worst, float(np.max(np.abs(s.u.values[:, 0]))),
                    float(np.max(np.abs(s.v.values[:, 0]))))
    return worst


def _dt_weights(times, i):
    n = len(times)
    if n < 3:
        raise ConfigError("residual evaluation needs >= 3 time levels")
    dt = times[1] - times[0]
    if i == 0:
        return [0, 1, 2], np.array([-1.5, 2.0, -0.5]) / dt
    if i == n - 1:
        return [n - 3, n - 2, n - 1], np.array([0.5, -2.0, 1.5]) / dt
    return [i - 1, i + 1], np.array([-0.5, 0.5]) / dt


def ns_residual(bundle, params, indices=None):
    """Negated Navier-Stokes residual triples (R_rho, R_u, R_v) per time.

    Endpoint levels use one-sided 2nd-order time stencils; interior levels
    centered ones.
    """
    states = bundle.composed
    times = bundle.times
    g = bundle.grid
    eps2 = bundle.epsilon ** 2
    nu, sig = params.nu, params.sigma
    a, gam = params.a, params.gamma
    dy = g.dy_op()
    d2y = g.d2y_op()
    if indices is None:
        indices = range(len(states))
    rho_all = np.stack([s.rho.values for s in states])
    u_all = np.stack([s.u.values for s in states])
    v_all = np.stack([s.v.values for s in states])
    out = []
    for i in indices:
        idx, wts = _dt_weights(times, i)
        rho_t = np.einsum("k,kxy->xy", wts, rho_all[idx])
        u_t = np.einsum("k,kxy->xy", wts, u_all[idx])
        v_t = np.einsum("k,kxy->xy", wts, v_all[idx])
        rho, u, v = rho_all[i], u_all[i], v_all[i]
        rho_x, rho_y = ddx(rho, g.dx), dy.apply(rho)
        u_x, u_y = ddx(u, g.dx), dy.apply(u)
        v_x, v_y = ddx(v, g.dx), dy.apply(v)
        pcoef = a * gam * rho ** (gam - 2.0)
        R_rho = -(rho_t + u * rho_x + v * rho_y + rho * (u_x + v_y))
        visc_u = (eps2 * nu / rho * (d2dx2(u, g.dx) + d2y.apply(u))
                  + eps2 * (nu + sig) / rho * (d2dx2(u, g.dx) + ddx(v_y, g.dx)))
        visc_v = (eps2 * nu / rho * (d2dx2(v, g.dx) + d2y.apply(v))
                  + eps2 * (nu + sig) / rho * (ddx(u_y, g.dx) + d2y.apply(v)))
        R_u = -(u_t + u * u_x + v * u_y + pcoef * rho_x - visc_u)
        R_v = -(v_t + u * v_x + v * v_y + pcoef * rho_y - visc_v)
        out.append((Field2D(g, R_rho), Field2D(g, R_u), Field2D(g, R_v)))
    return out


def residual_report(bundle, params, indices=None, gevrey=None):
    """JSON-ready per-time residual norms.

    gevrey, if given, is a callable Field2D -> float (the proxy norm).
    """
    times = bundle.times
    if indices is None:
        indices = range(len(times))
    indices = list(indices)
    rows = []
    for i, triple in zip(indices, ns_residual(bundle, params, indices)):
        norms = {}
        for name, f in zip(("R_rho", "R_u", "R_v"), triple):
            norms[f"{name}_L2"] = f.l2()
            norms[f"{name}_Linf"] = f.linf()
            if gevrey is not None:
                norms[f"{name}_gevrey"] = gevrey(f)
        rows.append({"epsilon": bundle.epsilon, "time": float(times[i]),
                     "norms": norms})
    return rows
