"""Shared second-order finite-volume convection operator.

Conservative variables U = (rho, rho*u, rho*v) on the mapped tensor grid:
MUSCL reconstruction (central slopes, optional minmod limiting) with an
HLL flux.  Wall and lid faces coincide with the boundary node rows; their
fluxes are evaluated exactly from the node states, so with v = 0 enforced
there the discrete mass functional sum(rho * vol) is conserved to
round-off.

Array layout: (3, nx, ny), x = axis 1 (periodic), y = axis 2.
"""

import numpy as np


def minmod(a, b):
    return np.where(a * b <= 0.0, 0.0, np.where(np.abs(a) < np.abs(b), a, b))


def primitive(U):
    rho = U[0]
    return rho, U[1] / rho, U[2] / rho


def conservative(rho, u, v):
    return np.stack([rho, rho * u, rho * v])


def _pressure(rho, params):
    return params.a * rho ** params.gamma


def _sound(rho, params):
    return np.sqrt(params.a * params.gamma * rho ** (params.gamma - 1.0))


def _flux_x(U, params):
    rho, u, v = primitive(U)
    P = _pressure(rho, params)
    return np.stack([rho * u, rho * u * u + P, rho * u * v])


def _flux_y(U, params):
    rho, u, v = primitive(U)
    P = _pressure(rho, params)
    return np.stack([rho * v, rho * u * v, rho * v * v + P])


def _hll(UL, UR, params, axis_flux, normal_index):
    rhoL, uL, vL = primitive(UL)
    rhoR, uR, vR = primitive(UR)
    cL, cR = _sound(rhoL, params), _sound(rhoR, params)
    qL = (uL, vL)[normal_index]
    qR = (uR, vR)[normal_index]
    SL = np.minimum(qL - cL, qR - cR)
    SR = np.maximum(qL + cL, qR + cR)
    FL = axis_flux(UL, params)
    FR = axis_flux(UR, params)
    denom = SR - SL
    denom = np.where(np.abs(denom) < 1e-300, 1.0, denom)
    Fmid = (SR * FL - SL * FR + SL * SR * (UR - UL)) / denom
    F = np.where(SL >= 0.0, FL, np.where(SR <= 0.0, FR, Fmid))
    return F


def _slopes(U, axis, limiter, periodic):
    if periodic:
        dp = np.roll(U, -1, axis) - U
        dm = U - np.roll(U, 1, axis)
    else:
        d = np.diff(U, axis=axis)
        first = np.take(d, [0], axis=axis)
        last = np.take(d, [-1], axis=axis)
        dp = np.concatenate([d, last], axis=axis)
        dm = np.concatenate([first, d], axis=axis)
    if limiter:
        return minmod(dm, dp)
    return 0.5 * (dm + dp)


def convective_rhs(U, grid, params, limiter=False):
    """-div(F) of the convective fluxes; returns dU/dt shaped like U."""
    # x direction: faces i+1/2 live at index i
    sx = _slopes(U, 1, limiter, periodic=True)
    UL = U + 0.5 * sx
    UR = np.roll(U - 0.5 * sx, -1, 1)
    Fx = _hll(UL, UR, params, _flux_x, 0)
    div = (Fx - np.roll(Fx, 1, 1)) / grid.dx

    # y direction: interior faces by HLL, wall/lid faces exact at the nodes
    sy = _slopes(U, 2, limiter, periodic=False)
    UL = (U + 0.5 * sy)[:, :, :-1]
    UR = (U - 0.5 * sy)[:, :, 1:]
    Gin = _hll(UL, UR, params, _flux_y, 1)
    G = np.empty((3, grid.nx, grid.ny + 1))
    G[:, :, 1:-1] = Gin
    G[:, :, 0] = _flux_y(U[:, :, :1], params)[:, :, 0]
    G[:, :, -1] = _flux_y(U[:, :, -1:], params)[:, :, 0]
    div += np.diff(G, axis=2) / grid.vol_y
    return -div


def max_wave_speed(U, params):
    rho, u, v = primitive(U)
    return float(np.max(np.abs(u) + np.abs(v) + _sound(rho, params)))
