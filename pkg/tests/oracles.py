"""Independent oracles used by the test suite.

Everything here is derived symbolically (sympy) or by quadrature/series,
never by the solver code paths under test.
"""

import numpy as np
import sympy as sp

X, Y, T = sp.symbols("x y t", real=True)
Z = sp.Symbol("z", real=True, nonnegative=True)


def lambdify_xyt(expr):
    f = sp.lambdify((X, Y, T), expr, "numpy")

    def call(x, y, t):
        out = f(x[:, None], y[None, :], t)
        return np.broadcast_to(out, (len(x), len(y))).astype(float)

    return call


def manufactured_ns_fields(y_max=4.0):
    """Smooth manufactured (rho, u, v) compatible with non-slip wall,
    free-slip lid, and periodic x."""
    rho = 1 + sp.Rational(1, 10) * sp.sin(X - 0.7 * T) * sp.cos(sp.pi * Y / (2 * y_max))
    u = sp.Rational(1, 10) * sp.sin(X - T) * sp.sin(sp.pi * Y / (2 * y_max))
    v = sp.Rational(2, 25) * sp.cos(X - 1.3 * T) * sp.sin(sp.pi * Y / y_max)
    return rho, u, v


def manufactured_sources(params, viscous_eps=None, y_max=4.0):
    """Conservative-form source terms for the manufactured fields.

    Returns callables for the fields and for (S_rho, S_rhou, S_rhov); the
    viscous terms enter when viscous_eps is given.
    """
    rho, u, v = manufactured_ns_fields(y_max)
    a, gam = params.a, params.gamma
    P = a * rho ** gam
    d = sp.diff(u, X) + sp.diff(v, Y)
    S_rho = sp.diff(rho, T) + sp.diff(rho * u, X) + sp.diff(rho * v, Y)
    S_mu = (sp.diff(rho * u, T) + sp.diff(rho * u * u + P, X)
            + sp.diff(rho * u * v, Y))
    S_mv = (sp.diff(rho * v, T) + sp.diff(rho * u * v, X)
            + sp.diff(rho * v * v + P, Y))
    if viscous_eps is not None:
        e2 = viscous_eps ** 2
        lap = lambda f: sp.diff(f, X, 2) + sp.diff(f, Y, 2)
        S_mu -= e2 * params.nu * lap(u) + e2 * (params.nu + params.sigma) * sp.diff(d, X)
        S_mv -= e2 * params.nu * lap(v) + e2 * (params.nu + params.sigma) * sp.diff(d, Y)
    fields = tuple(lambdify_xyt(e) for e in (rho, u, v))
    sources = tuple(lambdify_xyt(e) for e in (S_rho, S_mu, S_mv))
    return fields, sources


def fit_loglog(h, err):
    """Least-squares slope of log(err) against log(h)."""
    h = np.asarray(h, float)
    err = np.asarray(err, float)
    A = np.vstack([np.log(h), np.ones_like(h)]).T
    slope, _ = np.linalg.lstsq(A, np.log(err), rcond=None)[0]
    return slope
