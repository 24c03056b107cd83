"""Finite-difference weights and derivative operators on the suite's grids.

x is always periodic and uniform; y (or the fast variable z) lives on a
strictly increasing, possibly stretched node set.  Wall-normal derivatives
use Fornberg weights on the physical nodes: 5-node centered windows in the
interior (4th order) and 4-node one-sided windows at the two boundary rows
(3rd order).  Arrays are laid out (nx, ny) with axis 0 = x.
"""

import numpy as np


def fornberg_weights(nodes, x0, m):
    """Weights of the m-th derivative at x0 from the given nodes.

    Classic Fornberg recursion; exact for polynomials of degree
    len(nodes)-1.
    """
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    c = np.zeros((n, m + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0] - x0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


class NodeDerivative:
    """Derivative operator along a nonuniform node axis.

    Precomputes per-row stencil windows; interior rows use `width`-node
    centered windows, boundary rows one-sided `edge_width`-node windows.
    """

    def __init__(self, nodes, order, width=5, edge_width=4):
        nodes = np.asarray(nodes, dtype=float)
        n = len(nodes)
        width = min(width, n)
        edge_width = min(edge_width, n)
        self.n = n
        idx = np.empty((n, width), dtype=int)
        wts = np.zeros((n, width))
        half = width // 2
        for j in range(n):
            if j < half or j > n - 1 - half:
                w = edge_width
                lo = min(max(j - w // 2, 0), n - w)
            else:
                w = width
                lo = j - half
            sub = np.arange(lo, lo + w)
            idx[j, :w] = sub
            idx[j, w:] = sub[-1] if w < width else idx[j, w:]
            wts[j, :w] = fornberg_weights(nodes[sub], nodes[j], order)
        self.idx = idx
        self.wts = wts

    def apply(self, f):
        """Differentiate along the last axis; f shape (..., n)."""
        g = f[..., self.idx]
        return np.einsum("...jk,jk->...j", g, self.wts)


def ddx(f, dx):
    """4th-order centered periodic x-derivative, axis 0."""
    return (8.0 * (np.roll(f, -1, 0) - np.roll(f, 1, 0))
            - (np.roll(f, -2, 0) - np.roll(f, 2, 0))) / (12.0 * dx)


def d2dx2(f, dx):
    """4th-order centered periodic second x-derivative, axis 0."""
    return (-30.0 * f + 16.0 * (np.roll(f, -1, 0) + np.roll(f, 1, 0))
            - (np.roll(f, -2, 0) + np.roll(f, 2, 0))) / (12.0 * dx ** 2)


def spectral_wavenumbers(nx, Lx):
    return 2.0 * np.pi * np.fft.rfftfreq(nx, d=Lx / nx)


def ddx_spectral(f, Lx):
    """Spectral periodic x-derivative, axis 0 (real fields)."""
    nx = f.shape[0]
    k = spectral_wavenumbers(nx, Lx)
    fh = np.fft.rfft(f, axis=0)
    shape = (len(k),) + (1,) * (f.ndim - 1)
    return np.fft.irfft(1j * k.reshape(shape) * fh, n=nx, axis=0)
