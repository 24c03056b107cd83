"""Binary trajectory checkpoints.

Layout (all little-endian):

    magic   4 bytes  b"VLCK"
    version uint8    1
    kind    uint8    0 = physical grid (rho, u, v), 1 = boundary layer
    flags   uint8    BL only: bit0 = corrector fields, bit1 = rho_p2
    pad     uint8    0
    nx      int32
    ny/nz   int32
    nt      int32
    dt      float64
    epsilon float64  NaN when not applicable
    Lx      float64
    y_max / z_max    float64
    stretch float64

followed by nt time levels; each level is `t` (float64) then the fields as
row-major (nx, ny) float64 blocks: physical kind writes rho, u, v; the
boundary-layer kind writes up0, vp1, then (flags bit0) up1, vp2, then
(flags bit1) rho_p2.
"""

import struct

import numpy as np

from .domain import BLGrid, Field2D, Grid2D, State
from .errors import ConfigError

MAGIC = b"VLCK"
_HEADER = struct.Struct("<4sBBBBiiiddddd")


def _write_header(fh, kind, flags, nx, n2, nt, dt, epsilon, Lx, ymax, stretch):
    fh.write(_HEADER.pack(MAGIC, 1, kind, flags, 0, nx, n2, nt,
                          dt, epsilon, Lx, ymax, stretch))


def write_states(path, traj, epsilon=float("nan")):
    """Write a physical-grid trajectory (Euler, Navier-Stokes, or a
    composed ansatz bundle)."""
    states = traj.states if hasattr(traj, "states") else traj.composed
    g = states[0].grid
    eps = getattr(traj, "epsilon", epsilon)
    if eps is None:
        eps = epsilon
    dt = getattr(traj, "dt", None)
    if dt is None:
        dt = states[1].t - states[0].t if len(states) > 1 else 0.0
    with open(path, "wb") as fh:
        _write_header(fh, 0, 0, g.nx, g.ny, len(states), dt,
                      eps, g.Lx, g.y_max, g.stretch)
        for s in states:
            fh.write(struct.pack("<d", s.t))
            for f in (s.rho, s.u, s.v):
                fh.write(np.ascontiguousarray(f.values, "<f8").tobytes())


def write_layer(path, sol):
    """Write a boundary-layer solution (grid-kind tag 1)."""
    g = sol.grid
    flags = (1 if sol.has_corrector else 0) | (2 if sol.rho_p2 is not None else 0)
    with open(path, "wb") as fh:
        _write_header(fh, 1, flags, g.nx, g.nz, len(sol.times), sol.dt,
                      float("nan"), g.Lx, g.z_max, g.stretch)
        for i, t in enumerate(sol.times):
            fh.write(struct.pack("<d", t))
            blocks = [sol.up0[i], sol.vp1[i]]
            if flags & 1:
                blocks += [sol.up1[i], sol.vp2[i]]
            if flags & 2:
                blocks.append(sol.rho_p2[i])
            for f in blocks:
                fh.write(np.ascontiguousarray(f.values, "<f8").tobytes())


def read(path):
    """Read any checkpoint into a dict of arrays plus the rebuilt grid."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        (magic, version, kind, flags, _pad, nx, n2, nt,
         dt, epsilon, Lx, ymax, stretch) = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise ConfigError(f"{path} is not a trajectory checkpoint")
        if version != 1:
            raise ConfigError(f"unsupported checkpoint version {version}")
        nfields = 3 if kind == 0 else 2 + (2 if flags & 1 else 0) + (1 if flags & 2 else 0)
        times = np.empty(nt)
        data = np.empty((nt, nfields, nx, n2))
        for i in range(nt):
            times[i] = struct.unpack("<d", fh.read(8))[0]
            block = np.frombuffer(fh.read(8 * nfields * nx * n2), dtype="<f8")
            data[i] = block.reshape(nfields, nx, n2)
    if kind == 0:
        grid = Grid2D(nx, n2, Lx=Lx, y_max=ymax, stretch=stretch)
        names = ["rho", "u", "v"]
    else:
        grid = BLGrid(nx, n2, Lx=Lx, z_max=ymax, stretch=stretch)
        names = ["up0", "vp1"]
        if flags & 1:
            names += ["up1", "vp2"]
        if flags & 2:
            names.append("rho_p2")
    out = {"kind": kind, "grid": grid, "times": times, "dt": dt,
           "epsilon": epsilon, "fields": {}}
    for j, name in enumerate(names):
        out["fields"][name] = data[:, j]
    return out


def read_states(path):
    """Read a physical-grid checkpoint back into a list of States."""
    d = read(path)
    if d["kind"] != 0:
        raise ConfigError("checkpoint holds a boundary-layer solution")
    g = d["grid"]
    states = []
    for i, t in enumerate(d["times"]):
        states.append(State(Field2D(g, d["fields"]["rho"][i]),
                            Field2D(g, d["fields"]["u"][i]),
                            Field2D(g, d["fields"]["v"][i]), float(t)))
    return states, d
