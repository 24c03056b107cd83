"""Reader for the solver suite's binary trajectory checkpoints.

Implements the documented little-endian layout (magic "VLCK", version 1):
header `<4sBBBBiiiddddd` = magic, version, kind, flags, pad, nx, ny|nz, nt,
dt, epsilon, Lx, y_max|z_max, stretch; then per level a float64 time stamp
followed by row-major (nx, ny) float64 field blocks.  Physical checkpoints
(kind 0) carry rho, u, v; boundary-layer ones (kind 1) carry up0, vp1 plus
flagged corrector / density blocks.
"""

import struct

import numpy as np

MAGIC = b"VLCK"
_HEADER = struct.Struct("<4sBBBBiiiddddd")


def read(path):
    with open(path, "rb") as fh:
        (magic, version, kind, flags, _pad, nx, n2, nt, dt, epsilon, Lx,
         ymax, stretch) = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != MAGIC:
            raise ValueError(f"{path} is not a trajectory checkpoint")
        if version != 1:
            raise ValueError(f"unsupported checkpoint version {version}")
        if kind == 0:
            names = ["rho", "u", "v"]
        else:
            names = ["up0", "vp1"]
            if flags & 1:
                names += ["up1", "vp2"]
            if flags & 2:
                names.append("rho_p2")
        times = np.empty(nt)
        data = np.empty((nt, len(names), nx, n2))
        for i in range(nt):
            times[i] = struct.unpack("<d", fh.read(8))[0]
            block = np.frombuffer(fh.read(8 * len(names) * nx * n2), "<f8")
            data[i] = block.reshape(len(names), nx, n2)
    out = {
        "kind": kind, "nx": nx, "n2": n2, "nt": nt, "dt": dt,
        "epsilon": epsilon, "Lx": Lx, "ymax": ymax, "stretch": stretch,
        "times": times,
        "fields": {name: data[:, j] for j, name in enumerate(names)},
    }
    out["y"] = _nodes(kind, n2, ymax, stretch)
    return out


def _nodes(kind, n, ymax, stretch):
    s = np.linspace(0.0, 1.0, n)
    if kind == 0:
        if stretch == 0.0:
            return ymax * s
        return ymax * (1.0 - np.tanh(stretch * (1.0 - s)) / np.tanh(stretch))
    return ymax * (s ** 2 + stretch * s) / (1.0 + stretch)
