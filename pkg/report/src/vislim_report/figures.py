"""Figure builders over the harness's exported artifacts.

Read-only consumer: no physics is recomputed here, and slope annotations
always come from the harness's results.json, never from a silent refit.
"""

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import ckpt

FIGURE_KINDS = ("convergence", "profile", "residual", "lemma-ratios")

DEFAULT_ERROR_COLUMNS = ("err_u_L2", "err_rho_L2", "err_u_Linf")
RESIDUAL_COLUMNS = ("res_rho_L2", "res_u_L2", "res_v_L2", "res_triple_L2")


@dataclass
class FigureSpec:
    indir: str
    kind: str
    outpath: str
    columns: tuple = ()
    time: float = None
    x_slice: int = 0
    epsilon: float = None
    dpi: int = 150

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"choose from {FIGURE_KINDS}")
        if not Path(self.indir).exists():
            raise FileNotFoundError(f"input path {self.indir} does not exist")


def _load_rows(indir):
    path = Path(indir) / "results.csv"
    if not path.exists():
        raise FileNotFoundError(f"{path} not found")
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return rows


def _load_slopes(indir):
    path = Path(indir) / "results.json"
    with open(path) as fh:
        return json.load(fh)["slopes"]


def _styled_axes(title, xlabel, ylabel):
    fig, ax = plt.subplots(figsize=(5.0, 3.8), dpi=100)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def _save(fig, spec):
    out = Path(spec.outpath)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=spec.dpi, metadata={"Software": None})
    plt.close(fig)
    return out


def convergence_series(indir, columns=()):
    """Per-column (epsilons, values, harness slope or None) triples.

    Slopes come from results.json only; no refit happens here.
    """
    rows = _load_rows(indir)
    if len(rows) < 2:
        raise ValueError("convergence figure needs at least 2 sweep rows")
    slopes = _load_slopes(indir)
    columns = columns or DEFAULT_ERROR_COLUMNS
    for c in columns:
        if c not in rows[0]:
            raise ValueError(f"results.csv lacks column {c!r}")
    eps = np.array([float(r["epsilon"]) for r in rows])
    out = []
    for c in columns:
        vals = np.array([float(r[c]) for r in rows])
        slope = slopes[c]["slope"] if c in slopes else None
        out.append((c, eps, vals, slope))
    return out


def plot_convergence(spec):
    """Log-log error-vs-epsilon scatter with the harness's fitted slopes."""
    series = convergence_series(spec.indir, spec.columns)
    fig, ax = _styled_axes("zero-viscosity-limit convergence",
                           r"$\varepsilon$", "error norm")
    for c, eps, vals, slope in series:
        label = c
        if slope is not None:
            label += f" (slope {slope:.2f})"
            ref = vals[0] * (eps / eps[0]) ** slope
            ax.loglog(eps, ref, "--", lw=0.8, color="gray")
        ax.loglog(eps, vals, "o-", label=label)
    ax.legend(fontsize=7)
    return _save(fig, spec)


def plot_residual(spec):
    """Ansatz-residual norms against epsilon with fitted slope."""
    spec2 = FigureSpec(spec.indir, "convergence", spec.outpath,
                       columns=spec.columns or RESIDUAL_COLUMNS,
                       dpi=spec.dpi)
    rows = _load_rows(spec.indir)
    if len(rows) < 2:
        raise ValueError("residual figure needs at least 2 sweep rows")
    return plot_convergence(spec2)


def profile_curves(indir, epsilon=None, time=None, x_slice=0):
    """(y, u_eps, euler+layer, euler-only, t, eps) for the near-wall overlay.

    Requires ns_eps*.ckpt, euler0_eps*.ckpt and prandtl.ckpt under indir.
    """
    indir = Path(indir)
    eps = epsilon
    if eps is None:
        cands = sorted(indir.glob("ns_eps*.ckpt"))
        if not cands:
            raise FileNotFoundError(f"no ns_eps*.ckpt under {indir}")
        eps = float(cands[0].stem.replace("ns_eps", ""))
    ns = ckpt.read(indir / f"ns_eps{eps}.ckpt")
    eul = ckpt.read(indir / f"euler0_eps{eps}.ckpt")
    layer = ckpt.read(indir / "prandtl.ckpt")
    t = time if time is not None else ns["times"][-1]
    if t > ns["times"][-1] + 1e-12 or t < ns["times"][0] - 1e-12:
        raise ValueError(f"time {t} outside the checkpointed range")
    i_ns = int(np.argmin(np.abs(ns["times"] - t)))
    i_eu = int(np.argmin(np.abs(eul["times"] - t)))
    i_bl = int(np.argmin(np.abs(layer["times"] - t)))
    ix = x_slice % ns["nx"]
    y = ns["y"]
    mask = y <= 10.0 * eps
    u_eps = ns["fields"]["u"][i_ns, ix, mask]
    u_e = eul["fields"]["u"][i_eu, ix, mask]
    up0 = np.interp(y[mask] / eps, layer["y"],
                    layer["fields"]["up0"][i_bl, ix], right=0.0)
    return y[mask], u_eps, u_e + up0, u_e, t, eps


def plot_profile(spec):
    """Near-wall overlay: u^eps, euler + layer, euler alone."""
    y, u_eps, u_comp, u_e, t, eps = profile_curves(
        spec.indir, spec.epsilon, spec.time, spec.x_slice)
    fig, ax = _styled_axes(
        rf"near-wall profiles at t={t:.3g}, $\varepsilon$={eps}",
        "u", "y")
    ax.plot(u_eps, y, "k-", lw=1.6, label=r"Navier-Stokes $u^\varepsilon$")
    ax.plot(u_comp, y, "C1--", lw=1.2, label="euler + layer")
    ax.plot(u_e, y, "C0:", lw=1.2, label="euler only")
    ax.legend(fontsize=7)
    return _save(fig, spec)


def plot_lemma_ratios(spec):
    """Per-lemma ratio scatter from lemmas.jsonl with pass bounds."""
    path = Path(spec.indir) / "lemmas.jsonl"
    if not path.exists():
        raise FileNotFoundError(f"{path} not found")
    recs = [json.loads(l) for l in path.read_text().splitlines()]
    lemmas = sorted({r["lemma"] for r in recs})
    fig, ax = _styled_axes("functional-inequality ratios", "sample", "ratio")
    for i, lemma in enumerate(lemmas):
        rows = [r for r in recs if r["lemma"] == lemma]
        xs = [r["sample_id"] for r in rows]
        ys = [r["ratio"] for r in rows]
        ax.semilogy(xs, ys, ".", ms=3, label=lemma, color=f"C{i}")
        bound = rows[0].get("bound")
        if bound:
            ax.axhline(bound, color=f"C{i}", lw=0.7, ls="--")
    ax.legend(fontsize=7)
    return _save(fig, spec)


BUILDERS = {
    "convergence": plot_convergence,
    "profile": plot_profile,
    "residual": plot_residual,
    "lemma-ratios": plot_lemma_ratios,
}


def build(spec):
    return BUILDERS[spec.kind](spec)
