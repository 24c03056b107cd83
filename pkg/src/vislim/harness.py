"""Pipeline orchestration: Euler -> traces -> Prandtl -> correctors ->
ansatz -> Navier-Stokes, error norms over an epsilon sweep, rate fits,
and machine-readable exports.

Error columns come in two flavors, labeled explicitly: err_* compares the
Navier-Stokes run against the first-order pair (u_e + u_p, v_e + eps*v_p,
rho_e) — the first-order limit claim being verified — and err_*_full
against the fully composed second-order ansatz.  Scalar columns are taken
at the final stored time; full time series live in results.json.

The residual row is evaluated at the last centered-differencable stored
level (T - T/n_store).

Determinism: results.csv contains only solver-derived numbers (identical
config and seed give a byte-identical file); wall-clock timings live in
results.json provenance.
"""

import csv
import hashlib
import json
import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import t as student_t

from . import __version__
from .ansatz import _layer_eval, assemble_ansatz, ns_residual, wall_trace_defect
from .cns import DT_CAP_STEPS, solve_cns
from .domain import Grid2D, BLGrid, SimParams, stretch_for_wall_spacing
from .errors import ConfigError, VislimError
from .euler import cfl_dt, extract_traces, solve_euler, solve_linearized_euler
from .initial import CATALOG, make_initial_data
from .norms import NormSpec, energy_diagnostics, gevrey_norm, lemma_suite
from .prandtl import compute_rho_p2, solve_prandtl, solve_prandtl_corrector

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "epsilon",
    "err_rho_L2", "err_u_L2", "err_v_L2",
    "err_rho_Linf", "err_u_Linf", "err_v_Linf",
    "err_rho_full_L2", "err_u_full_L2", "err_v_full_L2",
    "err_rho_full_Linf", "err_u_full_Linf", "err_v_full_Linf",
    "res_rho_L2", "res_u_L2", "res_v_L2", "res_triple_L2",
    "res_rho_gevrey", "res_u_gevrey", "res_v_gevrey", "res_triple_gevrey",
    "baseline_u_Linf", "ubar_max",
]

DEFAULT_EPSILONS = [0.1, 0.05, 0.025]
LONG_EPSILON = 0.0125


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------

PARAMS_KEYS = {"gamma", "a", "nu", "sigma", "epsilon", "delta", "c0",
               "T_final", "mu0", "lam", "eta", "kappa", "A_weight",
               "cfl_number", "grad_bound"}
GRID_KEYS = {"nx", "ny", "nz", "Lx", "y_max", "z_max", "n_store",
             "dy_wall_factor", "bl_stretch"}

DEFAULT_GRID = {
    "nx": 64, "ny": 224, "nz": 256, "Lx": 2.0 * math.pi,
    "y_max": 7.0, "z_max": 12.0, "n_store": 80,
    "dy_wall_factor": 14.0, "bl_stretch": 1.0,
}


def _check_keys(section, d, allowed, required=()):
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {section}: {sorted(unknown)}")
    missing = set(required) - set(d)
    if missing:
        raise ConfigError(f"missing keys in {section}: {sorted(missing)}")


@dataclass
class SweepConfig:
    """Validated sweep configuration."""

    params: SimParams
    scenario: str
    amplitudes: dict
    T: float
    epsilons: list
    grid: dict
    norms: list
    seed: int
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d):
        _check_keys("config", d, {"params", "scenario", "T", "epsilons",
                                  "grids", "norms", "seed"},
                    required=("scenario", "epsilons"))
        pd = d.get("params", {})
        _check_keys("params", pd, PARAMS_KEYS)
        params = SimParams(**pd)
        scen = d["scenario"]
        _check_keys("scenario", scen, {"spec", "amplitudes"}, required=("spec",))
        if scen["spec"] not in CATALOG:
            raise ConfigError(f"unknown scenario {scen['spec']!r}")
        eps = list(d["epsilons"])
        if not eps or any(e <= 0 for e in eps) or any(
                eps[i] <= eps[i + 1] for i in range(len(eps) - 1)):
            raise ConfigError("epsilons must be strictly decreasing and positive")
        grid = dict(DEFAULT_GRID)
        gd = d.get("grids", {})
        _check_keys("grids", gd, GRID_KEYS)
        grid.update(gd)
        T = float(d.get("T", params.T_final))
        if T > params.T_final:
            raise ConfigError("T exceeds params.T_final")
        norms_list = list(d.get("norms", ["L2", "Linf", "gevrey-proxy"]))
        for nm in norms_list:
            if nm not in ("L2", "Linf", "gevrey-proxy"):
                raise ConfigError(f"unknown norm identifier {nm!r}")
        return cls(params, scen["spec"], dict(scen.get("amplitudes", {})),
                   T, eps, grid, norms_list, int(d.get("seed", 0)), raw=d)

    def grid_for(self, eps):
        g = self.grid
        dy_wall = eps / g["dy_wall_factor"]
        beta = stretch_for_wall_spacing(g["ny"], g["y_max"], dy_wall)
        return Grid2D(g["nx"], g["ny"], Lx=g["Lx"], y_max=g["y_max"],
                      stretch=beta)

    def bl_grid(self):
        g = self.grid
        return BLGrid(g["nx"], g["nz"], Lx=g["Lx"], z_max=g["z_max"],
                      stretch=g["bl_stretch"])

    def config_hash(self):
        blob = json.dumps(self.raw, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_config(path):
    try:
        with open(path) as fh:
            d = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    return SweepConfig.from_dict(d)


# --------------------------------------------------------------------------
# Single-epsilon pipeline
# --------------------------------------------------------------------------

@dataclass
class PipelineProducts:
    epsilon: float
    grid: object
    euler0: object
    traces: object
    prandtl: object
    euler1: object
    bundle: object
    cns: object = None
    errors: dict = None
    energy: object = None


def _snap_substeps(dt_store, dt_raw):
    return max(1, int(math.ceil(dt_store / dt_raw - 1e-12)))


def build_ansatz_products(config, eps):
    """Euler background, corrector, layer solution and composed ansatz."""
    params = config.params
    grid = config.grid_for(eps)
    init = make_initial_data(config.scenario, grid, params,
                             config.amplitudes)
    T = config.T
    n_store = config.grid["n_store"]
    dt_store = T / n_store
    sub_e = _snap_substeps(dt_store, 0.9 * cfl_dt(init, params))
    traj0 = solve_euler(init, T, params, dt=dt_store / sub_e,
                        store_every=sub_e)
    traces = extract_traces(traj0)
    sol0 = solve_prandtl(traces, T, params, config.bl_grid())
    traj1 = solve_linearized_euler(traj0, -sol0.vbar1, T, params)
    traces = extract_traces(traj0, traj1)
    sol1 = solve_prandtl_corrector(sol0, traces, T, params)
    sol1.rho_p2 = compute_rho_p2(sol1, traces, params)
    bundle = assemble_ansatz(traj0, traj1, sol1, eps, grid)
    return PipelineProducts(eps, grid, traj0, traces, sol1, traj1, bundle)


def _l2(grid, arr):
    return float(np.sqrt(np.sum(arr ** 2 * grid.quad_weights_y()) * grid.dx))


def _gevrey_of(grid, arr, params, t):
    mu = 0.5 * (params.mu0 - params.lam * t)
    spec = NormSpec(k=min(4, 10), mu=mu, delta=params.delta, eta=params.eta,
                    lam=params.lam, t=t, mu0=params.mu0)
    from .domain import Field2D
    return gevrey_norm(Field2D(grid, arr), spec)


def run_pipeline(config, eps, with_ns=True, with_energy=True):
    """Full per-epsilon pipeline; returns products with error norms."""
    prod = build_ansatz_products(config, eps)
    params, grid, T = config.params, prod.grid, config.T
    n_store = config.grid["n_store"]
    dt_store = T / n_store

    res_idx = len(prod.bundle.composed) - 2
    triples = ns_residual(prod.bundle, params, indices=[res_idx])[0]
    res = {}
    for name, f in zip(("rho", "u", "v"), triples):
        res[f"res_{name}_L2"] = f.l2()
        res[f"res_{name}_gevrey"] = _gevrey_of(
            grid, f.values, params, prod.bundle.times[res_idx])
    res["res_triple_L2"] = math.sqrt(sum(
        res[f"res_{n}_L2"] ** 2 for n in ("rho", "u", "v")))
    res["res_triple_gevrey"] = math.sqrt(sum(
        res[f"res_{n}_gevrey"] ** 2 for n in ("rho", "u", "v")))

    if not with_ns:
        prod.errors = res
        return prod

    init = prod.euler0.states[0]
    dt_raw = min(0.9 * cfl_dt(init, params), T / DT_CAP_STEPS)
    sub_ns = _snap_substeps(dt_store, dt_raw)
    cns_traj = solve_cns(init, eps, T, params, dt=dt_store / sub_ns,
                         store_every=sub_ns)
    prod.cns = cns_traj

    blg = prod.prandtl.grid
    zq = grid.y / eps
    n = len(cns_traj.states)
    series = {k: np.zeros(n) for k in (
        "err_rho_L2", "err_u_L2", "err_v_L2",
        "err_rho_Linf", "err_u_Linf", "err_v_Linf",
        "err_rho_full_L2", "err_u_full_L2", "err_v_full_L2",
        "err_rho_full_Linf", "err_u_full_Linf", "err_v_full_Linf")}
    err_states = []
    near_wall = grid.y <= 10.0 * eps
    baseline = 0.0
    from .domain import Field2D, State
    for i in range(n):
        s_ns = cns_traj.states[i]
        s_e = prod.euler0.states[i]
        up0 = _layer_eval(prod.prandtl.up0[i].values, blg, zq)
        vp1 = _layer_eval(prod.prandtl.vp1[i].values, blg, zq)
        cmp1 = {
            "rho": s_e.rho.values,
            "u": s_e.u.values + up0,
            "v": s_e.v.values + eps * vp1,
        }
        s_a = prod.bundle.composed[i]
        cmp_full = {"rho": s_a.rho.values, "u": s_a.u.values,
                    "v": s_a.v.values}
        for nm, f_ns in (("rho", s_ns.rho.values), ("u", s_ns.u.values),
                         ("v", s_ns.v.values)):
            e1 = f_ns - cmp1[nm]
            ef = f_ns - cmp_full[nm]
            series[f"err_{nm}_L2"][i] = _l2(grid, e1)
            series[f"err_{nm}_Linf"][i] = float(np.max(np.abs(e1)))
            series[f"err_{nm}_full_L2"][i] = _l2(grid, ef)
            series[f"err_{nm}_full_Linf"][i] = float(np.max(np.abs(ef)))
        baseline = max(baseline, float(np.max(np.abs(
            (s_ns.u.values - s_e.u.values)[:, near_wall]))))
        err_states.append(State(
            Field2D(grid, s_ns.rho.values - cmp_full["rho"]),
            Field2D(grid, s_ns.u.values - cmp_full["u"]),
            Field2D(grid, s_ns.v.values - cmp_full["v"]), s_ns.t))

    errors = {k: float(v[-1]) for k, v in series.items()}
    errors.update(res)
    errors["baseline_u_Linf"] = baseline
    errors["ubar_max"] = float(np.max(np.abs(prod.traces.u_bar[-1])))
    errors["series"] = {k: v.tolist() for k, v in series.items()}
    errors["times"] = cns_traj.times.tolist()
    errors["wall_defect"] = wall_trace_defect(prod.bundle)
    prod.errors = errors
    if with_energy:
        prod.energy = energy_diagnostics(err_states, params, eps)
    return prod


def euler_only_baseline(config, eps):
    """L-inf velocity error near the wall when no layer correction is used."""
    prod = run_pipeline(config, eps, with_ns=True, with_energy=False)
    return {"epsilon": eps, "baseline_u_Linf": prod.errors["baseline_u_Linf"],
            "ubar_max": prod.errors["ubar_max"]}


# --------------------------------------------------------------------------
# Rate fitting, sweep, export
# --------------------------------------------------------------------------

def fit_rate(rows, column):
    """Least-squares log-log slope with a 95% confidence half-width.

    Rows with non-positive values are excluded with a warning; fewer than
    3 surviving rows yield no fit (None).
    """
    pts = [(r["epsilon"], r.get(column)) for r in rows
           if isinstance(r.get(column), (int, float))]
    good = [(e, v) for e, v in pts if v > 0.0]
    if len(good) < len(pts):
        warnings.warn(f"fit_rate({column}): dropped "
                      f"{len(pts) - len(good)} non-positive rows")
    if len(good) < 3:
        return None
    x = np.log([e for e, _ in good])
    y = np.log([v for _, v in good])
    n = len(x)
    A = np.vstack([x, np.ones(n)]).T
    coef, res_, *_ = np.linalg.lstsq(A, y, rcond=None)
    slope = float(coef[0])
    resid = y - A @ coef
    if n > 2:
        s2 = float(resid @ resid) / (n - 2)
        sxx = float(np.sum((x - x.mean()) ** 2))
        hw = float(student_t.ppf(0.975, n - 2) * math.sqrt(s2 / sxx))
    else:
        hw = float("nan")
    return {"slope": slope, "half_width": hw, "n": n}


SLOPE_COLUMNS = ["err_rho_L2", "err_u_L2", "err_v_L2",
                 "err_rho_Linf", "err_u_Linf", "err_v_Linf",
                 "err_u_full_L2", "err_u_full_Linf",
                 "res_triple_L2", "res_triple_gevrey"]


@dataclass
class SweepResult:
    rows: list
    slopes: dict
    provenance: dict
    lemma_records: list = field(default_factory=list)
    failures: list = field(default_factory=list)


def _row_for(config, eps):
    t0 = time.perf_counter()
    prod = run_pipeline(config, eps)
    row = {"epsilon": eps}
    for k, v in prod.errors.items():
        row[k] = v
    row["_wallclock"] = time.perf_counter() - t0
    if prod.energy is not None:
        row["energy_E"] = prod.energy.E_series.tolist()
        row["energy_D"] = prod.energy.D_series.tolist()
        row["energy_k_cap"] = prod.energy.k_cap
    return row


def sweep(config, jobs=1, long=False):
    """Run the epsilon sweep; failing rows are isolated, others continue."""
    epsilons = list(config.epsilons)
    if long and LONG_EPSILON not in epsilons:
        epsilons.append(LONG_EPSILON)
    rows, failures = [], []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futs = {e: ex.submit(_row_for, config, e) for e in epsilons}
            for e in epsilons:
                try:
                    rows.append(futs[e].result())
                except VislimError as err:
                    failures.append({"epsilon": e, "error": str(err)})
                except Exception as err:  # pragma: no cover
                    failures.append({"epsilon": e, "error": repr(err)})
    else:
        for e in epsilons:
            try:
                rows.append(_row_for(config, e))
            except VislimError as err:
                failures.append({"epsilon": e, "error": str(err)})
    slopes = {}
    for col in SLOPE_COLUMNS:
        fit = fit_rate(rows, col)
        if fit is not None:
            slopes[col] = fit
    lemmas = lemma_suite(Grid2D(64, 64, y_max=4.0, stretch=0.0),
                         seed=config.seed or 1234)
    prov = {
        "config": config.raw,
        "config_hash": config.config_hash(),
        "code_version": __version__,
        "wallclock": {str(r["epsilon"]): r["_wallclock"] for r in rows},
    }
    return SweepResult(rows, slopes, prov, lemmas, failures)


def export(result, outdir):
    """Write results.csv, results.json and lemma JSONL under outdir."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in sorted(result.rows, key=lambda r: -r["epsilon"]):
            w.writerow([repr(r.get(c)) if isinstance(r.get(c), float)
                        else r.get(c, "") for c in CSV_COLUMNS])
    payload = {
        "rows": [{k: v for k, v in r.items() if k != "_wallclock"}
                 for r in result.rows],
        "slopes": result.slopes,
        "provenance": result.provenance,
        "failures": result.failures,
    }
    with open(out / "results.json", "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
    with open(out / "lemmas.jsonl", "w") as fh:
        for rec in result.lemma_records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return csv_path


def import_results(path):
    with open(path) as fh:
        return json.load(fh)
