"""Acceptance criteria, one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`.  The epsilon sweep runs
once (3 concurrent rows) and feeds the convergence, baseline and energy
criteria; the residual criterion re-runs the ansatz pipeline without the
Navier-Stokes solve to honor its independent runtime budget.
"""

import time

import numpy as np
import pytest

from oracles import fit_loglog, manufactured_sources
from vislim.cns import solve_cns, viscous_substep
from vislim.domain import (BLField, BLGrid, Grid2D, SimParams, make_state,
                           stretch_for_wall_spacing)
from vislim.euler import solve_euler, solve_linearized_euler, extract_traces, cfl_dt
from vislim.harness import SweepConfig, build_ansatz_products, fit_rate, sweep
from vislim.initial import make_initial_data
from vislim.norms import lemma_suite
from vislim.prandtl import recover_vp, solve_prandtl

EPSILONS = [0.1, 0.05, 0.025]
T = 0.25


def _report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="session")
def sweep_cfg():
    return SweepConfig.from_dict({
        "scenario": {"spec": "shear-bump"},
        "epsilons": EPSILONS,
        "T": T,
    })


@pytest.fixture(scope="session")
def sweep_result(sweep_cfg):
    t0 = time.perf_counter()
    result = sweep(sweep_cfg, jobs=3)
    result.provenance["sweep_wallclock"] = time.perf_counter() - t0
    assert not result.failures, f"sweep rows failed: {result.failures}"
    return result


@pytest.mark.acceptance
class TestAcceptance:
    def test_convergence_rate(self, sweep_result):
        slopes = sweep_result.slopes
        l2_u = slopes["err_u_L2"]["slope"]
        l2_rho = slopes["err_rho_L2"]["slope"]
        li_u = slopes["err_u_Linf"]["slope"]
        li_rho = slopes["err_rho_Linf"]["slope"]
        wall = sweep_result.provenance["sweep_wallclock"]
        ok = (l2_u >= 0.8 and l2_rho >= 0.8 and li_u >= 0.7
              and li_rho >= 0.7 and wall < 900.0)
        _report("convergence-rate (first-order comparison)", ok,
                f"slope L2(u)={l2_u:.2f} L2(rho)={l2_rho:.2f} "
                f"Linf(u)={li_u:.2f} Linf(rho)={li_rho:.2f} "
                f"sweep wallclock={wall:.0f}s (budget 900s)")

    def test_residual_order(self, sweep_cfg):
        from vislim.harness import run_pipeline
        t0 = time.perf_counter()
        rows = []
        for eps in EPSILONS:
            prod = run_pipeline(sweep_cfg, eps, with_ns=False)
            rows.append({"epsilon": eps, **prod.errors})
        elapsed = time.perf_counter() - t0
        fit = fit_rate(rows, "res_triple_L2")
        ok = abs(fit["slope"] - 2.0) <= 0.4 and elapsed < 300.0
        _report("residual-order (eps^2 claim)", ok,
                f"slope={fit['slope']:.2f} (target 2 +/- 0.4), "
                f"runtime={elapsed:.0f}s (budget 300s)")

    def test_boundary_layer_necessity(self, sweep_result):
        rows = sorted(sweep_result.rows, key=lambda r: -r["epsilon"])
        lower_ok = all(r["baseline_u_Linf"] >= r["ubar_max"] - 1e-3
                       for r in rows)
        linf = [r["err_u_Linf"] for r in rows]
        decreasing = all(a > b for a, b in zip(linf, linf[1:]))
        ok = lower_ok and decreasing
        _report("boundary-layer necessity", ok,
                f"baseline >= max|u_bar|-1e-3 for all eps: {lower_ok}; "
                f"ansatz Linf errors {['%.2e' % v for v in linf]} "
                f"decreasing: {decreasing}")

    def test_scheme_verification_mms_euler(self):
        params = SimParams()
        errs, hs = [], []
        for nx, ny in [(16, 24), (32, 48), (64, 96)]:
            g = Grid2D(nx, ny, stretch=1.0)
            fields, sources = manufactured_sources(params)

            def src(t, g=g, sources=sources):
                return np.stack([s(g.x, g.y, t) for s in sources])

            init = make_state(g, *[f(g.x, g.y, 0.0) for f in fields])
            traj = solve_euler(init, 0.1, params,
                               dt=0.2 * min(g.dx, g.dy_min),
                               store_every=10 ** 9, source=src)
            s = traj.states[-1]
            w = g.quad_weights_y()
            diff = sum((getattr(s, n).values - f(g.x, g.y, s.t)) ** 2
                       for n, f in zip(("rho", "u", "v"), fields))
            errs.append(float(np.sqrt(np.sum(diff * w) * g.dx)))
            hs.append(g.dx)
        order = fit_loglog(hs, errs)
        _report("scheme-verification (Euler MMS)", order >= 1.9,
                f"spatial order {order:.2f} (need >= 1.9)")

    def test_scheme_verification_mms_cns(self):
        params = SimParams()
        eps = 0.4
        errs, hs = [], []
        for nx, ny in [(16, 24), (32, 48), (64, 96)]:
            g = Grid2D(nx, ny, stretch=3.0)
            fields, sources = manufactured_sources(params, viscous_eps=eps)

            def src(t, g=g, sources=sources):
                return np.stack([s(g.x, g.y, t) for s in sources])

            init = make_state(g, *[f(g.x, g.y, 0.0) for f in fields])
            traj = solve_cns(init, eps, 0.05, params,
                             dt=0.3 * min(g.dx, g.dy_min),
                             store_every=10 ** 9, source=src)
            s = traj.states[-1]
            w = g.quad_weights_y()
            diff = sum((getattr(s, n).values - f(g.x, g.y, s.t)) ** 2
                       for n, f in zip(("rho", "u", "v"), fields))
            errs.append(float(np.sqrt(np.sum(diff * w) * g.dx)))
            hs.append(g.dx)
        order = fit_loglog(hs, errs)
        _report("scheme-verification (NS MMS)", order >= 1.9,
                f"spatial order {order:.2f} (need >= 1.9)")

    def test_scheme_verification_mms_prandtl(self):
        import sympy as sp
        from vislim.prandtl import step_prandtl
        from test_prandtl import make_traces
        params = SimParams()
        t_, z_ = sp.symbols("t z", real=True, nonnegative=True)
        um = sp.exp(-t_) * z_ * sp.exp(-z_ ** 2)
        S = sp.diff(um, t_) - sp.diff(um, z_, 2)
        um_f = sp.lambdify((t_, z_), um, "numpy")
        S_f = sp.lambdify((t_, z_), S, "numpy")
        Th, dt = 0.05, 1e-4
        errs, hs = [], []
        for nz in (32, 64, 128):
            g = BLGrid(4, nz)
            times = np.arange(0, int(round(Th / dt)) + 1) * dt
            ub = -um_f(times[:, None], 0.0) * np.ones((1, 4))
            tr = make_traces(times, g, u_bar=ub)
            up = BLField(g, np.broadcast_to(um_f(0.0, g.z), (4, g.nz)).copy())
            src = lambda tt, g=g: np.broadcast_to(S_f(tt, g.z), (4, g.nz))
            t = 0.0
            for _ in range(len(times) - 1):
                up = step_prandtl(up, tr, t, dt, params, source=src,
                                  advection=False)
                t += dt
            w = g.quad_weights_z()
            errs.append(float(np.sqrt(np.sum(
                (up.values[0] - um_f(Th, g.z)) ** 2 * w))))
            hs.append(1.0 / nz)
        order = fit_loglog(hs, errs)
        _report("scheme-verification (Prandtl MMS)", order >= 1.9,
                f"dz order {order:.2f} (need >= 1.9)")

    def test_scheme_verification_heat_benchmark(self):
        params = SimParams()
        eps, ymax, Th = 0.1, 4.0, 0.1
        g = Grid2D(8, 160, y_max=ymax, stretch=0.0)
        u = np.broadcast_to(g.y ** 2 * np.exp(-g.y), (8, g.ny)).copy()
        rho = np.ones_like(u)
        v = np.zeros_like(u)
        for _ in range(200):
            u, v = viscous_substep(rho, u, v, Th / 200, eps, params, g)
        yy = np.linspace(0.0, ymax, 20001)
        prof = yy ** 2 * np.exp(-yy)
        series = np.zeros_like(g.y)
        for n in range(400):
            lam = (n + 0.5) * np.pi / ymax
            cn = 2.0 / ymax * np.trapezoid(prof * np.sin(lam * yy), yy)
            series += cn * np.sin(lam * g.y) * np.exp(
                -eps ** 2 * params.nu * lam ** 2 * Th)
        rel = (np.sqrt(np.trapezoid((u[0] - series) ** 2, g.y))
               / np.sqrt(np.trapezoid(series ** 2, g.y)))
        _report("scheme-verification (heat benchmark)", rel < 1e-3,
                f"relative L2 error {rel:.2e} (need < 1e-3)")

    def test_functional_inequality_suite(self):
        t0 = time.perf_counter()
        grid = Grid2D(64, 64, y_max=4.0, stretch=0.0)
        recs = lemma_suite(grid, seed=1234, n_samples=100)
        elapsed = time.perf_counter() - t0
        by = {}
        for r in recs:
            by.setdefault(r["lemma"], []).append(r)
        ok = (all(r["pass"] for r in recs) and elapsed < 60.0
              and all(len(v) == 100 for v in by.values()))
        worst = {k: max(r["ratio"] for r in v) for k, v in by.items()}
        _report("functional-inequality suite", ok,
                f"max ratios {worst}, runtime {elapsed:.1f}s (budget 60s)")

    def test_structural_exactness(self, sweep_result, sweep_cfg):
        wall = max(r["wall_defect"] for r in sweep_result.rows)
        params = sweep_cfg.params

        # divergence identity under grid doubling
        from test_prandtl import make_traces
        from vislim.stencils import ddx_spectral
        resids = []
        for nz in (96, 192):
            g = BLGrid(16, nz)
            rb = 1.0 + 0.2 * np.sin(g.x)
            up_vals = ((np.sin(g.x)[:, None] + 0.5)
                       * np.exp(-g.z ** 2)[None, :])
            tr = make_traces([0.0], g, rho_bar=rb[None, :])
            vp, _ = recover_vp(BLField(g, up_vals), tr, 0.0)
            r = (ddx_spectral(rb[:, None] * up_vals, g.Lx)
                 + g.dz_op().apply(rb[:, None] * vp.values))
            w = g.quad_weights_z()
            resids.append(float(np.sqrt(np.sum(r ** 2 * w) * g.dx)))
        div_order = np.log2(resids[0] / resids[1])

        # linearized-solver linearity to round-off
        g = Grid2D(32, 48, stretch=1.0)
        init = make_initial_data("shear-bump", g, params)
        sub = max(1, int(np.ceil(0.01 / (0.8 * cfl_dt(init, params)))))
        bg = solve_euler(init, 0.08, params, dt=0.01 / sub, store_every=sub)
        times = bg.times
        inflow = 0.01 * np.sin(np.pi * times / times[-1])[:, None] ** 2 \
            * np.cos(g.x)[None, :]
        t1 = solve_linearized_euler(bg, inflow, 0.08, params)
        t2 = solve_linearized_euler(bg, 2.0 * inflow, 0.08, params)
        lin_defect = max(
            float(np.max(np.abs(b.u.values - 2.0 * a.u.values)))
            for a, b in zip(t1.states, t2.states))

        ok = wall <= 1e-10 and div_order >= 1.7 and lin_defect <= 1e-12
        _report("structural exactness", ok,
                f"wall traces {wall:.1e} (<=1e-10), divergence-identity "
                f"order {div_order:.2f}, linearity defect {lin_defect:.1e} "
                f"(<=1e-12)")

    def test_energy_diagnostic_boundedness(self, sweep_result):
        row = next(r for r in sweep_result.rows if r["epsilon"] == 0.05)
        E = np.array(row["energy_E"])
        times = np.array(row["times"])
        half = times <= 0.5 * T + 1e-12
        early = E[half & (times > 0.0)]
        plateau = float(np.max(early))
        peak = float(np.max(E))
        ok = peak <= 4.0 * plateau
        _report("energy-diagnostic boundedness", ok,
                f"sup E = {peak:.3e} vs 4 x early plateau = "
                f"{4.0 * plateau:.3e} (ratio {peak / plateau:.2f})")
