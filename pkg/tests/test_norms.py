import numpy as np
import pytest
import sympy as sp

from vislim.domain import Field2D, Grid2D, SimParams, make_state
from vislim.errors import ConfigError
from vislim.norms import (NormSpec, PRODUCT_CALIBRATION_BOUND,
                          conormal_derivative, energy_diagnostics,
                          gevrey_norm, hardy_apply, lemma_suite,
                          verify_product_inequality,
                          verify_recovery_inequality)


@pytest.fixture
def grid():
    return Grid2D(64, 96, y_max=4.0, stretch=0.0)


class TestConormal:
    def test_zero_alpha_is_identity(self, grid):
        rng = np.random.default_rng(0)
        f = Field2D(grid, rng.normal(size=(grid.nx, grid.ny)))
        out = conormal_derivative(f, (0, 0, 0), 0.1)
        assert np.array_equal(out.values, f.values)

    def test_linear_profile_closed_form(self, grid):
        f = Field2D(grid, np.broadcast_to(grid.y, (grid.nx, grid.ny)).copy())
        out = conormal_derivative(f, (0, 0, 1), 0.1)
        expect = 0.1 * grid.y / (1.0 + grid.y)
        assert np.allclose(out.values, expect[None, :], atol=1e-11)

    def test_time_order_on_single_field_rejected(self, grid):
        f = Field2D(grid, np.zeros((grid.nx, grid.ny)))
        with pytest.raises(ConfigError, match="trajectory"):
            conormal_derivative(f, (1, 0, 0), 0.1)

    def test_symbolic_oracle_mixed_order(self):
        g = Grid2D(64, 240, y_max=4.0, stretch=0.0)
        delta = 0.1
        x_, y_ = sp.symbols("x y", real=True)
        f_expr = sp.sin(x_) * sp.exp(-y_)
        phi = y_ / (1 + y_)
        z2 = delta * phi * sp.diff(f_expr, y_)
        target = (delta * sp.diff(delta * sp.diff(z2, x_), x_))
        oracle = sp.lambdify((x_, y_), target, "numpy")
        f = Field2D(g, np.sin(g.x)[:, None] * np.exp(-g.y)[None, :])
        out = conormal_derivative(f, (0, 2, 1), delta)
        expect = oracle(g.x[:, None], g.y[None, :])
        scale = np.max(np.abs(expect))
        assert np.max(np.abs(out.values - expect)) < 1e-4 * scale

    def test_commutator_defect_second_order(self):
        # [Z2, dy]f + delta*phi'*dy f -> 0 under refinement
        delta = 0.1
        defects = []
        for ny in (60, 120, 240):
            g = Grid2D(16, ny, y_max=4.0, stretch=0.0)
            f_vals = np.cos(g.x)[:, None] * np.exp(-g.y)[None, :] * (
                1.0 + g.y)[None, :]
            dy = g.dy_op()
            phi = (g.y / (1.0 + g.y))[None, :]
            phip = (1.0 / (1.0 + g.y) ** 2)[None, :]
            z2_of_dy = delta * phi * dy.apply(dy.apply(f_vals))
            dy_of_z2 = dy.apply(delta * phi * dy.apply(f_vals))
            defect = z2_of_dy - dy_of_z2 + delta * phip * dy.apply(f_vals)
            w = g.quad_weights_y()
            defects.append(np.sqrt(np.sum(defect ** 2 * w) * g.dx))
        order = np.log2(defects[0] / defects[1])
        assert order >= 2.0
        assert defects[2] < defects[1] < defects[0]


class TestHardy:
    def test_constant_fixed_point(self, grid):
        f = Field2D(grid, np.ones((grid.nx, grid.ny)))
        assert np.allclose(hardy_apply(f).values, 1.0, atol=1e-14)

    def test_linear_profile_halved(self, grid):
        f = Field2D(grid, np.broadcast_to(grid.y, (grid.nx, grid.ny)).copy())
        expect = 0.5 * grid.y
        assert np.allclose(hardy_apply(f).values, expect[None, :], atol=1e-13)

    def test_wall_value_by_continuity(self, grid):
        rng = np.random.default_rng(1)
        vals = rng.normal(size=(grid.nx, grid.ny))
        f = Field2D(grid, vals)
        assert np.array_equal(hardy_apply(f).values[:, 0], vals[:, 0])

    def test_operator_norm_on_corpus(self, grid):
        from vislim.norms import _random_field
        rng = np.random.default_rng(42)
        dy = float(np.max(np.diff(grid.y)))
        for _ in range(100):
            f = _random_field(grid, rng)
            ratio = hardy_apply(f).l2() / f.l2()
            assert ratio <= 2.0 + 5.0 * dy


class TestGevrey:
    def test_reduces_to_l2(self, grid):
        rng = np.random.default_rng(2)
        f = Field2D(grid, rng.normal(size=(grid.nx, grid.ny)))
        spec = NormSpec(k=0, mu=0.0)
        assert gevrey_norm(f, spec) == pytest.approx(f.l2(), rel=1e-12)

    def test_single_mode_weight(self, grid):
        g_y = np.exp(-grid.y)
        f = Field2D(grid, np.cos(3.0 * grid.x)[:, None] * g_y[None, :])
        mu = 0.004
        n0 = gevrey_norm(f, NormSpec(k=0, mu=0.0))
        n1 = gevrey_norm(f, NormSpec(k=0, mu=mu))
        assert n1 / n0 == pytest.approx(np.exp(3.0 * mu), rel=1e-12)

    def test_monotone_in_mu(self, grid):
        from vislim.norms import _random_field
        rng = np.random.default_rng(3)
        for _ in range(100):
            f = _random_field(grid, rng)
            lo = gevrey_norm(f, NormSpec(k=1, mu=0.001))
            hi = gevrey_norm(f, NormSpec(k=1, mu=0.003))
            assert lo <= hi * (1.0 + 1e-14)

    def test_norm_axioms(self, grid):
        from vislim.norms import _random_field
        rng = np.random.default_rng(4)
        spec = NormSpec(k=2, mu=0.002)
        for _ in range(20):
            f = _random_field(grid, rng)
            g = _random_field(grid, rng)
            c = rng.normal()
            nf = gevrey_norm(f, spec)
            ncf = gevrey_norm(Field2D(grid, c * f.values), spec)
            assert ncf == pytest.approx(abs(c) * nf, rel=1e-12)
            nsum = gevrey_norm(Field2D(grid, f.values + g.values), spec)
            assert nsum <= nf + gevrey_norm(g, spec) + 1e-12

    def test_radius_constraint_enforced(self):
        with pytest.raises(ConfigError, match="mu"):
            NormSpec(k=0, mu=0.009, t=0.25)  # mu0 - lam*t = 0.005


class TestRecovery:
    def test_single_mode_equality(self, grid):
        xi0 = 4
        f = Field2D(grid, np.cos(xi0 * grid.x)[:, None]
                    * np.exp(-grid.y)[None, :])
        mu, mu_p = 0.001, 0.004
        rec = verify_recovery_inequality(f, mu, mu_p, k=2)
        expect = (mu_p - mu) * xi0 * np.exp(-(mu_p - mu) * xi0)
        assert rec["ratio"] == pytest.approx(expect, rel=1e-12)
        assert rec["pass"]

    def test_constant_in_x_gives_zero(self, grid):
        f = Field2D(grid, np.broadcast_to(np.exp(-grid.y),
                                          (grid.nx, grid.ny)).copy())
        rec = verify_recovery_inequality(f, 0.001, 0.003, k=1)
        assert rec["lhs"] < 1e-14
        assert rec["pass"]

    def test_mu_order_rejected(self, grid):
        f = Field2D(grid, np.zeros((grid.nx, grid.ny)))
        with pytest.raises(ConfigError):
            verify_recovery_inequality(f, 0.004, 0.002, k=0)


class TestProduct:
    def test_zero_factor_zero_lhs(self, grid):
        from vislim.norms import _random_field
        rng = np.random.default_rng(5)
        f = _random_field(grid, rng)
        g = Field2D(grid, np.zeros((grid.nx, grid.ny)))
        rec = verify_product_inequality(f, g, k=8, mu=0.002, delta=0.1)
        assert rec["lhs"] == 0.0 and rec["pass"]

    def test_unit_factor_bounded(self, grid):
        from vislim.norms import _random_field
        rng = np.random.default_rng(6)
        f = Field2D(grid, np.ones((grid.nx, grid.ny)))
        g = _random_field(grid, rng)
        rec = verify_product_inequality(f, g, k=8, mu=0.002, delta=0.1)
        assert rec["ratio"] <= 1.0 + 1e-9

    def test_low_order_rejected(self, grid):
        f = Field2D(grid, np.zeros((grid.nx, grid.ny)))
        with pytest.raises(ConfigError, match="k >= 8"):
            verify_product_inequality(f, f, k=4, mu=0.002, delta=0.1)

    def test_corpus_below_frozen_bound(self):
        grid = Grid2D(64, 64, y_max=4.0, stretch=0.0)
        recs = [r for r in lemma_suite(grid, seed=1234, n_samples=100)
                if r["lemma"] == "product"]
        assert len(recs) == 100
        assert max(r["ratio"] for r in recs) <= PRODUCT_CALIBRATION_BOUND
        assert all(r["pass"] for r in recs)


class TestEnergyDiagnostics:
    def _states(self, grid, scale):
        rng = np.random.default_rng(7)
        out = []
        for i, t in enumerate(np.linspace(0.0, 0.1, 4)):
            base = np.sin(grid.x)[:, None] * np.exp(-grid.y)[None, :]
            u = scale * (i + 1) * 0.01 * base
            out.append(make_state(grid, 0.5 * u + 0.0 * base, u, 2.0 * u, t))
        return out

    def test_zero_trajectory_zero_diagnostics(self, grid, params):
        zeros = [make_state(grid, np.zeros((grid.nx, grid.ny)),
                            np.zeros((grid.nx, grid.ny)),
                            np.zeros((grid.nx, grid.ny)), t)
                 for t in np.linspace(0.0, 0.1, 4)]
        diag = energy_diagnostics(zeros, params, 0.05)
        assert np.all(diag.E_series == 0.0)
        assert np.all(diag.D_series == 0.0)

    def test_quadratic_homogeneity(self, grid, params):
        d1 = energy_diagnostics(self._states(grid, 1.0), params, 0.05)
        d2 = energy_diagnostics(self._states(grid, 2.0), params, 0.05)
        assert np.allclose(d2.E_series, 4.0 * d1.E_series, rtol=1e-12)
        assert np.allclose(d2.D_series[1:], 4.0 * d1.D_series[1:], rtol=1e-12)

    def test_k_cap_recorded(self, grid, params):
        diag = energy_diagnostics(self._states(grid, 1.0), params, 0.05)
        assert diag.k_cap == 4


def test_lemma_suite_all_pass_and_schema():
    grid = Grid2D(64, 64, y_max=4.0, stretch=0.0)
    recs = lemma_suite(grid, seed=99, n_samples=25)
    assert all(r["pass"] for r in recs)
    for r in recs:
        assert {"lemma", "sample_id", "lhs", "rhs", "ratio", "pass"} <= set(r)
