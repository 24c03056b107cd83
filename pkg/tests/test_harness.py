import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vislim.errors import ConfigError
from vislim.harness import (CSV_COLUMNS, SweepConfig, SweepResult, export,
                            fit_rate, import_results, run_pipeline, sweep)


class TestConfig:
    def test_minimal_config(self):
        cfg = SweepConfig.from_dict({"scenario": {"spec": "rest"},
                                     "epsilons": [0.1, 0.05, 0.025]})
        assert cfg.scenario == "rest"
        assert cfg.T == cfg.params.T_final

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown keys"):
            SweepConfig.from_dict({"scenario": {"spec": "rest"},
                                   "epsilons": [0.1], "extra": 1})

    def test_unknown_grid_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown keys in grids"):
            SweepConfig.from_dict({"scenario": {"spec": "rest"},
                                   "epsilons": [0.1],
                                   "grids": {"nx": 8, "resolution": 3}})

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ConfigError, match="unknown scenario"):
            SweepConfig.from_dict({"scenario": {"spec": "tornado"},
                                   "epsilons": [0.1]})

    def test_nonmonotone_epsilons_rejected(self):
        with pytest.raises(ConfigError, match="strictly decreasing"):
            SweepConfig.from_dict({"scenario": {"spec": "rest"},
                                   "epsilons": [0.05, 0.1]})

    def test_grid_for_respects_wall_spacing(self):
        cfg = SweepConfig.from_dict({"scenario": {"spec": "rest"},
                                     "epsilons": [0.1, 0.05, 0.025]})
        for eps in cfg.epsilons:
            g = cfg.grid_for(eps)
            assert g.dy_min <= eps / 4.0

    def test_config_hash_stable(self):
        d = {"scenario": {"spec": "rest"}, "epsilons": [0.1]}
        assert (SweepConfig.from_dict(d).config_hash()
                == SweepConfig.from_dict(d).config_hash())


class TestFitRate:
    def test_exact_linear_law(self):
        rows = [{"epsilon": e, "err": e} for e in (0.1, 0.05, 0.025)]
        fit = fit_rate(rows, "err")
        assert fit["slope"] == pytest.approx(1.0, abs=1e-12)
        assert fit["half_width"] == pytest.approx(0.0, abs=1e-9)

    def test_exact_quadratic_with_constant(self):
        rows = [{"epsilon": e, "err": 3.0 * e ** 2}
                for e in (0.1, 0.05, 0.025)]
        assert fit_rate(rows, "err")["slope"] == pytest.approx(2.0, abs=1e-12)

    def test_jittered_power_law_within_band(self):
        rng = np.random.default_rng(2024)
        eps = np.array([0.2, 0.1, 0.05, 0.025, 0.0125])
        rows = [{"epsilon": float(e),
                 "err": float(e ** (1.0 + rng.uniform(-0.05, 0.05)))}
                for e in eps]
        fit = fit_rate(rows, "err")
        assert 0.9 <= fit["slope"] <= 1.1

    def test_nonpositive_rows_excluded_with_warning(self):
        rows = [{"epsilon": 0.1, "err": 0.0}, {"epsilon": 0.05, "err": 1.0},
                {"epsilon": 0.025, "err": 0.5}]
        with pytest.warns(UserWarning, match="non-positive"):
            assert fit_rate(rows, "err") is None

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.3, 3.0), st.floats(-3.0, 3.0))
    def test_recovers_arbitrary_power_law(self, c, p):
        rows = [{"epsilon": e, "err": c * e ** p}
                for e in (0.1, 0.05, 0.025, 0.0125)]
        assert fit_rate(rows, "err")["slope"] == pytest.approx(p, abs=1e-9)


class TestExport:
    def _fake_result(self):
        rows = [{"epsilon": e, "err_u_L2": e, "err_rho_L2": 2 * e,
                 "_wallclock": 1.0} for e in (0.1, 0.05, 0.025)]
        slopes = {"err_u_L2": fit_rate(rows, "err_u_L2")}
        return SweepResult(rows, slopes, {"config": {}, "config_hash": "x",
                                          "code_version": "0",
                                          "wallclock": {}})

    def test_empty_result_has_header_only(self, tmp_path):
        res = SweepResult([], {}, {"config": {}, "config_hash": "x",
                                   "code_version": "0", "wallclock": {}})
        path = export(res, tmp_path)
        lines = path.read_text().splitlines()
        assert len(lines) == 1
        assert lines[0] == ",".join(CSV_COLUMNS)

    def test_three_rows_fixed_columns(self, tmp_path):
        path = export(self._fake_result(), tmp_path)
        lines = path.read_text().splitlines()
        assert len(lines) == 4
        assert all(len(l.split(",")) == len(CSV_COLUMNS) for l in lines)

    def test_json_roundtrip_reproduces_slopes_bit_exact(self, tmp_path):
        res = self._fake_result()
        export(res, tmp_path)
        data = import_results(tmp_path / "results.json")
        refit = fit_rate(data["rows"], "err_u_L2")
        assert refit["slope"] == data["slopes"]["err_u_L2"]["slope"]
        assert refit["half_width"] == data["slopes"]["err_u_L2"]["half_width"]

    def test_csv_deterministic_bytes(self, tmp_path):
        a = export(self._fake_result(), tmp_path / "a")
        b = export(self._fake_result(), tmp_path / "b")
        assert a.read_bytes() == b.read_bytes()


class TestFailureIsolation:
    def test_failing_row_never_corrupts_others(self, monkeypatch):
        import vislim.harness as hmod
        from vislim.errors import NumericalError

        real = hmod._row_for

        def flaky(config, eps):
            if eps == 0.05:
                raise NumericalError("synthetic blow-up")
            return {"epsilon": eps, "err_u_L2": eps, "_wallclock": 0.0}

        monkeypatch.setattr(hmod, "_row_for", flaky)
        cfg = SweepConfig.from_dict({"scenario": {"spec": "rest"},
                                     "epsilons": [0.1, 0.05, 0.025]})
        result = hmod.sweep(cfg)
        monkeypatch.setattr(hmod, "_row_for", real)
        assert [r["epsilon"] for r in result.rows] == [0.1, 0.025]
        assert result.failures == [{"epsilon": 0.05,
                                    "error": "synthetic blow-up"}]
        # surviving rows still export cleanly
        assert len(result.rows) == 2


@pytest.mark.slow
class TestPipelineRest:
    def test_rest_scenario_all_errors_vanish(self):
        cfg = SweepConfig.from_dict({
            "scenario": {"spec": "rest"},
            "epsilons": [0.1],
            "T": 0.02,
            "grids": {"nx": 16, "ny": 96, "nz": 64, "n_store": 8,
                      "y_max": 4.0},
        })
        prod = run_pipeline(cfg, 0.1, with_energy=False)
        e = prod.errors
        for k in ("err_rho_L2", "err_u_L2", "err_v_L2",
                  "err_u_full_L2", "baseline_u_Linf"):
            assert e[k] == 0.0
        # every solver preserves rest exactly, so the residual is zero too
        assert e["res_triple_L2"] < 1e-12

    def test_determinism_identical_rows(self):
        cfg = SweepConfig.from_dict({
            "scenario": {"spec": "shear-bump"},
            "epsilons": [0.1],
            "T": 0.02,
            "grids": {"nx": 16, "ny": 96, "nz": 64, "n_store": 8,
                      "y_max": 4.0},
        })
        a = run_pipeline(cfg, 0.1, with_energy=False).errors
        b = run_pipeline(cfg, 0.1, with_energy=False).errors
        for k in ("err_u_L2", "res_triple_L2", "err_rho_Linf"):
            assert a[k] == b[k]
