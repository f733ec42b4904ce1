import io
import json
import math
import warnings

import numpy as np
import pytest

from nrm_lab import errors
from nrm_lab.arrivals import sample_path
from nrm_lab.harness import (CSV_HEADER, ExperimentSpec, RegretTable, export_csv, fit_loglog_slope,
                             load_spec, run_experiment, summarize)
from nrm_lab.lp import dlp_value
from nrm_lab.oracle import hindsight_optimum
from nrm_lab.policies import run_policy

from conftest import multi_resource, two_class


def small_spec(**kw):
    base = dict(template=two_class(2, 1.0, 100), axis="horizon", values=(100, 200, 300, 400),
                policies=("SPA", "FR", "IRT"), num_paths=30, base_seed=7, name="small")
    base.update(kw)
    return ExperimentSpec(**base)


@pytest.fixture(scope="module")
def table():
    return run_experiment(small_spec(), workers=1)


class TestSpec:
    def test_horizon_axis_keeps_rate(self):
        spec = small_spec()
        inst = spec.instance_at(2)
        assert inst.horizon == 300 and inst.capacity[0] == 300

    def test_capacity_axis(self):
        spec = small_spec(axis="capacity_rate", values=(0.5, 1.5))
        inst = spec.instance_at(1)
        assert inst.horizon == 100 and inst.capacity[0] == 150

    @pytest.mark.parametrize("kw", [dict(axis="rate"), dict(values=()), dict(values=(0,)),
                                    dict(policies=()), dict(policies=("FR", "FR")),
                                    dict(num_paths=1), dict(policies=("XYZ",))])
    def test_rejects(self, kw):
        with pytest.raises(errors.SpecError):
            small_spec(**kw)

    def test_dict_round_trip(self, tmp_path):
        spec = small_spec()
        f = tmp_path / "s.json"
        f.write_text(json.dumps(spec.to_dict()))
        again = load_spec(f)
        assert again.to_dict() == spec.to_dict()

    def test_missing_key(self):
        raw = small_spec().to_dict()
        del raw["seed"]
        with pytest.raises(errors.SpecError, match="seed"):
            ExperimentSpec.from_dict(raw)

    def test_bad_json(self, tmp_path):
        f = tmp_path / "bad.json"
        f.write_text("{")
        with pytest.raises(errors.SpecError):
            load_spec(f)

    def test_seeds_distinct(self):
        spec = small_spec()
        seeds = {spec.path_seed(s, i) for s in range(4) for i in range(30)}
        assert len(seeds) == 120


class TestRun:
    def test_shapes_and_values(self, table):
        assert table.hindsight.shape == (4, 30)
        assert table.revenue.shape == (4, 3, 30)
        np.testing.assert_allclose(table.v_dlp, [200, 400, 600, 800])
        spec = small_spec()
        inst = spec.instance_at(1)
        path = sample_path(inst, spec.path_seed(1, 5))
        assert table.hindsight[1, 5] == hindsight_optimum(inst, path).value
        assert table.revenue[1, 1, 5] == run_policy("FR", inst, path).revenue

    def test_regret_nonnegative(self, table):
        for s in range(4):
            for p in table.policies:
                assert np.all(table.per_path_regret(p, s) >= -1e-9)

    def test_paired_difference(self, table):
        d = table.paired_difference("SPA", "FR", 3)
        want = table.per_path_regret("SPA", 3) - table.per_path_regret("FR", 3)
        assert d.mean == pytest.approx(want.mean())
        assert d.stderr == pytest.approx(want.std(ddof=1) / math.sqrt(30))

    def test_unknown_policy_in_table(self, table):
        with pytest.raises(KeyError):
            table.regret("IR", 0)

    def test_csv(self, table):
        text = table.to_csv()
        lines = text.splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 4 * 3
        first = lines[1].split(",")
        assert first[0] == "100.0" and first[1] == "SPA" and first[4] == "30"
        assert float(first[2]) == table.regret("SPA", 0).mean
        buf = io.StringIO()
        export_csv(table, buf)
        assert buf.getvalue() == text

    def test_worker_count_invariance(self, table, tmp_path):
        again = run_experiment(small_spec(), workers=3)
        assert again.to_csv() == table.to_csv()

    def test_seed_changes_output(self, table):
        assert run_experiment(small_spec(base_seed=8), workers=1).to_csv() != table.to_csv()

    def test_env_workers(self, monkeypatch):
        monkeypatch.setenv("NRM_LAB_WORKERS", "two")
        with pytest.raises(errors.SpecError):
            run_experiment(small_spec(num_paths=2, values=(100,)))

    def test_error_context(self):
        spec = small_spec(template=two_class(2, 1.0, 2.0), values=(2.0,), policies=("IRT",), num_paths=2)
        with pytest.raises(errors.ExperimentError, match="horizon=2.0"):
            run_experiment(spec, workers=1)

    def test_stderr_shrinks(self):
        est = [run_experiment(small_spec(values=(200,), num_paths=n), workers=1).regret("SPA", 0).stderr
               for n in (25, 400)]
        assert est[1] < est[0] / 2

    def test_summary(self, table):
        text = summarize(table)
        assert "SPA" in text and "slope" in text


class TestSlope:
    def test_sqrt(self):
        T = np.array([100, 400, 900, 1600, 2500])
        fit = fit_loglog_slope((T, 3 * np.sqrt(T)))
        assert fit.slope == pytest.approx(0.5) and fit.r2 == pytest.approx(1.0)
        assert fit.intercept == pytest.approx(math.log(3))

    def test_constant(self):
        fit = fit_loglog_slope(([1, 2, 3, 4], [5, 5, 5, 5]))
        assert fit.slope == pytest.approx(0, abs=1e-12) and fit.r2 == 1.0

    def test_drops_nonpositive(self):
        with pytest.warns(errors.NonpositiveRegret):
            fit = fit_loglog_slope(([1, 2, 3, 4, 5], [1, 2, -1, 4, 5]))
        assert fit.excluded == (3.0,)
        assert fit.slope == pytest.approx(1.0)

    def test_too_few_points(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            with pytest.raises(ValueError):
                fit_loglog_slope(([1, 2, 3, 4], [1, 0, 0, 1]))

    def test_from_table(self, table):
        fit = fit_loglog_slope(table, "SPA")
        np.testing.assert_allclose(
            fit.slope, np.polyfit(np.log(table.values), np.log(table.mean_regrets("SPA")), 1)[0])
