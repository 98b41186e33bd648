"""Figure sweeps: qualitative shapes, artifact contracts, determinism."""

import csv
import json
import math
import os

import pytest

from udnee.errors import NumericDomainError
from udnee.experiments import (SweepSpec, fig3_sweep, fig4_sweep, fig5_sweep,
                               fig6_comparison, fig6_params)
from udnee.params import ScenarioParams

BASE = ScenarioParams().validate()


def rows_by(result, **filters):
    idx = {c: i for i, c in enumerate(result.columns)}
    out = []
    for row in result.rows:
        if all(row[idx[k]] == v for k, v in filters.items()):
            out.append(row)
    return out, idx


@pytest.fixture(scope="module")
def fig3_result():
    return fig3_sweep(BASE)


@pytest.fixture(scope="module")
def fig4_result():
    return fig4_sweep(BASE)


@pytest.fixture(scope="module")
def fig5_result():
    return fig5_sweep(BASE)


@pytest.fixture(scope="module")
def fig6_outcome():
    # desk-scale smoke version; the acceptance suite runs the full one
    return fig6_comparison(BASE, seeds=[0, 1], horizon=4.0)


class TestFig3:

    def test_increasing_in_antennas_at_reference_density(self, fig3_result):
        rows, idx = rows_by(fig3_result, lambda_b=20.0)
        rows.sort(key=lambda r: r[idx["N"]])
        vals = [r[idx["metric"]] for r in rows]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_decreasing_at_large_density(self, fig3_result):
        # pilot response congestion at a fixed threshold hurts dense grids
        _, idx = rows_by(fig3_result)
        at_n10 = {}
        for row in fig3_result.rows:
            if row[idx["N"]] == 10:
                at_n10[row[idx["lambda_b"]]] = row[idx["metric"]]
        assert at_n10[320.0] < at_n10[80.0] < at_n10[20.0]

    def test_regression_point(self, fig3_result):
        rows, idx = rows_by(fig3_result, lambda_b=20.0, N=10)
        # pinned after first computation; equals the analytics EE1* value
        assert rows[0][idx["metric"]] == pytest.approx(7.6732508823, rel=1e-8)

    def test_csv_and_provenance(self, fig3_result, tmp_path):
        out = str(tmp_path)
        csv_path = fig3_result.write_csv(out)
        with open(csv_path) as fh:
            reader = csv.reader(fh)
            header = next(reader)
            assert header == fig3_result.columns
            assert len(list(reader)) == len(fig3_result.rows)
        prov_path = fig3_result.write_provenance(out)
        blob = json.load(open(prov_path))
        assert blob["scenario"]["deploy.lambda_b"] == 20.0
        assert "channel.theta" in blob["non_paper_defaults"]


class TestFig4:

    def test_decreasing_in_velocity(self, fig4_result):
        rows, idx = rows_by(fig4_result, t_hat=0.3)
        rows.sort(key=lambda r: r[idx["v"]])
        vals = [r[idx["metric"]] for r in rows]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_decreasing_in_elapsed_time(self, fig4_result):
        rows, idx = rows_by(fig4_result, v=3.0)
        rows.sort(key=lambda r: r[idx["t_hat"]])
        vals = [r[idx["metric"]] for r in rows]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_power_saturates_for_fast_long(self, fig4_result):
        rows, idx = rows_by(fig4_result, v=10.0, t_hat=1.0)
        assert rows[0][idx["p0_star"]] == BASE.power.P_max


class TestFig5:

    def test_nonincreasing_in_velocity(self, fig5_result):
        idx = {c: i for i, c in enumerate(fig5_result.columns)}
        rows = sorted(fig5_result.rows, key=lambda r: r[idx["v"]])
        vals = [r[idx["metric"]] for r in rows]
        assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_above_minimum_everywhere(self, fig5_result):
        idx = {c: i for i, c in enumerate(fig5_result.columns)}
        for row in fig5_result.rows:
            assert row[idx["metric"]] >= row[idx["t_hat_min"]] - 1e-15

    def test_reference_velocity_point(self, fig5_result):
        idx = {c: i for i, c in enumerate(fig5_result.columns)}
        row = next(r for r in fig5_result.rows if r[idx["v"]] == 3.0)
        # at reference fading the wasteful-HO bound binds: 1/(4 v^2 lambda_b (1/beta - 1))
        assert row[idx["metric"]] == pytest.approx(0.0125, rel=1e-9)


class TestFig6:

    def test_ratio_positive_and_reported(self, fig6_outcome):
        assert fig6_outcome["ratio"] > 0.0
        assert fig6_outcome["proposed_longterm"] > 0.0
        assert fig6_outcome["baseline_longterm"] > 0.0

    def test_two_csvs_plus_provenance(self, fig6_outcome, tmp_path):
        out = str(tmp_path)
        paths = [fig6_outcome["proposed"].write_csv(out),
                 fig6_outcome["baseline"].write_csv(out),
                 fig6_outcome["proposed"].write_provenance(out),
                 fig6_outcome["baseline"].write_provenance(out)]
        for path in paths:
            assert os.path.exists(path)
        names = {os.path.basename(p) for p in paths}
        assert names == {"fig6_proposed.csv", "fig6_baseline.csv",
                         "fig6_proposed_params.json", "fig6_baseline_params.json"}

    def test_overrides_applied(self, fig6_outcome):
        flat = fig6_outcome["proposed"].params.to_flat()
        assert flat["mobility.v"] == 3.0
        assert flat["channel.eta"] == 0.5
        assert fig6_outcome["proposed"].params.channel.mu_norm == pytest.approx(
            math.sqrt(0.5), rel=1e-12)

    def test_deterministic_given_seeds(self):
        a = fig6_comparison(BASE, seeds=[3], horizon=2.0)
        b = fig6_comparison(BASE, seeds=[3], horizon=2.0)
        assert a["ratio"] == b["ratio"]
        assert a["proposed"].rows == b["proposed"].rows

    def test_stationary_mode_rows_tagged(self):
        out = fig6_comparison(BASE, seeds=[0], horizon=2.0,
                              fading_modes=("dynamic", "stationary"))
        modes = {row[0] for row in out["proposed"].rows}
        assert modes == {"dynamic", "stationary"}


class TestSweepSpec:
    def test_empty_grid_rejected(self):
        with pytest.raises(NumericDomainError):
            SweepSpec("channel.N", [], "ee1_star").validate()

    def test_simulation_metric_needs_seeds(self):
        with pytest.raises(NumericDomainError):
            SweepSpec("mobility.v", [1.0], "ee_a_longterm").validate()

    def test_fig6_theta_recalibrated(self):
        p = fig6_params(BASE)
        # five candidate BSs per pilot under the strong fading too
        from udnee.analytics import pilot_area
        assert p.deploy.lambda_b * pilot_area(p.channel, 1.0) == pytest.approx(
            5.0, rel=1e-9)
