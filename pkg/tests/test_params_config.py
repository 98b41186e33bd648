"""Scenario configuration: defaults, validation, overrides, round-trips."""

import math

import pytest

from udnee.errors import ConfigError
from udnee.params import (NON_PAPER_DEFAULTS, ScenarioParams, calibrate_theta,
                          emit_config, load_config_file, parse_config,
                          set_mu_norm)


class TestDefaults:
    def test_reference_setup_values(self):
        p = parse_config()
        assert p.channel.eta == 0.01
        assert p.channel.mu_norm == pytest.approx(0.01, rel=1e-12)
        assert p.channel.sigma2 == 1.0
        assert p.deploy.lambda_b == 20.0
        assert p.power.P_max == 20.0
        assert p.channel.N == 10
        assert p.channel.alpha == 4.0
        assert p.channel.R == 10.0
        assert p.power.P_c == 1.0

    def test_non_paper_defaults_flagged(self):
        echo = ScenarioParams().describe()
        for key in ("channel.theta", "channel.N_p", "channel.epsilon",
                    "policy.beta", "mobility.dt"):
            assert key in echo["non_paper_defaults"]
        assert set(NON_PAPER_DEFAULTS) <= set(echo["params"].keys())

    def test_default_theta_calibration(self):
        # default threshold yields ~5 candidate BSs per pilot at t_ref = 1
        p = ScenarioParams()
        assert p.channel.theta == pytest.approx(calibrate_theta(p), rel=1e-9)


class TestValidation:
    def test_small_alpha_rejected(self):
        with pytest.raises(ConfigError, match="alpha"):
            parse_config(overrides={"channel.alpha": 1.5})

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown"):
            parse_config(overrides={"channel.gamma": 1.0})
        with pytest.raises(ConfigError, match="unknown"):
            parse_config(overrides={"nosuch.eta": 1.0})

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError):
            parse_config(overrides={"channel.eta": "not-a-number"})

    def test_beta_range(self):
        with pytest.raises(ConfigError, match="beta"):
            parse_config(overrides={"policy.beta": 1.0})

    def test_density_ratio_warning(self):
        with pytest.warns(UserWarning, match="lambda_b/lambda_u"):
            parse_config(overrides={"deploy.lambda_u": 15.0})

    def test_zero_user_density_allowed(self):
        p = parse_config(overrides={"deploy.lambda_u": 0.0})
        assert p.deploy.lambda_u == 0.0


class TestOverrides:
    def test_override_merges_over_defaults(self):
        p = parse_config(overrides={"mobility.v": 3.0, "channel.eta": 0.5})
        assert p.mobility.v == 3.0
        assert p.channel.eta == 0.5
        assert p.deploy.lambda_b == 20.0  # untouched default

    def test_replace_does_not_mutate(self):
        p = ScenarioParams()
        q = p.replace(**{"channel.N": 64})
        assert p.channel.N == 10 and q.channel.N == 64

    def test_int_fields_coerced(self):
        p = parse_config(overrides={"channel.N": "100"})
        assert p.channel.N == 100 and isinstance(p.channel.N, int)

    def test_set_mu_norm(self):
        p = set_mu_norm(ScenarioParams(), math.sqrt(0.5))
        assert p.channel.mu_norm == pytest.approx(math.sqrt(0.5), rel=1e-12)
        assert p.channel.mu_x == p.channel.mu_y


class TestRoundTrip:
    def test_emit_then_parse_identity(self, tmp_path):
        p = parse_config(overrides={"channel.eta": 0.5, "mobility.v": 3.0,
                                    "channel.N": 64})
        path = str(tmp_path / "scenario.yaml")
        emit_config(p, path)
        q = parse_config(path)
        assert p.to_flat() == q.to_flat()

    def test_json_config_supported(self, tmp_path):
        import json
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps({"channel.eta": 0.25}))
        p = parse_config(str(path))
        assert p.channel.eta == 0.25

    def test_missing_file_is_config_error(self):
        with pytest.raises(ConfigError):
            parse_config("/nonexistent/path.yaml")

    def test_non_mapping_config_rejected(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("- just\n- a\n- list\n")
        with pytest.raises(ConfigError):
            load_config_file(str(path))
