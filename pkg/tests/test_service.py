"""HTTP service surface: routes, payload shapes, error mapping."""

import math

import pytest
from fastapi.testclient import TestClient

from udnee.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


class TestBasics:
    def test_health(self, client):
        r = client.get("/health")
        assert r.status_code == 200
        assert r.json() == {"status": "ok"}

    def test_defaults_echo(self, client):
        r = client.get("/defaults")
        assert r.status_code == 200
        body = r.json()
        assert body["params"]["deploy.lambda_b"] == 20.0
        assert "channel.theta" in body["non_paper_defaults"]
        assert body["mu_norm"] == pytest.approx(0.01, rel=1e-9)


class TestAnalytics:
    def test_default_report(self, client):
        r = client.post("/analytics", json={"overrides": {}})
        assert r.status_code == 200
        rep = r.json()["report"]
        assert rep["t_hat_star"] >= rep["t_hat_min"]
        assert rep["ee1"] == pytest.approx(7.6732508823, rel=1e-8)

    def test_zero_user_density_zeroes_interference(self, client):
        r = client.post("/analytics", json={"overrides": {"deploy.lambda_u": 0.0}})
        assert r.status_code == 200
        rep = r.json()["report"]
        assert rep["i0_hat"] == 0.0 and rep["i1_hat"] == 0.0

    def test_config_error_maps_to_422(self, client):
        r = client.post("/analytics", json={"overrides": {"channel.alpha": 1.0}})
        assert r.status_code == 422
        detail = r.json()["detail"]
        assert detail["error_type"] == "ConfigError"
        assert detail["exit_code"] == 2

    def test_domain_error_maps_to_400(self, client):
        # degenerate channel: eta = 0 breaks the rate constant
        r = client.post("/analytics", json={"overrides": {"channel.eta": 0.0}})
        assert r.status_code == 400
        assert r.json()["detail"]["error_type"] == "NumericDomainError"
        assert r.json()["detail"]["exit_code"] == 3


class TestCheck:
    def test_reference_surrogate(self, client):
        r = client.post("/check", json={"overrides": {}})
        assert r.status_code == 200
        rep = r.json()["report"]
        assert rep["a2"] == pytest.approx(1.6e6, rel=1e-9)
        assert isinstance(rep["flags"], dict)


class TestEpisode:
    def test_small_episode(self, client):
        overrides = {"channel.eta": 0.5, "mobility.v": 3.0,
                     "channel.mu_x": math.sqrt(0.25), "channel.mu_y": math.sqrt(0.25),
                     "channel.theta": 43.77}
        r = client.post("/episode", json={
            "overrides": overrides, "variant": "fixed-baseline",
            "horizon": 1.0, "seed": 1})
        assert r.status_code == 200
        body = r.json()
        assert body["summary"]["steps"] == 100
        assert body["summary"]["long_term_ee"] > 0.0

    def test_bad_variant_rejected_by_schema(self, client):
        r = client.post("/episode", json={"overrides": {}, "variant": "nope"})
        assert r.status_code == 422


class TestFigures:
    def test_fig5_rows(self, client):
        r = client.post("/figures/fig5", json={"overrides": {}})
        assert r.status_code == 200
        body = r.json()["results"][0]
        assert body["name"] == "fig5"
        assert body["columns"][0] == "v"
        assert len(body["rows"]) > 0

    def test_unknown_figure(self, client):
        r = client.post("/figures/fig9", json={"overrides": {}})
        assert r.status_code == 422

    def test_fig6_small(self, client):
        r = client.post("/figures/fig6", json={"overrides": {}, "seeds": [0],
                                               "horizon": 1.0})
        assert r.status_code == 200
        body = r.json()
        assert {res["name"] for res in body["results"]} == {"fig6_proposed",
                                                            "fig6_baseline"}
        assert body["ratio"] > 0.0
