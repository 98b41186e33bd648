"""Command handlers shared by the HTTP service and the in-process CLI.

Every entry point resolves a scenario the same way (defaults, optional
config file, dotted-key overrides) and returns plain JSON-serializable
dictionaries, so the CLI can run them without a server and the FastAPI
routes can expose them unchanged.
"""

from __future__ import annotations

from .. import analytics, experiments
from ..errors import ConfigError
from ..params import ScenarioParams, parse_config
from ..simulator import run_episode

FIGURES = ("fig3", "fig4", "fig5", "fig6")


def resolve_params(overrides: dict | None = None,
                   config_path: str | None = None) -> ScenarioParams:
    return parse_config(config_path, overrides or {})


def handle_defaults() -> dict:
    return ScenarioParams().describe()


def handle_analytics(params: ScenarioParams, t: float | None = None) -> dict:
    report = analytics.ee_report(params, t=t)
    return {"report": report.to_dict(), "scenario": params.describe()}


def handle_check(params: ScenarioParams, threshold: float = 100.0) -> dict:
    report = analytics.check_convergence_conditions(
        params.channel, params.deploy, params.mobility, params.policy,
        threshold=threshold)
    return {"report": report.to_dict(), "scenario": params.describe()}


def handle_episode(params: ScenarioParams, variant: str = "mf-window",
                   horizon: float | None = None, seed: int | None = None,
                   fixed_tx_power: float = 0.25, fading_mode: str = "dynamic",
                   record_trace: bool = False) -> dict:
    horizon = params.run.horizon if horizon is None else horizon
    seed = params.run.seed if seed is None else seed
    episode = run_episode(params, variant, horizon, seed,
                          fixed_tx_power=fixed_tx_power,
                          fading_mode=fading_mode, record_trace=record_trace)
    payload = {
        "summary": episode.summary(),
        "variant": variant,
        "seed": seed,
        "horizon": horizon,
        "scenario": params.describe(),
    }
    if record_trace:
        payload["trace"] = episode.trace
    return payload


def _sweep_payload(result) -> dict:
    return {"name": result.name, "columns": result.columns,
            "rows": result.rows, "notes": result.notes,
            "scenario": result.params.to_flat()}


def handle_figure(params: ScenarioParams, which: str, seeds=None,
                  horizon: float | None = None,
                  fading_modes=("dynamic",)) -> dict:
    if which == "fig3":
        return {"results": [_sweep_payload(experiments.fig3_sweep(params))]}
    if which == "fig4":
        return {"results": [_sweep_payload(experiments.fig4_sweep(params))]}
    if which == "fig5":
        return {"results": [_sweep_payload(experiments.fig5_sweep(params))]}
    if which == "fig6":
        out = experiments.fig6_comparison(params, seeds=seeds, horizon=horizon,
                                          fading_modes=tuple(fading_modes))
        return {
            "results": [_sweep_payload(out["proposed"]),
                        _sweep_payload(out["baseline"])],
            "ratio": out["ratio"],
            "proposed_longterm": out["proposed_longterm"],
            "baseline_longterm": out["baseline_longterm"],
            "longterm": out["longterm"],
        }
    raise ConfigError(f"unknown figure {which!r}; expected one of {FIGURES}")
