"""Closed-form energy-efficiency analytics.

Implements the mean-field (MF) interference, pilot broadcast area, the
energy efficiencies with and without handover, the Lambert-W optimal
transmit powers with their MF fixed point, and the optimal / minimum
handover time windows.

Conventions fixed here (each isolated behind an argument so sensitivity
runs can flip it):

* The rate constant ``c1`` is evaluated at the same time ``t`` passed to
  the EE functions.
* The MF interference prefactor is read as (lambda_u * pi * R)^2 as
  printed ("printed"); "density-linear" gives lambda_u * (pi R)^2.
* The optimal-window formula keeps the plain lambda_b^{-alpha/2} noise
  term (no congestion factor), as printed, while the EE-with-HO noise
  term keeps its congestion factor; the mismatch is surfaced by
  :func:`check_convergence_conditions` rather than reconciled.
* The exponential factor in the optimal window uses the sign that makes
  the window satisfy its defining equation EE1* = EE0* (verified
  numerically by the root-bracketing test); the printed sign does not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, NumericDomainError
from .params import (ChannelParams, DeploymentParams, HOPolicy, MobilityParams,
                     PowerParams, QuadratureSpec, ScenarioParams)
from .specfun import c1, lambert_w_of_exp


def fading_stat(channel: ChannelParams, t: float) -> float:
    """Fading build-up factor F(t) = 2 eta^2 (1-e^-t)^2 + |mu|^2 (1-e^-t/2)^2."""
    if t < 0:
        raise NumericDomainError("fading_stat requires t >= 0")
    return (2.0 * channel.eta ** 2 * (1.0 - math.exp(-t)) ** 2
            + channel.mu_norm ** 2 * (1.0 - math.exp(-t / 2.0)) ** 2)


def pilot_area(channel: ChannelParams, t: float) -> float:
    """Pilot broadcast area A(theta, t) = pi (F(t)/theta)^{2/alpha}."""
    if channel.theta <= 0:
        raise NumericDomainError("pilot_area requires theta > 0")
    return math.pi * (fading_stat(channel, t) / channel.theta) ** (2.0 / channel.alpha)


def mf_interference(channel: ChannelParams, deploy: DeploymentParams, p_hat: float,
                    t: float, convention: str = "printed") -> float:
    """Mean-field interference at MF transmit power ``p_hat`` and time ``t``."""
    return _mf_coefficient(channel, deploy, convention) * p_hat * fading_stat(channel, t)


def _mf_coefficient(channel: ChannelParams, deploy: DeploymentParams,
                    convention: str = "printed") -> float:
    if channel.alpha <= 2.0:
        raise NumericDomainError("MF interference diverges for alpha <= 2")
    if convention == "printed":
        front = (deploy.lambda_u * math.pi * channel.R) ** 2
    elif convention == "density-linear":
        front = deploy.lambda_u * (math.pi * channel.R) ** 2
    else:
        raise NumericDomainError(f"unknown MF convention {convention!r}")
    tail = 1.0 + (1.0 - channel.R ** (2.0 - channel.alpha)) / (channel.alpha - 2.0)
    return front / (math.sqrt(channel.N) * deploy.lambda_b ** (channel.alpha / 2.0)) * tail


def congested_bs_density(channel: ChannelParams, deploy: DeploymentParams,
                         t: float) -> float:
    """BS density discounted by the pilot-response collision probability."""
    area = pilot_area(channel, t)
    return deploy.lambda_b * math.exp(-deploy.lambda_b * area / channel.N_p)


def ho_noise_term(channel: ChannelParams, deploy: DeploymentParams, t: float,
                  congested: bool = True) -> float:
    """Noise floor seen after a handover: sigma^2 N^-1 [lambda_eff]^{-alpha/2}."""
    lam = congested_bs_density(channel, deploy, t) if congested else deploy.lambda_b
    return channel.sigma2 / channel.N * lam ** (-channel.alpha / 2.0)


def ee1(channel: ChannelParams, deploy: DeploymentParams, power: PowerParams,
        p1: float, t: float, c1_val: float, i1_hat: float, *,
        congested_noise: bool = True, with_prefactor: bool = True) -> float:
    """Energy efficiency when the handover is accepted, at own power ``p1``.

    ``i1_hat`` is the MF interference of the other active BSs (at the MF
    fixed-point power); it does not vary with the candidate ``p1``.
    ``congested_noise``/``with_prefactor`` select the full expression; the
    optimal-window root check uses the reduced form (False, False).
    """
    if not 0.0 < p1 <= power.P_max:
        raise NumericDomainError("p1 must lie in (0, P_max]")
    denom = ho_noise_term(channel, deploy, t, congested=congested_noise) + i1_hat
    if denom <= 0.0:
        raise NumericDomainError("nonpositive rate denominator")
    rate = c1_val + math.log(p1 / denom)
    if with_prefactor:
        pre = max(1.0 - channel.epsilon * math.exp(-deploy.lambda_b * pilot_area(channel, t)), 0.0)
    else:
        pre = 1.0
    return pre / (power.P_c + p1) * rate


def ee0(channel: ChannelParams, power: PowerParams, mob: MobilityParams,
        p0: float, t_hat_elapsed: float, c1_val: float, i0_hat: float) -> float:
    """Energy efficiency while keeping the current association.

    ``t_hat_elapsed`` is the time since the last handover, which sets the
    association distance scale (2 v sqrt(t_hat))^alpha.
    """
    if not 0.0 < p0 <= power.P_max:
        raise NumericDomainError("p0 must lie in (0, P_max]")
    if t_hat_elapsed <= 0.0:
        raise NumericDomainError("t_hat_elapsed must be > 0")
    denom = ((2.0 * mob.v * math.sqrt(t_hat_elapsed)) ** channel.alpha
             * (channel.sigma2 / channel.N + i0_hat))
    if denom <= 0.0:
        raise NumericDomainError("nonpositive rate denominator")
    return (c1_val + math.log(p0 / denom)) / power.P_c


def ee_active(ee0_val: float, p0: float, power: PowerParams) -> float:
    """EE at a typical active BS: ee0 discounted by its transmit power."""
    if p0 < 0:
        raise NumericDomainError("p0 must be >= 0")
    return ee0_val / (1.0 + p0 / power.P_c)


@dataclass
class FixedPointResult:
    """Outcome of the MF power fixed point."""

    p_star: float
    iterations: int
    i_hat: float


def _p1_map(channel, deploy, power, t, c1_val, coeff, p):
    denom = ho_noise_term(channel, deploy, t, congested=True) + coeff * p
    z = math.log(power.P_c) + c1_val - 1.0 - math.log(denom)
    w = lambert_w_of_exp(z)
    return power.P_max if w <= 0.0 else min(power.P_c / w, power.P_max)


def _p0_map(channel, power, mob, t_hat_elapsed, c1_val, coeff, p):
    denom = ((2.0 * mob.v * math.sqrt(t_hat_elapsed)) ** channel.alpha
             * (channel.sigma2 / channel.N + coeff * p))
    z = math.log(power.P_c) + c1_val - 1.0 - math.log(denom)
    w = lambert_w_of_exp(z)
    return power.P_max if w <= 0.0 else min(power.P_c / w, power.P_max)


def power_fixed_point(channel: ChannelParams, deploy: DeploymentParams,
                      power: PowerParams, t: float, which: str, c1_val: float, *,
                      mob: MobilityParams | None = None,
                      t_hat_elapsed: float | None = None,
                      tol: float = 1e-9, max_iter: int = 50,
                      start: float | None = None,
                      convention: str = "printed") -> FixedPointResult:
    """Iterate the optimal-power map until the MF power is self-consistent.

    ``which`` is "with-ho" (handover-accepting BS) or "without-ho"
    (serving BS; requires ``mob`` and ``t_hat_elapsed``).  Returns the
    converged power, the count of productive updates, and the MF
    interference at the fixed point.
    """
    coeff = _mf_coefficient(channel, deploy, convention) * fading_stat(channel, t)
    if which == "with-ho":
        step = lambda p: _p1_map(channel, deploy, power, t, c1_val, coeff, p)
    elif which == "without-ho":
        if mob is None or t_hat_elapsed is None:
            raise NumericDomainError("without-ho fixed point needs mob and t_hat_elapsed")
        step = lambda p: _p0_map(channel, power, mob, t_hat_elapsed, c1_val, coeff, p)
    else:
        raise NumericDomainError(f"unknown fixed-point variant {which!r}")
    p = power.P_max if start is None else start
    if not 0.0 < p <= power.P_max:
        raise NumericDomainError("fixed-point start must lie in (0, P_max]")
    productive = 0
    for _ in range(max_iter):
        p_new = step(p)
        if abs(p_new - p) < tol:
            return FixedPointResult(p_star=p_new, iterations=productive,
                                    i_hat=coeff * p_new)
        p = p_new
        productive += 1
    raise ConvergenceError(
        f"power fixed point ({which}) did not converge in {max_iter} iterations",
        last_iterate=p, iterations=max_iter)


def optimal_p1(channel, deploy, power, t, c1_val, **kwargs) -> float:
    """EE1-optimal transmit power at the MF interference fixed point."""
    return power_fixed_point(channel, deploy, power, t, "with-ho", c1_val, **kwargs).p_star


def optimal_p0(channel, deploy, power, mob, t, t_hat_elapsed, c1_val, **kwargs) -> float:
    """Active-EE-optimal transmit power at the MF interference fixed point."""
    return power_fixed_point(channel, deploy, power, t, "without-ho", c1_val,
                             mob=mob, t_hat_elapsed=t_hat_elapsed, **kwargs).p_star


def optimal_p0_batch(channel: ChannelParams, deploy: DeploymentParams,
                     power: PowerParams, mob: MobilityParams, t: float,
                     elapsed: np.ndarray, c1_val: float, tol: float = 1e-9,
                     max_iter: int = 200, convention: str = "printed",
                     start: np.ndarray | None = None) -> np.ndarray:
    """Vectorized per-BS optimal powers for an array of post-HO elapsed times.

    ``start`` warm-starts the fixed point (e.g. the powers of the previous
    step); the map is a monotone contraction, so any start in (0, P_max]
    reaches the same point.
    """
    elapsed = np.asarray(elapsed, dtype=float)
    if elapsed.size == 0:
        return np.empty(0)
    if np.any(elapsed <= 0.0):
        raise NumericDomainError("elapsed times must be > 0")
    coeff = _mf_coefficient(channel, deploy, convention) * fading_stat(channel, t)
    n0 = channel.sigma2 / channel.N
    fac = (2.0 * mob.v * np.sqrt(elapsed)) ** channel.alpha
    log_pc = math.log(power.P_c)
    if start is None:
        p = np.full(elapsed.shape, power.P_max)
    else:
        p = np.clip(np.asarray(start, dtype=float), 1e-9, power.P_max)
    # Newton on h(p) = p W(P_c e^{c1-1}/q(p)) - P_c with q = fac (n0 + co p):
    # same root as the fixed-point map, but quadratic convergence even in
    # strong-fading regimes where the plain iteration contracts slowly.
    for _ in range(max_iter):
        z = log_pc + c1_val - 1.0 - np.log(fac * (n0 + coeff * p))
        w = lambert_w_of_exp(z)
        at_cap = w <= 1e-300  # optimal power beyond the cap
        w_safe = np.maximum(w, 1e-300)
        h = p * w_safe - power.P_c
        slope = w_safe * (1.0 - p * coeff / ((n0 + coeff * p) * (1.0 + w_safe)))
        p_new = np.clip(p - h / np.maximum(slope, 1e-300), 1e-12, power.P_max)
        p_new = np.where(at_cap, power.P_max, p_new)
        if np.max(np.abs(p_new - p)) < tol:
            return p_new
        p = p_new
    raise ConvergenceError("batched power fixed point did not converge",
                           last_iterate=p, iterations=max_iter)


def min_ho_window(deploy: DeploymentParams, mob: MobilityParams,
                  policy: HOPolicy) -> float:
    """Smallest window whose movement exceeds the nearest-BS distance w.p. beta."""
    if not 0.0 < policy.beta < 1.0:
        raise NumericDomainError("beta must lie in (0, 1)")
    if mob.v <= 0:
        raise NumericDomainError("min_ho_window requires v > 0")
    return 1.0 / (4.0 * mob.v ** 2 * deploy.lambda_b * (1.0 / policy.beta - 1.0))


def optimal_ho_window(channel: ChannelParams, deploy: DeploymentParams,
                      power: PowerParams, mob: MobilityParams, policy: HOPolicy,
                      t: float, c1_val: float, tol: float = 1e-12,
                      max_iter: int = 200, convention: str = "printed") -> float:
    """EE-optimal handover window, clamped below by the minimum window.

    The serving-side optimal power depends on the window itself, so the
    window is solved self-consistently: iterate
    t_hat <- max(lower bound, bracket(P0*(t_hat))^{2/alpha} / (4 v^2)).
    At an interior solution the window satisfies EE1* = EE0* exactly in
    the reduced (window-form) expressions.
    """
    lower = min_ho_window(deploy, mob, policy)
    fp1 = power_fixed_point(channel, deploy, power, t, "with-ho", c1_val,
                            max_iter=500, convention=convention)
    p1 = fp1.p_star
    d1 = (channel.sigma2 / channel.N * deploy.lambda_b ** (-channel.alpha / 2.0)
          + fp1.i_hat)
    share = 1.0 / (1.0 + power.P_c / p1)
    t_hat = lower
    for _ in range(max_iter):
        fp0 = power_fixed_point(channel, deploy, power, t, "without-ho", c1_val,
                                mob=mob, t_hat_elapsed=t_hat, max_iter=500,
                                convention=convention)
        e0 = channel.sigma2 / channel.N + fp0.i_hat
        bracket = (fp0.p_star / e0) * (p1 / d1) ** (share - 1.0) * math.exp(c1_val * share)
        t_new = max(lower, bracket ** (2.0 / channel.alpha) / (4.0 * mob.v ** 2))
        if abs(t_new - t_hat) < tol * max(1.0, t_hat):
            return t_new
        t_hat = t_new
    raise ConvergenceError("optimal_ho_window did not converge",
                           last_iterate=t_hat, iterations=max_iter)


@dataclass
class EEReport:
    """Optimal operating point of both EE routes at one evaluation time."""

    ee0: float
    ee1: float
    ee_a: float
    p0_star: float
    p1_star: float
    i0_hat: float
    i1_hat: float
    t_hat_star: float
    t_hat_min: float
    c1: float
    t_eval: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def ee_report(params: ScenarioParams, t: float | None = None) -> EEReport:
    """Full closed-form operating point at time ``t`` (default run.t_eval).

    The without-HO quantities are evaluated at elapsed time equal to the
    optimal window, i.e. at the moment the next handover decision is due.
    """
    ch, dp, pw, mb, pol = (params.channel, params.deploy, params.power,
                           params.mobility, params.policy)
    conv = params.run.mf_convention
    t = params.run.t_eval if t is None else t
    c1_val = c1(ch, t, params.quadrature)
    t_min = min_ho_window(dp, mb, pol)
    t_star = optimal_ho_window(ch, dp, pw, mb, pol, t, c1_val, convention=conv)
    fp1 = power_fixed_point(ch, dp, pw, t, "with-ho", c1_val, max_iter=500,
                            convention=conv)
    fp0 = power_fixed_point(ch, dp, pw, t, "without-ho", c1_val, mob=mb,
                            t_hat_elapsed=t_star, max_iter=500, convention=conv)
    ee1_val = ee1(ch, dp, pw, fp1.p_star, t, c1_val, fp1.i_hat)
    ee0_val = ee0(ch, pw, mb, fp0.p_star, t_star, c1_val, fp0.i_hat)
    return EEReport(
        ee0=ee0_val,
        ee1=ee1_val,
        ee_a=ee_active(ee0_val, fp0.p_star, pw),
        p0_star=fp0.p_star,
        p1_star=fp1.p_star,
        i0_hat=fp0.i_hat,
        i1_hat=fp1.i_hat,
        t_hat_star=t_star,
        t_hat_min=t_min,
        c1=c1_val,
        t_eval=t,
    )


@dataclass
class ConvergenceReport:
    """Finite surrogates of the MF validity conditions, with dubious flags."""

    eta: float
    mu_norm: float
    a1_ok: bool
    a2: float
    a3: float
    a4: float
    a5: float
    threshold: float
    flags: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "eta": self.eta, "mu_norm": self.mu_norm, "a1_ok": self.a1_ok,
            "a2": self.a2, "a3": self.a3, "a4": self.a4, "a5": self.a5,
            "threshold": self.threshold, "flags": dict(self.flags),
            "notes": list(self.notes),
        }


def check_convergence_conditions(channel: ChannelParams, deploy: DeploymentParams,
                                 mob: MobilityParams, policy: HOPolicy,
                                 threshold: float = 100.0) -> ConvergenceReport:
    """Evaluate the finite surrogates of the MF validity conditions.

    The asymptotic conditions demand these ratios diverge; regimes where a
    surrogate falls below ``threshold`` are flagged as dubious for the
    closed forms.
    """
    n = channel.N
    lam_b, lam_u = deploy.lambda_b, deploy.lambda_u
    r = channel.R
    t_hat = policy.t_hat
    v = mob.v
    a2 = n * lam_b ** channel.alpha / lam_u ** 4 if lam_u > 0 else math.inf
    a3 = n * lam_b ** channel.alpha / (lam_u * r) ** 4 if lam_u > 0 else math.inf
    mov = t_hat * v * v * lam_u
    a4 = n / mov ** 4 if mov > 0 else math.inf
    a5 = n / (mov * r) ** 4 if mov > 0 else math.inf
    flags = {name: val < threshold for name, val in
             (("a2", a2), ("a3", a3), ("a4", a4), ("a5", a5))}
    notes = []
    if any(flags.values()):
        dubious = ", ".join(sorted(k for k, bad in flags.items() if bad))
        notes.append(f"MF surrogates below threshold {threshold:g}: {dubious}")
    area = pilot_area(channel, t_hat)
    congestion_ratio = math.exp(channel.alpha * deploy.lambda_b * area
                                / (2.0 * channel.N_p))
    notes.append(
        "noise-term convention: the EE-with-HO expression keeps the pilot "
        f"congestion factor while the optimal-window formula does not; at "
        f"t_hat={t_hat:g} the two noise terms differ by x{congestion_ratio:.4g}")
    return ConvergenceReport(
        eta=channel.eta, mu_norm=channel.mu_norm,
        a1_ok=math.isfinite(channel.eta) and math.isfinite(channel.mu_norm),
        a2=a2, a3=a3, a4=a4, a5=a5, threshold=threshold, flags=flags, notes=notes,
    )
