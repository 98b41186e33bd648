"""Samplers and evolution laws for all randomness in the model.

Covers Poisson point process deployment, Brownian-motion user mobility,
Gauss-Markov (Ornstein-Uhlenbeck) link fading, and the complete-spatial-
randomness check used to confirm that displaced user clouds stay
homogeneous.

Calibration note: the movement-distance law Pr(U(t) > u) = exp(-pi u^2 /
(4 t v^2)) requires each coordinate displacement over time t to be
N(0, 2 v^2 t / pi); the integrator uses that per-step variance directly,
which is exact for Brownian increments at any step size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import NumericDomainError
from .params import ChannelParams, MobilityParams


def sample_ppp(density: float, window_side: float, rng) -> np.ndarray:
    """Homogeneous PPP on a square window; returns an (n, 2) array."""
    if density < 0:
        raise NumericDomainError("PPP density must be >= 0")
    if window_side <= 0:
        raise NumericDomainError("window_side must be > 0")
    n = rng.poisson(density * window_side * window_side)
    return rng.uniform(0.0, window_side, size=(n, 2))


def brownian_step_std(v: float, dt: float) -> float:
    """Per-coordinate displacement standard deviation over one step."""
    return math.sqrt(2.0 * v * v * dt / math.pi)


def step_brownian(position: np.ndarray, mob: MobilityParams, rng) -> np.ndarray:
    """Advance positions by one Brownian increment (no wrapping here).

    ``position`` may be a single point (2,) or a stack (n, 2).
    """
    if mob.dt <= 0:
        raise NumericDomainError("dt must be > 0")
    position = np.asarray(position, dtype=float)
    if mob.v == 0.0:
        return position.copy()
    return position + rng.normal(0.0, brownian_step_std(mob.v, mob.dt), size=position.shape)


def movement_ccdf(u, t: float, v: float):
    """Pr(movement distance over time t exceeds u)."""
    if t <= 0 or v <= 0:
        raise NumericDomainError("movement_ccdf requires t > 0 and v > 0")
    u = np.asarray(u, dtype=float)
    out = np.exp(-math.pi * u * u / (4.0 * t * v * v))
    return float(out) if out.ndim == 0 else out


def equivalent_bs_density(t: float, v: float) -> float:
    """BS density whose nearest-neighbor distance law matches movement distance."""
    if t <= 0 or v <= 0:
        raise NumericDomainError("equivalent_bs_density requires t > 0 and v > 0")
    return 1.0 / (4.0 * t * v * v)


@dataclass
class FadingState:
    """Per-link fading vector and the time it was last advanced."""

    g: np.ndarray
    t_last: float = 0.0

    def power_gain(self) -> float:
        return float(np.sum(self.g * self.g))


def _mu_vector(channel: ChannelParams) -> np.ndarray:
    return np.array([channel.mu_x, channel.mu_y])


def step_fading(state: FadingState, channel: ChannelParams, dt: float, rng) -> FadingState:
    """One Euler-Maruyama step of dg = (mu - g)/2 dt + eta dW per component."""
    if dt <= 0:
        raise NumericDomainError("dt must be > 0")
    g = np.asarray(state.g, dtype=float)
    mu = _mu_vector(channel)
    noise = rng.normal(0.0, 1.0, size=g.shape) if channel.eta > 0 else 0.0
    g_new = g + 0.5 * (mu - g) * dt + channel.eta * math.sqrt(dt) * noise
    return FadingState(g=g_new, t_last=state.t_last + dt)


def fading_transition_exact(g: np.ndarray, channel: ChannelParams, elapsed: float,
                            rng) -> np.ndarray:
    """Exact Gaussian transition of the fading SDE over ``elapsed`` time.

    Serves as the oracle for the Euler-Maruyama integrator: the process is
    linear, so g(t+s) | g(t) is N(mu + (g - mu) e^{-s/2}, eta^2 (1 - e^{-s})).
    """
    if elapsed < 0:
        raise NumericDomainError("elapsed must be >= 0")
    g = np.asarray(g, dtype=float)
    mu = _mu_vector(channel)
    decay = math.exp(-0.5 * elapsed)
    mean = mu + (g - mu) * decay
    std = channel.eta * math.sqrt(max(0.0, 1.0 - math.exp(-elapsed)))
    if std == 0.0:
        return mean
    return mean + rng.normal(0.0, std, size=g.shape)


def fading_marginal(channel: ChannelParams, t: float, rng, size=None) -> np.ndarray:
    """Marginal law of fading started from zero at time 0, sampled at time t."""
    if t < 0:
        raise NumericDomainError("t must be >= 0")
    mu = _mu_vector(channel)
    mean = mu * (1.0 - math.exp(-0.5 * t))
    std = channel.eta * math.sqrt(max(0.0, 1.0 - math.exp(-t)))
    shape = (2,) if size is None else (size, 2)
    return mean + std * rng.normal(0.0, 1.0, size=shape)


@dataclass
class HomogeneityResult:
    """Quadrat chi-square test outcome for complete spatial randomness."""

    statistic: float
    dof: int
    p_value: float
    passed: bool
    n_points: int


def csr_quadrat_statistic(points: np.ndarray, window_side: float,
                          quadrats: int = 5) -> tuple[float, int]:
    """Chi-square statistic of quadrat counts against a uniform intensity."""
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        raise NumericDomainError("CSR statistic undefined for an empty point set")
    edges = np.linspace(0.0, window_side, quadrats + 1)
    counts, _, _ = np.histogram2d(points[:, 0], points[:, 1], bins=[edges, edges])
    counts = counts.ravel()
    expected = points.shape[0] / counts.size
    stat = float(np.sum((counts - expected) ** 2 / expected))
    return stat, counts.size - 1


def homogeneity_check(points_t0: np.ndarray, points_t: np.ndarray, window_side: float,
                      quadrats: int = 5, significance: float = 0.01) -> HomogeneityResult:
    """CSR test on a displaced point set.

    ``points_t0`` is the pre-displacement configuration of the same
    experiment (its size anchors the expected intensity); the statistic is
    computed on ``points_t``.  Under torus-wrapped independent motion the
    displaced set stays homogeneous, so the test passes at the requested
    significance.
    """
    points_t0 = np.asarray(points_t0, dtype=float)
    points_t = np.asarray(points_t, dtype=float)
    if points_t0.size == 0 or points_t.size == 0:
        raise NumericDomainError("CSR statistic undefined for an empty point set")
    stat, dof = csr_quadrat_statistic(points_t, window_side, quadrats)
    p_value = float(stats.chi2.sf(stat, dof))
    return HomogeneityResult(
        statistic=stat,
        dof=dof,
        p_value=p_value,
        passed=p_value > significance,
        n_points=points_t.shape[0],
    )
