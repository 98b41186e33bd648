"""First-principles Monte Carlo of the ultra-dense network.

PPP base stations with dormant/active modes, Brownian users on a torus,
per-link correlated fading, the user-centric reverse-association protocol
(EE-comparison and MF-window variants plus a fixed baseline), pilot
response congestion, and empirical SINR / energy-efficiency measurement.

State is kept in flat numpy arrays for speed; ``BSRecord``/``UserRecord``
views are built on demand.  One episode is strictly single-threaded with
the step ordering move -> fade -> (if due) associate -> measure ->
account energy; independent episodes share nothing.

Per-link fading is instantiated lazily, only for users whose SINR is
actually measured, and a link entering visibility later is drawn from the
exact marginal of the fading SDE started from zero at episode start (the
same global time origin every link shares).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import analytics
from .errors import (DegenerateDeploymentError, NumericDomainError, ProtocolError)
from .params import ScenarioParams
from .specfun import c1
from .stochastic import brownian_step_std, sample_ppp

VARIANTS = ("full-comparison", "mf-window", "fixed-baseline")

NO_BS = -1


@dataclass
class BSRecord:
    """Inspection view of one base station."""

    bs_id: int
    position: np.ndarray
    mode: str                 # "dormant" or "active"
    tx_power: float
    served_user: int | None


@dataclass
class UserRecord:
    """Inspection view of one user."""

    user_id: int
    position: np.ndarray
    associated_bs: int
    last_ho_time: float
    link_fading: dict | None  # bs id -> fading vector, only for tracked users


@dataclass
class SINRSample:
    """One SINR measurement split into its power components."""

    signal: float
    interference: float
    noise: float
    sinr: float


@dataclass
class HODecision:
    """Outcome of one reverse-association round."""

    user_id: int
    time: float
    n_candidates: int
    n_responders: int
    n_survivors: int
    old_bs: int
    new_bs: int
    handed_over: bool
    pilot_radius: float
    new_distance: float | None = None


class _TrackedFading:
    """Fading field of one measured user: one link per BS, lazily visible."""

    def __init__(self, n_bs: int):
        self.g = np.zeros((n_bs, 2))
        self.seen = np.zeros(n_bs, dtype=bool)


class NetworkState:
    """Full network snapshot backed by flat arrays."""

    def __init__(self, bs_xy, user_xy, window_side, rng, clock=0.0):
        self.clock = float(clock)
        self.window = float(window_side)
        self.bs_xy = np.asarray(bs_xy, dtype=float)
        self.user_xy = np.asarray(user_xy, dtype=float)
        self.n_bs = self.bs_xy.shape[0]
        self.n_users = self.user_xy.shape[0]
        self.bs_active = np.zeros(self.n_bs, dtype=bool)
        self.bs_power = np.zeros(self.n_bs)
        self.bs_served = np.full(self.n_bs, NO_BS, dtype=int)
        self.user_bs = np.full(self.n_users, NO_BS, dtype=int)
        self.user_last_ho = np.zeros(self.n_users)
        self.user_next_ho = np.zeros(self.n_users)
        self.rng = rng
        self.tree = cKDTree(self.bs_xy, boxsize=window_side) if self.n_bs else None
        self.fading: dict[int, _TrackedFading] = {}
        # energy ledger: circuit and transmit joules accrued so far
        self.energy_circuit = 0.0
        self.energy_transmit = 0.0

    # -- views ------------------------------------------------------------
    def bs_record(self, bs_id: int) -> BSRecord:
        active = bool(self.bs_active[bs_id])
        served = int(self.bs_served[bs_id])
        return BSRecord(
            bs_id=bs_id,
            position=self.bs_xy[bs_id].copy(),
            mode="active" if active else "dormant",
            tx_power=float(self.bs_power[bs_id]),
            served_user=served if served != NO_BS else None,
        )

    def user_record(self, user_id: int) -> UserRecord:
        tracked = self.fading.get(user_id)
        links = None
        if tracked is not None:
            links = {int(b): tracked.g[b].copy() for b in np.flatnonzero(tracked.seen)}
        return UserRecord(
            user_id=user_id,
            position=self.user_xy[user_id].copy(),
            associated_bs=int(self.user_bs[user_id]),
            last_ho_time=float(self.user_last_ho[user_id]),
            link_fading=links,
        )

    def torus_delta(self, a, b):
        d = a - b
        d -= self.window * np.round(d / self.window)
        return d

    def torus_distance(self, a, b):
        d = self.torus_delta(a, b)
        return np.sqrt(np.sum(d * d, axis=-1))


def init_network(params: ScenarioParams, rng_seed: int,
                 initial_power: float | None = None) -> NetworkState:
    """Sample the deployment and associate every user to its nearest free BS.

    Users claim base stations greedily in user-id order; when two users
    share a nearest BS the later one takes the next nearest free BS, which
    keeps the one-user-per-active-BS invariant exact (contention is rare
    in the dense regime).  Associated BSs come up active at
    ``initial_power`` (default P_max); the rest stay dormant.
    """
    root = np.random.default_rng(rng_seed)
    deploy_rng, sim_rng = root.spawn(2)
    side = params.deploy.window_side
    bs_xy = sample_ppp(params.deploy.lambda_b, side, deploy_rng)
    if bs_xy.shape[0] == 0:
        raise DegenerateDeploymentError("sampled zero base stations")
    user_xy = sample_ppp(params.deploy.lambda_u, side, deploy_rng)
    if user_xy.shape[0] > bs_xy.shape[0]:
        raise DegenerateDeploymentError(
            f"more users ({user_xy.shape[0]}) than BSs ({bs_xy.shape[0]}); "
            "one-to-one service impossible")
    state = NetworkState(bs_xy, user_xy, side, sim_rng)
    power = params.power.P_max if initial_power is None else initial_power
    k_probe = min(16, state.n_bs)
    for u in range(state.n_users):
        claimed = _claim_nearest_free(state, u, k_probe)
        state.bs_active[claimed] = True
        state.bs_served[claimed] = u
        state.bs_power[claimed] = power
        state.user_bs[u] = claimed
    return state


def _claim_nearest_free(state: NetworkState, user_id: int, k_probe: int) -> int:
    pos = state.user_xy[user_id] % state.window
    k = k_probe
    while True:
        _, idx = state.tree.query(pos, k=k)
        idx = np.atleast_1d(idx)
        for j in idx:
            if state.bs_served[j] == NO_BS:
                return int(j)
        if k >= state.n_bs:
            raise DegenerateDeploymentError("no free BS available for association")
        k = min(2 * k, state.n_bs)


def _ensure_tracked(state: NetworkState, user_id: int, channel) -> _TrackedFading:
    """Instantiate (and refresh visibility of) the user's link fading."""
    tracked = state.fading.get(user_id)
    if tracked is None:
        tracked = _TrackedFading(state.n_bs)
        state.fading[user_id] = tracked
    dist = state.torus_distance(state.bs_xy, state.user_xy[user_id])
    visible = dist <= channel.R
    fresh = visible & ~tracked.seen
    if np.any(fresh):
        n_new = int(np.count_nonzero(fresh))
        t = state.clock
        mu = np.array([channel.mu_x, channel.mu_y])
        mean = mu * (1.0 - math.exp(-0.5 * t))
        std = channel.eta * math.sqrt(max(0.0, 1.0 - math.exp(-t)))
        tracked.g[fresh] = mean + std * state.rng.normal(size=(n_new, 2))
        tracked.seen |= fresh
    return tracked


def advance(state: NetworkState, dt: float, params: ScenarioParams) -> NetworkState:
    """One time step: Brownian moves (torus-wrapped) and fading evolution."""
    if dt <= 0:
        raise NumericDomainError("dt must be > 0")
    ch, mob = params.channel, params.mobility
    if state.n_users and mob.v > 0:
        state.user_xy += state.rng.normal(
            0.0, brownian_step_std(mob.v, dt), size=(state.n_users, 2))
        state.user_xy %= state.window
    mu = np.array([ch.mu_x, ch.mu_y])
    sq = math.sqrt(dt)
    for tracked in state.fading.values():
        g = tracked.g
        g += 0.5 * (mu - g) * dt
        if ch.eta > 0:
            g += ch.eta * sq * state.rng.normal(size=g.shape)
    state.clock += dt
    return state


def measure_sinr(state: NetworkState, user_id: int, channel) -> SINRSample:
    """Empirical SINR at one user under the sectorized-antenna model.

    Serving link: P * N * min(1, d^-alpha) * |g|^2.  Interferers are the
    other active BSs within the reception distance whose (sector-
    discounted) received power exceeds the noise floor; the sector
    discount theta_N/(2 pi) with theta_N = 2 pi / N cancels the antenna
    factor on interfering links.
    """
    b = int(state.user_bs[user_id])
    if b == NO_BS:
        raise ProtocolError(f"user {user_id} has no association")
    tracked = _ensure_tracked(state, user_id, channel)
    dist = state.torus_distance(state.bs_xy, state.user_xy[user_id])
    path = np.minimum(1.0, dist ** (-channel.alpha))
    gain = np.sum(tracked.g * tracked.g, axis=1)
    signal = float(state.bs_power[b] * channel.N * path[b] * gain[b])
    mask = state.bs_active & (dist <= channel.R) & tracked.seen
    mask[b] = False
    contrib = state.bs_power * path * gain
    interference = float(np.sum(contrib[mask & (contrib > channel.sigma2)]))
    noise = channel.sigma2
    return SINRSample(signal=signal, interference=interference, noise=noise,
                      sinr=signal / (interference + noise))


def pilot_congestion_round(n_responders: int, n_blocks: int, rng) -> np.ndarray:
    """Resource-block collision round: mask of responders that survive.

    Each responder picks one of ``n_blocks`` uniformly; a response
    survives iff nobody else picked the same block.
    """
    if n_responders <= 0:
        return np.zeros(0, dtype=bool)
    picks = rng.integers(0, n_blocks, size=n_responders)
    counts = np.bincount(picks, minlength=n_blocks)
    return counts[picks] == 1


class EpisodeControl:
    """Caches the closed-form control quantities an episode keeps reusing.

    The rate constant, optimal window and HO-side power vary smoothly with
    fading age and saturate, so they are cached on a 0.05-quantized,
    capped time grid; per-BS powers are recomputed exactly each step with
    a warm start.
    """

    _C1_QUANTUM = 0.05
    _C1_CAP = 16.0

    def __init__(self, params: ScenarioParams):
        self.params = params
        self._c1_cache: dict[int, float] = {}
        self._window_cache: dict[int, float] = {}
        self._p1_cache: dict[int, float] = {}

    def _key(self, t: float) -> int:
        return round(min(max(t, self._C1_QUANTUM), self._C1_CAP) / self._C1_QUANTUM)

    def c1(self, t: float) -> float:
        key = self._key(t)
        val = self._c1_cache.get(key)
        if val is None:
            val = c1(self.params.channel, key * self._C1_QUANTUM, self.params.quadrature)
            self._c1_cache[key] = val
        return val

    def p1_star(self, t: float) -> float:
        key = self._key(t)
        val = self._p1_cache.get(key)
        if val is None:
            p = self.params
            val = analytics.optimal_p1(p.channel, p.deploy, p.power,
                                       key * self._C1_QUANTUM, self.c1(t),
                                       convention=p.run.mf_convention)
            self._p1_cache[key] = val
        return val

    def p0_star(self, t: float, elapsed: float) -> float:
        p = self.params
        return analytics.optimal_p0(p.channel, p.deploy, p.power, p.mobility, t,
                                    elapsed, self.c1(t),
                                    convention=p.run.mf_convention)

    def p0_star_batch(self, t: float, elapsed: np.ndarray,
                      start: np.ndarray | None = None) -> np.ndarray:
        p = self.params
        return analytics.optimal_p0_batch(p.channel, p.deploy, p.power, p.mobility,
                                          t, elapsed, self.c1(t),
                                          convention=p.run.mf_convention,
                                          start=start)

    def window_star(self, t: float) -> float:
        key = self._key(t)
        val = self._window_cache.get(key)
        if val is None:
            p = self.params
            val = analytics.optimal_ho_window(p.channel, p.deploy, p.power,
                                              p.mobility, p.policy,
                                              key * self._C1_QUANTUM, self.c1(t),
                                              convention=p.run.mf_convention)
            self._window_cache[key] = val
        return val

    def ee_comparison(self, t: float, elapsed: float) -> bool:
        """Closed-form gate of the EE-comparison variant: EE1* > EE0*."""
        p = self.params
        c1v = self.c1(t)
        # strong-fading regimes contract slowly; give the gate a high cap
        fp1 = analytics.power_fixed_point(p.channel, p.deploy, p.power, t,
                                          "with-ho", c1v, max_iter=500,
                                          convention=p.run.mf_convention)
        fp0 = analytics.power_fixed_point(p.channel, p.deploy, p.power, t,
                                          "without-ho", c1v, mob=p.mobility,
                                          t_hat_elapsed=elapsed, max_iter=500,
                                          convention=p.run.mf_convention)
        e1 = analytics.ee1(p.channel, p.deploy, p.power, fp1.p_star, t, c1v, fp1.i_hat)
        e0 = analytics.ee0(p.channel, p.power, p.mobility, fp0.p_star, elapsed,
                           c1v, fp0.i_hat)
        return e1 > e0


def reverse_association_round(state: NetworkState, user_id: int,
                              params: ScenarioParams, variant: str,
                              control: EpisodeControl | None = None,
                              new_power: float | None = None,
                              window: float | None = None,
                              neighborhood: list | None = None) -> HODecision:
    """One pilot broadcast / response / association round for one user.

    Candidates are the dormant BSs inside the pilot area.  In
    "full-comparison" they respond only if the closed-form EE comparison
    favors handover; in "mf-window" and "fixed-baseline" every candidate
    responds.  Responders then contend for pilot blocks; the user joins
    the nearest surviving responder, or keeps its association when none
    survives.  ``new_power`` overrides the power the new BS comes up with
    (the fixed baseline passes its constant power).
    """
    if variant not in VARIANTS:
        raise ProtocolError(f"unknown variant {variant!r}")
    control = control or EpisodeControl(params)
    ch = params.channel
    t = state.clock
    area = analytics.pilot_area(ch, t)
    radius = math.sqrt(area / math.pi)
    if neighborhood is None:
        pos = state.user_xy[user_id] % state.window
        neighborhood = state.tree.query_ball_point(pos, radius)
    candidates = [int(j) for j in neighborhood if not state.bs_active[j]]
    old_bs = int(state.user_bs[user_id])
    decision = HODecision(user_id=user_id, time=t, n_candidates=len(candidates),
                          n_responders=0, n_survivors=0, old_bs=old_bs,
                          new_bs=old_bs, handed_over=False, pilot_radius=radius)
    if not candidates:
        return decision
    if variant == "full-comparison":
        elapsed = max(t - state.user_last_ho[user_id], params.mobility.dt)
        respond = control.ee_comparison(t, elapsed)
        responders = candidates if respond else []
    else:
        responders = candidates
    decision.n_responders = len(responders)
    if not responders:
        return decision
    survived = pilot_congestion_round(len(responders), ch.N_p, state.rng)
    survivors = [j for j, ok in zip(responders, survived) if ok]
    decision.n_survivors = len(survivors)
    if not survivors:
        return decision
    dist = state.torus_distance(state.bs_xy[survivors], state.user_xy[user_id])
    order = np.argsort(dist, kind="stable")  # ties broken by lowest BS id via stable sort
    new_bs = int(survivors[int(order[0])])
    if new_power is None:
        new_power = control.p1_star(t) if variant != "fixed-baseline" else params.power.P_max
    if old_bs != NO_BS:
        state.bs_active[old_bs] = False
        state.bs_power[old_bs] = 0.0
        state.bs_served[old_bs] = NO_BS
    state.bs_active[new_bs] = True
    state.bs_served[new_bs] = user_id
    state.bs_power[new_bs] = new_power
    state.user_bs[user_id] = new_bs
    state.user_last_ho[user_id] = t
    decision.new_bs = new_bs
    decision.handed_over = True
    decision.new_distance = float(dist[int(order[0])])
    if window is not None:
        state.user_next_ho[user_id] = t + window
    return decision


@dataclass
class EpisodeResult:
    """Per-step series at the tagged BS plus episode-level aggregates."""

    times: np.ndarray
    ee_a: np.ndarray
    sinr: np.ndarray
    serving_power: np.ndarray
    long_term_ee: float
    n_handovers: int
    n_attempts: int
    n_blocked: int
    energy_circuit: float
    energy_transmit: float
    tagged_user: int
    trace: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "long_term_ee": self.long_term_ee,
            "n_handovers": self.n_handovers,
            "n_attempts": self.n_attempts,
            "n_blocked": self.n_blocked,
            "energy_circuit": self.energy_circuit,
            "energy_transmit": self.energy_transmit,
            "steps": int(self.times.size),
            "tagged_user": self.tagged_user,
        }


def run_episode(params: ScenarioParams, variant: str, horizon: float, rng_seed: int,
                fixed_tx_power: float = 0.25, fading_mode: str = "dynamic",
                record_trace: bool = False) -> EpisodeResult:
    """Simulate one episode and record the tagged active BS's EE.

    The tagged user is the one nearest the window center; every step its
    serving BS's instantaneous EE is measured as log(1 + SINR) (the
    per-unit-bandwidth spectral efficiency) over circuit-plus-transmit
    power, and the long-term EE is the time average of that series.

    ``variant``: "mf-window" re-associates at the optimal window with
    optimal powers, "full-comparison" re-associates at the fixed policy
    interval gated by the closed-form EE comparison, "fixed-baseline"
    re-associates at the fixed interval with constant ``fixed_tx_power``.
    ``fading_mode``: "dynamic" starts all links at zero fading and lets
    the state build up; "stationary" starts links at the long-run law and
    evaluates the control formulas in the saturated regime.
    """
    if variant not in VARIANTS:
        raise ProtocolError(f"unknown variant {variant!r}")
    if fading_mode not in ("dynamic", "stationary"):
        raise ProtocolError(f"unknown fading mode {fading_mode!r}")
    if horizon < 0:
        raise NumericDomainError("horizon must be >= 0")
    stationary = fading_mode == "stationary"
    control = EpisodeControl(params)
    ch, mob, pol, pw = params.channel, params.mobility, params.policy, params.power
    dt = mob.dt
    n_steps = int(round(horizon / dt))

    state = init_network(params, rng_seed)
    if stationary:
        # links start at the saturated fading law; control sees t -> infinity
        state.clock = EpisodeControl._C1_CAP
    control_t0 = state.clock

    if variant == "fixed-baseline":
        state.bs_power[state.bs_active] = fixed_tx_power
        state.user_next_ho[:] = state.clock + pol.t_hat
    elif variant == "full-comparison":
        state.bs_power[state.bs_active] = control.p1_star(max(control_t0, dt))
        state.user_next_ho[:] = state.clock + pol.t_hat
    else:
        w0 = control.window_star(max(control_t0, dt))
        state.bs_power[state.bs_active] = control.p1_star(max(control_t0, dt))
        state.user_next_ho[:] = state.clock + w0

    tagged = NO_BS
    if state.n_users:
        center = np.full(2, state.window / 2.0)
        tagged = int(np.argmin(state.torus_distance(state.user_xy, center)))
        _ensure_tracked(state, tagged, ch)

    times = np.empty(n_steps)
    ee_series = np.empty(n_steps)
    sinr_series = np.empty(n_steps)
    power_series = np.empty(n_steps)
    n_ho = n_attempts = n_blocked = 0
    trace = []

    for k in range(n_steps):
        advance(state, dt, params)
        t = state.clock
        # energy accounting for this step
        state.energy_circuit += pw.P_c * dt * state.n_bs
        state.energy_transmit += float(np.sum(state.bs_power[state.bs_active])) * dt

        if variant != "fixed-baseline":
            active = np.flatnonzero(state.bs_active)
            if active.size:
                elapsed = np.maximum(t - state.user_last_ho[state.bs_served[active]], dt)
                state.bs_power[active] = control.p0_star_batch(
                    t, elapsed, start=state.bs_power[active])

        due = np.flatnonzero(state.user_next_ho <= t) if state.n_users else []
        if len(due):
            if variant == "mf-window":
                window = control.window_star(t)
            else:
                window = pol.t_hat
            if variant == "fixed-baseline":
                new_power = fixed_tx_power
            else:
                new_power = control.p1_star(t)  # shared by every HO this step
            area = analytics.pilot_area(ch, t)
            radius = math.sqrt(area / math.pi)
            neighborhoods = state.tree.query_ball_point(
                state.user_xy[due] % state.window, radius)
            for u, hood in zip(due, neighborhoods):
                n_attempts += 1
                decision = reverse_association_round(
                    state, int(u), params, variant, control,
                    new_power=new_power, window=window, neighborhood=hood)
                if decision.handed_over:
                    n_ho += 1
                else:
                    n_blocked += 1
                    # retry after the retransmission cost instead of a full window
                    state.user_next_ho[u] = t + ch.epsilon * window
                if record_trace:
                    trace.append({
                        "t": round(t, 6), "user": int(u), "bs": decision.new_bs,
                        "event": "ho" if decision.handed_over else "blocked",
                        "candidates": decision.n_candidates,
                        "survivors": decision.n_survivors,
                    })

        times[k] = t
        if tagged != NO_BS:
            sample = measure_sinr(state, tagged, ch)
            p_serv = float(state.bs_power[state.user_bs[tagged]])
            ee_inst = math.log1p(sample.sinr) / (pw.P_c + p_serv)
            ee_series[k] = ee_inst
            sinr_series[k] = sample.sinr
            power_series[k] = p_serv
            if record_trace:
                trace.append({
                    "t": round(t, 6), "user": tagged,
                    "bs": int(state.user_bs[tagged]), "event": "measure",
                    "sinr": sample.sinr, "ee_a": ee_inst,
                })
        else:
            ee_series[k] = 0.0
            sinr_series[k] = 0.0
            power_series[k] = 0.0

    return EpisodeResult(
        times=times,
        ee_a=ee_series,
        sinr=sinr_series,
        serving_power=power_series,
        long_term_ee=float(ee_series.mean()) if n_steps else 0.0,
        n_handovers=n_ho,
        n_attempts=n_attempts,
        n_blocked=n_blocked,
        energy_circuit=state.energy_circuit,
        energy_transmit=state.energy_transmit,
        tagged_user=tagged,
        trace=trace,
    )


def write_trace(trace: list, path: str) -> None:
    """Export an episode trace as line-delimited JSON records."""
    with open(path, "w", encoding="utf-8") as fh:
        for record in trace:
            fh.write(json.dumps(record) + "\n")
