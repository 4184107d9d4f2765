"""Synthetic MDPs with a causal core and labelled exogenous distractors.

An environment's observation vector concatenates:

  * a causal core (point-mass on the plane, a lagged chain, or the
    confounded-mimic construction),
  * optional partially controllable dimensions (convex blend of an
    action-driven leaky-tanh signal and an exogenous OU process),
  * distractor dimensions from four families: autonomous OU, mimicking OU
    (calibrated to the core's scale), reward-correlated drift, and weakly
    coupled oscillators.

Distractor paths are generated at reset time, before any action is seen,
so no action sequence can influence them: the exogeneity of every
distractor is structural, not incidental. Autonomous OU paths are drawn
per trajectory; most mimicking, all reward-correlated, and oscillator
paths are drawn once per env seed and replayed identically in every
episode, like a looped background video. The leading mimicking
dimensions (one per core dimension) instead replay the structured
probe's seeded action process per trajectory, so they also match the
core's correlation with the behaviour policy — the confounder that
defeats observational selection.

Environments are batch-first: one instance advances B trajectories in
lock-step, each with its own seed stream. The single-trajectory facade
(B = 1, 1-D actions) implements the scalar contract.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.linalg import expm

from . import seeding

CORE_KINDS = ("point_mass_2d", "chain_k", "confounded_mimic")
LEVELS = ("none", "easy", "medium", "hard", "custom")
FAMILIES = ("autonomous", "mimicking", "reward_correlated", "oscillator")

# (autonomous, mimicking, reward_correlated, oscillator)
LEVEL_COUNTS = {
    "none": (0, 0, 0, 0),
    "easy": (4, 0, 0, 2),
    "medium": (12, 28, 6, 4),
    "hard": (18, 60, 14, 8),
}

# Point-mass core: damped double integrator, action = acceleration.
POINT_MASS_ACCEL = 5.0
POINT_MASS_DAMPING = 8.0

# Chain core: x1 is a leaky integrator of the first action; deeper links
# advance by a fixed-magnitude step whose sign is the previous link's most
# recent increment sign. The fixed magnitude makes the one-step summary
# statistic of deep links exactly invariant to the action regime, so the
# chain is only detectable at horizons that span several steps. The step is
# a power of two so the deep-link arithmetic is exact in floating point and
# the one-step invariance holds bitwise, not just in expectation.
CHAIN_DECAY = 0.9
CHAIN_GAIN = 0.5
CHAIN_LINK_STEP = 0.0625

# Confounded-mimic core (two dimensions: s1 causal, d_k exogenous).
CONFOUND_DECAY = 0.9
CONFOUND_GAIN = 0.5
CONFOUND_PROCESS_STD = 0.05
CONFOUND_MIMIC_STD = 0.01

OSCILLATOR_COUPLING = 0.1
REWARD_CORR_STD = 0.01


class ConfigError(ValueError):
    """Invalid environment or run configuration."""


class EpisodeOverError(RuntimeError):
    """step() called past the fixed episode horizon."""


def mimic_sigma_ref(d_c: int) -> float:
    """Stationary std used to calibrate mimicking distractors: 0.5 + 0.05*d_c."""
    if d_c < 0:
        raise ConfigError(f"d_c must be >= 0, got {d_c}")
    return 0.5 + 0.05 * d_c


@dataclass
class EnvConfig:
    core_kind: str = "point_mass_2d"
    d_a: int = 2
    distractor_level: str = "none"
    custom_counts: dict | None = None
    chain_length: int = 3
    partial_dims: int = 0
    alpha_mix: float = 1.0
    dt: float = 0.01
    shuffle_obs: bool = False
    seed: int = 0
    # Drops the confounded channel of the confounded_mimic core. Used by
    # the confounding-immunity check (mask with vs. without the channel).
    drop_confounded_channel: bool = False

    def validate(self) -> None:
        if self.core_kind not in CORE_KINDS:
            raise ConfigError(f"unknown core_kind {self.core_kind!r}")
        if self.distractor_level not in LEVELS:
            raise ConfigError(f"unknown distractor_level {self.distractor_level!r}")
        if self.d_a < 1:
            raise ConfigError("d_a must be >= 1")
        if self.core_kind == "point_mass_2d" and self.d_a < 2:
            raise ConfigError("point_mass_2d needs d_a >= 2")
        if self.core_kind == "chain_k" and self.chain_length < 0:
            raise ConfigError("chain_length must be >= 0")
        if not (0.0 <= self.alpha_mix <= 1.0):
            raise ConfigError("alpha_mix must lie in [0, 1]")
        if self.partial_dims < 0:
            raise ConfigError("partial_dims must be >= 0")
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.distractor_level == "custom":
            if self.custom_counts is None:
                raise ConfigError("custom level requires custom_counts")
            unknown = set(self.custom_counts) - set(FAMILIES)
            if unknown:
                raise ConfigError(f"unknown distractor families {sorted(unknown)}")
            for fam, n in self.custom_counts.items():
                if int(n) < 0:
                    raise ConfigError(f"negative count for family {fam!r}")

    def family_counts(self) -> dict:
        self.validate()
        if self.distractor_level == "custom":
            return {fam: int(self.custom_counts.get(fam, 0)) for fam in FAMILIES}
        counts = LEVEL_COUNTS[self.distractor_level]
        return dict(zip(FAMILIES, counts))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EnvConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown EnvConfig fields {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class ObservationSpec:
    d: int
    labels: list[str]
    permutation: np.ndarray  # emitted[i] = internal[permutation[i]]
    d_c: int
    d_d: int

    def emitted_labels(self) -> list[str]:
        return [self.labels[j] for j in self.permutation]


def _core_causal_dim(config: EnvConfig) -> int:
    if config.core_kind == "point_mass_2d":
        return 6
    if config.core_kind == "chain_k":
        return config.chain_length
    return 1  # confounded_mimic: s1


class Environment:
    """Batch of B synchronized trajectories of one synthetic MDP.

    Structure (process parameters, layout permutation) derives from the
    config seed and is shared by every trajectory; per-trajectory noise
    derives from the trajectory seeds passed to the constructor or reset().
    """

    def __init__(self, config: EnvConfig, horizon: int = 200, traj_seeds=None):
        config.validate()
        self.config = config
        self.horizon = int(horizon)
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")

        counts = config.family_counts()
        self.n_auto = counts["autonomous"]
        self.n_mimic = counts["mimicking"]
        self.n_rc = counts["reward_correlated"]
        self.n_osc = counts["oscillator"]
        self.n_dist = self.n_auto + self.n_mimic + self.n_rc + self.n_osc
        self.n_partial = config.partial_dims
        self.d_core_causal = _core_causal_dim(config)
        self.has_confound_channel = (
            config.core_kind == "confounded_mimic"
            and not config.drop_confounded_channel
        )

        self._build_structure()
        self._build_spec()

        if traj_seeds is None:
            traj_seeds = [seeding.trajectory_seed(config.seed, "baseline", 0)]
        self.reset(traj_seeds)

    # -- structure ---------------------------------------------------------

    def _build_structure(self) -> None:
        cfg = self.config
        rng = seeding.generator(seeding.structure_seed(cfg.seed))

        # Autonomous OU: deliberately off-scale relative to the core.
        self.auto_tau = rng.uniform(0.5, 5.0, size=self.n_auto)
        self.auto_sigma = rng.uniform(0.5, 2.0, size=self.n_auto)

        # Mimicking OU: std calibrated to the core dimensionality, with a
        # +-5% jitter so no two mimics are degenerate copies. The short
        # correlation time keeps the sample std of a finite rollout close
        # to the stationary target.
        sig_ref = mimic_sigma_ref(self.d_core_causal)
        self.mimic_tau = rng.uniform(0.05, 0.2, size=self.n_mimic)
        self.mimic_sigma = sig_ref * rng.uniform(0.95, 1.05, size=self.n_mimic)

        # Reward-correlated drift rate per dimension (signed).
        self.rc_rate = rng.uniform(0.01, 0.03, size=self.n_rc) * rng.choice(
            [-1.0, 1.0], size=self.n_rc
        )

        # Oscillators: pairs with weak linear coupling; a leftover odd
        # dimension becomes an uncoupled oscillator.
        self.osc_omega = rng.uniform(0.5, 2.0, size=self.n_osc)
        self._osc_props = self._oscillator_propagators()

        # Partially controllable dimensions.
        self.partial_action_index = rng.integers(0, cfg.d_a, size=self.n_partial)
        self.partial_gain = rng.uniform(0.5, 1.5, size=self.n_partial)
        self.partial_bias = rng.uniform(-0.5, 0.5, size=self.n_partial)
        self.partial_tau = rng.uniform(1.0, 4.0, size=self.n_partial)
        self.partial_sigma = rng.uniform(0.2, 0.6, size=self.n_partial)
        self.partial_leak = min(50.0 * cfg.dt, 1.0)

        d = (
            self.d_core_causal
            + (1 if self.has_confound_channel else 0)
            + self.n_partial
            + self.n_dist
        )
        if cfg.shuffle_obs:
            self._permutation = rng.permutation(d)
        else:
            self._permutation = np.arange(d)

        # Replica mimics: the leading mimicking dimensions (one per core
        # dimension, at most n_mimic) replay the probe's seeded action
        # process through a first-order filter instead of following a
        # plain OU, so they match not only the core's scale but its
        # coupling to the behaviour policy. Parameters are drawn last so
        # envs without replicas keep an identical structure stream.
        self.n_replica = min(self.d_core_causal, self.n_mimic)
        self.replica_decay = rng.uniform(0.2, 0.6, size=self.n_replica)
        self.replica_action_index = rng.integers(0, cfg.d_a, size=self.n_replica)

    def _oscillator_propagators(self) -> list:
        """Exact dt-propagators for each oscillator block (pairs, then a
        possible lone dimension)."""
        props = []
        dt = self.config.dt
        i = 0
        while i + 1 < self.n_osc:
            w1, w2 = self.osc_omega[i], self.osc_omega[i + 1]
            k = OSCILLATOR_COUPLING
            a = np.array(
                [
                    [0.0, 0.0, 1.0, 0.0],
                    [0.0, 0.0, 0.0, 1.0],
                    [-(w1**2) - k, k, 0.0, 0.0],
                    [k, -(w2**2) - k, 0.0, 0.0],
                ]
            )
            props.append((2, expm(a * dt)))
            i += 2
        if i < self.n_osc:
            w = self.osc_omega[i]
            a = np.array([[0.0, 1.0], [-(w**2), 0.0]])
            props.append((1, expm(a * dt)))
        return props

    def _build_spec(self) -> None:
        labels = ["causal"] * self.d_core_causal
        if self.has_confound_channel:
            labels.append("confounded_mimic")
        labels += ["partial"] * self.n_partial
        labels += ["autonomous"] * self.n_auto
        labels += ["mimicking"] * self.n_mimic
        labels += ["reward_correlated"] * self.n_rc
        labels += ["oscillator"] * self.n_osc
        d = len(labels)
        d_d = d - self.d_core_causal - self.n_partial
        self.spec = ObservationSpec(
            d=d,
            labels=labels,
            permutation=self._permutation.copy(),
            d_c=self.d_core_causal,
            d_d=d_d,
        )

    # -- reset -------------------------------------------------------------

    def reset(self, traj_seeds=None) -> np.ndarray:
        """Start a fresh fixed-horizon episode for every batch element.

        With traj_seeds=None the previous seeds are reused, reproducing the
        episode's exogenous draws exactly.
        """
        if traj_seeds is not None:
            self._traj_seeds = [
                s
                if isinstance(s, np.random.SeedSequence)
                else np.random.SeedSequence(int(s))
                for s in traj_seeds
            ]
        B = len(self._traj_seeds)
        self.batch_size = B
        T = self.horizon
        cfg = self.config

        auto = np.empty((B, T + 1, self.n_auto))
        z = np.empty((B, T + 1, self.n_partial))
        mimic_channel = np.empty((B, T + 1))
        core_noise = np.empty((B, T))

        # Mimicking, reward-correlated, and oscillator paths are replayed
        # identically in every episode (the background-video analogy): one
        # draw keyed by the env seed, shared across the batch and across
        # collection modes.
        common = seeding.generator(seeding.common_path_seed(cfg.seed))
        mim_shared = _ou_path(common, T, self.mimic_tau, self.mimic_sigma, cfg.dt)
        rc_shared = _reward_corr_path(common, T, self.rc_rate)
        osc_shared = _oscillator_path(common, T, self._osc_props, self.n_osc)
        mim = np.broadcast_to(mim_shared, (B, T + 1, self.n_mimic))
        if self.n_replica:
            # The leading mimic columns are per-trajectory replicas and
            # get overwritten below; materialize a writable copy.
            mim = np.array(mim)
        rc = np.broadcast_to(rc_shared, (B, T + 1, self.n_rc))
        osc = np.broadcast_to(osc_shared, (B, T + 1, self.n_osc))

        pos0 = np.zeros((B, 2))
        target0 = np.zeros((B, 2))

        for b, seq in enumerate(self._traj_seeds):
            rng = seeding.generator(seeding.child(seq, seeding.CHILD_ENV_NOISE))
            auto[b] = _ou_path(rng, T, self.auto_tau, self.auto_sigma, cfg.dt)
            z[b] = _ou_path(rng, T, self.partial_tau, self.partial_sigma, cfg.dt)
            core_noise[b] = rng.normal(0.0, 1.0, size=T)
            exo_row = {
                "z": z[b],
                "auto": auto[b],
                "mimic": mim_shared,
                "rc": rc_shared,
                "osc": osc_shared,
            }
            if self.has_confound_channel:
                mimic_channel[b] = _confounded_mimic_path(rng, seq, T, self, exo_row)
            if self.n_replica:
                mim[b, :, : self.n_replica] = _replica_mimic_paths(
                    rng, seq, T, self, exo_row
                )

            init = seeding.generator(seeding.child(seq, seeding.CHILD_EPISODE_INIT))
            pos0[b] = init.uniform(-1.0, 1.0, size=2)
            target0[b] = init.uniform(-0.8, 0.8, size=2)

        self._auto = auto
        self._mimic = mim
        self._rc = rc
        self._osc = osc
        self._z = z
        self._core_noise = core_noise
        self._mimic_channel = mimic_channel

        # Core state.
        if cfg.core_kind == "point_mass_2d":
            self._pos = pos0
            self._vel = np.zeros((B, 2))
            self._target = target0
        elif cfg.core_kind == "chain_k":
            self._chain = np.zeros((B, cfg.chain_length))
            self._chain_inc_sign = np.zeros((B, cfg.chain_length))
        else:
            self._s1 = np.zeros(B)

        self._g = np.zeros((B, self.n_partial))
        self._t = 0
        return self._emit()

    # -- stepping ----------------------------------------------------------

    def step(self, action):
        """Advance one step. Accepts (d_a,) for B=1 or (B, d_a)."""
        action = np.asarray(action, dtype=float)
        scalar = action.ndim == 1
        if scalar:
            if self.batch_size != 1:
                raise ValueError("1-D action on a batched environment")
            action = action[None, :]
        if action.shape != (self.batch_size, self.config.d_a):
            raise ValueError(
                f"action shape {action.shape}, expected ({self.batch_size}, {self.config.d_a})"
            )
        if self._t >= self.horizon:
            raise EpisodeOverError(f"episode horizon {self.horizon} exhausted")
        action = np.clip(action, -1.0, 1.0)

        cfg = self.config
        t = self._t
        if cfg.core_kind == "point_mass_2d":
            acc = POINT_MASS_ACCEL * action[:, :2] - POINT_MASS_DAMPING * self._vel
            self._vel = self._vel + cfg.dt * acc
            self._pos = self._pos + cfg.dt * self._vel
            reward = -np.linalg.norm(self._target - self._pos, axis=1)
        elif cfg.core_kind == "chain_k":
            k = cfg.chain_length
            if k > 0:
                new = np.empty_like(self._chain)
                new[:, 0] = (
                    CHAIN_DECAY * self._chain[:, 0] + CHAIN_GAIN * action[:, 0]
                )
                if k > 1:
                    new[:, 1:] = (
                        self._chain[:, 1:]
                        + CHAIN_LINK_STEP * self._chain_inc_sign[:, :-1]
                    )
                self._chain_inc_sign = np.sign(new - self._chain)
                self._chain = new
                reward = -np.mean(np.abs(self._chain), axis=1)
            else:
                reward = np.zeros(self.batch_size)
        else:
            self._s1 = (
                CONFOUND_DECAY * self._s1
                + CONFOUND_GAIN * action[:, 0]
                + CONFOUND_PROCESS_STD * self._core_noise[:, t]
            )
            reward = -np.abs(self._s1)

        if self.n_partial:
            drive = np.tanh(
                self.partial_gain[None, :] * action[:, self.partial_action_index]
                + self.partial_bias[None, :]
            )
            self._g = self._g + self.partial_leak * (drive - self._g)

        self._t = t + 1
        obs = self._emit()
        if scalar:
            return obs[0], float(reward[0])
        return obs, reward

    def _emit(self) -> np.ndarray:
        cfg = self.config
        t = self._t
        parts = []
        if cfg.core_kind == "point_mass_2d":
            parts.append(self._pos)
            parts.append(self._vel)
            parts.append(self._target - self._pos)
        elif cfg.core_kind == "chain_k":
            parts.append(self._chain)
        else:
            parts.append(self._s1[:, None])
            if self.has_confound_channel:
                parts.append(self._mimic_channel[:, t, None])
        if self.n_partial:
            alpha = cfg.alpha_mix
            parts.append(alpha * self._g + (1.0 - alpha) * self._z[:, t, :])
        parts.append(self._auto[:, t, :])
        parts.append(self._mimic[:, t, :])
        parts.append(self._rc[:, t, :])
        parts.append(self._osc[:, t, :])
        internal = np.concatenate([p for p in parts if p.shape[1]], axis=1)
        return internal[:, self._permutation]

    # -- queries -----------------------------------------------------------

    @property
    def observation_spec(self) -> ObservationSpec:
        return self.spec

    def ground_truth_mask(self) -> np.ndarray:
        """1 where the emitted dimension is causally downstream of actions."""
        mask = []
        for lab in self.spec.emitted_labels():
            if lab == "causal":
                mask.append(1)
            elif lab == "partial":
                mask.append(1 if self.config.alpha_mix > 0 else 0)
            else:
                mask.append(0)
        return np.array(mask, dtype=int)


def _ou_path(rng, T, tau, sigma, dt) -> np.ndarray:
    """Exact OU discretization, stationary init. Returns (T+1, n)."""
    n = len(tau)
    path = np.empty((T + 1, n))
    if n == 0:
        return path
    decay = np.exp(-dt / tau)
    step_std = sigma * np.sqrt(1.0 - decay**2)
    x = sigma * rng.normal(0.0, 1.0, size=n)
    path[0] = x
    noise = rng.normal(0.0, 1.0, size=(T, n))
    for t in range(T):
        x = x * decay + step_std * noise[t]
        path[t + 1] = x
    return path


def _reward_corr_path(rng, T, rates) -> np.ndarray:
    """Drift whose rate tracks episode phase (an exogenous stand-in for
    cumulative progress), plus small Gaussian noise. Returns (T+1, n)."""
    n = len(rates)
    path = np.empty((T + 1, n))
    if n == 0:
        return path
    phase = np.arange(1, T + 1) / T
    noise = rng.normal(0.0, REWARD_CORR_STD, size=(T, n))
    path[0] = 0.0
    increments = rates[None, :] * phase[:, None] + noise
    path[1:] = np.cumsum(increments, axis=0)
    return path


def _oscillator_path(rng, T, props, n_osc) -> np.ndarray:
    """Weakly coupled harmonic oscillator positions. Returns (T+1, n_osc)."""
    path = np.empty((T + 1, n_osc))
    if n_osc == 0:
        return path
    col = 0
    for n_dims, prop in props:
        size = 2 * n_dims
        y = rng.normal(0.0, 0.5, size=size)
        block = np.empty((T + 1, n_dims))
        block[0] = y[:n_dims]
        for t in range(T):
            y = prop @ y
            block[t + 1] = y[:n_dims]
        path[:, col : col + n_dims] = block
        col += n_dims
    return path


def _confounded_mimic_path(rng, traj_seq, T, env, exo_row) -> np.ndarray:
    """Exogenous channel that replays the full baseline probe policy.

    The channel re-derives the structured probe's waveform parameters,
    feedback matrix, and exploration-noise draws from the shared
    per-trajectory seed streams, simulates the resulting action sequence
    on a replica of the observation (using its own simulated core state
    and the trajectory's pregenerated exogenous paths), and integrates the
    simulated first action through the same filter as the causal dimension
    but without its process noise, plus small tracking noise. The shared
    seed draws are the confounder: the channel is a near-noiseless replica
    of the causal dimension under the baseline policy, yet it never reads
    the actions actually applied, so any real action sequence leaves its
    distribution untouched.

    exo_row maps family name -> (T+1, n) pregenerated path for this
    trajectory, used to build the replica observation the simulated
    feedback term reads.
    """
    cfg = env.config
    d_a = cfg.d_a
    head = min(env.spec.d, seeding.OBS_HEAD_MAX)
    amp, freq, phase = seeding.probe_waveform_params(traj_seq, d_a)
    fb = seeding.probe_feedback_matrix(traj_seq, d_a, head)
    pol = seeding.generator(seeding.probe_noise_stream(traj_seq))
    noise = pol.normal(0.0, seeding.NOISE_STD, size=(T, d_a))
    eps = rng.normal(0.0, CONFOUND_MIMIC_STD, size=T + 1)

    perm = env._permutation
    alpha = cfg.alpha_mix
    g_hat = np.zeros(env.n_partial)
    s_hat = 0.0
    out = np.empty(T + 1)
    out[0] = eps[0]
    for t in range(T):
        internal = np.concatenate(
            (
                [s_hat, s_hat + eps[t]],
                alpha * g_hat + (1.0 - alpha) * exo_row["z"][t],
                exo_row["auto"][t],
                exo_row["mimic"][t],
                exo_row["rc"][t],
                exo_row["osc"][t],
            )
        )
        obs_head = internal[perm][:head]
        act = np.clip(
            amp * np.sin(freq * t + phase)
            + seeding.FEEDBACK_GAIN * np.tanh(fb @ obs_head)
            + noise[t],
            -1.0,
            1.0,
        )
        s_hat = CONFOUND_DECAY * s_hat + CONFOUND_GAIN * act[0]
        if env.n_partial:
            drive = np.tanh(
                env.partial_gain * act[env.partial_action_index] + env.partial_bias
            )
            g_hat = g_hat + env.partial_leak * (drive - g_hat)
        out[t + 1] = s_hat + eps[t + 1]
    return out


def _replica_mimic_paths(rng, traj_seq, T, env, exo_row) -> np.ndarray:
    """Mimicking dimensions that replay the probe's seeded action process.

    Like the confounded channel, each replica re-derives the structured
    probe's waveform, feedback, and exploration-noise streams from the
    shared per-trajectory seeds, passes the replayed action through a
    first-order filter, and rescales the path to the mimic reference std
    plus small tracking noise. The replay never reads the actions actually
    applied, so these dimensions are exogenous; on baseline-policy data
    they are nonetheless near-deterministic functions of the behaviour
    actions, which gives them top-rank mutual information with actions
    without any causal path. Returns (T+1, n_replica).
    """
    cfg = env.config
    d_a = cfg.d_a
    n_rep = env.n_replica
    head = min(env.spec.d, seeding.OBS_HEAD_MAX)
    amp, freq, phase = seeding.probe_waveform_params(traj_seq, d_a)
    fb = seeding.probe_feedback_matrix(traj_seq, d_a, head)
    pol = seeding.generator(seeding.probe_noise_stream(traj_seq))
    noise = pol.normal(0.0, seeding.NOISE_STD, size=(T, d_a))

    # The replica's view of the core (and of itself) is fed as zeros: it
    # only enters the replayed policy through the 0.1-gain feedback term,
    # where the approximation is immaterial.
    core_feed = np.zeros(env.d_core_causal + (1 if env.has_confound_channel else 0))
    alpha = cfg.alpha_mix
    g_hat = np.zeros(env.n_partial)
    perm = env._permutation

    decay = env.replica_decay
    a_idx = env.replica_action_index
    f = np.zeros(n_rep)
    raw = np.empty((T + 1, n_rep))
    raw[0] = f
    for t in range(T):
        internal = np.concatenate(
            (
                core_feed,
                alpha * g_hat + (1.0 - alpha) * exo_row["z"][t],
                exo_row["auto"][t],
                exo_row["mimic"][t],
                exo_row["rc"][t],
                exo_row["osc"][t],
            )
        )
        obs_head = internal[perm][:head]
        act = np.clip(
            amp * np.sin(freq * t + phase)
            + seeding.FEEDBACK_GAIN * np.tanh(fb @ obs_head)
            + noise[t],
            -1.0,
            1.0,
        )
        if env.n_partial:
            drive = np.tanh(
                env.partial_gain * act[env.partial_action_index] + env.partial_bias
            )
            g_hat = g_hat + env.partial_leak * (drive - g_hat)
        f = decay * f + (1.0 - decay) * act[a_idx]
        raw[t + 1] = f

    sig_ref = mimic_sigma_ref(env.d_core_causal)
    std = raw.std(axis=0)
    std[std == 0.0] = 1.0
    out = sig_ref * (raw - raw.mean(axis=0)) / std
    out += rng.normal(0.0, CONFOUND_MIMIC_STD, size=(T + 1, n_rep))
    return out


def make_env(config: EnvConfig, horizon: int = 200, traj_seeds=None) -> Environment:
    """Construct an Environment; validates config and initializes all state."""
    return Environment(config, horizon=horizon, traj_seeds=traj_seeds)


def ground_truth_mask(env: Environment) -> np.ndarray:
    return env.ground_truth_mask()
