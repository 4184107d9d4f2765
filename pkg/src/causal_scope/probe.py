"""Probe policies and two-phase trajectory collection.

Baseline sets are driven by a structured random policy (per-dimension
sinusoid, weak state feedback, exploration noise); intervention sets
replace every action by an i.i.d. draw from Uniform([-1, 1]^d_a),
severing all incoming edges to the action node. Trajectory k of a run is
seeded by (base seed, mode, k), so trajectories are mutually independent
and the two sets share no randomness.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, asdict

import numpy as np

from . import seeding
from .env import ConfigError, EnvConfig, Environment

POLICIES = ("structured_random", "uniform_random", "external")
MODES = ("baseline", "intervention")

FEEDBACK_GAIN = seeding.FEEDBACK_GAIN
NOISE_STD = seeding.NOISE_STD
OBS_HEAD_MAX = seeding.OBS_HEAD_MAX

_MAGIC = b"CSCOPE-TRAJ-1\n"


@dataclass
class ProbeConfig:
    n_trajectories: int = 80
    horizon: int = 200
    mode: str = "baseline"
    policy: str = "structured_random"
    seed: int = 0

    def validate(self) -> None:
        if self.n_trajectories < 2:
            raise ConfigError("n_trajectories must be >= 2 (two-sample tests)")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ProbeConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown ProbeConfig fields {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg


@dataclass
class PolicyState:
    """Parameters of one trajectory's structured random policy."""

    amplitude: np.ndarray  # (d_a,)
    frequency: np.ndarray  # (d_a,) rad/step
    phase: np.ndarray  # (d_a,)
    feedback: np.ndarray  # (d_a, head)
    rng: np.random.Generator
    noise_std: float = NOISE_STD

    @classmethod
    def from_seed(cls, traj_seq: np.random.SeedSequence, d_a: int, d: int) -> "PolicyState":
        head = min(d, OBS_HEAD_MAX)
        amp, freq, phase = seeding.probe_waveform_params(traj_seq, d_a)
        w = seeding.probe_feedback_matrix(traj_seq, d_a, head)
        rng = seeding.generator(seeding.probe_noise_stream(traj_seq))
        return cls(amp, freq, phase, w, rng)


def structured_random_action(t: int, obs: np.ndarray, policy_state: PolicyState) -> np.ndarray:
    """One action of the structured random probe.

    a_j = clip(A_j sin(w_j t + phi_j) + 0.1 tanh(W_j . obs_head) + eps_j)
    with eps_j ~ N(0, noise_std^2) drawn from the policy's own stream.
    """
    head = policy_state.feedback.shape[1]
    wave = policy_state.amplitude * np.sin(
        policy_state.frequency * t + policy_state.phase
    )
    fb = FEEDBACK_GAIN * np.tanh(policy_state.feedback @ np.asarray(obs)[:head])
    eps = policy_state.rng.normal(0.0, policy_state.noise_std, size=wave.shape)
    return np.clip(wave + fb + eps, -1.0, 1.0)


@dataclass
class Trajectory:
    observations: np.ndarray  # (T+1, d)
    actions: np.ndarray  # (T, d_a)
    rewards: np.ndarray  # (T,)
    mode: str
    seed: int


@dataclass
class TrajectorySet:
    """N trajectories collected under one mode, stored as dense arrays."""

    observations: np.ndarray  # (N, T+1, d)
    actions: np.ndarray  # (N, T, d_a)
    rewards: np.ndarray  # (N, T)
    mode: str
    env_config: EnvConfig
    probe_config: ProbeConfig
    env_hash: str

    @property
    def n(self) -> int:
        return self.observations.shape[0]

    @property
    def horizon(self) -> int:
        return self.actions.shape[1]

    @property
    def d(self) -> int:
        return self.observations.shape[2]

    def trajectory(self, k: int) -> Trajectory:
        return Trajectory(
            observations=self.observations[k],
            actions=self.actions[k],
            rewards=self.rewards[k],
            mode=self.mode,
            seed=k,
        )

    def transitions(self):
        """Pooled (s_t, a_t, s_{t+1}) across all trajectories."""
        s = self.observations[:, :-1, :].reshape(-1, self.d)
        s_next = self.observations[:, 1:, :].reshape(-1, self.d)
        a = self.actions.reshape(-1, self.actions.shape[2])
        return s, a, s_next

    # -- persistence -----------------------------------------------------

    def save(self, path) -> None:
        header = {
            "mode": self.mode,
            "env_config": self.env_config.to_dict(),
            "probe_config": self.probe_config.to_dict(),
            "env_hash": self.env_hash,
            "shape": {
                "n": int(self.n),
                "horizon": int(self.horizon),
                "d": int(self.d),
                "d_a": int(self.actions.shape[2]),
            },
        }
        with open(path, "wb") as fp:
            fp.write(_MAGIC)
            fp.write(json.dumps(header, sort_keys=True).encode() + b"\n")
            for arr in (self.observations, self.actions, self.rewards):
                np.lib.format.write_array(fp, np.ascontiguousarray(arr))

    @classmethod
    def load(cls, path) -> "TrajectorySet":
        with open(path, "rb") as fp:
            magic = fp.read(len(_MAGIC))
            if magic != _MAGIC:
                raise ConfigError(f"{path}: not a trajectory-set file")
            header = json.loads(fp.readline().decode())
            obs = np.lib.format.read_array(fp)
            actions = np.lib.format.read_array(fp)
            rewards = np.lib.format.read_array(fp)
        return cls(
            observations=obs,
            actions=actions,
            rewards=rewards,
            mode=header["mode"],
            env_config=EnvConfig.from_dict(header["env_config"]),
            probe_config=ProbeConfig.from_dict(header["probe_config"]),
            env_hash=header["env_hash"],
        )

    def to_csv(self, path) -> None:
        """Flat export: one row per (trajectory, step)."""
        d, d_a = self.d, self.actions.shape[2]
        with open(path, "w", newline="") as fp:
            writer = csv.writer(fp)
            writer.writerow(
                ["traj_id", "mode", "t"]
                + [f"o_{i}" for i in range(d)]
                + [f"a_{j}" for j in range(d_a)]
                + ["r"]
            )
            for k in range(self.n):
                for t in range(self.horizon):
                    writer.writerow(
                        [k, self.mode, t]
                        + [repr(v) for v in self.observations[k, t]]
                        + [repr(v) for v in self.actions[k, t]]
                        + [repr(float(self.rewards[k, t]))]
                    )


def collect(
    env_config: EnvConfig,
    probe_config: ProbeConfig,
    external_policy=None,
) -> TrajectorySet:
    """Collect N fixed-horizon trajectories under one mode.

    Trajectories run in lock-step on a batched environment; each has its
    own derived seed, so the result equals sequential per-trajectory
    collection. `external_policy(t, obs_batch) -> actions_batch` is used
    when probe_config.policy == "external" (baseline mode only).
    """
    env_config.validate()
    probe_config.validate()
    if probe_config.policy == "external" and external_policy is None:
        raise ConfigError("policy 'external' requires an external_policy callback")

    n, horizon = probe_config.n_trajectories, probe_config.horizon
    mode = probe_config.mode
    seeds = [
        seeding.trajectory_seed(probe_config.seed, mode, k) for k in range(n)
    ]
    env = Environment(env_config, horizon=horizon, traj_seeds=seeds)
    d, d_a = env.spec.d, env_config.d_a
    head = min(d, OBS_HEAD_MAX)

    if mode == "intervention":
        action_paths = np.empty((n, horizon, d_a))
        for k, seq in enumerate(seeds):
            rng = seeding.generator(seeding.child(seq, seeding.CHILD_INTERVENTION))
            action_paths[k] = rng.uniform(-1.0, 1.0, size=(horizon, d_a))
    elif probe_config.policy == "uniform_random":
        action_paths = np.empty((n, horizon, d_a))
        for k, seq in enumerate(seeds):
            rng = seeding.generator(seeding.probe_noise_stream(seq))
            action_paths[k] = rng.uniform(-1.0, 1.0, size=(horizon, d_a))
    else:
        action_paths = None

    if action_paths is None and probe_config.policy == "structured_random":
        amp = np.empty((n, d_a))
        freq = np.empty((n, d_a))
        phase = np.empty((n, d_a))
        fb = np.empty((n, d_a, head))
        noise = np.empty((n, horizon, d_a))
        for k, seq in enumerate(seeds):
            amp[k], freq[k], phase[k] = seeding.probe_waveform_params(seq, d_a)
            fb[k] = seeding.probe_feedback_matrix(seq, d_a, head)
            rng = seeding.generator(seeding.probe_noise_stream(seq))
            noise[k] = rng.normal(0.0, NOISE_STD, size=(horizon, d_a))

    observations = np.empty((n, horizon + 1, d))
    actions = np.empty((n, horizon, d_a))
    rewards = np.empty((n, horizon))

    obs = env.reset()
    observations[:, 0] = obs
    for t in range(horizon):
        if action_paths is not None:
            act = action_paths[:, t]
        elif probe_config.policy == "external":
            act = np.asarray(external_policy(t, obs), dtype=float)
        else:
            wave = amp * np.sin(freq * t + phase)
            feedback = FEEDBACK_GAIN * np.tanh(
                np.einsum("kij,kj->ki", fb, obs[:, :head])
            )
            act = wave + feedback + noise[:, t]
        act = np.clip(act, -1.0, 1.0)
        obs, rew = env.step(act)
        observations[:, t + 1] = obs
        actions[:, t] = act
        rewards[:, t] = rew

    return TrajectorySet(
        observations=observations,
        actions=actions,
        rewards=rewards,
        mode=mode,
        env_config=env_config,
        probe_config=probe_config,
        env_hash=env_config.hash(),
    )


def collect_pair(env_config: EnvConfig, probe_config: ProbeConfig):
    """Baseline and intervention sets for one base seed."""
    base = ProbeConfig(**{**probe_config.to_dict(), "mode": "baseline"})
    inter = ProbeConfig(**{**probe_config.to_dict(), "mode": "intervention"})
    return collect(env_config, base), collect(env_config, inter)
