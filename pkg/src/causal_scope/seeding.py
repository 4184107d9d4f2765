"""Deterministic seed derivation shared by environments, probes, and sweeps.

Every random draw in the library flows from a numpy SeedSequence derived
here. Trajectory k of a probing run gets an independent stream keyed by
(base seed, collection mode, k), so changing one trajectory's seed never
perturbs another, and baseline/intervention sets are independent.

The probe policy's per-trajectory waveform parameters (amplitude,
frequency, phase) are derived from a dedicated child stream. The
confounded-mimic environment re-derives the same three arrays from the
same child, which is what couples the mimic channel to the baseline
policy's behaviour without any causal path from actions.
"""

from __future__ import annotations

import numpy as np

MODE_CODES = {"baseline": 0, "intervention": 1}

# Child indices under a trajectory seed. Fixed; never reorder. (Indices
# 1 and 2 were once the policy parameter/noise children; those streams are
# now mode-independent, see POLICY_PARAMS_TAG / POLICY_NOISE_TAG below.)
CHILD_ENV_NOISE = 0
CHILD_INTERVENTION = 3
CHILD_EPISODE_INIT = 4

# Spawn key tag for environment structure (layout, process parameters),
# derived from the EnvConfig seed rather than a trajectory seed.
STRUCTURE_TAG = 1000

# Structured random probe policy constants. They live here rather than in
# the probe module because the confounded-mimic channel replays the full
# policy from the shared seed streams.
FEEDBACK_GAIN = 0.1
NOISE_STD = 0.1
OBS_HEAD_MAX = 8


def trajectory_seed(base_seed: int, mode: str, k: int) -> np.random.SeedSequence:
    """Seed stream for trajectory k of a collection run."""
    return np.random.SeedSequence(
        entropy=int(base_seed), spawn_key=(MODE_CODES[mode], int(k))
    )


def structure_seed(env_seed: int) -> np.random.SeedSequence:
    """Seed stream for environment structure shared by all trajectories."""
    return np.random.SeedSequence(entropy=int(env_seed), spawn_key=(STRUCTURE_TAG,))


# Spawn key tag for exogenous paths replayed identically in every episode
# (mimicking, reward-correlated, and oscillator distractors).
COMMON_PATH_TAG = 1001


def common_path_seed(env_seed: int) -> np.random.SeedSequence:
    """Seed stream for shared exogenous paths, keyed by the env seed only."""
    return np.random.SeedSequence(entropy=int(env_seed), spawn_key=(COMMON_PATH_TAG,))


def child(seq: np.random.SeedSequence, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seq.entropy, spawn_key=seq.spawn_key + (index,))


def generator(seq: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seq))


# Spawn key tags for the probe policy's parameter and exploration-noise
# streams. These are keyed by (base entropy, trajectory index) only — the
# collection mode is deliberately dropped, so trajectory k of the baseline
# set and trajectory k of the intervention set replay the identical
# structured policy inside the environment's confound channels. Sharing
# these exogenous draws across the two arms (common random numbers) pairs
# the null dimensions' summaries, which makes the two-sample test
# conservative on exogenous channels and leaves causal effects untouched.
POLICY_PARAMS_TAG = 2000
POLICY_NOISE_TAG = 2001


def _mode_free(traj_seq: np.random.SeedSequence, tag: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=traj_seq.entropy, spawn_key=(tag, traj_seq.spawn_key[-1])
    )


def probe_noise_stream(traj_seq: np.random.SeedSequence) -> np.random.SeedSequence:
    """Exploration-noise stream of the structured probe (mode-independent)."""
    return _mode_free(traj_seq, POLICY_NOISE_TAG)


def probe_waveform_params(traj_seq: np.random.SeedSequence, d_a: int):
    """Per-trajectory sinusoid parameters of the structured random probe.

    Returns (amplitude, frequency, phase), each shape (d_a,). Amplitude is
    U[0.5, 1], frequency U[0.05, 0.3] rad/step, phase U[0, 2pi). Both the
    probe policy and the confounded-mimic channel call this with the same
    trajectory stream, so the draws agree exactly.
    """
    rng = generator(_mode_free(traj_seq, POLICY_PARAMS_TAG))
    amp = rng.uniform(0.5, 1.0, size=d_a)
    freq = rng.uniform(0.05, 0.3, size=d_a)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=d_a)
    return amp, freq, phase


def probe_feedback_matrix(
    traj_seq: np.random.SeedSequence, d_a: int, head: int
) -> np.ndarray:
    """Fixed random state-feedback map of the structured probe, (d_a, head).

    Drawn after the waveform parameters from the same stream; the prefix
    draws stay identical whatever `head` is.
    """
    rng = generator(_mode_free(traj_seq, POLICY_PARAMS_TAG))
    rng.uniform(0.5, 1.0, size=d_a)
    rng.uniform(0.05, 0.3, size=d_a)
    rng.uniform(0.0, 2.0 * np.pi, size=d_a)
    return rng.normal(0.0, 1.0, size=(d_a, head)) / np.sqrt(max(head, 1))
