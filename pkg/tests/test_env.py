"""Environment contracts: layout, exogeneity, determinism, calibration."""

import numpy as np
import pytest

from causal_scope import ConfigError, EnvConfig, Environment, make_env
from causal_scope.env import (
    CHAIN_LINK_STEP,
    LEVEL_COUNTS,
    EpisodeOverError,
    mimic_sigma_ref,
)
from causal_scope import seeding


def _seeds(base, n, mode="baseline"):
    return [seeding.trajectory_seed(base, mode, k) for k in range(n)]


# -- config -----------------------------------------------------------------


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        EnvConfig(core_kind="nope").validate()
    with pytest.raises(ConfigError):
        EnvConfig(distractor_level="extreme").validate()
    with pytest.raises(ConfigError):
        EnvConfig(core_kind="point_mass_2d", d_a=1).validate()
    with pytest.raises(ConfigError):
        EnvConfig(alpha_mix=1.5).validate()
    with pytest.raises(ConfigError):
        EnvConfig(distractor_level="custom").validate()
    with pytest.raises(ConfigError):
        EnvConfig(
            distractor_level="custom", custom_counts={"bogus_family": 3}
        ).validate()


def test_config_roundtrip_and_hash():
    cfg = EnvConfig(core_kind="chain_k", chain_length=4, seed=3)
    again = EnvConfig.from_dict(cfg.to_dict())
    assert again == cfg
    assert cfg.hash() == again.hash()
    assert cfg.hash() != EnvConfig(core_kind="chain_k", chain_length=5, seed=3).hash()


# -- layout -----------------------------------------------------------------


def test_point_mass_medium_layout():
    env = Environment(
        EnvConfig(core_kind="point_mass_2d", d_a=2, distractor_level="medium"),
        horizon=1,
    )
    assert env.spec.d == 56
    labels = env.spec.emitted_labels()
    assert labels.count("causal") == 6
    assert labels.count("mimicking") == 28
    assert labels.count("autonomous") == 12
    assert labels.count("reward_correlated") == 6
    assert labels.count("oscillator") == 4


def test_level_counts_totals():
    assert sum(LEVEL_COUNTS["none"]) == 0
    assert sum(LEVEL_COUNTS["easy"]) == 6
    assert sum(LEVEL_COUNTS["medium"]) == 50
    assert sum(LEVEL_COUNTS["hard"]) == 100


def test_confounded_mimic_layout_and_truth():
    env = Environment(EnvConfig(core_kind="confounded_mimic", d_a=2), horizon=1)
    assert env.spec.d == 2
    assert env.spec.emitted_labels() == ["causal", "confounded_mimic"]
    assert env.ground_truth_mask().tolist() == [1, 0]


def test_ground_truth_partial_depends_on_alpha():
    base = dict(core_kind="chain_k", chain_length=0, d_a=2, partial_dims=3)
    on = Environment(EnvConfig(**base, alpha_mix=0.5), horizon=1)
    off = Environment(EnvConfig(**base, alpha_mix=0.0), horizon=1)
    assert on.ground_truth_mask().sum() == 3
    assert off.ground_truth_mask().sum() == 0


def test_shuffle_obs_permutes_labels():
    cfg = EnvConfig(
        core_kind="point_mass_2d", d_a=2, distractor_level="medium",
        shuffle_obs=True, seed=5,
    )
    env = Environment(cfg, horizon=1)
    labels = env.spec.emitted_labels()
    assert sorted(labels) == sorted(
        Environment(
            EnvConfig(**{**cfg.to_dict(), "shuffle_obs": False}), horizon=1
        ).spec.emitted_labels()
    )
    assert labels[:6] != ["causal"] * 6  # overwhelmingly unlikely to survive


def test_mimic_sigma_ref_formula():
    assert mimic_sigma_ref(0) == 0.5
    assert abs(mimic_sigma_ref(6) - 0.8) < 1e-12


# -- dynamics ---------------------------------------------------------------


def test_step_determinism_same_seeds():
    cfg = EnvConfig(core_kind="point_mass_2d", d_a=2, distractor_level="easy", seed=1)
    out = []
    for _ in range(2):
        env = Environment(cfg, horizon=5, traj_seeds=_seeds(0, 3))
        obs = [env.reset()]
        for t in range(5):
            o, r = env.step(np.full((3, 2), 0.3))
            obs.append(o)
        out.append(np.stack(obs))
    assert np.array_equal(out[0], out[1])


def test_distractors_are_exogenous():
    """Identical seeds, different action sequences: every non-causal dim
    must produce bit-identical paths."""
    cfg = EnvConfig(core_kind="point_mass_2d", d_a=2, distractor_level="medium", seed=2)
    truth = None
    paths = []
    for action_value in (0.7, -0.4):
        env = Environment(cfg, horizon=10, traj_seeds=_seeds(0, 2))
        truth = env.ground_truth_mask()
        obs = [env.reset()]
        rng = np.random.default_rng(99 if action_value > 0 else 7)
        for t in range(10):
            o, _ = env.step(rng.uniform(-1, 1, size=(2, 2)) * action_value)
            obs.append(o)
        paths.append(np.stack(obs))
    exo = truth == 0
    assert np.array_equal(paths[0][:, :, exo], paths[1][:, :, exo])
    assert not np.array_equal(paths[0][:, :, ~exo], paths[1][:, :, ~exo])


def test_chain_one_step_summary_exactly_invariant():
    """Deep chain links advance by an exactly representable fixed step, so
    the one-step mean |difference| is identical for any action sequence."""
    cfg = EnvConfig(core_kind="chain_k", chain_length=3, d_a=1, seed=0)
    sums = []
    for seed in (1, 2):
        env = Environment(cfg, horizon=50, traj_seeds=_seeds(0, 1))
        obs = [env.reset()]
        rng = np.random.default_rng(seed)
        for t in range(50):
            o, _ = env.step(rng.uniform(-1, 1, size=(1, 1)))
            obs.append(o)
        path = np.stack(obs)[:, 0, :]
        sums.append([np.abs(np.diff(path[:, i])).mean() for i in range(3)])
    # x2, x3: exactly equal; x1 responds to the actions.
    assert sums[0][1] == sums[1][1]
    assert sums[0][2] == sums[1][2]
    assert sums[0][0] != sums[1][0]
    assert CHAIN_LINK_STEP == 0.0625


def test_point_mass_reward_is_negative_distance():
    env = Environment(EnvConfig(core_kind="point_mass_2d", d_a=2), horizon=3,
                      traj_seeds=_seeds(0, 1))
    env.reset()
    _, r = env.step(np.zeros((1, 2)))
    offset = env._target - env._pos
    assert abs(-np.linalg.norm(offset[0]) - r[0]) < 1e-12


def test_episode_over_raises():
    env = Environment(EnvConfig(core_kind="chain_k", chain_length=1, d_a=1),
                      horizon=2, traj_seeds=_seeds(0, 1))
    env.reset()
    env.step(np.zeros((1, 1)))
    env.step(np.zeros((1, 1)))
    with pytest.raises(EpisodeOverError):
        env.step(np.zeros((1, 1)))


def test_scalar_facade():
    env = make_env(EnvConfig(core_kind="point_mass_2d", d_a=2), horizon=4,
                   traj_seeds=_seeds(0, 1))
    obs = env.reset()
    o, r = env.step(np.array([0.1, -0.2]))
    assert o.shape == (env.spec.d,)
    assert isinstance(r, float)


def test_reset_replays_episode():
    env = Environment(EnvConfig(core_kind="point_mass_2d", d_a=2,
                                distractor_level="easy", seed=4),
                      horizon=3, traj_seeds=_seeds(1, 2))
    first = env.reset()
    o1, _ = env.step(np.zeros((2, 2)))
    second = env.reset()
    o2, _ = env.step(np.zeros((2, 2)))
    assert np.array_equal(first, second)
    assert np.array_equal(o1, o2)


# -- calibration invariants --------------------------------------------------


def test_mimic_std_calibrated_over_10k_steps():
    cfg = EnvConfig(core_kind="point_mass_2d", d_a=2, distractor_level="medium",
                    seed=42)
    env = Environment(cfg, horizon=10_000, traj_seeds=_seeds(0, 1))
    env.reset()
    ref = mimic_sigma_ref(env.d_core_causal)
    stds = env._mimic[0].std(axis=0)
    assert np.all(np.abs(stds - ref) / ref <= 0.15)


def test_confounded_channel_tracks_s1():
    cfg = EnvConfig(core_kind="confounded_mimic", d_a=2, seed=42)
    env = Environment(cfg, horizon=5_000, traj_seeds=_seeds(42, 1))
    obs = [env.reset()]
    amp, freq, phase = seeding.probe_waveform_params(env._traj_seeds[0], 2)
    fb = seeding.probe_feedback_matrix(env._traj_seeds[0], 2, 2)
    rng = seeding.generator(seeding.probe_noise_stream(env._traj_seeds[0]))
    for t in range(5_000):
        o = obs[-1][0]
        act = np.clip(
            amp * np.sin(freq * t + phase)
            + seeding.FEEDBACK_GAIN * np.tanh(fb @ o[:2])
            + rng.normal(0.0, seeding.NOISE_STD, size=2),
            -1, 1,
        )
        o2, _ = env.step(act[None, :])
        obs.append(o2)
    path = np.stack(obs)[:, 0, :]
    corr = np.corrcoef(path[:, 0], path[:, 1])[0, 1]
    assert corr >= 0.95
