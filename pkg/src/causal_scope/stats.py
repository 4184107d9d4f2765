"""Two-sample testing pipeline that recovers the set of action-influenced
observation dimensions as a binary mask.

Per (dimension, horizon, trajectory) the pipeline computes a scalar
summary: the mean absolute h-step difference over non-overlapping windows
anchored at index 0. Baseline and intervention samples of that summary
are compared with a Welch t-test (or a permutation test on |t|); the
resulting d x |H| p-values are corrected jointly with Benjamini-Hochberg,
and a dimension enters the mask when any horizon survives at level alpha.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from itertools import combinations
from math import comb

import numpy as np
from scipy.special import stdtr

from .env import ConfigError

P_FLOOR = 1e-300
DEFAULT_HORIZONS = (1, 5, 10)


@dataclass
class TestConfig:
    horizons: tuple = DEFAULT_HORIZONS
    alpha: float = 0.05
    test_kind: str = "welch"
    n_permutations: int = 1000
    seed: int = 0

    def validate(self, horizon_cap: int | None = None) -> None:
        if not self.horizons:
            raise ConfigError("at least one horizon required")
        if any(int(h) < 1 for h in self.horizons):
            raise ConfigError("horizons must be positive")
        if horizon_cap is not None and any(int(h) > horizon_cap for h in self.horizons):
            raise ConfigError(f"every horizon must be <= T = {horizon_cap}")
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError("alpha must lie in (0, 1)")
        if self.test_kind not in ("welch", "permutation"):
            raise ConfigError(f"unknown test_kind {self.test_kind!r}")
        if self.test_kind == "permutation" and self.n_permutations < 99:
            raise ConfigError("permutation mode needs n_permutations >= 99")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["horizons"] = list(self.horizons)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "TestConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown TestConfig fields {sorted(unknown)}")
        if "horizons" in data:
            data = {**data, "horizons": tuple(int(h) for h in data["horizons"])}
        cfg = cls(**data)
        cfg.validate()
        return cfg


@dataclass
class MaskResult:
    raw_p: np.ndarray  # (d, |H|)
    adjusted_p: np.ndarray  # (d, |H|)
    mask: np.ndarray  # (d,)
    per_dim_min_adjusted_p: np.ndarray  # (d,)
    horizons: tuple
    alpha: float
    test_kind: str
    env_hash: str = ""
    labels: list | None = None

    def to_report_dict(self) -> dict:
        per_dim = []
        for i in range(len(self.mask)):
            per_dim.append(
                {
                    "index": i,
                    "label_if_known": self.labels[i] if self.labels else None,
                    "p_by_horizon": {
                        str(h): float(self.raw_p[i, j])
                        for j, h in enumerate(self.horizons)
                    },
                    "adjusted_p_by_horizon": {
                        str(h): float(self.adjusted_p[i, j])
                        for j, h in enumerate(self.horizons)
                    },
                    "selected": bool(self.mask[i]),
                }
            )
        return {
            "env_hash": self.env_hash,
            "config": {
                "horizons": list(self.horizons),
                "alpha": self.alpha,
                "test_kind": self.test_kind,
            },
            "per_dim": per_dim,
            "mask": [int(v) for v in self.mask],
        }


def summary_delta(traj_obs: np.ndarray, dim: int, horizon: int) -> float:
    """Mean absolute h-step difference of one dimension of one trajectory.

    Windows are non-overlapping and anchored at index 0: with
    K = floor(T/h), Delta = mean_k |o[k h] - o[(k-1) h]|.
    """
    traj_obs = np.asarray(traj_obs)
    T = traj_obs.shape[0] - 1
    h = int(horizon)
    if h < 1 or h > T:
        raise ConfigError(f"horizon {h} outside [1, {T}]")
    col = traj_obs[: (T // h) * h + 1 : h, dim]
    return float(np.mean(np.abs(np.diff(col))))


def summary_table(observations: np.ndarray, horizons) -> np.ndarray:
    """Delta summaries for every (trajectory, dimension, horizon).

    observations: (N, T+1, d); returns (N, d, |H|). Vectorized equivalent
    of summary_delta applied pointwise.
    """
    obs = np.asarray(observations)
    T = obs.shape[1] - 1
    out = np.empty((obs.shape[0], obs.shape[2], len(horizons)))
    for j, h in enumerate(horizons):
        h = int(h)
        if h < 1 or h > T:
            raise ConfigError(f"horizon {h} outside [1, {T}]")
        sub = obs[:, : (T // h) * h + 1 : h, :]
        out[:, :, j] = np.mean(np.abs(np.diff(sub, axis=1)), axis=1)
    return out


def welch_t(xs, ys):
    """Welch's unequal-variance t-test, two-sided.

    Returns (t, df, p). Degenerate samples (both variances zero) yield
    p = 1 when the means agree and the p floor otherwise.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2 or ys.size < 2:
        raise ConfigError("welch_t needs at least 2 observations per sample")
    nx, ny = xs.size, ys.size
    mx, my = xs.mean(), ys.mean()
    vx = xs.var(ddof=1)
    vy = ys.var(ddof=1)
    se2 = vx / nx + vy / ny
    if se2 == 0.0:
        if mx == my:
            return 0.0, float(nx + ny - 2), 1.0
        return np.inf if mx > my else -np.inf, float(nx + ny - 2), P_FLOOR
    t = (mx - my) / np.sqrt(se2)
    df = se2**2 / ((vx / nx) ** 2 / (nx - 1) + (vy / ny) ** 2 / (ny - 1))
    p = 2.0 * stdtr(df, -abs(t))
    return float(t), float(df), float(max(p, P_FLOOR))


def _abs_welch_stat(xs, ys) -> float:
    t, _, _ = welch_t(xs, ys)
    return abs(t)


def permutation_test(xs, ys, n_permutations: int = 1000, rng=None) -> float:
    """Permutation two-sample test with |Welch t| as the statistic.

    Monte-Carlo relabelings use the add-one estimator
    p = (1 + #{b : |t_b| >= |t_obs|}) / (B + 1), which never understates
    the p-value. When the number of distinct balanced relabelings is at
    most B the test enumerates them all and returns the exact proportion.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    B = int(n_permutations)
    if B < 1:
        raise ConfigError("n_permutations must be >= 1")
    if xs.size + ys.size < 4:
        raise ConfigError("permutation_test needs at least 4 pooled observations")
    pooled = np.concatenate([xs, ys])
    nx = xs.size
    if np.all(pooled == pooled[0]):
        return 1.0
    t_obs = _abs_welch_stat(xs, ys)

    total = comb(pooled.size, nx)
    if total <= B:
        hits = 0
        for idx in combinations(range(pooled.size), nx):
            sel = np.zeros(pooled.size, dtype=bool)
            sel[list(idx)] = True
            if _abs_welch_stat(pooled[sel], pooled[~sel]) >= t_obs - 1e-12:
                hits += 1
        return hits / total

    if rng is None:
        rng = np.random.default_rng(0)
    elif not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    hits = 0
    for _ in range(B):
        perm = rng.permutation(pooled.size)
        if _abs_welch_stat(pooled[perm[:nx]], pooled[perm[nx:]]) >= t_obs - 1e-12:
            hits += 1
    return (1 + hits) / (B + 1)


def bh_adjust(p_values, alpha: float = 0.05):
    """Benjamini-Hochberg step-up adjustment.

    Returns (adjusted, reject) with adjusted_(k) = min_{j >= k} m p_(j) / j
    clipped at 1, mapped back to the input order (stable sort), and
    reject_i = adjusted_i < alpha.
    """
    p = np.asarray(p_values, dtype=float)
    if p.ndim != 1:
        raise ConfigError("bh_adjust expects a 1-D vector")
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ConfigError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    ranked = p[order] * m / np.arange(1, m + 1)
    adjusted_sorted = np.minimum.accumulate(ranked[::-1])[::-1]
    adjusted_sorted = np.minimum(adjusted_sorted, 1.0)
    adjusted = np.empty(m)
    adjusted[order] = adjusted_sorted
    reject = adjusted < alpha
    return adjusted, reject


def discover(baseline, intervention, cfg: TestConfig | None = None) -> MaskResult:
    """Full mask-discovery pipeline over two trajectory sets.

    Computes the summary tensor for both sets, one two-sample p-value per
    (dimension, horizon), a single BH family over all d x |H| tests, and
    the final mask (selected iff any horizon's adjusted p < alpha).
    """
    cfg = cfg or TestConfig()
    if baseline.d != intervention.d or baseline.horizon != intervention.horizon:
        raise ConfigError("baseline/intervention dimension or horizon mismatch")
    cfg.validate(horizon_cap=baseline.horizon)
    if baseline.env_hash != intervention.env_hash:
        raise ConfigError("trajectory sets come from different environments")

    horizons = tuple(int(h) for h in cfg.horizons)
    tb = summary_table(baseline.observations, horizons)  # (Nb, d, H)
    ti = summary_table(intervention.observations, horizons)
    d, n_h = tb.shape[1], tb.shape[2]

    raw = np.empty((d, n_h))
    if cfg.test_kind == "welch":
        for i in range(d):
            for j in range(n_h):
                raw[i, j] = welch_t(tb[:, i, j], ti[:, i, j])[2]
    else:
        rng = np.random.default_rng(cfg.seed)
        for i in range(d):
            for j in range(n_h):
                raw[i, j] = permutation_test(
                    tb[:, i, j], ti[:, i, j], cfg.n_permutations, rng
                )

    adjusted_flat, reject_flat = bh_adjust(raw.ravel(), cfg.alpha)
    adjusted = adjusted_flat.reshape(d, n_h)
    per_dim = adjusted.min(axis=1)
    mask = (per_dim < cfg.alpha).astype(int)
    labels = None
    if baseline.env_config is not None:
        from .env import Environment

        labels = Environment(baseline.env_config, horizon=1).spec.emitted_labels()
    return MaskResult(
        raw_p=raw,
        adjusted_p=adjusted,
        mask=mask,
        per_dim_min_adjusted_p=per_dim,
        horizons=horizons,
        alpha=cfg.alpha,
        test_kind=cfg.test_kind,
        env_hash=baseline.env_hash,
        labels=labels,
    )
