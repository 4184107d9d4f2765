"""Observational feature-selection baselines.

All four methods score dimensions from a single observational trajectory
set and select a fixed budget of top-scoring dimensions. They share the
structural weakness the interventional pipeline avoids: dependence
between actions and a dimension does not imply a causal path.

Forward models are random-Fourier-feature ridge regressions (closed-form,
deterministic) rather than trained networks; the baselines' failure mode
under confounding is structural, not model-class specific.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import ConfigError
from .probe import TrajectorySet

MI_BINS = 16
RFF_FEATURES = 128
RIDGE_LAMBDA = 1e-3
GRAD_FD_STEP = 1e-3


@dataclass
class SelectionResult:
    scores: np.ndarray  # (d,)
    ranking: np.ndarray  # dims by descending score, stable on ties
    mask: np.ndarray  # (d,) top-budget selection
    budget: int
    method: str = ""

    def to_report_dict(self) -> dict:
        return {
            "method": self.method,
            "budget": int(self.budget),
            "scores": [float(s) for s in self.scores],
            "ranking": [int(i) for i in self.ranking],
            "mask": [int(v) for v in self.mask],
        }


def _rank_and_mask(scores: np.ndarray, budget: int, method: str) -> SelectionResult:
    if budget < 1:
        raise ConfigError("budget must be >= 1")
    scores = np.asarray(scores, dtype=float)
    if not np.all(np.isfinite(scores)):
        raise FloatingPointError("non-finite baseline scores")
    ranking = np.argsort(-scores, kind="stable")
    mask = np.zeros(scores.size, dtype=int)
    mask[ranking[: min(budget, scores.size)]] = 1
    return SelectionResult(scores, ranking, mask, budget, method)


def _equal_frequency_bins(x: np.ndarray, bins: int) -> np.ndarray:
    edges = np.quantile(x, np.linspace(0, 1, bins + 1)[1:-1])
    return np.searchsorted(edges, x, side="right")


def binned_mi(x: np.ndarray, y: np.ndarray, bins: int = MI_BINS) -> float:
    """Plug-in mutual information (nats) on an equal-frequency grid."""
    if x.size < 2 * bins:
        raise ConfigError(f"need at least {2 * bins} samples for {bins}-bin MI")
    xb = _equal_frequency_bins(x, bins)
    yb = _equal_frequency_bins(y, bins)
    joint = np.zeros((bins, bins))
    np.add.at(joint, (xb, yb), 1.0)
    joint /= joint.sum()
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    nz = joint > 0
    return float(np.sum(joint[nz] * np.log(joint[nz] / (px @ py)[nz])))


def mi_select(trajs: TrajectorySet, budget: int) -> SelectionResult:
    """Score_i = max_j MI(o_i at t+1 ; a_j at t) from pooled transitions."""
    _, a, s_next = trajs.transitions()
    d, d_a = s_next.shape[1], a.shape[1]
    scores = np.empty(d)
    for i in range(d):
        scores[i] = max(binned_mi(s_next[:, i], a[:, j]) for j in range(d_a))
    return _rank_and_mask(scores, budget, "mi")


class ForwardModel:
    """Ridge regression on random Fourier features (or raw inputs).

    Inputs are standardized; the RFF bandwidth comes from the median
    pairwise-distance heuristic on a subsample.
    """

    def __init__(self, n_features: int = RFF_FEATURES, ridge: float = RIDGE_LAMBDA,
                 feature_kind: str = "rff", seed: int = 0):
        if ridge <= 0:
            raise ConfigError("ridge regularization must be positive")
        self.n_features = n_features
        self.ridge = ridge
        self.feature_kind = feature_kind
        self.seed = seed

    def fit(self, x: np.ndarray, y: np.ndarray) -> "ForwardModel":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        self._mean = x.mean(axis=0)
        self._std = x.std(axis=0)
        self._std[self._std == 0] = 1.0
        xs = (x - self._mean) / self._std

        if self.feature_kind == "rff":
            rng = np.random.default_rng(self.seed)
            sub = xs[rng.choice(len(xs), size=min(512, len(xs)), replace=False)]
            diffs = sub[::2][: len(sub) // 2] - sub[1::2][: len(sub) // 2]
            med = np.median(np.linalg.norm(diffs, axis=1))
            bandwidth = med if med > 0 else 1.0
            self._omega = rng.normal(0.0, 1.0 / bandwidth, size=(x.shape[1], self.n_features))
            self._offset = rng.uniform(0.0, 2.0 * np.pi, size=self.n_features)
        phi = self._features(xs)
        gram = phi.T @ phi + self.ridge * np.eye(phi.shape[1])
        self._weights = np.linalg.solve(gram, phi.T @ y)
        self._y_mean = y.mean(axis=0)
        self._y_var = y.var(axis=0)
        return self

    def _features(self, xs: np.ndarray) -> np.ndarray:
        if self.feature_kind == "linear":
            return np.hstack([xs, np.ones((len(xs), 1))])
        return np.sqrt(2.0 / self.n_features) * np.cos(xs @ self._omega + self._offset)

    def predict(self, x: np.ndarray) -> np.ndarray:
        xs = (np.asarray(x, dtype=float) - self._mean) / self._std
        return self._features(xs) @ self._weights

    def residual_variance(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        return np.var(y - self.predict(x), axis=0)

    def r2(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        res = self.residual_variance(x, y)
        total = np.where(self._y_var > 0, self._y_var, 1.0)
        return 1.0 - res / total


def variance_select(trajs: TrajectorySet, budget: int, seed: int = 0) -> SelectionResult:
    """Score_i = variance of (s, a)-conditioned prediction residuals.

    Top-variance selection: dimensions whose next value the model cannot
    explain rank first, which is exactly how exogenous noise processes
    displace clean causal dimensions.
    """
    s, a, s_next = trajs.transitions()
    model = ForwardModel(seed=seed).fit(np.hstack([s, a]), s_next)
    scores = model.residual_variance(np.hstack([s, a]), s_next)
    return _rank_and_mask(scores, budget, "variance")


def cond_mi_select(trajs: TrajectorySet, budget: int, seed: int = 0) -> SelectionResult:
    """Score_i = R^2 gain of an (s, a) forward model over an s-only model,
    clipped at zero."""
    s, a, s_next = trajs.transitions()
    m_sa = ForwardModel(seed=seed).fit(np.hstack([s, a]), s_next)
    m_s = ForwardModel(seed=seed + 1).fit(s, s_next)
    gain = m_sa.r2(np.hstack([s, a]), s_next) - m_s.r2(s, s_next)
    return _rank_and_mask(np.maximum(gain, 0.0), budget, "cond_mi")


def grad_attr_select(
    trajs: TrajectorySet, budget: int, seed: int = 0, model: ForwardModel | None = None
) -> SelectionResult:
    """Score_i = mean absolute sensitivity of the fitted next-state model
    to the action inputs, by central finite differences."""
    s, a, s_next = trajs.transitions()
    x = np.hstack([s, a])
    if model is None:
        model = ForwardModel(seed=seed).fit(x, s_next)
    d_s, d_a = s.shape[1], a.shape[1]
    n_eval = min(len(x), 2048)
    idx = np.random.default_rng(seed).choice(len(x), size=n_eval, replace=False)
    base = x[idx]
    scores = np.zeros(d_s)
    for j in range(d_a):
        hi = base.copy()
        lo = base.copy()
        hi[:, d_s + j] += GRAD_FD_STEP
        lo[:, d_s + j] -= GRAD_FD_STEP
        grad = (model.predict(hi) - model.predict(lo)) / (2.0 * GRAD_FD_STEP)
        scores += np.mean(np.abs(grad), axis=0)
    return _rank_and_mask(scores, budget, "grad_attr")


BASELINE_METHODS = {
    "mi": mi_select,
    "variance": variance_select,
    "cond_mi": cond_mi_select,
    "grad_attr": grad_attr_select,
}


def run_baseline(method: str, trajs: TrajectorySet, budget: int) -> SelectionResult:
    if method not in BASELINE_METHODS:
        raise ConfigError(f"unknown baseline method {method!r}")
    return BASELINE_METHODS[method](trajs, budget)
