"""Diagonal-covariance Gaussian mixtures fitted by Expectation-Maximization.

Randomness comes only from ``numpy.random.Generator(PCG64(seed))``. All
reductions are plain numpy sums over fixed-shape arrays, so a fit is
bit-reproducible for a given input, k and seed.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

NOISE = 0
VAR_FLOOR = 1e-6
# 1 / Phi^-1(3/4): makes the MAD a consistent estimate of a normal sigma
MAD_SCALE = 1.4826022185056018
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class MixtureModel:
    k: int
    weights: np.ndarray  # (k,)
    centroids: np.ndarray  # (k, d)
    variances: np.ndarray  # (k, d)
    log_likelihood: float
    iterations: int
    seed: int
    converged: bool = False
    ll_history: list[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "seed": self.seed,
            "weights": [float(w) for w in self.weights],
            "centroids": [[float(v) for v in row] for row in self.centroids],
            "variances": [[float(v) for v in row] for row in self.variances],
            "log_likelihood": float(self.log_likelihood),
            "iterations": self.iterations,
            "converged": self.converged,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "MixtureModel":
        return cls(
            k=int(doc["k"]),
            weights=np.asarray(doc["weights"], dtype=np.float64),
            centroids=np.asarray(doc["centroids"], dtype=np.float64),
            variances=np.asarray(doc["variances"], dtype=np.float64),
            log_likelihood=float(doc["log_likelihood"]),
            iterations=int(doc["iterations"]),
            seed=int(doc["seed"]),
            converged=bool(doc.get("converged", False)),
        )

    @classmethod
    def from_json(cls, text: str) -> "MixtureModel":
        return cls.from_dict(json.loads(text))


def _check_points(points) -> np.ndarray:
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("points must be a non-empty (n, d) array")
    if not np.all(np.isfinite(x)):
        raise ValueError("points contain NaN or infinite values")
    return x


def _log_prob_t(xt: np.ndarray, weights, means, variances) -> np.ndarray:
    """Component-major ``(k, n)`` array of ``log w_k + log N(x | mean_k, var_k)``.

    ``xt`` is the ``(d, n)`` transpose of the points; rows stay contiguous so
    every per-point reduction over components is elementwise.
    """
    d, n = xt.shape
    with np.errstate(divide="ignore"):
        log_w = np.log(weights)
    const = log_w - 0.5 * (d * _LOG_2PI + np.sum(np.log(variances), axis=1))
    half_inv = -0.5 / variances
    out = np.empty((len(weights), n))
    out[:] = const[:, None]
    for j in range(d):
        diff = xt[j][None, :] - means[:, j, None]
        diff *= diff
        diff *= half_inv[:, j, None]
        out += diff
    return out


def _e_step_t(xt, weights, means, variances):
    lp = _log_prob_t(xt, weights, means, variances)
    top = np.max(lp, axis=0)
    top = np.where(np.isfinite(top), top, 0.0)
    lp -= top
    resp = np.exp(lp, out=lp)
    total = np.sum(resp, axis=0)
    resp /= total
    return resp, top + np.log(total)


def component_log_prob(x: np.ndarray, weights, means, variances) -> np.ndarray:
    """``log(w_k) + log N(x | mean_k, diag(var_k))`` as an ``(n, k)`` array."""
    return _log_prob_t(np.ascontiguousarray(x.T), weights, means, variances).T


def e_step(x, weights, means, variances):
    """Return ((n, k) responsibilities, per-point log mixture density)."""
    resp, log_norm = _e_step_t(np.ascontiguousarray(x.T), weights, means, variances)
    return resp.T, log_norm


def _kmeanspp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(rng.integers(n))
        centers[j] = x[idx]
        d2 = np.minimum(d2, np.sum((x - centers[j]) ** 2, axis=1))
    return centers


def em_fit(
    points,
    k: int,
    seed: int = 42,
    tol: float = 1e-6,
    max_iter: int = 500,
    var_floor: float = VAR_FLOOR,
) -> MixtureModel:
    """Fit a k-component diagonal Gaussian mixture.

    Means are seeded k-means++ style, weights start uniform and every
    component starts with the global per-dimension variance. Iteration stops
    once the log-likelihood gain falls below ``tol * |previous|`` or after
    ``max_iter`` M-steps. The reported log-likelihood always belongs to the
    returned parameters.
    """
    x = _check_points(points)
    n, d = x.shape
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points ({n})")

    rng = np.random.default_rng(seed)
    lo, hi = x.min(axis=0), x.max(axis=0)
    means = _kmeanspp(x, k, rng)
    variances = np.tile(np.maximum(x.var(axis=0), var_floor), (k, 1))
    weights = np.full(k, 1.0 / k)

    xt = np.ascontiguousarray(x.T)
    history: list[float] = []
    converged = False
    iterations = 0
    while True:
        resp, log_norm = _e_step_t(xt, weights, means, variances)
        ll = float(np.sum(log_norm))
        if history and ll - history[-1] < tol * max(abs(history[-1]), 1.0):
            history.append(ll)
            converged = True
            break
        history.append(ll)
        if iterations >= max_iter:
            break

        nk = np.sum(resp, axis=1)
        weights = nk / n
        live = nk > 0
        safe_nk = np.where(live, nk, 1.0)[:, None]
        new_means = np.empty_like(means)
        for j in range(d):
            new_means[:, j] = np.sum(resp * xt[j], axis=1)
        new_means = np.clip(new_means / safe_nk, lo, hi)
        means = np.where(live[:, None], new_means, means)
        new_var = np.empty_like(variances)
        for j in range(d):
            diff = xt[j][None, :] - means[:, j, None]
            diff *= diff
            diff *= resp
            new_var[:, j] = np.sum(diff, axis=1)
        new_var /= safe_nk
        variances = np.where(live[:, None], np.maximum(new_var, var_floor), variances)
        iterations += 1

    logger.debug("em_fit k=%d: %d iterations, ll=%.6f", k, iterations, history[-1])
    return MixtureModel(
        k=k,
        weights=weights,
        centroids=means,
        variances=variances,
        log_likelihood=history[-1],
        iterations=iterations,
        seed=seed,
        converged=converged,
        ll_history=history,
    )


def score_samples(model: MixtureModel, points) -> np.ndarray:
    """Per-point log mixture density."""
    x = _check_points(points)
    _, log_norm = e_step(x, model.weights, model.centroids, model.variances)
    return log_norm


@dataclass
class Assignment:
    labels: np.ndarray  # (n,) int, 1-based cluster id or NOISE (0)
    responsibilities: np.ndarray  # (n, k)
    log_density: np.ndarray  # (n,)
    noise_cut: float

    @property
    def noise_mask(self) -> np.ndarray:
        return self.labels == NOISE

    def __len__(self) -> int:
        return len(self.labels)


def assign(model: MixtureModel, points, noise_mad_factor: float = 3.0) -> Assignment:
    """Label each point with its most responsible cluster, or NOISE.

    A point is NOISE when its log mixture density lies below
    ``median - noise_mad_factor * MAD`` of all per-point log densities.
    The MAD is scaled by :data:`MAD_SCALE`, so the default factor of 3 is a
    robust three-sigma cut.
    """
    x = _check_points(points)
    resp, log_norm = e_step(x, model.weights, model.centroids, model.variances)
    labels = np.argmax(resp, axis=1).astype(np.int64) + 1
    if math.isinf(noise_mad_factor) and noise_mad_factor > 0:
        cut = -math.inf
    else:
        med = float(np.median(log_norm))
        mad = MAD_SCALE * float(np.median(np.abs(log_norm - med)))
        cut = med - noise_mad_factor * mad
    labels[log_norm < cut] = NOISE
    return Assignment(labels, resp, log_norm, cut)


def cv_scores(
    points,
    k_min: int,
    k_max: int,
    folds: int = 10,
    seed: int = 42,
    tol: float = 1e-6,
    max_iter: int = 500,
    max_points: int | None = None,
    threads: int = 1,
) -> dict[int, float]:
    """Mean held-out log density per point for each k in ``[k_min, k_max]``.

    Folds come from one seeded permutation; with ``max_points`` the
    permutation is truncated first, so selection runs on a fixed random
    subsample.
    """
    x = _check_points(points)
    if k_min < 1 or k_max < k_min:
        raise ValueError(f"invalid k range [{k_min}, {k_max}]")
    if folds < 2:
        raise ValueError("folds must be >= 2")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(x.shape[0])
    if max_points is not None and perm.size > max_points:
        perm = perm[:max_points]
    n = perm.size
    if n < folds or n - (n + folds - 1) // folds < k_max:
        raise ValueError(
            f"{n} points are not enough for {folds}-fold selection up to k={k_max}"
        )
    splits = np.array_split(perm, folds)

    def run(task):
        k, f = task
        test = splits[f]
        train = np.concatenate([splits[j] for j in range(folds) if j != f])
        model = em_fit(x[train], k, seed=seed, tol=tol, max_iter=max_iter)
        return float(np.sum(score_samples(model, x[test])))

    tasks = [(k, f) for k in range(k_min, k_max + 1) for f in range(folds)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    scores: dict[int, float] = {}
    for (k, _), total in zip(tasks, results):
        scores[k] = scores.get(k, 0.0) + total
    return {k: s / n for k, s in scores.items()}


def select_k(
    points,
    k_min: int,
    k_max: int,
    folds: int = 10,
    seed: int = 42,
    **kwargs,
) -> int:
    """Pick the k with the best cross-validated log-likelihood; ties go to smaller k."""
    if k_min == k_max:
        if k_min < 1:
            raise ValueError("k must be >= 1")
        return k_min
    scores = cv_scores(points, k_min, k_max, folds=folds, seed=seed, **kwargs)
    best = k_min
    for k in range(k_min + 1, k_max + 1):
        if scores[k] > scores[best]:
            best = k
    logger.info("select_k scores: %s -> k=%d", {k: round(v, 4) for k, v in scores.items()}, best)
    return best
