r"""Open-set likelihood optimization by block-coordinate ascent.

The solver maximizes, over centroids :math:`\mu`, soft assignments :math:`Z`
and inlierness scores :math:`\xi`,

.. math::

    J = \sum_i \xi_i \sum_k z_{ik} \ell_{ik}
        + \sum_{i \in Q} \lambda_z H(z_i) + \lambda_\xi H([1 - \xi_i, \xi_i])

with :math:`\ell_{ik} = -\tfrac12 \|x_i - \mu_k\|^2 + c` the Gaussian
log-joint up to the constant ``likelihood_offset``. Support rows are pinned
to :math:`\xi_i = 1` and one-hot :math:`z_i`. Each block has a closed-form
maximizer, so the objective never decreases between cycles.

Rows are ordered support first, then queries, in every array below.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Callable, Optional

import numpy as np
from scipy.special import expit, softmax

from .types import DataError, Episode, PredictionResult, SolverConfig, SolverState

#: Class weight below which a centroid keeps its previous value.
MIN_CLASS_WEIGHT = 1e-12


def log_joint(x, centroid, offset: float = 0.0):
    """Gaussian log-joint ``-0.5 * ||x - centroid||^2 + offset``.

    Broadcasts over leading axes of ``x`` and ``centroid``.
    """
    diff = np.asarray(x, dtype=np.float64) - np.asarray(centroid, dtype=np.float64)
    return -0.5 * np.sum(diff * diff, axis=-1) + offset


def log_joint_matrix(features: np.ndarray, centroids: np.ndarray, offset: float = 0.0):
    """All pairwise log-joints, shape ``(n, K)``."""
    sq = (
        np.sum(features**2, axis=1)[:, None]
        + np.sum(centroids**2, axis=1)[None, :]
        - 2.0 * features @ centroids.T
    )
    return -0.5 * np.maximum(sq, 0.0) + offset


def _entropy(p: np.ndarray, axis=-1) -> np.ndarray:
    # 0 log 0 = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return -np.sum(terms, axis=axis)


def _support_onehot(labels: np.ndarray, n_ways: int) -> np.ndarray:
    onehot = np.zeros((len(labels), n_ways))
    onehot[np.arange(len(labels)), labels] = 1.0
    return onehot


def _class_means(features, weights, previous=None, normalize=True):
    """Weighted class means ``sum_i w_ik x_i / sum_i w_ik`` (optionally projected)."""
    totals = weights.sum(axis=0)
    sums = weights.T @ features
    means = np.empty_like(sums)
    ok = totals >= MIN_CLASS_WEIGHT
    means[ok] = sums[ok] / totals[ok, None]
    if not np.all(ok):
        if previous is None:
            raise DataError("a closed-set class has no support rows")
        means[~ok] = previous[~ok]
    if normalize:
        norms = np.linalg.norm(means[ok], axis=1, keepdims=True)
        if np.any(norms == 0):
            # projection undefined; keep the previous centroid
            if previous is None:
                raise DataError("class mean is the zero vector")
            zero = np.flatnonzero(ok)[norms[:, 0] == 0]
            means[zero] = previous[zero]
            ok[zero] = False
            norms = np.linalg.norm(means[ok], axis=1, keepdims=True)
        means[ok] = means[ok] / norms
    return means


def init_state(episode: Episode, config: SolverConfig) -> SolverState:
    """Centroids from normalized support means, query ``xi = 1``, soft query rows.

    Expects center-normalized episode features.
    """
    k = episode.n_ways
    counts = np.bincount(episode.support_labels, minlength=k)
    if np.any(counts == 0):
        missing = np.flatnonzero(counts == 0).tolist()
        raise DataError(f"closed-set classes without support rows: {missing}")
    onehot = _support_onehot(episode.support_labels, k)
    mu = _class_means(
        episode.support_features, onehot, normalize=config.normalize_centroids
    )
    lj = log_joint_matrix(episode.query_features, mu, config.likelihood_offset)
    z = np.vstack([onehot, softmax(lj / config.lambda_z, axis=1)])
    xi = np.ones(episode.n_support + episode.n_query)
    state = SolverState(
        mu, z, xi, episode.support_labels,
        unit_centroids=config.normalize_centroids,
    )
    state.objective = objective(state, config, episode)
    return state


def _xi_values(state: SolverState, config: SolverConfig, episode: Episode):
    lj = log_joint_matrix(episode.all_features, state.centroids, config.likelihood_offset)
    xi = expit(np.sum(state.assignments * lj, axis=1) / config.lambda_xi)
    xi[: state.n_support] = 1.0
    return xi


def update_xi(state: SolverState, config: SolverConfig, episode: Episode) -> SolverState:
    """Closed-form inlierness step: a sigmoid of the expected log-joint.

    A no-op when ``config.fix_xi_to_one`` is set.
    """
    if config.fix_xi_to_one:
        return state
    return replace(state, inlierness=_xi_values(state, config, episode))


def update_z(state: SolverState, config: SolverConfig, episode: Episode) -> SolverState:
    """Closed-form assignment step; ``xi_i`` acts as a per-row inverse temperature."""
    ns = state.n_support
    lj = log_joint_matrix(
        episode.query_features, state.centroids, config.likelihood_offset
    )
    q_rows = softmax(state.inlierness[ns:, None] * lj / config.lambda_z, axis=1)
    z = np.vstack([state.assignments[:ns], q_rows])
    return replace(state, assignments=z)


def update_centroids(
    state: SolverState, config: SolverConfig, episode: Episode
) -> SolverState:
    """Inlierness-weighted class means, projected onto the unit sphere if configured.

    The projection is the exact maximizer under the unit-norm constraint.
    """
    weights = state.inlierness[:, None] * state.assignments
    mu = _class_means(
        episode.all_features, weights, previous=state.centroids,
        normalize=config.normalize_centroids,
    )
    return replace(state, centroids=mu)


def objective(state: SolverState, config: SolverConfig, episode: Episode) -> float:
    """Weighted log-likelihood plus entropy penalties on the query rows."""
    lj = log_joint_matrix(episode.all_features, state.centroids, config.likelihood_offset)
    fit = np.sum(state.inlierness * np.sum(state.assignments * lj, axis=1))
    ns = state.n_support
    xi_q = state.inlierness[ns:]
    h_z = _entropy(state.assignments[ns:], axis=1)
    h_xi = _entropy(np.stack([1.0 - xi_q, xi_q], axis=1), axis=1)
    return float(fit + np.sum(config.lambda_z * h_z + config.lambda_xi * h_xi))


def _prediction(state: SolverState, xi: np.ndarray) -> PredictionResult:
    ns = state.n_support
    return PredictionResult(state.assignments[ns:].copy(), 1.0 - xi[ns:])


def run(
    episode: Episode,
    config: SolverConfig,
    callback: Optional[Callable[[SolverState], None]] = None,
):
    """Run the ascent and return ``(final_state, trace)``.

    ``callback`` is invoked with the initial state and again after every
    single block update, which is what the constraint audits hook into.
    """
    state = init_state(episode, config)
    if callback is not None:
        callback(state)
    trace = []
    previous = state.objective
    for it in range(config.max_iters):
        for step in (update_xi, update_z, update_centroids):
            state = step(state, config, episode)
            if callback is not None:
                callback(state)
        value = objective(state, config, episode)
        state.iteration = it + 1
        state.objective = value
        trace.append(value)
        if abs(value - previous) / max(1.0, abs(value)) < config.rel_tol:
            break
        previous = value
    return state, np.array(trace)


def solve(
    episode: Episode,
    config: SolverConfig = SolverConfig(),
    callback: Optional[Callable[[SolverState], None]] = None,
):
    """Transductive open-set inference on one center-normalized episode.

    Returns
    -------
    result : PredictionResult
        Query class posteriors, outlierness ``1 - xi`` and argmax labels.
    trace : ndarray
        Objective value after each full ``xi -> Z -> mu`` cycle.

    Notes
    -----
    When the ascent never updated ``xi`` (``max_iters == 0`` or
    ``fix_xi_to_one``), the reported inlierness comes from one closed-form
    ``xi`` evaluation on the returned state; the state itself is unchanged.
    """
    state, trace = run(episode, config, callback)
    if config.max_iters == 0 or config.fix_xi_to_one:
        xi = _xi_values(state, config, episode)
    else:
        xi = state.inlierness
    return _prediction(state, xi), trace
