"""Exact posterior simulation for the grouped Poisson model."""
from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidInput
from ..models.poisson import GroupedPoissonModel, poisson_posterior_params
from .summary import PosteriorSummary, summarize

CHUNK_ELEMENTS = 2_000_000


def as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def draw_conjugate_upsilon(model: GroupedPoissonModel, z, n_draws, rng):
    """``(n_draws, p_n)`` array of independent ``Gamma(1 + Z_j, scale)`` intensities."""
    shape, scale = poisson_posterior_params(z, model)
    return as_rng(rng).gamma(shape, scale, size=(n_draws, model.p_n))


def draw_conjugate_theta(model: GroupedPoissonModel, z, n_draws, rng):
    """Draws of the target ``mean_j log v_j``; memory is bounded by chunking."""
    rng = as_rng(rng)
    shape, scale = poisson_posterior_params(z, model)
    out = np.empty(n_draws)
    step = max(1, CHUNK_ELEMENTS // model.p_n)
    log_scale = math.log(scale)
    for start in range(0, n_draws, step):
        k = min(step, n_draws - start)
        g = rng.gamma(shape, 1.0, size=(k, model.p_n))
        out[start:start + k] = np.log(g).mean(axis=1) + log_scale
    return out


def sample_posterior_conjugate(model: GroupedPoissonModel, z, n_draws, rng_seed=None,
                               keep_draws=True) -> PosteriorSummary:
    if n_draws < 1:
        raise InvalidInput("n_draws must be >= 1")
    theta = draw_conjugate_theta(model, z, n_draws, rng_seed)
    return summarize(theta, keep_draws=keep_draws)


def standardized_target_draws(summary_or_draws, profile_mle, m_n):
    """``sqrt(m_n) (theta - theta_tilde)``; ``sqrt(m_n)`` is the square root of
    the efficient information of the grouped Poisson target."""
    draws = getattr(summary_or_draws, "draws", summary_or_draws)
    if draws is None:
        raise InvalidInput("summary does not retain draws")
    draws = np.asarray(draws, dtype=float).ravel()
    return math.sqrt(m_n) * (draws - profile_mle)
