"""Random-walk Metropolis sampler with a Gaussian proposal shaped by the
local information."""
from __future__ import annotations

import math

import numpy as np
from scipy import linalg

from ..errors import InvalidInput, NonFiniteDensity
from .conjugate import as_rng
from .logpost import build_log_posterior, target_values
from .summary import PosteriorSummary, summarize

BURN_IN_PER_DIM = 10_000
BURN_IN_CAP = 100_000


def default_burn_in(dim):
    return min(BURN_IN_PER_DIM * dim, BURN_IN_CAP)


def sample_posterior_rw(model, y=None, prior=None, n_draws=10_000, burn_in=None, thin=1,
                        proposal_scale=None, rng_seed=None, start=None, target_dim=None,
                        target_fn=None, keep_draws=True) -> PosteriorSummary:
    """Random-walk Metropolis draws of the target.

    The proposal is ``N(0, s^2 D^{-2})`` with ``D^2`` the negative Hessian of
    the log-posterior at its mode and ``s = 2.4 / sqrt(p*)`` by default.  All
    proposal noise is generated up front from ``rng_seed``, so the chain is a
    deterministic function of the seed.

    Raises
    ------
    NonFiniteDensity
        When the log-density at the starting point is not finite.
    """
    if n_draws < 1:
        raise InvalidInput("n_draws must be >= 1")
    if thin < 1:
        raise InvalidInput("thin must be >= 1")
    logpost = build_log_posterior(model, y, prior)
    d = logpost.dim
    burn_in = default_burn_in(d) if burn_in is None else int(burn_in)
    if burn_in < 0:
        raise InvalidInput("burn_in must be non-negative")
    s = 2.4 / math.sqrt(d) if proposal_scale is None else float(proposal_scale)
    if not s > 0:
        raise InvalidInput("proposal_scale must be positive")

    # Cholesky of the precision: D^2 = C C^T, so C^{-T} e has covariance D^{-2}
    chol = linalg.cholesky(logpost.precision, lower=True)
    total = burn_in + n_draws * thin
    rng = as_rng(rng_seed)
    noise = s * linalg.solve_triangular(chol, rng.standard_normal((d, total)), lower=True, trans="T").T
    log_u = np.log(rng.random(total))

    x = logpost.center.copy() if start is None else np.asarray(start, dtype=float).copy()
    cur = float(logpost(x[None, :])[0])
    if not np.isfinite(cur):
        raise NonFiniteDensity("log-density is not finite at the starting point")
    kept = np.empty((n_draws, d))
    accepted = 0
    for i in range(total):
        prop = x + noise[i]
        val = float(logpost(prop[None, :])[0])
        if log_u[i] < val - cur:
            x, cur = prop, val
            if i >= burn_in:
                accepted += 1
        j = i - burn_in
        if j >= 0 and j % thin == thin - 1:
            kept[j // thin] = x
    rate = accepted / (n_draws * thin)
    return summarize(target_values(kept, target_dim, target_fn), keep_draws=keep_draws, acceptance_rate=rate)
