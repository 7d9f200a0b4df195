from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PosteriorSummary:
    """Posterior mean and covariance of the target, optionally with the draws.

    ``mean_se`` and ``cov_se`` are Monte-Carlo standard errors (batch means);
    they are zero for quadrature summaries.
    """

    mean: np.ndarray
    cov: np.ndarray
    draws: np.ndarray | None
    draw_count: int
    effective_sample_hint: int
    mean_se: np.ndarray
    cov_se: np.ndarray
    acceptance_rate: float | None = None

    @property
    def p(self) -> int:
        return self.mean.shape[0]


def batch_means_se(values, n_batches=50):
    """Standard error of the mean of each column of ``values`` by batch means."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    n = values.shape[0]
    k = max(2, min(n_batches, n // 2))
    size = n // k
    if size < 1:
        return np.full(values.shape[1], np.inf)
    batches = values[: k * size].reshape(k, size, -1).mean(axis=1)
    return batches.std(axis=0, ddof=1) / np.sqrt(k)


def summarize(draws, keep_draws=True, acceptance_rate=None, n_batches=50) -> PosteriorSummary:
    """Build a summary from a ``(n_draws, p)`` array (or a 1-D array for p = 1)."""
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[:, None]
    n, p = draws.shape
    mean = draws.mean(axis=0)
    cov = np.atleast_2d(np.cov(draws, rowvar=False, ddof=1)) if n > 1 else np.zeros((p, p))
    if n > 3:
        mean_se = batch_means_se(draws, n_batches)
        centred = draws - mean
        prods = (centred[:, :, None] * centred[:, None, :]).reshape(n, p * p)
        cov_se = batch_means_se(prods, n_batches).reshape(p, p)
        var = np.diag(cov)
        with np.errstate(divide="ignore", invalid="ignore"):
            ess = np.where(mean_se > 0, var / mean_se**2, n)
        ess_hint = int(min(n, np.floor(np.min(ess))))
    else:
        mean_se = np.full(p, np.inf)
        cov_se = np.full((p, p), np.inf)
        ess_hint = n
    draws.setflags(write=False)
    return PosteriorSummary(
        mean=mean,
        cov=cov,
        draws=draws if keep_draws else None,
        draw_count=n,
        effective_sample_hint=ess_hint,
        mean_se=mean_se,
        cov_se=cov_se,
        acceptance_rate=acceptance_rate,
    )


def summary_from_moments(mean, cov) -> PosteriorSummary:
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    p = mean.shape[0]
    return PosteriorSummary(
        mean=mean,
        cov=cov,
        draws=None,
        draw_count=0,
        effective_sample_hint=0,
        mean_se=np.zeros(p),
        cov_se=np.zeros((p, p)),
    )
