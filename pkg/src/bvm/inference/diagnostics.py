"""Comparison of posterior moments with the Gaussian approximation
``N(theta_circ, D_eff^{-2})`` and the budget predicted for it."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.stats import norm

from ..blockinfo import EfficientInfo, FullInfo, FullScore, efficient_score, schur_complement
from ..bounds import BvmBudget
from ..errors import DimensionMismatch, InvalidInput
from ..gausstools import kl_gaussians, tv_pinsker
from ..models.glm import GlmModel, glm_fisher, glm_grad, glm_mle
from .summary import PosteriorSummary

THETA_MODES = ("oracle", "mle")


def theta_circ(theta_star, eff: EfficientInfo, xi_breve):
    """``theta* + D_eff^{-1} xi``, the first-order approximation of the profile
    estimator; ``xi_breve`` is the standardized efficient score."""
    theta_star = np.atleast_1d(np.asarray(theta_star, dtype=float))
    xi = np.atleast_1d(np.asarray(xi_breve, dtype=float))
    if theta_star.shape != (eff.p,) or xi.shape != (eff.p,):
        raise DimensionMismatch(f"expected length {eff.p}, got {theta_star.shape} and {xi.shape}")
    return theta_star + eff.inv_sqrt @ xi


def glm_reference(model: GlmModel, target_dim=None, y=None, mode="oracle"):
    """Centre and efficient information for a GLM whose target is the leading
    ``target_dim`` coordinates.

    ``mode="oracle"`` uses ``upsilon*`` and the score there (simulation only);
    ``mode="mle"`` substitutes the MLE for the centre and evaluates the
    information at the MLE, which is what is available for real data.
    Returns ``(theta_circ, EfficientInfo)``.
    """
    if mode not in THETA_MODES:
        raise InvalidInput(f"mode must be one of {THETA_MODES}")
    p = model.p_star if target_dim is None else int(target_dim)
    if mode == "mle":
        ups = glm_mle(model, y=y)
        eff = schur_complement(FullInfo.from_full(glm_fisher(ups, model), p))
        return ups[:p], eff
    if model.upsilon_star is None:
        raise InvalidInput("oracle mode needs upsilon_star")
    ups = model.upsilon_star
    info = FullInfo.from_full(glm_fisher(ups, model), p)
    eff = schur_complement(info)
    g = glm_grad(ups, model, y)
    xi = efficient_score(info, FullScore(g[:p], g[p:]), eff)
    return theta_circ(ups[:p], eff, xi), eff


@dataclass(frozen=True)
class BvmDiagnostic:
    """Empirical discrepancies from the Gaussian approximation and their budget."""

    theta_circ: np.ndarray
    mean_err: float
    cov_err: float
    tv_est: float
    budget: BvmBudget | None
    verdict: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdict.values())

    def to_dict(self):
        return {
            "theta_circ": [float(v) for v in self.theta_circ],
            "mean_err": self.mean_err,
            "cov_err": self.cov_err,
            "tv_est": self.tv_est,
            "budget": None if self.budget is None else self.budget.to_dict(),
            "verdict": dict(self.verdict),
        }


def moment_matched_kl(summary: PosteriorSummary, center, eff: EfficientInfo):
    """KL between ``N(0, I)`` and the standardized moment-matched posterior
    ``N(D (mean - center), D S^2 D)``, in the form used by :func:`kl_gaussians`."""
    beta = eff.sqrt @ (np.asarray(summary.mean, dtype=float) - center)
    s = eff.sqrt @ summary.cov @ eff.sqrt
    low = linalg.cholesky((s + s.T) / 2.0, lower=True)
    u = linalg.solve_triangular(low, np.eye(eff.p), lower=True)
    return kl_gaussians(u, beta)


def diagnose(summary: PosteriorSummary, theta_circ, eff: EfficientInfo, budget: BvmBudget | None = None
             ) -> BvmDiagnostic:
    """Standardized mean error ``||D (mean - theta_circ)||^2``, covariance error
    ``||I - D S^2 D||`` (operator norm) and the Pinsker TV proxy, each compared
    with the budget when one is given."""
    center = np.atleast_1d(np.asarray(theta_circ, dtype=float))
    if center.shape != (eff.p,) or summary.mean.shape != (eff.p,):
        raise DimensionMismatch("summary, theta_circ and eff dimensions differ")
    diff = eff.sqrt @ (summary.mean - center)
    mean_err = float(diff @ diff)
    s = eff.sqrt @ summary.cov @ eff.sqrt
    cov_err = float(np.linalg.norm(np.eye(eff.p) - (s + s.T) / 2.0, 2))
    tv_est = float(tv_pinsker(moment_matched_kl(summary, center, eff)))
    verdict = {}
    if budget is not None:
        verdict = {
            "mean": mean_err <= budget.mean_bound,
            "cov": cov_err <= budget.cov_bound,
            "tv": tv_est <= budget.tv_bound,
        }
    return BvmDiagnostic(center, mean_err, cov_err, tv_est, budget, verdict)


def histogram_tv(draws, center, sd, bins=60):
    """Empirical TV between 1-D draws and ``N(center, sd^2)`` on a histogram;
    the normal mass per bin is exact, so only the draws carry noise."""
    draws = np.asarray(draws, dtype=float).ravel()
    lo, hi = center - 8.0 * sd, center + 8.0 * sd
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(np.clip(draws, lo, hi), edges)
    emp = counts / draws.shape[0]
    ref = np.diff(norm.cdf(edges, loc=center, scale=sd))
    ref[0] += norm.cdf(lo, loc=center, scale=sd)
    ref[-1] += norm.sf(hi, loc=center, scale=sd)
    return 0.5 * float(np.abs(emp - ref).sum())
