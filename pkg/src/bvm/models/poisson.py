"""Grouped Poisson model: ``p_n`` groups of ``m_n`` counts with a common
intensity per group, conjugate exponential prior, target = mean log-intensity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..blockinfo import FullInfo, FullScore
from ..errors import DimensionMismatch, InvalidInput, ZeroCount


@dataclass(frozen=True)
class GroupedPoissonModel:
    """``Y_i ~ Poisson(exp(u_j))`` for ``i`` in group ``j``; prior ``exp(u_j) ~ Exp(mean=prior_scale)``.

    ``u_star`` defaults to ``log(1 / p_n)``.  ``prior_cap`` is the constant
    ``C`` in the admissibility check ``prior_scale <= C sqrt(n / log n)``.
    """

    p_n: int
    m_n: int
    u_star: float | None = None
    prior_scale: float = 1.0
    prior_cap: float = 1.0

    def __post_init__(self):
        if self.p_n < 2:
            raise InvalidInput(f"p_n must be >= 2, got {self.p_n}")
        if self.m_n < 1:
            raise InvalidInput(f"m_n must be >= 1, got {self.m_n}")
        if not self.prior_scale > 0:
            raise InvalidInput("prior_scale must be positive")
        n = self.n
        if n > 1 and self.prior_scale > self.prior_cap * math.sqrt(n / math.log(n)):
            raise InvalidInput(
                f"prior_scale {self.prior_scale} exceeds {self.prior_cap} * sqrt(n / log n)"
            )
        if self.u_star is None:
            object.__setattr__(self, "u_star", math.log(1.0 / self.p_n))

    @property
    def n(self) -> int:
        return self.p_n * self.m_n

    @property
    def theta_star(self) -> float:
        return float(self.u_star)

    @property
    def beta(self) -> float:
        """``p_n / sqrt(m_n) = p_n^{3/2} / n^{1/2}``."""
        return self.p_n / math.sqrt(self.m_n)

    def simulate_sums(self, rng) -> np.ndarray:
        """Draw the group sums directly: ``Z_j ~ Poisson(m_n exp(u*))``."""
        return rng.poisson(self.m_n * math.exp(self.u_star), size=self.p_n)


def poisson_group_sums(y, model: GroupedPoissonModel):
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != model.n:
        raise DimensionMismatch(f"expected {model.n} observations, got shape {y.shape}")
    return y.reshape(model.p_n, model.m_n).sum(axis=1)


def poisson_loglik(u, z, model: GroupedPoissonModel):
    """``sum_j (Z_j u_j - m_n exp(u_j))``."""
    u = np.asarray(u, dtype=float)
    z = np.asarray(z, dtype=float)
    if u.shape != z.shape or u.shape[-1] != model.p_n:
        raise DimensionMismatch(f"u {u.shape} and z {z.shape} must both have length {model.p_n}")
    return float(np.sum(z * u - model.m_n * np.exp(u)))


def poisson_grad(u, z, model: GroupedPoissonModel):
    u = np.asarray(u, dtype=float)
    return np.asarray(z, dtype=float) - model.m_n * np.exp(u)


def poisson_hessian(u, model: GroupedPoissonModel):
    return -np.diag(model.m_n * np.exp(np.asarray(u, dtype=float)))


def poisson_profile_mle(z, model: GroupedPoissonModel):
    """Profile MLE of the target: ``mean_j log(Z_j / m_n)``."""
    z = np.asarray(z, dtype=float)
    if z.shape != (model.p_n,):
        raise DimensionMismatch(f"z must have length {model.p_n}")
    if np.any(z <= 0):
        raise ZeroCount(f"{int(np.sum(z <= 0))} group sum(s) are zero")
    return float(np.mean(np.log(z / model.m_n)))


def poisson_posterior_params(z, model: GroupedPoissonModel):
    """Gamma posterior of each intensity: shapes ``1 + Z_j`` and common scale
    ``mu / (m_n mu + 1)``."""
    z = np.asarray(z, dtype=float)
    mu = model.prior_scale
    return 1.0 + z, mu / (model.m_n * mu + 1.0)


def poisson_full_fisher(model: GroupedPoissonModel) -> FullInfo:
    """Fisher information at ``u*`` in coordinates ``(theta, u_2 - u*, ..., u_p - u*)``.

    With ``u_1 = p theta - sum_{j>=2} u_j`` the information is
    ``(m_n e^{u*}) [[p^2, -p 1^T], [-p 1, I + 1 1^T]]``; for the default
    ``u* = -log p_n`` the leading factor is ``m_n / p_n``.
    """
    p = model.p_n
    w = model.m_n * math.exp(model.u_star)
    d2 = np.array([[w * p * p]])
    a = np.full((1, p - 1), -w * p)
    h2 = w * (np.eye(p - 1) + np.ones((p - 1, p - 1)))
    return FullInfo(d2, a, h2)


def poisson_full_score(z, model: GroupedPoissonModel) -> FullScore:
    """Score at ``u*`` in the coordinates of :func:`poisson_full_fisher`."""
    g = np.asarray(z, dtype=float) - model.m_n * math.exp(model.u_star)
    return FullScore(target_grad=np.array([model.p_n * g[0]]), nuisance_grad=g[1:] - g[0])
