"""Unnormalized log-posterior densities evaluated on batches of points."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..blockinfo import check_spd
from ..errors import DimensionMismatch, InvalidInput
from ..models.glm import GlmModel, glm_hessian, glm_loglik_batch, glm_mle
from ..models.poisson import GroupedPoissonModel, poisson_group_sums, poisson_posterior_params


@dataclass(frozen=True)
class Prior:
    """Flat prior, or centred Gaussian ``N(0, G^{-2})`` given by its precision ``G^2``."""

    kind: str = "flat"
    precision: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("flat", "gaussian"):
            raise InvalidInput(f"unknown prior kind {self.kind!r}")
        if self.kind == "gaussian":
            if self.precision is None:
                raise InvalidInput("gaussian prior needs a precision matrix")
            g2 = np.atleast_2d(np.asarray(self.precision, dtype=float))
            check_spd(g2, "prior precision")
            object.__setattr__(self, "precision", g2)

    def log_density(self, points):
        points = np.atleast_2d(points)
        if self.kind == "flat":
            return np.zeros(points.shape[0])
        return -0.5 * np.einsum("ij,jk,ik->i", points, self.precision, points)


def flat_prior() -> Prior:
    return Prior()


def gaussian_prior(precision) -> Prior:
    return Prior("gaussian", precision)


def as_prior(value) -> Prior:
    """Accept ``None``/``"flat"``, a :class:`Prior`, ``("gaussian", G2)`` or a bare precision matrix."""
    if value is None or (isinstance(value, str) and value == "flat"):
        return flat_prior()
    if isinstance(value, Prior):
        return value
    if isinstance(value, tuple) and len(value) == 2 and value[0] == "gaussian":
        return gaussian_prior(value[1])
    if isinstance(value, str):
        raise InvalidInput(f"unknown prior {value!r}")
    return gaussian_prior(value)


@dataclass(frozen=True)
class LogPosterior:
    """Batch log-density with the local geometry needed by the oracle and sampler.

    ``center`` is a point of high density (the mode, or the mean when known),
    ``precision`` the negative Hessian there, and ``sd`` the coordinate scales
    used to size the quadrature box.  ``support_lower`` marks coordinates whose
    support is bounded below (box faces on that bound are not mass leaks).
    """

    fn: Callable[[np.ndarray], np.ndarray]
    center: np.ndarray
    precision: np.ndarray
    sd: np.ndarray | None = None
    support_lower: np.ndarray | None = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        prec = np.atleast_2d(np.asarray(self.precision, dtype=float))
        if prec.shape != (c.shape[0], c.shape[0]):
            raise DimensionMismatch("precision must be square matching center")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "precision", prec)
        if self.sd is None:
            object.__setattr__(self, "sd", np.sqrt(np.diag(np.linalg.inv(prec))))
        else:
            object.__setattr__(self, "sd", np.atleast_1d(np.asarray(self.sd, dtype=float)))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def __call__(self, points):
        return np.asarray(self.fn(np.atleast_2d(points)), dtype=float)


def _glm_log_posterior(model: GlmModel, y, prior: Prior) -> LogPosterior:
    y = model.responses if y is None else np.asarray(y, dtype=float)

    def fn(points):
        return glm_loglik_batch(points, model, y) + prior.log_density(points)

    mode = glm_mle(model, y=y, prior_precision=prior.precision)
    prec = -glm_hessian(mode, model)
    if prior.precision is not None:
        prec = prec + prior.precision
    return LogPosterior(fn, mode, prec)


def _poisson_log_posterior(model: GroupedPoissonModel, y, prior) -> LogPosterior:
    if prior is not None:
        raise InvalidInput("the grouped Poisson model carries its own exponential prior; pass prior=None")
    if y is None:
        raise InvalidInput("group sums (or raw counts) are required")
    y = np.asarray(y, dtype=float)
    z = y if y.shape == (model.p_n,) else poisson_group_sums(y, model).astype(float)
    shape, scale = poisson_posterior_params(z, model)
    rate = 1.0 / scale

    def fn(points):
        # density of u_j = log v_j: Gamma kernel v^{Z} e^{-rate v} times the Jacobian v
        return (shape * points - rate * np.exp(points)).sum(axis=1)

    mode = np.log(shape * scale)
    return LogPosterior(fn, mode, np.diag(shape))


def build_log_posterior(model, y=None, prior=None) -> LogPosterior:
    """Log-posterior of the full parameter for a supported model.

    ``model`` may be a :class:`GlmModel` (log-likelihood plus ``prior``), a
    :class:`GroupedPoissonModel` in log-intensity coordinates ``u_j`` with its
    conjugate prior (``y`` holds the group sums), or an existing
    :class:`LogPosterior`, returned unchanged.
    """
    if isinstance(model, LogPosterior):
        return model
    if isinstance(model, GlmModel):
        return _glm_log_posterior(model, y, as_prior(prior))
    if isinstance(model, GroupedPoissonModel):
        return _poisson_log_posterior(model, y, prior)
    raise InvalidInput(f"unsupported model type {type(model).__name__}")


def target_values(points, target_dim=None, target_fn=None):
    """Map full-parameter points to target coordinates (a 2-D array)."""
    if target_fn is not None:
        out = np.asarray(target_fn(points), dtype=float)
        return out[:, None] if out.ndim == 1 else out
    if target_dim is None:
        return points
    return points[:, :target_dim]
