"""Linear regression ``Y = Psi v + eps`` with i.i.d. errors of log-density ``h``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit

from ..errors import DimensionMismatch, InvalidInput, RankDeficient
from .glm import _row_norms_inv


@dataclass(frozen=True)
class LinearModel:
    """``h`` is the error log-density with derivatives ``h1``, ``h2``.

    ``h_bar = -E h''(eps)`` is the per-observation information (positive for
    log-concave errors) and ``lipschitz_h2`` a Lipschitz constant of ``h''``.
    """

    design: np.ndarray
    h: Callable
    h1: Callable
    h2: Callable
    h_bar: float
    lipschitz_h2: float
    noise_scales: np.ndarray | None = None
    error_sampler: Callable | None = None

    def __post_init__(self):
        psi = np.atleast_2d(np.asarray(self.design, dtype=float))
        if not self.h_bar > 0:
            raise InvalidInput("h_bar must be positive")
        if np.linalg.matrix_rank(psi) < psi.shape[1]:
            raise RankDeficient("design does not have full column rank")
        s = np.ones(psi.shape[0]) if self.noise_scales is None else np.asarray(self.noise_scales, float).ravel()
        if s.shape[0] != psi.shape[0] or np.any(s <= 0):
            raise InvalidInput("noise_scales must be positive, one per observation")
        object.__setattr__(self, "design", psi)
        object.__setattr__(self, "noise_scales", s)

    @property
    def n(self) -> int:
        return self.design.shape[0]

    @property
    def p_star(self) -> int:
        return self.design.shape[1]

    @classmethod
    def gaussian(cls, design, sigma=1.0):
        c = -math.log(sigma * math.sqrt(2.0 * math.pi))
        n = np.atleast_2d(design).shape[0]
        return cls(
            design=design,
            h=lambda z: c - 0.5 * np.square(z) / sigma**2,
            h1=lambda z: -np.asarray(z) / sigma**2,
            h2=lambda z: np.full(np.shape(z), -1.0 / sigma**2),
            h_bar=1.0 / sigma**2,
            lipschitz_h2=0.0,
            noise_scales=np.full(n, sigma),
            error_sampler=lambda rng, size: sigma * rng.standard_normal(size),
        )

    @classmethod
    def logistic_errors(cls, design):
        """Standard logistic errors: ``h'' = -2 s(1-s)``, information 1/3."""
        return cls(
            design=design,
            h=lambda z: -np.asarray(z) - 2.0 * np.logaddexp(0.0, -np.asarray(z)),
            h1=lambda z: 1.0 - 2.0 * expit(z),
            h2=lambda z: -2.0 * expit(z) * (1.0 - expit(z)),
            h_bar=1.0 / 3.0,
            lipschitz_h2=1.0 / (3.0 * math.sqrt(3.0)),
            error_sampler=lambda rng, size: rng.logistic(size=size),
        )


def _resid(upsilon, model, y):
    y = np.asarray(y, dtype=float)
    if y.shape != (model.n,):
        raise DimensionMismatch(f"expected {model.n} responses")
    return y - model.design @ np.asarray(upsilon, dtype=float)


def linear_loglik(upsilon, model: LinearModel, y):
    return float(np.sum(model.h(_resid(upsilon, model, y))))


def linear_grad(upsilon, model: LinearModel, y):
    return -model.design.T @ model.h1(_resid(upsilon, model, y))


def linear_hessian(upsilon, model: LinearModel, y):
    w = model.h2(_resid(upsilon, model, y))
    return (model.design.T * w) @ model.design


def linear_fisher(model: LinearModel):
    return model.h_bar * model.design.T @ model.design


def linear_n1(model: LinearModel, fisher=None):
    fisher = linear_fisher(model) if fisher is None else fisher
    return float(np.max(_row_norms_inv(model.design, fisher))) ** -2


def linear_n2(model: LinearModel, fisher=None):
    fisher = linear_fisher(model) if fisher is None else fisher
    return float(np.max(model.noise_scales * _row_norms_inv(model.design, fisher))) ** -2


def linear_delta_r(r, model: LinearModel, fisher=None):
    """``L r / (h_bar sqrt(N_1))``."""
    return model.lipschitz_h2 * r / (model.h_bar * math.sqrt(linear_n1(model, fisher)))


def linear_omega(model: LinearModel, fisher=None):
    """``sqrt(n) / N_2``."""
    return math.sqrt(model.n) / linear_n2(model, fisher)
