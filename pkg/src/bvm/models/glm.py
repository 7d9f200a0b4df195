"""Generalized linear models with canonical link.

Log-likelihood ``L(v) = sum_i {Y_i w_i - d(w_i)}`` with ``w = Psi v``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.special import expit

from ..errors import DimensionMismatch, InvalidInput, NoConvergence, RankDeficient, SingularHessian

W_MAX = 700.0  # exp overflow guard for the poisson family


@dataclass(frozen=True)
class Family:
    name: str

    def d(self, w):
        w = np.asarray(w, dtype=float)
        if self.name == "gaussian":
            return 0.5 * w * w
        if self.name == "logistic":
            return np.logaddexp(0.0, w)
        if self.name == "poisson":
            return np.exp(np.minimum(w, W_MAX))
        out = np.full(w.shape, np.inf)
        inside = w < 0
        out[inside] = -np.log(-w[inside])
        return out

    def d1(self, w):
        w = np.asarray(w, dtype=float)
        if self.name == "gaussian":
            return w
        if self.name == "logistic":
            return expit(w)
        if self.name == "poisson":
            return np.exp(np.minimum(w, W_MAX))
        return -1.0 / w

    def d2(self, w):
        w = np.asarray(w, dtype=float)
        if self.name == "gaussian":
            return np.ones_like(w)
        if self.name == "logistic":
            s = expit(w)
            return s * (1.0 - s)
        if self.name == "poisson":
            return np.exp(np.minimum(w, W_MAX))
        return 1.0 / (w * w)

    def d3(self, w):
        w = np.asarray(w, dtype=float)
        if self.name == "gaussian":
            return np.zeros_like(w)
        if self.name == "logistic":
            s = expit(w)
            return s * (1.0 - s) * (1.0 - 2.0 * s)
        if self.name == "poisson":
            return np.exp(np.minimum(w, W_MAX))
        return -2.0 / w**3

    def in_domain(self, w):
        return bool(np.all(np.asarray(w) < 0)) if self.name == "exponential" else True

    def sample(self, w, rng):
        w = np.asarray(w, dtype=float)
        if self.name == "gaussian":
            return w + rng.standard_normal(w.shape)
        if self.name == "logistic":
            return (rng.random(w.shape) < expit(w)).astype(float)
        if self.name == "poisson":
            return rng.poisson(np.exp(np.minimum(w, W_MAX))).astype(float)
        return rng.exponential(-1.0 / w)


FAMILIES = ("gaussian", "logistic", "poisson", "exponential")
# sup |d'''| over the real line; None where it is unbounded
_GLOBAL_LIPSCHITZ = {"gaussian": 0.0, "logistic": 1.0 / (6.0 * math.sqrt(3.0))}


def get_family(name) -> Family:
    if isinstance(name, Family):
        return name
    if name not in FAMILIES:
        raise InvalidInput(f"unknown family {name!r}; choose from {FAMILIES}")
    return Family(name)


@dataclass(frozen=True)
class GlmModel:
    """GLM with design ``Psi`` (n x p*) and canonical family.

    ``noise_scales`` defaults to ``sqrt(d''(Psi v*))`` (correct specification)
    when ``upsilon_star`` is known, else to ones.  ``lipschitz_d2`` defaults to
    the global Lipschitz constant of ``d''`` when finite, else to the local
    value ``max |d'''(Psi_i v*)|``.
    """

    design: np.ndarray
    family: Family
    responses: np.ndarray
    noise_scales: np.ndarray | None = None
    lipschitz_d2: float | None = None
    upsilon_star: np.ndarray | None = field(default=None)

    def __post_init__(self):
        psi = np.atleast_2d(np.asarray(self.design, dtype=float))
        fam = get_family(self.family)
        y = np.asarray(self.responses, dtype=float).ravel()
        if y.shape[0] != psi.shape[0]:
            raise DimensionMismatch(f"{y.shape[0]} responses for {psi.shape[0]} design rows")
        if np.linalg.matrix_rank(psi) < psi.shape[1]:
            raise RankDeficient("design does not have full column rank")
        ups = None if self.upsilon_star is None else np.asarray(self.upsilon_star, dtype=float).ravel()
        if ups is not None and ups.shape[0] != psi.shape[1]:
            raise DimensionMismatch("upsilon_star length does not match design columns")
        s = self.noise_scales
        if s is None:
            s = np.sqrt(fam.d2(psi @ ups)) if ups is not None else np.ones(psi.shape[0])
        s = np.asarray(s, dtype=float).ravel()
        if s.shape[0] != psi.shape[0] or np.any(s <= 0):
            raise InvalidInput("noise_scales must be positive, one per observation")
        lip = self.lipschitz_d2
        if lip is None:
            lip = _GLOBAL_LIPSCHITZ.get(fam.name)
            if lip is None:
                w = psi @ ups if ups is not None else np.zeros(psi.shape[0])
                lip = float(np.abs(fam.d3(w)).max())
        for name, val in (("design", psi), ("responses", y), ("noise_scales", s)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "upsilon_star", ups)
        object.__setattr__(self, "lipschitz_d2", float(lip))

    @property
    def n(self) -> int:
        return self.design.shape[0]

    @property
    def p_star(self) -> int:
        return self.design.shape[1]

    def with_responses(self, y) -> "GlmModel":
        return GlmModel(self.design, self.family, y, self.noise_scales, self.lipschitz_d2, self.upsilon_star)


def simulate_glm(design, family, upsilon_star, rng, **kwargs) -> GlmModel:
    """Draw responses at ``upsilon_star`` and wrap them in a model."""
    fam = get_family(family)
    w = np.asarray(design, dtype=float) @ np.asarray(upsilon_star, dtype=float)
    if not fam.in_domain(w):
        raise InvalidInput(f"{fam.name} family needs Psi v* < 0")
    y = fam.sample(w, rng)
    return GlmModel(design, fam, y, upsilon_star=upsilon_star, **kwargs)


def load_design_csv(path, response_column="y"):
    """Read a design matrix from CSV with a header row.

    Returns ``(design, responses)``; ``responses`` is None unless a column named
    ``response_column`` is present.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    if response_column in header:
        j = header.index(response_column)
        return np.delete(data, j, axis=1), data[:, j]
    return data, None


def _w(upsilon, model):
    return model.design @ np.asarray(upsilon, dtype=float)


def glm_loglik(upsilon, model: GlmModel, y=None):
    y = model.responses if y is None else np.asarray(y, dtype=float)
    w = _w(upsilon, model)
    if not model.family.in_domain(w):
        return -np.inf
    return float(y @ w - np.sum(model.family.d(w)))


def glm_loglik_batch(points, model: GlmModel, y=None):
    """Log-likelihood at each row of ``points`` (k x p*)."""
    y = model.responses if y is None else np.asarray(y, dtype=float)
    w = np.asarray(points, dtype=float) @ model.design.T
    out = w @ y - model.family.d(w).sum(axis=1)
    if model.family.name == "exponential":
        out = np.where(np.all(w < 0, axis=1), out, -np.inf)
    return out


def glm_grad(upsilon, model: GlmModel, y=None):
    y = model.responses if y is None else np.asarray(y, dtype=float)
    w = _w(upsilon, model)
    return model.design.T @ (y - model.family.d1(w))


def glm_hessian(upsilon, model: GlmModel):
    w = _w(upsilon, model)
    return -(model.design.T * model.family.d2(w)) @ model.design


def glm_mle(model: GlmModel, tol=1e-10, max_iter=100, start=None, y=None, prior_precision=None):
    """Maximize the concave log-likelihood by Newton steps with step halving.

    Stops when ``||grad|| <= tol (1 + ||Y||)``.  With ``prior_precision`` the
    penalty ``v^T G2 v / 2`` is subtracted, giving the posterior mode under a
    centred Gaussian prior.
    """
    y = model.responses if y is None else np.asarray(y, dtype=float)
    g2 = np.zeros((model.p_star, model.p_star)) if prior_precision is None else np.asarray(prior_precision, float)

    def objective(v):
        return glm_loglik(v, model, y) - 0.5 * v @ g2 @ v

    def gradient(v):
        return glm_grad(v, model, y) - g2 @ v

    if start is None:
        if model.family.name == "exponential":
            target = np.full(model.n, -1.0 / max(float(np.mean(y)), 1e-12))
            start = np.linalg.lstsq(model.design, target, rcond=None)[0]
            if not model.family.in_domain(_w(start, model)):
                raise InvalidInput("no feasible start for the exponential family; pass start=")
        else:
            start = np.zeros(model.p_star)
    v = np.asarray(start, dtype=float).copy()
    thresh = tol * (1.0 + np.linalg.norm(y))
    cur = objective(v)
    if not np.isfinite(cur):
        raise InvalidInput("log-likelihood is not finite at the starting point")
    for _ in range(max_iter):
        g = gradient(v)
        if np.linalg.norm(g) <= thresh:
            return v
        neg_h = g2 - glm_hessian(v, model)
        try:
            c = linalg.cho_factor(neg_h)
        except linalg.LinAlgError as exc:
            raise SingularHessian("Hessian is not negative definite") from exc
        step = linalg.cho_solve(c, g)
        t = 1.0
        for _ in range(60):
            cand = v + t * step
            val = objective(cand)
            if np.isfinite(val) and val >= cur - 1e-12 * abs(cur):
                break
            t *= 0.5
        else:
            raise NoConvergence("line search failed to find an ascent step")
        v, cur = cand, val
    if np.linalg.norm(gradient(v)) <= thresh:
        return v
    raise NoConvergence(f"Newton did not converge in {max_iter} iterations")


def glm_fisher(upsilon_star, model: GlmModel):
    """``sum_i d''(Psi_i^T v*) Psi_i Psi_i^T``."""
    return -glm_hessian(upsilon_star, model)


def glm_vmatrix(model: GlmModel):
    """``sum_i s_i^2 Psi_i Psi_i^T``."""
    return (model.design.T * model.noise_scales**2) @ model.design


def glm_excess(upsilon, upsilon_star, model: GlmModel):
    """Expected log-likelihood deficit, equal to the Kullback-Leibler divergence
    of the fitted distribution from the one at ``upsilon_star``."""
    w = _w(upsilon, model)
    ws = _w(upsilon_star, model)
    fam = model.family
    return float(np.sum(fam.d(w) - fam.d(ws) - fam.d1(ws) * (w - ws)))


def _row_norms_inv(design, fisher):
    # ||D^{-1} Psi_i|| for every row, via a Cholesky solve
    c = linalg.cholesky(np.asarray(fisher, dtype=float), lower=True)
    sol = linalg.solve_triangular(c, design.T, lower=True)
    return np.sqrt(np.sum(sol * sol, axis=0))


def glm_n2(model: GlmModel, fisher, upsilon_star=None):
    """Effective sample size ``N_2``; the supremum over directions is attained
    at ``gamma = D^{-2} Psi_i`` so it is evaluated exactly."""
    ups = model.upsilon_star if upsilon_star is None else upsilon_star
    if ups is None:
        raise InvalidInput("upsilon_star is required")
    curv = model.family.d2(_w(ups, model))
    worst = float(np.max(_row_norms_inv(model.design, fisher) / curv))
    return worst ** -2


def glm_delta_r(r, model: GlmModel, fisher, upsilon_star=None):
    """``L r / sqrt(N_2)``: quality of the local quadratic approximation."""
    return model.lipschitz_d2 * r / math.sqrt(glm_n2(model, fisher, upsilon_star))
