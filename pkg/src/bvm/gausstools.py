"""Closed-form Gaussian inequalities: norm quantiles, tail bounds, KL and TV.

All bounds are returned raw (they may exceed one) except :func:`tv_pinsker`,
which is clamped to ``[0, 1]``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import linalg

from .errors import InvalidInput, SingularMatrix


def z_quantile(p, x):
    """Upper quantile of ``||gamma||`` for a standard normal ``p``-vector.

    ``P(||gamma|| >= z_quantile(p, x)) <= exp(-x)`` with
    ``z^2 = p + max(sqrt(6.6 p x), 6.6 x)``.
    """
    if p < 1:
        raise InvalidInput(f"p must be >= 1, got {p}")
    if not x > 0:
        raise InvalidInput(f"x must be positive, got {x}")
    return math.sqrt(p + max(math.sqrt(6.6 * p * x), 6.6 * x))


def z_lower(p, x):
    """Lower quantile: ``P(||gamma|| <= z_lower(p, x)) <= exp(-x)``."""
    if p < 1 or not x > 0:
        raise InvalidInput(f"need p >= 1 and x > 0, got p={p}, x={x}")
    z2 = p - 2.0 * math.sqrt(p * x)
    if z2 <= 0:
        raise InvalidInput(f"lower quantile degenerate: p - 2 sqrt(p x) = {z2:.4g} <= 0")
    return math.sqrt(z2)


def z_score_bound(trace_B, lambda_B, x):
    """``sqrt(trace_B + 6 lambda_B x)``, the deviation level of the normalized score."""
    if not (lambda_B > 0 and trace_B >= lambda_B and x > 0):
        raise InvalidInput(
            f"need trace_B >= lambda_B > 0 and x > 0, got {trace_B}, {lambda_B}, {x}"
        )
    return math.sqrt(trace_B + 6.0 * lambda_B * x)


def gauss_shifted_tail(p, u_norm, z):
    """Bound on ``P(||gamma - u|| >= z)``: ``exp(-z^2/4 + p/2 + ||u||^2/2)``."""
    return math.exp(-z * z / 4.0 + p / 2.0 + u_norm * u_norm / 2.0)


def kl_gaussians(u_matrix, beta):
    """``KL(N(0, I), N(beta, (U^T U)^{-1}))``.

    Uses ``2 KL = -log det(U^T U) + tr(U^T U - I) + beta^T U^T U beta`` with the
    log-determinant taken from a Cholesky factor of ``U^T U``.
    """
    u = np.atleast_2d(np.asarray(u_matrix, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    p = u.shape[1]
    if u.shape[0] != p or beta.shape[0] != p:
        raise InvalidInput(f"U must be square matching beta, got {u.shape} and {beta.shape}")
    g = u.T @ u
    try:
        c = linalg.cholesky(g, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularMatrix("U^T U is not positive definite") from exc
    diag = np.diag(c)
    if np.any(diag <= 0) or diag.min() <= 1e-150:
        raise SingularMatrix("U is singular")
    logdet = 2.0 * np.sum(np.log(diag))
    ub = u @ beta
    kl2 = -logdet + np.trace(g) - p + ub @ ub
    return max(0.5 * float(kl2), 0.0)


def tv_pinsker(kl):
    """Pinsker bound ``min(1, sqrt(kl / 2))``."""
    if kl < 0:
        raise InvalidInput(f"kl must be non-negative, got {kl}")
    return min(1.0, math.sqrt(kl / 2.0))


def rescale_tv_penalty(alpha, beta, p):
    """TV penalty ``0.5 sqrt(alpha^2 p + (1 + alpha)^2 beta^2)`` for swapping the
    centre and scaling matrix of the Gaussian approximation."""
    if alpha < 0 or beta < 0:
        raise InvalidInput("alpha and beta must be non-negative")
    return 0.5 * math.sqrt(alpha * alpha * p + (1.0 + alpha) ** 2 * beta * beta)
