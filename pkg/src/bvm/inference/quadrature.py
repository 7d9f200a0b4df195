"""Tensor-product trapezoid quadrature of a low-dimensional posterior.

This is the independent oracle against which samplers and the Gaussian
approximation are checked.
"""
from __future__ import annotations

import numpy as np

from ..errors import BoxTooSmall, DimensionMismatch, InvalidInput
from .logpost import build_log_posterior, target_values
from .summary import PosteriorSummary, summary_from_moments

MAX_DIM = 3
MIN_POINTS = 31
DEFAULT_POINTS = {1: 4001, 2: 301, 3: 81}
BOUNDARY_RATIO = 1e-8
CHUNK_POINTS = 200_000


def default_box(logpost, width=12.0):
    """Box centred at ``logpost.center`` with half-widths ``width`` standard
    deviations, clipped at any lower support bound."""
    center = logpost.center.copy()
    half = width * logpost.sd
    if logpost.support_lower is not None:
        lo = np.maximum(center - half, logpost.support_lower)
        hi = center + half
        center, half = (lo + hi) / 2.0, (hi - lo) / 2.0
    return center, half


def _trapezoid_weights(k, h):
    w = np.full(k, h)
    w[0] = w[-1] = h / 2.0
    return w


def _grid_moments(logpost, center, half, k, target_dim, target_fn):
    d = center.shape[0]
    axes = [np.linspace(c - s, c + s, k) for c, s in zip(center, half)]
    log_w1 = [np.log(_trapezoid_weights(k, 2.0 * s / (k - 1))) for s in half]
    total = k**d
    idx_all = np.arange(total)
    logdens = np.empty(total)
    for start in range(0, total, CHUNK_POINTS):
        idx = np.unravel_index(idx_all[start:start + CHUNK_POINTS], (k,) * d)
        pts = np.column_stack([axes[j][idx[j]] for j in range(d)])
        logdens[start:start + pts.shape[0]] = logpost(pts)
    finite = np.isfinite(logdens)
    if not finite.any():
        raise InvalidInput("log-density is not finite anywhere in the box")
    peak = logdens[finite].max()

    # mass leak check on faces that are not a support boundary
    grid = logdens.reshape((k,) * d)
    edge = -np.inf
    for j in range(d):
        for end, face_value in ((0, center[j] - half[j]), (k - 1, center[j] + half[j])):
            if end == 0 and logpost.support_lower is not None and face_value <= logpost.support_lower[j]:
                continue
            edge = max(edge, np.take(grid, end, axis=j).max())
    if np.exp(edge - peak) >= BOUNDARY_RATIO:
        raise BoxTooSmall(f"boundary density ratio {np.exp(edge - peak):.3g} >= {BOUNDARY_RATIO}")

    # moments are accumulated about the target value at the box centre to
    # avoid cancellation in the covariance
    t0 = target_values(center[None, :], target_dim, target_fn)[0]
    mass = 0.0
    first = None
    second = None
    for start in range(0, total, CHUNK_POINTS):
        sl = slice(start, min(start + CHUNK_POINTS, total))
        idx = np.unravel_index(idx_all[sl], (k,) * d)
        pts = np.column_stack([axes[j][idx[j]] for j in range(d)])
        logw = logdens[sl] - peak + sum(log_w1[j][idx[j]] for j in range(d))
        w = np.where(np.isfinite(logw), np.exp(logw), 0.0)
        t = target_values(pts, target_dim, target_fn) - t0
        t = np.where(w[:, None] > 0, t, 0.0)
        mass += w.sum()
        f = w @ t
        s = (t * w[:, None]).T @ t
        first = f if first is None else first + f
        second = s if second is None else second + s
    shift = first / mass
    cov = second / mass - np.outer(shift, shift)
    return t0 + shift, (cov + cov.T) / 2.0


def posterior_grid_oracle(model, y=None, box_center=None, box_halfwidths=None, points_per_dim=None,
                          prior=None, target_dim=None, target_fn=None) -> PosteriorSummary:
    """Posterior mean and covariance of the target by trapezoid quadrature.

    Parameters
    ----------
    model : GlmModel, GroupedPoissonModel or LogPosterior
        Parameter dimension at most 3.
    y : array, optional
        Responses (GLM) or group sums (grouped Poisson).
    box_center, box_halfwidths : array, optional
        Integration box.  When omitted the box is centred at the mode and
        widened until the boundary check passes.
    points_per_dim : int, optional
        At least 31.  Defaults depend on the dimension.
    target_dim : int, optional
        Leading coordinates forming the target; all coordinates by default.
    target_fn : callable, optional
        Maps ``(k, d)`` points to target values; overrides ``target_dim``.

    Raises
    ------
    BoxTooSmall
        When the density on the box boundary is not below 1e-8 of its peak.
    """
    logpost = build_log_posterior(model, y, prior)
    d = logpost.dim
    if d > MAX_DIM:
        raise InvalidInput(f"quadrature oracle supports at most {MAX_DIM} dimensions, got {d}")
    k = DEFAULT_POINTS[d] if points_per_dim is None else int(points_per_dim)
    if k < MIN_POINTS:
        raise InvalidInput(f"points_per_dim must be >= {MIN_POINTS}")
    if box_center is None and box_halfwidths is None:
        width = 12.0
        for attempt in range(6):
            center, half = default_box(logpost, width)
            try:
                mean, cov = _grid_moments(logpost, center, half, k, target_dim, target_fn)
                break
            except BoxTooSmall:
                if attempt == 5:
                    raise
                width *= 1.5
    else:
        if box_center is None or box_halfwidths is None:
            raise InvalidInput("give both box_center and box_halfwidths, or neither")
        center = np.atleast_1d(np.asarray(box_center, dtype=float))
        half = np.broadcast_to(np.asarray(box_halfwidths, dtype=float), center.shape).copy()
        if center.shape != (d,):
            raise DimensionMismatch(f"box_center must have length {d}")
        if np.any(half <= 0):
            raise InvalidInput("box_halfwidths must be positive")
        mean, cov = _grid_moments(logpost, center, half, k, target_dim, target_fn)
    return summary_from_moments(mean, cov)
