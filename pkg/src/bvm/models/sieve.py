"""Partially linear regression with a Sobolev nuisance truncated at level ``m``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import Infeasible, InvalidInput, RankDeficient


def fourier_basis(x, m):
    """First ``m`` trigonometric functions on [0, 1], orthonormal in L2:
    ``sqrt(2) cos(2 pi k x)``, ``sqrt(2) sin(2 pi k x)`` for k = 1, 2, ..."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(m):
        k = j // 2 + 1
        trig = np.cos if j % 2 == 0 else np.sin
        cols.append(math.sqrt(2.0) * trig(2.0 * math.pi * k * x))
    return np.column_stack(cols) if cols else np.zeros((x.shape[0], 0))


@dataclass(frozen=True)
class SieveModel:
    target_design: np.ndarray
    points: np.ndarray
    m: int
    s: float
    sobolev_radius: float = 1.0
    n3: float | None = None
    n4: float | None = None
    basis: Callable = fourier_basis

    def __post_init__(self):
        psi = np.atleast_2d(np.asarray(self.target_design, dtype=float))
        if psi.shape[0] == 1 and np.ndim(self.target_design) == 1:
            psi = psi.T
        if self.m < 0:
            raise InvalidInput("m must be non-negative")
        if not self.s > 0:
            raise InvalidInput("s must be positive")
        object.__setattr__(self, "target_design", psi)
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))
        if self.n3 is None:
            object.__setattr__(self, "n3", float(psi.shape[0]))
        if self.n4 is None:
            object.__setattr__(self, "n4", float(psi.shape[0]))

    @property
    def n(self) -> int:
        return self.target_design.shape[0]

    @property
    def p(self) -> int:
        return self.target_design.shape[1]


def sieve_design(model: SieveModel):
    """``[Psi | phi_1(X) .. phi_m(X)]``."""
    xi = np.hstack([model.target_design, model.basis(model.points, model.m)])
    if np.linalg.matrix_rank(xi) < xi.shape[1]:
        raise RankDeficient(f"sieve design with m={model.m} is rank deficient")
    return xi


def sieve_bias(model: SieveModel, m=None):
    """``(alpha_m, beta_m) = (C N3 / m^{2s}, C N3 / N4^2)``; both reduce to
    ``C n / m^{2s}`` and ``C / n`` for a regular design."""
    m = model.m if m is None else m
    if m < 1:
        raise InvalidInput("m must be >= 1")
    c = model.sobolev_radius
    return c * model.n3 / m ** (2.0 * model.s), c * model.n3 / model.n4**2


def sieve_cap(model: SieveModel):
    """Largest admissible truncation, ``n^{1/3} - p``."""
    root = round(model.n ** (1.0 / 3.0))
    cube_root = root if root**3 == model.n else model.n ** (1.0 / 3.0)
    return int(math.floor(cube_root - model.p + 1e-9))


def sieve_choose_m(model: SieveModel, target, enforce_cap=True):
    """Smallest ``m`` with ``max(alpha_m, beta_m) <= target``."""
    if not target > 0:
        raise InvalidInput("target must be positive")
    _, beta = sieve_bias(model, 1)
    if beta > target:
        raise Infeasible(f"beta_m = {beta:.3g} exceeds the target for every m")
    c, s = model.sobolev_radius, model.s
    m = max(1, math.ceil((c * model.n3 / target) ** (1.0 / (2.0 * s)) - 1e-9))
    while m > 1 and sieve_bias(model, m - 1)[0] <= target:
        m -= 1
    while sieve_bias(model, m)[0] > target:
        m += 1
    if enforce_cap and m > sieve_cap(model):
        raise Infeasible(f"need m = {m} but the cap n^(1/3) - p allows {sieve_cap(model)}")
    return m
