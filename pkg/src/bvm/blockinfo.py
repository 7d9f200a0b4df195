"""Partitioned information-matrix algebra.

The full information is stored as three blocks

    [[D2, A],
     [A.T, H2]]

with ``D2`` the ``p x p`` target block, ``A`` the ``p x q`` cross block and
``H2`` the ``q x q`` nuisance block.  ``q == 0`` (no nuisance) is allowed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DimensionMismatch, InvalidInput, NotPositiveDefinite

SPD_RTOL = 1e-10
SYM_RTOL = 1e-10


def _as_matrix(a, rows, cols, name):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if rows == 0 or cols == 0:
        return np.zeros((rows, cols))
    if a.shape != (rows, cols):
        raise DimensionMismatch(f"{name} has shape {a.shape}, expected {(rows, cols)}")
    return a


def check_spd(m, name="matrix"):
    """Raise NotPositiveDefinite unless ``m`` is symmetric with
    ``lambda_min > SPD_RTOL * lambda_max``; return the eigendecomposition."""
    m = np.asarray(m, dtype=float)
    scale = max(np.abs(m).max(), 1e-300)
    if not np.allclose(m, m.T, rtol=0.0, atol=SYM_RTOL * scale):
        raise NotPositiveDefinite(f"{name} is not symmetric")
    w, v = linalg.eigh(m)
    if not np.all(np.isfinite(w)) or w[0] <= SPD_RTOL * max(w[-1], 0.0) or w[-1] <= 0:
        raise NotPositiveDefinite(
            f"{name} is not positive definite (eigenvalues {w[0]:.3e} .. {w[-1]:.3e})"
        )
    return w, v


def sym_sqrt(m, name="matrix"):
    """Symmetric square root and its inverse via eigendecomposition."""
    w, v = check_spd(m, name)
    s = np.sqrt(w)
    return (v * s) @ v.T, (v / s) @ v.T


@dataclass(frozen=True)
class FullInfo:
    target_block: np.ndarray
    cross_block: np.ndarray
    nuisance_block: np.ndarray

    def __post_init__(self):
        d2 = np.atleast_2d(np.asarray(self.target_block, dtype=float))
        p = d2.shape[0]
        h2 = np.asarray(self.nuisance_block, dtype=float)
        q = 0 if h2.size == 0 else np.atleast_2d(h2).shape[0]
        h2 = _as_matrix(h2, q, q, "nuisance_block")
        a = _as_matrix(self.cross_block, p, q, "cross_block")
        _as_matrix(d2, p, p, "target_block")
        check_spd(d2, "target_block")
        if q:
            check_spd(h2, "nuisance_block")
        for name, val in (("target_block", d2), ("cross_block", a), ("nuisance_block", h2)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def p(self) -> int:
        return self.target_block.shape[0]

    @property
    def q(self) -> int:
        return self.nuisance_block.shape[0]

    @classmethod
    def from_full(cls, full, p):
        """Split a ``(p+q) x (p+q)`` matrix with the target in the leading ``p`` rows."""
        full = np.asarray(full, dtype=float)
        return cls(full[:p, :p], full[:p, p:], full[p:, p:])

    def full(self) -> np.ndarray:
        return np.block([[self.target_block, self.cross_block],
                         [self.cross_block.T, self.nuisance_block]])


@dataclass(frozen=True)
class EfficientInfo:
    """Efficient information with its inverse and symmetric square root."""

    matrix: np.ndarray
    inverse: np.ndarray
    sqrt: np.ndarray
    inv_sqrt: np.ndarray

    @property
    def p(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_matrix(cls, m):
        m = np.atleast_2d(np.asarray(m, dtype=float))
        m = 0.5 * (m + m.T)
        root, inv_root = sym_sqrt(m, "efficient information")
        return cls(matrix=m, inverse=inv_root @ inv_root, sqrt=root, inv_sqrt=inv_root)


@dataclass(frozen=True)
class FullScore:
    target_grad: np.ndarray
    nuisance_grad: np.ndarray

    def __post_init__(self):
        for name in ("target_grad", "nuisance_grad"):
            v = np.atleast_1d(np.asarray(getattr(self, name), dtype=float)).ravel()
            if not np.all(np.isfinite(v)):
                raise InvalidInput(f"{name} has non-finite entries")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class IdentifiabilityReport:
    nu: float
    a_target: float
    a_nuisance: float
    a_full: float

    @property
    def satisfied(self) -> bool:
        return self.nu < 1.0


def _nuisance_solve(info, rhs):
    """H2^{-1} rhs using a Cholesky factor of the nuisance block."""
    try:
        c = linalg.cho_factor(info.nuisance_block)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefinite("nuisance block Cholesky failed") from exc
    return linalg.cho_solve(c, rhs)


def schur_complement(info: FullInfo) -> EfficientInfo:
    """Efficient information ``D2 - A H2^{-1} A.T``."""
    if info.q == 0:
        return EfficientInfo.from_matrix(info.target_block)
    correction = info.cross_block @ _nuisance_solve(info, info.cross_block.T)
    return EfficientInfo.from_matrix(info.target_block - correction)


def efficient_score(info: FullInfo, score: FullScore, eff: EfficientInfo | None = None):
    """Standardized efficient score ``D_eff^{-1} (grad_theta - A H2^{-1} grad_eta)``."""
    if score.target_grad.shape[0] != info.p:
        raise DimensionMismatch(f"target_grad has length {score.target_grad.shape[0]}, expected {info.p}")
    nuis = score.nuisance_grad if info.q else np.zeros(0)
    if nuis.shape[0] != info.q:
        raise DimensionMismatch(f"nuisance_grad has length {nuis.shape[0]}, expected {info.q}")
    if eff is None:
        eff = schur_complement(info)
    grad = score.target_grad
    if info.q:
        grad = grad - info.cross_block @ _nuisance_solve(info, nuis)
    return eff.inv_sqrt @ grad


def _max_generalized_eig(v2, d2):
    # largest eigenvalue of (V2, D2) after whitening by the Cholesky factor of D2
    try:
        low = linalg.cholesky(d2, lower=True)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefinite("D block Cholesky failed") from exc
    w = linalg.solve_triangular(low, v2, lower=True)
    w = linalg.solve_triangular(low, w.T, lower=True)
    return float(linalg.eigvalsh(0.5 * (w + w.T))[-1])


def identifiability(info: FullInfo, v_full) -> IdentifiabilityReport:
    """Angle bound ``nu`` and the smallest ``a`` with ``a^2 D^2 >= V^2`` per block."""
    p, q = info.p, info.q
    v_full = np.asarray(v_full, dtype=float)
    if v_full.shape != (p + q, p + q):
        raise DimensionMismatch(f"v_full has shape {v_full.shape}, expected {(p + q, p + q)}")
    _, d_inv = sym_sqrt(info.target_block, "target_block")
    if q:
        m = d_inv @ info.cross_block @ _nuisance_solve(info, info.cross_block.T) @ d_inv
        nu = float(np.abs(linalg.eigvalsh(0.5 * (m + m.T))).max())
    else:
        nu = 0.0

    def a_of(v2, d2):
        return float(np.sqrt(max(_max_generalized_eig(v2, d2), 0.0)))

    a_target = a_of(v_full[:p, :p], info.target_block)
    a_nuisance = a_of(v_full[p:, p:], info.nuisance_block) if q else 0.0
    a_full = a_of(v_full, info.full())
    return IdentifiabilityReport(nu=nu, a_target=a_target, a_nuisance=a_nuisance, a_full=a_full)
