"""Non-asymptotic error budgets for the Gaussian approximation of the posterior.

Everything here is a deterministic function of user-supplied model constants;
nothing checks that the constants are valid for a given model.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Callable

import numpy as np

from .errors import InvalidInput, NoConvergence
from .gausstools import z_quantile, z_score_bound

MAX_ITER = 200
R_MAX = 1e6


def _exp(v):
    """``exp`` that saturates to ``inf`` instead of raising on overflow."""
    return math.exp(v) if v < 709.0 else math.inf


def linear_delta(coeff: float) -> Callable[[float], float]:
    """``delta(r) = coeff * r``, the shape produced by Lipschitz-Hessian models."""
    return lambda r: coeff * r


@dataclass(frozen=True)
class ModelConstants:
    nu0: float
    omega: float
    g: float
    b: float
    delta_of_r: Callable[[float], float]
    p_star: int
    p: int
    trace_B: float
    lambda_B: float

    def __post_init__(self):
        if not self.nu0 > 0:
            raise InvalidInput(f"nu0 must be positive, got {self.nu0}")
        if self.omega < 0:
            raise InvalidInput(f"omega must be non-negative, got {self.omega}")
        if not self.g > 0:
            raise InvalidInput(f"g must be positive, got {self.g}")
        if not 0 < self.b <= 1:
            raise InvalidInput(f"b must lie in (0, 1], got {self.b}")
        if self.p_star < 1 or self.p < 1 or self.p > self.p_star:
            raise InvalidInput(f"need 1 <= p <= p_star, got p={self.p}, p_star={self.p_star}")
        if not (self.lambda_B > 0 and self.trace_B >= self.lambda_B):
            raise InvalidInput("need trace_B >= lambda_B > 0")
        grid = np.geomspace(1e-3, 1e3, 25)
        vals = np.array([self.delta_of_r(r) for r in grid], dtype=float)
        if np.any(vals < 0) or np.any(np.diff(vals) < -1e-12 * np.abs(vals[1:]).max(initial=1.0)):
            raise InvalidInput("delta_of_r must be non-negative and nondecreasing")


@dataclass(frozen=True)
class BvmBudget:
    r0: float
    x: float
    delta: float
    tau: float
    rho_star: float
    delta_plus: float
    delta_minus: float
    mean_bound: float
    cov_bound: float
    tv_factor: float
    tv_lower_factor: float
    tv_bound: float
    tau_sqrt: float
    outer_radius: float | None = None
    alpha_m: float = 0.0
    beta_m: float = 0.0

    def to_dict(self):
        return asdict(self)


def entropy_term(p_star, x, g):
    """``2 sqrt(p*) + sqrt(2x) + g^{-1} (g^{-2} x + 1) 4 p*``."""
    if p_star < 1 or not x > 0 or not g > 0:
        raise InvalidInput(f"need p_star >= 1, x > 0, g > 0; got {p_star}, {x}, {g}")
    return 2.0 * math.sqrt(p_star) + math.sqrt(2.0 * x) + (x / g**2 + 1.0) * 4.0 * p_star / g


def spread(constants: ModelConstants, r0, x):
    """Local quadratic-approximation error ``{delta(r0) + 6 nu0 qQ(x) omega} r0^2``."""
    if not r0 > 0 or not x > 0:
        raise InvalidInput(f"r0 and x must be positive, got {r0}, {x}")
    c = constants
    stochastic = 0.0
    if c.omega:
        stochastic = 6.0 * c.nu0 * entropy_term(c.p_star, x, c.g) * c.omega
    return (c.delta_of_r(r0) + stochastic) * r0 * r0


def minimal_r0(constants: ModelConstants, x):
    """Smallest local radius meeting both posterior-concentration conditions.

    ``r0 >= z(B, x) + z(p*, x)`` and ``b r0^2 >= z^2(p*, x + (p/2) log(e/b))``.
    """
    c = constants
    zb = z_score_bound(c.trace_B, c.lambda_B, x)
    first = zb + z_quantile(c.p_star, x)
    shifted = x + 0.5 * c.p * math.log(math.e / c.b)
    second = z_quantile(c.p_star, shifted) / math.sqrt(c.b)
    return max(first, second)


def radius_solver(constants: ModelConstants, x, r0):
    """Outer radius ``r`` separating the large-deviation zone.

    Smallest ``r >= r0`` with
    ``r >= (2/b) {z(B, x) + 6 nu0 qQ(x + log(2r/r0)) omega}``, further raised to
    :func:`minimal_r0` if that is larger.  The right-hand side is increasing in
    ``r``, so plain iteration from ``r0`` climbs monotonically to the smallest
    fixed point; bisection is the fallback when iteration stalls.
    """
    c = constants
    if not r0 > 0 or not x > 0:
        raise InvalidInput(f"r0 and x must be positive, got {r0}, {x}")
    zb = z_score_bound(c.trace_B, c.lambda_B, x)
    floor = max(r0, minimal_r0(c, x))

    def rhs(r):
        val = zb
        if c.omega:
            val += 6.0 * c.nu0 * entropy_term(c.p_star, x + math.log(2.0 * r / r0), c.g) * c.omega
        return 2.0 / c.b * val

    r = r0
    for _ in range(MAX_ITER):
        new = max(r0, rhs(r))
        if abs(new - r) <= 1e-8 * max(new, 1.0):
            return max(new, floor)
        r = new
        if r > R_MAX:
            break

    # fallback: sign change of r - rhs(r) on [r0, R_MAX]
    lo, hi = r0, R_MAX
    if hi - rhs(hi) < 0:
        raise NoConvergence(f"radius condition has no solution below {R_MAX:g}")
    if lo - rhs(lo) >= 0:
        return max(lo, floor)
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid - rhs(mid) >= 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-10 * hi:
            return max(hi, floor)
    raise NoConvergence("radius bisection did not converge")


def tail_mass(delta, x):
    """Posterior mass outside the local set: ``exp(2 delta + 2 e^{-x} - x)``."""
    if delta < 0 or not x > 0:
        raise InvalidInput("need delta >= 0 and x > 0")
    return _exp(2.0 * delta + 2.0 * math.exp(-x) - x)


def tau(delta, p, sqrt_form=False):
    """Extra TV slack when ``(S, theta_bar)`` replace ``(D_eff, theta_circ)``.

    Plain form ``0.5 (p d^2 + (1 + d)^2 d^2)``; ``sqrt_form=True`` gives
    ``0.5 sqrt(p d^2 + (1 + d)^2 d^2)`` as used with a sieve prior.
    """
    if delta < 0:
        raise InvalidInput("delta must be non-negative")
    inner = p * delta**2 + (1.0 + delta) ** 2 * delta**2
    return 0.5 * math.sqrt(inner) if sqrt_form else 0.5 * inner


def delta_plus_minus(delta, x):
    if delta < 0 or not x > 0:
        raise InvalidInput("need delta >= 0 and x > 0")
    ex = math.exp(-x)
    tail = _exp(delta + 4.0 * ex - x)
    return 2.0 * delta + 2.0 * ex + 2.0 * tail, 2.0 * delta + 3.0 * ex + 4.0 * tail


def budget_from_delta(delta, x, p, r0=float("nan"), outer_radius=None):
    """Fill a :class:`BvmBudget` from an already computed spread."""
    if delta < 0 or not x > 0:
        raise InvalidInput("need delta >= 0 and x > 0")
    ex = math.exp(-x)
    dplus, dminus = delta_plus_minus(delta, x)
    moment = 4.0 * delta + 16.0 * ex
    upper = _exp(2.0 * delta + 5.0 * ex)
    lower = math.exp(-2.0 * delta - 8.0 * ex)
    return BvmBudget(
        r0=float(r0),
        x=float(x),
        delta=float(delta),
        tau=tau(delta, p),
        tau_sqrt=tau(delta, p, sqrt_form=True),
        rho_star=tail_mass(delta, x),
        delta_plus=dplus,
        delta_minus=dminus,
        mean_bound=moment,
        cov_bound=moment,
        tv_factor=upper,
        tv_lower_factor=lower,
        tv_bound=min(1.0, max(upper - 1.0, 1.0 - lower + ex)),
        outer_radius=outer_radius,
    )


def bvm_budget(constants: ModelConstants, r0, x, solve_outer=False):
    """Compose every budget field for the given local radius and level."""
    delta = spread(constants, r0, x)
    outer = radius_solver(constants, x, r0) if solve_outer else None
    return budget_from_delta(delta, x, constants.p, r0=r0, outer_radius=outer)


def sieve_budget(budget: BvmBudget, alpha_m, beta_m):
    """Add the truncation bias ``alpha_m`` and information loss ``beta_m`` of a sieve."""
    if alpha_m < 0 or beta_m < 0:
        raise InvalidInput("alpha_m and beta_m must be non-negative")
    base = 4.0 * budget.delta + 16.0 * math.exp(-budget.x)
    return replace(
        budget,
        mean_bound=(1.0 + beta_m) * base + alpha_m,
        cov_bound=beta_m + (1.0 + beta_m) * base,
        alpha_m=float(alpha_m),
        beta_m=float(beta_m),
    )


def gaussian_prior_flatness(eps, r0, g_ups_norm):
    """Correction pair ``(alpha(r0), C(r0))`` for a Gaussian prior ``N(0, G^{-2})``."""
    if eps < 0 or not r0 > 0 or g_ups_norm < 0:
        raise InvalidInput("need eps >= 0, r0 > 0, ||G ups*|| >= 0")
    alpha = max(eps * r0 * g_ups_norm, eps * eps * r0 * r0 / 2.0)
    return alpha, _exp(g_ups_norm**2 / 2.0)


def iid_spread(c, p, n):
    """``C sqrt(p^3 / n)``."""
    if not c > 0 or n < 1:
        raise InvalidInput("need c > 0 and n >= 1")
    return c * math.sqrt(p**3 / n)
