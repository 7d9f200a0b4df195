"""Finite-sample Bernstein-von Mises diagnostics for semiparametric targets.

Submodules: :mod:`bvm.blockinfo` (partitioned information algebra),
:mod:`bvm.gausstools` (Gaussian deviation and divergence bounds),
:mod:`bvm.bounds` (error budgets), :mod:`bvm.models`, :mod:`bvm.inference`
and :mod:`bvm.experiments` with the ``bvm`` command line.
"""
from importlib.metadata import PackageNotFoundError, version

from . import blockinfo, bounds, errors, gausstools, inference, models
from .blockinfo import (
    EfficientInfo,
    FullInfo,
    FullScore,
    IdentifiabilityReport,
    efficient_score,
    identifiability,
    schur_complement,
)
from .bounds import BvmBudget, ModelConstants, bvm_budget, radius_solver, spread
from .errors import BvmError

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"
