"""Experiment harness: critical-dimension study of the grouped Poisson model,
cubic-shift sweep, GLM check against the quadrature oracle, and budget
evaluation from a JSON file.

Every replicate owns a generator derived from ``(seed, stream, index)`` and
results are merged by replicate index, so outputs do not depend on the number
of worker threads.
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .bounds import ModelConstants, bvm_budget, budget_from_delta, linear_delta, minimal_r0, sieve_budget
from .errors import ConfigError, InvalidInput, ZeroCount
from .inference.conjugate import draw_conjugate_theta
from .inference.diagnostics import THETA_MODES, diagnose, glm_reference
from .inference.quadrature import posterior_grid_oracle
from .inference.sampler import sample_posterior_rw
from .models.glm import FAMILIES, glm_delta_r, glm_fisher, glm_vmatrix, simulate_glm
from .models.poisson import GroupedPoissonModel, poisson_profile_mle

KINDS = ("critdim", "sweep", "glm-check", "bounds")
REGIMES = ("inv_log", "unit", "log")
HIST_BIN_WIDTH = 0.1
MIN_TOTAL_DRAWS = 1000
MAX_DATA_RETRIES = 10_000
# regime checks: |mean - beta/2| and |variance - 1| tolerances, and the
# breakdown threshold for the log regime
MEAN_TOL = 0.15
VAR_TOL = 0.15
BREAKDOWN_MEAN = 2.0


@dataclass
class ExperimentConfig:
    """Settings for one experiment.  Fields not used by ``kind`` are ignored.

    ``threads`` and ``out_dir`` are execution details and are left out of the
    config echo written to results, so outputs are identical across them.
    """

    kind: str = "critdim"
    p_n: int = 1000
    m_n: int | None = None
    beta_regime: str | None = "unit"
    replications: int = 200
    draws_per_replicate: int = 1000
    prior_scale: float = 1.0
    seed: int = 0
    single_data: bool = False
    keep_draws: bool = False
    pairs: list = field(default_factory=list)
    family: str = "logistic"
    n: int = 500
    p_star: int = 2
    upsilon_star: list | None = None
    x: float = 3.0
    b: float = 0.5
    theta_mode: str = "oracle"
    sampler_draws: int = 20_000
    burn_in: int | None = None
    proposal_scale: float | None = None
    points_per_dim: int | None = None
    threads: int = 1
    out_dir: str | None = None

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}", "kind")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1", "threads")
        if self.kind in ("critdim", "sweep"):
            if self.replications < 1:
                raise ConfigError("replications must be >= 1", "replications")
            if self.draws_per_replicate < 1:
                raise ConfigError("draws_per_replicate must be >= 1", "draws_per_replicate")
            if self.replications * self.draws_per_replicate < MIN_TOTAL_DRAWS:
                raise ConfigError(f"replications * draws_per_replicate must be >= {MIN_TOTAL_DRAWS}",
                                  "draws_per_replicate")
            if not self.prior_scale > 0:
                raise ConfigError("prior_scale must be positive", "prior_scale")
        if self.kind == "critdim":
            if self.p_n < 2:
                raise ConfigError("p_n must be >= 2", "p_n")
            if self.m_n is None and self.beta_regime not in REGIMES:
                raise ConfigError(f"beta_regime must be one of {REGIMES} when m_n is not given", "beta_regime")
            if self.m_n is not None and self.m_n < 1:
                raise ConfigError("m_n must be >= 1", "m_n")
        if self.kind == "sweep":
            if not self.pairs:
                raise ConfigError("sweep needs at least one (p, n) pair", "pairs")
            for p, n in self.pairs:
                if p < 2 or n < p:
                    raise ConfigError(f"pair {p}:{n} needs p >= 2 and n >= p", "pairs")
        if self.kind == "glm-check":
            if self.family not in FAMILIES:
                raise ConfigError(f"family must be one of {FAMILIES}", "family")
            if not 1 <= self.p_star <= 3:
                raise ConfigError("p_star must be between 1 and 3 for the quadrature oracle", "p_star")
            if self.n <= self.p_star:
                raise ConfigError("n must exceed p_star", "n")
            if self.theta_mode not in THETA_MODES:
                raise ConfigError(f"theta_mode must be one of {THETA_MODES}", "theta_mode")
            if self.upsilon_star is not None and len(self.upsilon_star) != self.p_star:
                raise ConfigError("upsilon_star must have p_star entries", "upsilon_star")
        return self

    def echo(self):
        """Config as written into result files."""
        out = asdict(self)
        out.pop("threads")
        out.pop("out_dir")
        out["pairs"] = [list(pair) for pair in self.pairs]
        return out


def regime_beta(p_n, regime):
    """Target ``beta_n`` for a named regime."""
    if regime == "inv_log":
        return 1.0 / math.log(p_n)
    if regime == "unit":
        return 1.0
    if regime == "log":
        return math.log(p_n)
    raise ConfigError(f"unknown regime {regime!r}", "beta_regime")


def group_size(p_n, beta):
    """``m_n = round(p_n^2 / beta^2)``, at least 1."""
    return max(1, int(round(p_n * p_n / (beta * beta))))


def replicate_rng(seed, stream, index):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, 0, index)))


def data_rng(seed, stream):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, 1)))


def draw_nonzero_sums(model: GroupedPoissonModel, rng):
    """Group sums with every entry positive; returns ``(z, theta_tilde, rejections)``."""
    for rejected in range(MAX_DATA_RETRIES):
        z = model.simulate_sums(rng)
        try:
            return z, poisson_profile_mle(z, model), rejected
        except ZeroCount:
            continue
    raise ZeroCount(f"all {MAX_DATA_RETRIES} data sets had an empty group")


def _replicate(model, k, seed, stream, index, fixed_data):
    rng = replicate_rng(seed, stream, index)
    if fixed_data is None:
        z, theta_tilde, rejected = draw_nonzero_sums(model, rng)
    else:
        (z, theta_tilde), rejected = fixed_data, 0
    theta = draw_conjugate_theta(model, z, k, rng)
    return math.sqrt(model.m_n) * (theta - theta_tilde), rejected


def run_replicates(model, replications, draws, seed, stream=0, single_data=False, threads=1):
    """Standardized draws ``sqrt(m_n) (theta - theta_tilde)`` for every replicate.

    Returns ``(list of per-replicate arrays, total rejections)`` in replicate order.
    """
    fixed = None
    rejections = 0
    if single_data:
        z, theta_tilde, rejections = draw_nonzero_sums(model, data_rng(seed, stream))
        fixed = (z, theta_tilde)

    def job(i):
        return _replicate(model, draws, seed, stream, i, fixed)

    if threads == 1:
        results = [job(i) for i in range(replications)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, range(replications)))
    return [r[0] for r in results], rejections + sum(r[1] for r in results)


def histogram(values, width=HIST_BIN_WIDTH):
    """Fixed-width bins aligned at multiples of ``width``: rows of
    ``(bin_left, bin_right, count)`` covering every value."""
    values = np.asarray(values, dtype=float)
    idx = np.floor(values / width).astype(np.int64)
    lo = int(idx.min())
    counts = np.bincount(idx - lo)
    return [(round((lo + i) * width, 10), round((lo + i + 1) * width, 10), int(c)) for i, c in enumerate(counts)]


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_hist(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_left", "bin_right", "count"])
        for left, right, count in rows:
            w.writerow([repr(left), repr(right), count])


def _write_draws(path, per_rep):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate", "draw_index", "value"])
        for r, draws in enumerate(per_rep):
            for j, v in enumerate(draws):
                w.writerow([r, j, repr(float(v))])


def _provenance(config):
    return {"config": config.echo(), "seed": config.seed, "version": __version__}


def _ensure_dir(config):
    if config.out_dir is not None:
        os.makedirs(config.out_dir, exist_ok=True)
    return config.out_dir


def regime_verdicts(regime, beta, mean, variance):
    if regime == "log":
        return {"breakdown_mean": mean >= BREAKDOWN_MEAN}
    return {
        "mean_near_half_beta": abs(mean - beta / 2.0) <= MEAN_TOL,
        "variance_near_one": abs(variance - 1.0) <= VAR_TOL,
    }


def run_critdim(config: ExperimentConfig) -> dict:
    """Standardized posterior of the grouped Poisson target in one regime.

    Writes ``summary.json``, ``hist.csv`` and, with ``keep_draws``,
    ``draws.csv`` to ``out_dir`` when it is set.  Returns the summary dict.
    """
    config.validate()
    p = config.p_n
    if config.m_n is not None:
        regime, beta_target, m = None, None, int(config.m_n)
    else:
        regime = config.beta_regime
        beta_target = regime_beta(p, regime)
        m = group_size(p, beta_target)
    try:
        model = GroupedPoissonModel(p, m, prior_scale=config.prior_scale)
    except InvalidInput as exc:
        raise ConfigError(str(exc), "prior_scale") from exc
    per_rep, rejections = run_replicates(model, config.replications, config.draws_per_replicate,
                                         config.seed, 0, config.single_data, config.threads)
    t = np.concatenate(per_rep)
    mean = float(t.mean())
    variance = float(t.var(ddof=1))
    summary = {
        "kind": "critdim",
        "regime": regime,
        "p_n": p,
        "m_n": m,
        "n": model.n,
        "beta_target": beta_target,
        "beta_achieved": model.beta,
        "predicted_mean": model.beta / 2.0,
        "mean": mean,
        "variance": variance,
        "draw_count": int(t.size),
        "rejections": int(rejections),
        "single_data": config.single_data,
        "verdicts": regime_verdicts(regime or "unit", model.beta, mean, variance),
        "provenance": _provenance(config),
    }
    out = _ensure_dir(config)
    if out is not None:
        _write_json(os.path.join(out, "summary.json"), summary)
        _write_hist(os.path.join(out, "hist.csv"), histogram(t))
        if config.keep_draws:
            _write_draws(os.path.join(out, "draws.csv"), per_rep)
    return summary


def loglog_slope(xs, ys):
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def run_sweep(config: ExperimentConfig) -> dict:
    """Posterior shift against dimension over ``(p, n)`` pairs.

    For each pair ``m_n = round(n / p)`` and two shifts are reported: the
    standardized shift ``E sqrt(m_n)(theta - theta_tilde)`` against
    ``beta_n / 2``, and the sum-scale shift ``E p (theta - theta_tilde)``
    against ``p^3 / (2 n)``.
    """
    config.validate()
    rows = []
    rejections = 0
    for stream, (p, n) in enumerate(config.pairs):
        m = max(1, int(round(n / p)))
        try:
            model = GroupedPoissonModel(int(p), m, prior_scale=config.prior_scale)
        except InvalidInput as exc:
            raise ConfigError(str(exc), "prior_scale") from exc
        per_rep, rej = run_replicates(model, config.replications, config.draws_per_replicate,
                                      config.seed, stream, config.single_data, config.threads)
        rejections += rej
        t = np.concatenate(per_rep)
        std_shift = float(t.mean())
        scale = p / math.sqrt(m)
        sum_draws = t * scale
        rows.append({
            "p": int(p),
            "n": int(model.n),
            "n_requested": int(n),
            "m_n": m,
            "beta": model.beta,
            "predicted_shift": p**3 / (2.0 * model.n),
            "empirical_shift": std_shift * scale,
            "shift_se": float(sum_draws.std(ddof=1) / math.sqrt(t.size)),
            "predicted_std_shift": model.beta / 2.0,
            "empirical_std_shift": std_shift,
            "draw_count": int(t.size),
        })
    summary = {
        "kind": "sweep",
        "pairs": rows,
        "rejections": int(rejections),
        "provenance": _provenance(config),
    }
    if len(rows) >= 2 and all(r["empirical_shift"] > 0 for r in rows):
        summary["slope"] = loglog_slope([r["p"] for r in rows], [r["empirical_shift"] for r in rows])
    out = _ensure_dir(config)
    if out is not None:
        _write_json(os.path.join(out, "summary.json"), summary)
        with open(os.path.join(out, "sweep.csv"), "w", newline="") as fh:
            cols = list(rows[0])
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for r in rows:
                w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])
    return summary


def glm_design(n, p_star, rng):
    """Intercept column followed by standard normal covariates."""
    return np.column_stack([np.ones(n), rng.standard_normal((n, p_star - 1))])


def default_upsilon_star(family, p_star):
    ups = np.zeros(p_star)
    if family == "exponential":
        ups[0] = -1.0  # keeps every natural parameter negative
    return ups


def glm_budget(model, x, b):
    """Budget for the full-parameter GLM: no nuisance (``nu0 = 1``), no
    stochastic spread term (``omega = 0``) and ``delta(r) = L r / sqrt(N_2)``."""
    ups = model.upsilon_star
    fisher = glm_fisher(ups, model)
    d_inv = np.linalg.inv(np.linalg.cholesky(fisher))
    b_mat = d_inv @ glm_vmatrix(model) @ d_inv.T
    eig = np.linalg.eigvalsh((b_mat + b_mat.T) / 2.0)
    coeff = glm_delta_r(1.0, model, fisher)
    constants = ModelConstants(nu0=1.0, omega=0.0, g=1.0, b=b, delta_of_r=linear_delta(coeff),
                               p_star=model.p_star, p=model.p_star, trace_B=float(eig.sum()),
                               lambda_B=float(eig.max()))
    return bvm_budget(constants, minimal_r0(constants, x), x)


def run_glm_check(config: ExperimentConfig) -> dict:
    """Simulate a GLM at ``upsilon*``, compute the flat-prior posterior by
    quadrature and by the random-walk sampler, and diagnose both against the
    Gaussian approximation and its budget."""
    config.validate()
    rng = data_rng(config.seed, 0)
    design = glm_design(config.n, config.p_star, rng)
    ups = (np.asarray(config.upsilon_star, dtype=float) if config.upsilon_star is not None
           else default_upsilon_star(config.family, config.p_star))
    model = simulate_glm(design, config.family, ups, rng)
    center, eff = glm_reference(model, mode=config.theta_mode)
    budget = glm_budget(model, config.x, config.b)
    oracle = posterior_grid_oracle(model, points_per_dim=config.points_per_dim)
    diag_oracle = diagnose(oracle, center, eff, budget)
    result = {
        "kind": "glm-check",
        "family": config.family,
        "n": config.n,
        "p_star": config.p_star,
        "upsilon_star": [float(v) for v in ups],
        "theta_mode": config.theta_mode,
        "oracle": {"mean": oracle.mean.tolist(), "cov": oracle.cov.tolist()},
        "diagnostic_oracle": diag_oracle.to_dict(),
        "provenance": _provenance(config),
    }
    if config.sampler_draws > 0:
        chain = sample_posterior_rw(model, n_draws=config.sampler_draws, burn_in=config.burn_in,
                                    proposal_scale=config.proposal_scale,
                                    rng_seed=np.random.SeedSequence(config.seed, spawn_key=(0, 2)),
                                    keep_draws=False)
        result["sampler"] = {
            "mean": chain.mean.tolist(),
            "cov": chain.cov.tolist(),
            "mean_se": chain.mean_se.tolist(),
            "acceptance_rate": chain.acceptance_rate,
        }
        result["diagnostic_sampler"] = diagnose(chain, center, eff, budget).to_dict()
    out = _ensure_dir(config)
    if out is not None:
        _write_json(os.path.join(out, "summary.json"), result)
    return result


BOUNDS_CONSTANT_FIELDS = ("nu0", "omega", "g", "b", "p_star", "delta_coeff", "trace_B", "lambda_B")


def _number(cfg, name, kind=float):
    if name not in cfg:
        raise ConfigError(f"missing required field {name!r}", name)
    val = cfg[name]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"field {name!r} must be a number", name)
    if kind is int:
        if float(val) != int(val):
            raise ConfigError(f"field {name!r} must be an integer", name)
        return int(val)
    return float(val)


def load_bounds_config(path):
    """Parse a bounds JSON file; syntax errors report the line and column."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return cfg


def run_bounds(config) -> dict:
    """Fill a budget from a dict (or a JSON file path).

    Either give ``delta`` directly, or the model constants ``nu0, omega, g, b,
    p_star, delta_coeff, trace_B, lambda_B`` together with ``r0`` or
    ``"solve_r0": true``.  ``x`` and ``p`` are always required;
    ``alpha_m``/``beta_m`` add a sieve correction and ``solve_outer`` also
    reports the outer radius.
    """
    cfg = load_bounds_config(config) if isinstance(config, (str, os.PathLike)) else dict(config)
    x = _number(cfg, "x")
    p = _number(cfg, "p", int)
    if not x > 0:
        raise ConfigError("x must be positive", "x")
    if p < 1:
        raise ConfigError("p must be >= 1", "p")
    if "delta" in cfg:
        delta = _number(cfg, "delta")
        if delta < 0:
            raise ConfigError("delta must be non-negative", "delta")
        r0 = _number(cfg, "r0") if "r0" in cfg else float("nan")
        budget = budget_from_delta(delta, x, p, r0=r0)
    else:
        vals = {name: _number(cfg, name, int if name == "p_star" else float) for name in BOUNDS_CONSTANT_FIELDS}
        try:
            constants = ModelConstants(nu0=vals["nu0"], omega=vals["omega"], g=vals["g"], b=vals["b"],
                                       delta_of_r=linear_delta(vals["delta_coeff"]), p_star=vals["p_star"],
                                       p=p, trace_B=vals["trace_B"], lambda_B=vals["lambda_B"])
        except InvalidInput as exc:
            raise ConfigError(str(exc)) from exc
        if cfg.get("solve_r0", False) is True:
            r0 = minimal_r0(constants, x)
        elif "r0" in cfg:
            r0 = _number(cfg, "r0")
            if not r0 > 0:
                raise ConfigError("r0 must be positive", "r0")
        else:
            raise ConfigError("missing required field 'r0' (or set \"solve_r0\": true)", "r0")
        budget = bvm_budget(constants, r0, x, solve_outer=bool(cfg.get("solve_outer", False)))
    alpha_m = _number(cfg, "alpha_m") if "alpha_m" in cfg else 0.0
    beta_m = _number(cfg, "beta_m") if "beta_m" in cfg else 0.0
    if alpha_m < 0 or beta_m < 0:
        raise ConfigError("alpha_m and beta_m must be non-negative", "alpha_m" if alpha_m < 0 else "beta_m")
    if alpha_m or beta_m:
        budget = sieve_budget(budget, alpha_m, beta_m)
    # JSON has no NaN: an unset radius is reported as null
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
            for k, v in budget.to_dict().items()}


def bounds_json(budget_dict) -> str:
    return json.dumps(budget_dict, indent=2, sort_keys=True) + "\n"
