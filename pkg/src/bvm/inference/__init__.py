from .conjugate import (
    as_rng,
    draw_conjugate_theta,
    draw_conjugate_upsilon,
    sample_posterior_conjugate,
    standardized_target_draws,
)
from .diagnostics import (
    BvmDiagnostic,
    diagnose,
    glm_reference,
    histogram_tv,
    moment_matched_kl,
    theta_circ,
)
from .logpost import LogPosterior, Prior, as_prior, build_log_posterior, flat_prior, gaussian_prior
from .quadrature import default_box, posterior_grid_oracle
from .sampler import default_burn_in, sample_posterior_rw
from .summary import PosteriorSummary, batch_means_se, summarize, summary_from_moments
