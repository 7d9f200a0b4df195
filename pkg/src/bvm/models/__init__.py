from .glm import (
    FAMILIES,
    Family,
    GlmModel,
    get_family,
    glm_delta_r,
    glm_excess,
    glm_fisher,
    glm_grad,
    glm_hessian,
    glm_loglik,
    glm_loglik_batch,
    glm_mle,
    glm_n2,
    glm_vmatrix,
    load_design_csv,
    simulate_glm,
)
from .linear import (
    LinearModel,
    linear_delta_r,
    linear_fisher,
    linear_grad,
    linear_hessian,
    linear_loglik,
    linear_n1,
    linear_n2,
    linear_omega,
)
from .poisson import (
    GroupedPoissonModel,
    poisson_full_fisher,
    poisson_full_score,
    poisson_grad,
    poisson_group_sums,
    poisson_hessian,
    poisson_loglik,
    poisson_posterior_params,
    poisson_profile_mle,
)
from .sieve import SieveModel, fourier_basis, sieve_bias, sieve_cap, sieve_choose_m, sieve_design
