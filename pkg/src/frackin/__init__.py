"""k-Gamma/k-Bessel special functions, Mittag-Leffler functions and
closed-form solutions of fractional kinetic equations, with brute-force
Volterra and Laplace oracles to check them."""

from .bessel_family import (
    KBesselParams,
    bessel_i,
    bessel_j,
    gen_bessel_w,
    gen_mod_k_bessel,
    k_bessel,
    phi_transform,
    spherical_j,
)
from .fracops import (
    SolutionCurve,
    TimeGrid,
    numeric_laplace,
    ode_oracle_nu1,
    product_trapezoid_weights,
    rl_integral_grid,
    rl_integral_power,
    standard_decay,
    volterra_solve,
)
from .kinetic import (
    KineticProblem,
    Variant,
    coeff,
    curve,
    forcing,
    laplace_solution_thm1,
    rate,
    solve,
    solve_cor1,
    solve_cor2,
    solve_thm1,
    solve_thm2_derived,
    solve_thm2_published,
    solve_thm3_derived,
    solve_thm3_published,
)
from .kspecial import (
    gamma,
    gamma_k,
    ln_gamma,
    ln_gamma_k,
    log_pochhammer_k,
    pochhammer,
    pochhammer_k,
    rgamma,
)
from .mittag_leffler import MLParams, mittag_leffler, ml, ml_one
from .series import (
    DEFAULT_CONTROL,
    ConvergenceError,
    DomainError,
    EvalResult,
    SeriesControl,
    Status,
    sum_series,
)

__version__ = "0.1.0"
