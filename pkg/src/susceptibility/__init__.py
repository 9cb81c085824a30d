"""Susceptibility and component-size moments of Erdos-Renyi graphs.

Submodules
----------
poly         exact moment and covariance polynomials
borel        Borel distribution utilities
graph        union-find tracker and G(n, p) / graph-process samplers
stats        streaming moments and Jarque-Bera
experiments  Monte Carlo verification suites
cli          command line interface
"""

from .borel import borel_moment, borel_pmf, pair_pmf, sample_borel, size_biased_moment
from .experiments import (
    ExperimentConfig,
    run_replicates,
    run_suite,
    solve_rho,
    theory_cov_s_kl,
    theory_mean_s_k,
)
from .graph import ComponentTracker, sample_gnp, trajectory
from .poly import (
    Polynomial,
    compute_hp,
    compute_p,
    compute_pi,
    compute_px,
    compute_py,
    compute_q,
    compute_r,
    leading_constant_c,
)

__all__ = [
    "ComponentTracker",
    "ExperimentConfig",
    "Polynomial",
    "borel_moment",
    "borel_pmf",
    "compute_hp",
    "compute_p",
    "compute_pi",
    "compute_px",
    "compute_py",
    "compute_q",
    "compute_r",
    "leading_constant_c",
    "pair_pmf",
    "run_replicates",
    "run_suite",
    "sample_borel",
    "sample_gnp",
    "size_biased_moment",
    "solve_rho",
    "theory_cov_s_kl",
    "theory_mean_s_k",
    "trajectory",
]

__version__ = "0.1.0"
