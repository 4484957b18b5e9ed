"""Copula dependence toolkit.

Checks whether a copula is positive or negative measure inducing (PMI/NMI),
computes concordance measures induced by invariant copulas, estimates them
from ranks and tests PMI/NMI with a multiplier bootstrap.
"""
from ._kernels import BACKEND
from .concordance import (PAIRS, ConcordanceSpec, MeasureDescriptor, alpha, biconvex,
                          comparison_slack, get_spec, kappa, kappa_interpolated, pair_specs,
                          spec_interp, spec_mgamma, spec_pi, spec_v)
from .core import (GAMMA, CopulaModel, Reflection, e_map, ec_volume, gamma_average,
                   independence, is_invariant, is_symmetric, lower_bound, m_gamma, mixture,
                   precede, reflect, theta_inverse, theta_transform, upper_bound, v_copula)
from .empirical import (ConcordanceEstimate, RankData, checkerboard, emp_copula, estimate,
                        kendall_tau, load_csv, ranks)
from .errors import (CopulaError, DegenerateVariance, InvalidGenerator, InvalidGenerators,
                     InvalidPickands, NoDensity, NoKernel, NoSamplingPath, NotInvariant,
                     NotSymmetric, OrderViolated, ParamOutOfRange, QuadratureFailure,
                     TiesPresent, TooFewObservations)
from .families import (ArchimedeanGenerator, PickandsFunction, archimedean, evc,
                       example_pickands, fgm, fgm_cubic, fgm_generalized, frank, frechet,
                       gaussian, marshall_olkin, sample)
from .inference import BootstrapConfig, TestReport, bootstrap_variance, pmi_test, run_tests
from .pmi import (PmiReport, check_all, check_pmi_density, check_pmi_kernel, check_pmi_volume,
                  check_pqd)
from .simlab import StudyConfig, rejection_study, variance_study

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "PAIRS",
    "ConcordanceSpec",
    "MeasureDescriptor",
    "alpha",
    "biconvex",
    "comparison_slack",
    "get_spec",
    "kappa",
    "kappa_interpolated",
    "pair_specs",
    "spec_interp",
    "spec_mgamma",
    "spec_pi",
    "spec_v",
    "GAMMA",
    "CopulaModel",
    "Reflection",
    "e_map",
    "ec_volume",
    "gamma_average",
    "independence",
    "is_invariant",
    "is_symmetric",
    "lower_bound",
    "m_gamma",
    "mixture",
    "precede",
    "reflect",
    "theta_inverse",
    "theta_transform",
    "upper_bound",
    "v_copula",
    "ConcordanceEstimate",
    "RankData",
    "checkerboard",
    "emp_copula",
    "estimate",
    "kendall_tau",
    "load_csv",
    "ranks",
    "CopulaError",
    "DegenerateVariance",
    "InvalidGenerator",
    "InvalidGenerators",
    "InvalidPickands",
    "NoDensity",
    "NoKernel",
    "NoSamplingPath",
    "NotInvariant",
    "NotSymmetric",
    "OrderViolated",
    "ParamOutOfRange",
    "QuadratureFailure",
    "TiesPresent",
    "TooFewObservations",
    "ArchimedeanGenerator",
    "PickandsFunction",
    "archimedean",
    "evc",
    "example_pickands",
    "fgm",
    "fgm_cubic",
    "fgm_generalized",
    "frank",
    "frechet",
    "gaussian",
    "marshall_olkin",
    "sample",
    "BootstrapConfig",
    "TestReport",
    "bootstrap_variance",
    "pmi_test",
    "run_tests",
    "PmiReport",
    "check_all",
    "check_pmi_density",
    "check_pmi_kernel",
    "check_pmi_volume",
    "check_pqd",
    "StudyConfig",
    "rejection_study",
    "variance_study",
]
