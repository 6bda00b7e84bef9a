"""Transformed-linear algebra for regularly varying random vectors.

Estimation and decomposition of the tail pairwise dependence matrix (TPDM),
construction of vectors with prescribed tail dependence, and tail risk-region
measures.
"""
__version__ = "0.1.0"

from .xspace import (LOG2, transform, inverse_transform, additive_zero, vector_add,
                     additive_inverse, scalar_mul, matrix_mul, lin_combo, inner_product, norm,
                     quadratic_form)
from .construct import (CoefMatrix, AngularMeasure, TailSample, angular_of_construction,
                        tpdm_of_construction, simulate_construction, simulate_max_linear,
                        measure_joint_exceedance, measure_union_exceedance,
                        mc_exceedance_measure, discretize_angular)
from .tpdm import (Tpdm, estimate_tpdm, exceedances, check_asymptotic_independence,
                   marginal_scale)
from .spectral import (EigenBasis, eigen_decompose, project, reconstruct, pc_tpdm_check, scree,
                       estimate_score_tpdm, balance_diagnostic)
from .cpfact import (CpFactorization, FactorizationError, cp_factorize, cp_rank_bound,
                     cp_rank_search, construct_from_tpdm)
from .marginals import (MarginalModel, ecdf_frechet_transform, hill_estimate, tail_scale,
                        loss_pretransform, rescale_alpha2, fit_marginals)
