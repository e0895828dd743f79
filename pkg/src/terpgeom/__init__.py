"""Numerical toolkit for TERP structures, their classifying spaces and metrics."""
from ._backend import BACKEND
from .curvature import (KSVector, build_H_jet, curvature_contraction, curvature_matrix, g2_check,
                        g3_check, g4_check, horizontal_rank, phi_value)
from .errors import (ConsistencyError, DegenerateError, RankError, ScopeError, TerpError,
                     ValidationError)
from .example3 import (Example3Config, example3_expected, example3_lattice, example3_topology,
                       principal_nilpotent)
from .hodge import check_DcPMHS, check_PMHS_polarized, weight_filtration
from .jets import Jet2
from .laurent import FracExponent, LaurentMatrix, valuation_eliminate
from .phibound import phi_supremum_estimate, phi_supremum_search
from .terp import (Filtration, Lattice, TopologicalData, check_pairing, gamma_twist,
                   hodge_filtration, spectral_numbers)
from .twistor import global_sections, metric_gram, tangent_metric, tau_matrix

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "KSVector", "build_H_jet", "curvature_contraction", "curvature_matrix", "g2_check",
    "g3_check", "g4_check", "horizontal_rank", "phi_value", "ConsistencyError", "DegenerateError",
    "RankError", "ScopeError", "TerpError", "ValidationError", "Example3Config",
    "example3_expected", "example3_lattice", "example3_topology", "principal_nilpotent",
    "check_DcPMHS", "check_PMHS_polarized", "weight_filtration", "Jet2", "FracExponent",
    "LaurentMatrix", "valuation_eliminate", "phi_supremum_estimate", "phi_supremum_search",
    "Filtration", "Lattice", "TopologicalData", "check_pairing", "gamma_twist",
    "hodge_filtration", "spectral_numbers", "global_sections", "metric_gram", "tangent_metric",
    "tau_matrix",
]
