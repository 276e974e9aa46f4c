"""Spectral and percolation analysis of cross-border portfolio investment networks."""

__version__ = "0.1.0"

from .netcore import (CountryRegistry, NoCoreError, PinSnapshot, PositionRecord, build_snapshot,
                      deflate, eccdf, edge_density, node_measures)
from .spectral import (SpectralError, eigenvector_centrality, fiedler_bisection,
                       normalized_laplacian, spectrum_summary)
from .partition import classification_triple, cut_metrics, random_baseline
from .percolation import detect_percolation_point, percolation_scan
from .instability import (LiftCriterion, exhaustive_search, lambda_after_removal, ofc_quotient,
                          two_step_search)
from .nlsmm import TimeSeries, fit, interpolate_semiannual, model_value, pearson, warning_series
