"""Tail-index, extremal-index and dependence estimators."""
from .dependence import angular_edf, distance_correlation, distance_correlation_test
from .extremal import (ExtremalEstimate, InterExceedanceTimes, armax_series,
                       discrepancy_thresholds, find_plateau, inter_exceedance_times,
                       intervals_estimator, kgaps_estimator, plateau_theta, select_K)
from .graph_intervals import graph_inter_exceedances, modified_intervals
from .tail import TailEstimate, fixed_k_estimate, hill, hill_plot, select_k_bootstrap

__all__ = [
    "angular_edf", "distance_correlation", "distance_correlation_test",
    "ExtremalEstimate", "InterExceedanceTimes", "armax_series", "discrepancy_thresholds",
    "find_plateau", "inter_exceedance_times", "intervals_estimator", "kgaps_estimator",
    "plateau_theta", "select_K", "graph_inter_exceedances", "modified_intervals",
    "TailEstimate", "fixed_k_estimate", "hill", "hill_plot", "select_k_bootstrap",
]
