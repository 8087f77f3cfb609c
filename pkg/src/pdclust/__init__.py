"""Probabilistic distance clustering and its Tucker3 factor variant."""

__version__ = "0.1.0"

from .evaluation import assign_labels, dbs, kmeans, misclassification_rate, within_variance
from .factor import FpdcConfig, FpdcModel, fpdc, multistart, project
from .pdcluster import PdcConfig, PdcModel, distances, joint_distance_function, membership_probabilities, pdc, update_centers
from .simdata import MzConfig, generate_independent, generate_mz, preset, r_min
from .tucker import TuckerConfig, TuckerFactors, distance_tensor, explained_variability, tucker3

__all__ = [
    "FpdcConfig", "FpdcModel", "MzConfig", "PdcConfig", "PdcModel", "TuckerConfig", "TuckerFactors",
    "assign_labels", "dbs", "distance_tensor", "distances", "explained_variability", "fpdc",
    "generate_independent", "generate_mz", "joint_distance_function", "kmeans", "membership_probabilities",
    "misclassification_rate", "multistart", "pdc", "preset", "project", "r_min", "tucker3",
    "update_centers", "within_variance",
]
