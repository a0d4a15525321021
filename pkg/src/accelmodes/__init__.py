"""Arnol'd tongues and accelerator modes of the kicked torus map."""

__version__ = "0.1.0"

from .core_map import CylinderPoint, MapParams, OrbitLabel, TorusPoint, step_torus
from .farey import FareyInterval, Omega, convergents, farey_algorithm
from .gauss_sums import check_identities, gauss_sum
from .islands import area_numerical, area_perturbative
from .orbit_finder import critical_border, find_orbit, find_stable_orbit, scan_tongue
from .perturbation import PendulumParams, fixed_point_prediction
from .spectroscopy import ExperimentalPath, ModePrediction, ep_linear, observable_modes

__all__ = [
    "CylinderPoint", "MapParams", "OrbitLabel", "TorusPoint", "step_torus",
    "FareyInterval", "Omega", "convergents", "farey_algorithm",
    "check_identities", "gauss_sum",
    "area_numerical", "area_perturbative",
    "critical_border", "find_orbit", "find_stable_orbit", "scan_tongue",
    "PendulumParams", "fixed_point_prediction",
    "ExperimentalPath", "ModePrediction", "ep_linear", "observable_modes",
]
