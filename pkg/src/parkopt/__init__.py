"""Time-optimal parking trajectories with exact collision-avoidance formulations."""

import jax

jax.config.update("jax_enable_x64", True)

from .formulations import ALL_KINDS, FormulationKind, Margins  # noqa: E402
from .geometry import HalfSpacePolygon, sat_disjoint, vertices_from_halfspaces  # noqa: E402
from .scenarios import SCENARIO_NAMES, Scenario, builtin_scenario, get_scenario  # noqa: E402
from .transcription import NlpProblem, assemble  # noqa: E402
from .vehicle import VehicleParams  # noqa: E402

__all__ = [
    "ALL_KINDS", "FormulationKind", "Margins", "HalfSpacePolygon", "sat_disjoint",
    "vertices_from_halfspaces", "SCENARIO_NAMES", "Scenario", "builtin_scenario", "get_scenario",
    "NlpProblem", "assemble", "VehicleParams",
]
