"""
Built-in scenarios for geostab.

inverted-oscillator  seminorm dependence of the exponent, KCC instability
radial-r2            Jacobi translation of V = r² hitting the boundary
vplus-vminus         two potentials sharing one Jacobi metric
sphere-geodesic      geodesic flow of the round 2-sphere
"""
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Union

from ..reports.safety import output_path

logger = logging.getLogger(__name__)

R2 = "(x1^2 + x2^2)"
V_PLUS = f"2*{R2} - {R2}^2 + 2*step({R2} - 1)*({R2} - 1)^2"
V_MINUS = f"2*{R2} - {R2}^2 - 2*step({R2} - 1)*({R2} - 1)^2"

BUILTIN_SCENARIOS: Dict[str, Dict[str, Any]] = {
    "inverted-oscillator": {
        "system": {
            "kind": "flow",
            "dimension": 1,
            "name": "inverted-oscillator",
            "parameters": {"mu": 1.0},
            "acceleration": ["mu^2*x1"],
        },
        "analysis": [
            {"type": "spectrum", "name": "spectrum-euclidean", "initial_state": [1.0, 0.0],
             "horizon": 50.0, "interval": 0.5, "seminorm": {"kind": "euclidean"}},
            {"type": "lyapunov", "name": "lyapunov-euclidean", "initial_state": [1.0, 0.0],
             "horizon": 50.0, "interval": 0.5, "perturbation": [1.0, 0.0], "seminorm": {"kind": "euclidean"}},
            {"type": "lyapunov", "name": "lyapunov-compact", "initial_state": [1.0, 0.0],
             "horizon": 50.0, "interval": 0.5, "perturbation": [1.0, 0.0],
             "seminorm": {"kind": "custom", "entries": [["1/(x1^2 + 1)"]]}},
            {"type": "local-stability", "name": "deviation", "initial_state": [1.0, 0.0],
             "horizon": 5.0, "interval": 0.5, "operator": "P"},
        ],
        "output": {"prefix": "inverted-oscillator", "formats": ["json", "csv"]},
        "seed": 0,
    },
    "radial-r2": {
        "system": {
            "kind": "natural",
            "dimension": 2,
            "name": "radial-r2",
            "kinetic": [[1.0, 0.0], [0.0, 1.0]],
            "potential": "x1^2 + x2^2",
        },
        "analysis": [
            {"type": "jacobi-translate", "name": "radial", "initial_state": [0.0, 0.0, math.sqrt(2.0), 0.0],
             "energy": 1.0, "jacobi_constant": 2.0, "horizon": 5.0, "interval": 0.05},
        ],
        "output": {"prefix": "radial-r2", "formats": ["json", "csv"]},
        "seed": 0,
    },
    "vplus-vminus": {
        "system": {
            "kind": "natural",
            "dimension": 2,
            "name": "v-plus",
            "kinetic": [[1.0, 0.0], [0.0, 1.0]],
            "potential": V_PLUS,
        },
        "analysis": [
            {"type": "jacobi-translate", "name": "shared-metric", "initial_state": [0.5, 0.0, 0.0, math.sqrt(1.125)],
             "energy": 1.0, "horizon": 10.0, "interval": 0.1, "alternate_potential": V_MINUS,
             "probe_points": [[0.0, 0.0], [0.25, 0.0], [0.5, 0.0], [0.75, 0.0], [0.95, 0.0],
                              [0.0, 0.5], [0.5, 0.5], [0.6, 0.6], [1.2, 0.0]]},
            {"type": "compare", "name": "pictures", "initial_state": [0.5, 0.0, 0.0, math.sqrt(1.125)],
             "energy": 1.0, "horizon": 20.0, "interval": 0.5},
        ],
        "output": {"prefix": "vplus-vminus", "formats": ["json", "csv"]},
        "seed": 0,
    },
    "sphere-geodesic": {
        "system": {
            "kind": "metric",
            "dimension": 2,
            "name": "sphere",
            "metric": [[1.0, 0.0], [0.0, "sin(x1)^2"]],
        },
        "analysis": [
            {"type": "simulate", "name": "equator", "initial_state": [math.pi / 2, 0.0, 0.0, 1.0],
             "horizon": 2 * math.pi, "interval": 0.1},
            {"type": "local-stability", "name": "curvature", "initial_state": [math.pi / 2, 0.0, 0.0, 1.0],
             "horizon": math.pi, "interval": 0.25},
            {"type": "lyapunov", "name": "lyapunov-lift", "initial_state": [math.pi / 2, 0.0, 0.0, 1.0],
             "horizon": 20.0, "interval": 0.5, "perturbation": [0.0, 0.0, 1.0, 0.0],
             "seminorm": {"kind": "vertical_lift", "lift": "diagonal"}},
        ],
        "output": {"prefix": "sphere-geodesic", "formats": ["json", "csv"]},
        "seed": 0,
    },
}


def builtin_scenario(name: str) -> Dict[str, Any]:
    """A fresh copy of a built-in scenario."""
    if name not in BUILTIN_SCENARIOS:
        raise KeyError(f"Unknown built-in scenario: {name}")
    return json.loads(json.dumps(BUILTIN_SCENARIOS[name]))


def write_builtin_scenarios(directory: Union[str, Path]) -> List[Path]:
    """Write every built-in scenario to `<directory>/<name>.json`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, scenario in BUILTIN_SCENARIOS.items():
        path = output_path(directory, name, ".json")
        path.write_text(json.dumps(scenario, indent=2) + "\n", encoding="utf-8")
        logger.info("wrote scenario %s", path)
        paths.append(path)
    return paths
