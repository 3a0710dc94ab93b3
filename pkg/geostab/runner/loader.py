"""
Scenario loader for geostab.
Reads scenario files and turns parse and schema problems into ScenarioError.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from pydantic import ValidationError

from .models import Scenario
from ..errors import ScenarioError

logger = logging.getLogger(__name__)


def parse_scenario(data: Dict[str, Any], source: str = "<scenario>") -> Scenario:
    """
    Validate a decoded scenario object against the schema.

    Raises:
        ScenarioError: with the location of the first schema problem
    """
    if not isinstance(data, dict):
        raise ScenarioError(f"{source}: scenario must be a JSON object", {"module": "cli", "source": source})
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise ScenarioError(
            f"{source}: {location or 'scenario'}: {first['msg']}",
            {"module": "cli", "source": source, "location": location, "problems": e.error_count()},
        ) from None


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    Read and validate a scenario file.

    Raises:
        ScenarioError: unreadable file, malformed JSON (with line and column) or schema violation
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"Cannot read scenario {path}: {e.strerror or e}", {"module": "cli", "source": str(path)}) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(
            f"{path}: malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}",
            {"module": "cli", "source": str(path), "line": e.lineno, "column": e.colno},
        ) from None
    scenario = parse_scenario(data, str(path))
    logger.info("loaded scenario %s with %d analyses", path, len(scenario.analyses))
    return scenario
