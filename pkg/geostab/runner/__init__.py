"""
Scenario runner for geostab.
Coordinates loading, validation, execution and report writing.
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from .executor import AnalysisExecutor, AnalysisResult, sample_grid
from .loader import load_scenario, parse_scenario
from .models import AnalysisBlock, Scenario
from .scenarios import BUILTIN_SCENARIOS, builtin_scenario, write_builtin_scenarios
from .validator import BuiltSystem, ScenarioValidator, build_system
from ..config import GEOSTAB_THREADS, OUTPUT_DIR
from ..errors import ConfigurationError, GeostabError
from ..reports.safety import output_path
from ..reports.writer import emit_report

logger = logging.getLogger(__name__)


class ScenarioRunner:
    """Runs scenario files end to end."""

    def __init__(self, output_dir: Optional[Union[str, Path]] = None, max_workers: int = GEOSTAB_THREADS):
        """
        Args:
            output_dir: Overrides the scenario's output directory
            max_workers: Cap on parallel analyses
        """
        self.output_dir = Path(output_dir) if output_dir is not None else None
        self.max_workers = max_workers
        self.execution_history = []

    def _directory(self, scenario: Optional[Scenario]) -> Path:
        if self.output_dir is not None:
            return self.output_dir
        if scenario is not None and scenario.output.directory:
            return Path(scenario.output.directory)
        return OUTPUT_DIR

    def write_outputs(self, scenario: Scenario, result: AnalysisResult) -> list:
        directory = self._directory(scenario)
        name = f"{scenario.output.prefix}-{result.name}"
        written = []
        for fmt in scenario.output.formats:
            if fmt == "csv" and result.table is None:
                continue
            payload = {"analysis": result.name, "type": result.type, **result.report} if fmt == "json" else result.table
            written.append(str(emit_report(payload, fmt, output_path(directory, name, f".{fmt}"))))
        return written

    def _write_error(self, error: GeostabError, prefix: str, scenario: Optional[Scenario]) -> Optional[str]:
        try:
            path = output_path(self._directory(scenario), prefix, ".error.json")
        except ConfigurationError:
            path = output_path(self._directory(None), "geostab", ".error.json")
        try:
            return str(emit_report(error.to_dict(), "json", path))
        except OSError as e:
            logger.error("could not write error file %s: %s", path, e)
            return None

    def run(self, path: Union[str, Path], validate_only: bool = False) -> Dict[str, Any]:
        """
        Main execution flow.

        Args:
            path: Scenario file
            validate_only: Stop after validation

        Returns:
            {"scenario", "status", "steps", "outputs", "exit_code", "error"}
        """
        result = {
            "scenario": str(path),
            "status": "started",
            "steps": [],
            "outputs": [],
            "exit_code": 0,
            "error": None,
        }
        scenario = None
        prefix = Path(path).stem or "geostab"
        failure: Optional[GeostabError] = None
        try:
            result["steps"].append({"step": "load", "status": "started"})
            scenario = load_scenario(path)
            prefix = scenario.output.prefix
            result["steps"][-1]["status"] = "completed"

            result["steps"].append({"step": "validation", "status": "started"})
            validation = ScenarioValidator(scenario).validate()
            result["checks"] = validation["checks"]
            result["steps"][-1]["status"] = "completed"
            if validate_only:
                result["status"] = "success"
                self.execution_history.append(result)
                return result

            result["steps"].append({"step": "execution", "status": "started"})
            executor = AnalysisExecutor(scenario, validation["system"], self.max_workers)
            outcomes = executor.execute_all()
            failed = [o for o in outcomes if o["status"] == "error"]
            result["steps"][-1]["status"] = "completed_with_errors" if failed else "completed"

            result["steps"].append({"step": "output", "status": "started"})
            for outcome in outcomes:
                if outcome["status"] == "success":
                    result["outputs"].extend(self.write_outputs(scenario, outcome["result"]))
            result["steps"][-1]["status"] = "completed"
            if failed:
                failure = failed[0]["error"]
        except GeostabError as e:
            failure = e
            if result["steps"]:
                result["steps"][-1]["status"] = "error"

        if failure is not None:
            result["status"] = "error"
            result["error"] = failure.to_dict()
            result["exit_code"] = failure.exit_code
            result["error_file"] = self._write_error(failure, prefix, scenario)
            logger.error("%s: %s", type(failure).__name__, failure.message)
        else:
            result["status"] = "success"
        self.execution_history.append(result)
        return result


__all__ = [
    'ScenarioRunner',
    'AnalysisExecutor',
    'AnalysisResult',
    'sample_grid',
    'load_scenario',
    'parse_scenario',
    'Scenario',
    'AnalysisBlock',
    'BuiltSystem',
    'ScenarioValidator',
    'build_system',
    'BUILTIN_SCENARIOS',
    'builtin_scenario',
    'write_builtin_scenarios'
]
