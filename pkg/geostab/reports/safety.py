"""
Output-path safety for geostab reports.
Report files are only ever written inside the configured output directory.
"""
from pathlib import Path

from ..errors import ConfigurationError

FORBIDDEN_NAME_PARTS = ["..", "~", "/", "\\", "\x00"]


def validate_output_name(name: str) -> str:
    """
    Check a prefix or analysis name used to build a file name.

    Returns:
        The name unchanged

    Raises:
        ConfigurationError: empty, hidden, or containing a path component
    """
    if not name or not name.strip():
        raise ConfigurationError("Output name cannot be empty", {"module": "cli"})
    for part in FORBIDDEN_NAME_PARTS:
        if part in name:
            raise ConfigurationError(f"Output name {name!r} contains {part!r}", {"module": "cli", "name": name})
    if name.startswith("."):
        raise ConfigurationError(f"Output name {name!r} cannot start with '.'", {"module": "cli", "name": name})
    return name


def output_path(directory: Path, name: str, suffix: str) -> Path:
    """
    `<directory>/<name><suffix>`, checked to stay inside directory.

    Raises:
        ConfigurationError: the name escapes the directory
    """
    validate_output_name(name)
    root = Path(directory).resolve()
    target = (root / f"{name}{suffix}").resolve()
    try:
        target.relative_to(root)
    except ValueError:
        raise ConfigurationError(f"Output path escapes {root}: {name}", {"module": "cli"}) from None
    return target
