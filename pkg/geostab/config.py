import os
from pathlib import Path
from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parents[1]

load_dotenv()


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name, "")
    try:
        return int(raw) if raw.strip() else default
    except ValueError:
        return -1


GEOSTAB_THREADS = _int_env("GEOSTAB_THREADS", os.cpu_count() or 1)
OUTPUT_DIR = Path(os.getenv("GEOSTAB_OUTPUT_DIR", "output"))
LOG_LEVEL = os.getenv("GEOSTAB_LOG_LEVEL", "WARNING").upper()

# integrator
DEFAULT_METHOD = "rk45"  # or rk4
DEFAULT_ATOL = 1e-10
DEFAULT_RTOL = 1e-9
DEFAULT_STEP = 1e-2
DEFAULT_MAX_STEPS = 1_000_000
EVENT_BISECTION_ITERATIONS = 60
EVENT_TOLERANCE = 1e-10

# lyapunov
DEFAULT_RENORM_INTERVAL = 0.5
DEFAULT_HORIZON = 100.0
NEGATIVE_FORM_TOL = 1e-12
SEMINORM_COLLAPSE = 1e-300

# linear algebra and geometry
PIVOT_THRESHOLD = 1e-12
DEGENERACY_THRESHOLD = 1e-12
RANK_THRESHOLD = 1e-12
SYMMETRY_TOL = 1e-12
EIGEN_MAX_ITERATIONS = 60  # per eigenvalue

# local stability
LOCAL_STABILITY_TOL = 1e-8

# jacobi translation
DEFAULT_JACOBI_CONSTANT = 2.0
BOUNDARY_BAND = 1e-8
BOUNDARY_FLOOR = 1e-10

# reports
SCHEMA_VERSION = "1.0"
FLOAT_DIGITS = 17


def validate_config() -> bool:
    """
    Check the environment-derived settings.

    Returns:
        True if usable, False otherwise (the problem is printed)
    """
    if GEOSTAB_THREADS < 1:
        print(f"GEOSTAB_THREADS must be a positive integer, got {os.getenv('GEOSTAB_THREADS')!r}")
        return False
    if LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        print(f"GEOSTAB_LOG_LEVEL not recognised: {LOG_LEVEL}")
        return False
    return True
