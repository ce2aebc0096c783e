import os
import logging
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

# Configure logging
logging.basicConfig(level=LOG_LEVEL)
logger = logging.getLogger(__name__)


def _env_float(name: str, default: str) -> float:
    raw = os.getenv(name, default)
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{name} must be a number, got {raw!r}")


def _env_int(name: str, default: str) -> int:
    raw = os.getenv(name, default)
    try:
        return int(float(raw))
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")


# Root finding
ROOT_XTOL = _env_float("ROOT_XTOL", "1e-14")
ROOT_MAXITER = _env_int("ROOT_MAXITER", "200")
TANGENT_RESIDUAL_TOL = _env_float("TANGENT_RESIDUAL_TOL", "1e-9")

# Classification
BOUNDARY_BAND = _env_float("BOUNDARY_BAND", "1e-9")
WITNESS_MARGIN = _env_float("WITNESS_MARGIN", "1e-12")
EPS_SCHEDULE_START = _env_int("EPS_SCHEDULE_START", "3")
EPS_SCHEDULE_STOP = _env_int("EPS_SCHEDULE_STOP", "40")

# Enumeration caps
HOM_SIZE_CAP = _env_float("HOM_SIZE_CAP", "1e8")
CUT_NORM_MAX_BLOCKS = _env_int("CUT_NORM_MAX_BLOCKS", "12")
EXACT_CUT_MAX_VERTICES = _env_int("EXACT_CUT_MAX_VERTICES", "20")
EXACT_TAIL_MAX_VERTICES = _env_int("EXACT_TAIL_MAX_VERTICES", "7")

# Sampling and verification
DEFAULT_SEED = _env_int("DEFAULT_SEED", "20140801")
VERIFY_SAMPLES = _env_int("VERIFY_SAMPLES", "1000")

# HTTP service
API_HOST = os.getenv("API_HOST", "0.0.0.0")
API_PORT = _env_int("API_PORT", "8000")


def eps_schedule():
    """Default witness schedule: eps = 2^-j for j = EPS_SCHEDULE_START..EPS_SCHEDULE_STOP."""
    return [2.0 ** -j for j in range(EPS_SCHEDULE_START, EPS_SCHEDULE_STOP + 1)]


logger.debug(
    f"⚙️ Settings: xtol={ROOT_XTOL}, maxiter={ROOT_MAXITER}, margin={WITNESS_MARGIN}, "
    f"hom cap={HOM_SIZE_CAP:g}, seed={DEFAULT_SEED}"
)
