# config/settings.py
import math
import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

VERSION = "0.1.0"

# Base paths
BASE_DIR = Path(__file__).resolve().parent.parent
DATA_DIR = Path(os.getenv("KIRCHHOFF_DATA_DIR", str(BASE_DIR / "data")))
REPORTS_DIR = DATA_DIR / "reports"
LOGS_DIR = DATA_DIR / "logs"
SCENARIOS_DIR = BASE_DIR / "config" / "scenarios"

# Ensure directories exist
for dir_path in [REPORTS_DIR, LOGS_DIR]:
    dir_path.mkdir(parents=True, exist_ok=True)

# Logging
LOG_LEVEL = os.getenv("KIRCHHOFF_LOG_LEVEL", "INFO").upper()

# Mesh defaults
DEFAULT_H_1D = math.pi / 2000
DEFAULT_H_2D_FRACTION = 1.0 / 64  # of the bounding-box diagonal
POINT_LOCATION_TOL = 1e-10
POINT_LOCATION_CANDIDATES = 12

# Eigensolver (inverse power iteration)
EIGEN_MAX_ITER = 200
EIGEN_REL_INCREMENT_TOL = 1e-12
# residual is measured as a density (row residual over lumped mass), relative to lambda
EIGEN_RESIDUAL_TOL = float(os.getenv("KIRCHHOFF_EIGEN_RESIDUAL_TOL", "1e-12"))
EIGEN_ROUNDOFF_FACTOR = 64.0
EIGEN_DOMAIN_ORDER_TOL = 1e-8

# Coefficient catalog
MONOTONE_TOL = 1e-12
M_GRID_POINTS = int(os.getenv("KIRCHHOFF_M_GRID_POINTS", "512"))
M_GRID_SPAN = 1e-4  # smallest grid point as a fraction of t_max
M_SCAN_T_MAX = 10.0

# Construction
TAU_SAFETY = 1e-3
TAU_MAX_HALVINGS = 40
EPSILON_FLOOR = 1e-12
EPSILON_REL_TOL = 1e-6
NORM_REL_TOL = 1e-6
WEAK_ALPHA_CAP = 1.5

# Verification
STRICT_MARGIN_TOL = 1e-8
SUPERSOLUTION_TOL = 1e-8
ORDERING_TOL = 1e-9
TOUCH_TOL = 1e-9
FORCED_VALUE_TOL = 1e-6
ROOT_SCAN_POINTS = 4096
ROOT_RESIDUAL_TOL = 1e-9
SOLUTION_SCAN_FACTOR = 10.0  # s_max as a multiple of the forced value A*alpha
