import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent
DEFAULT_INSTANCE_PATH = BASE_DIR / "instance"
DEFAULT_OUTPUT_ROOT = DEFAULT_INSTANCE_PATH / "output"


class Config:
    BALLHARM_LOG_LEVEL = os.getenv("BALLHARM_LOG_LEVEL", "WARNING").upper()
    BALLHARM_OUTPUT_DIR = os.getenv("BALLHARM_OUTPUT_DIR", str(DEFAULT_OUTPUT_ROOT))
    BALLHARM_WORKERS = int(os.getenv("BALLHARM_WORKERS") or os.cpu_count() or 1)

    BALLHARM_QUAD_OVERSAMPLE = int(os.getenv("BALLHARM_QUAD_OVERSAMPLE", 20))
    BALLHARM_CONVERGENCE_STEP = int(os.getenv("BALLHARM_CONVERGENCE_STEP", 10))
    BALLHARM_CONVERGENCE_TOL = float(os.getenv("BALLHARM_CONVERGENCE_TOL", 1e-9))
    BALLHARM_CONVERGENCE_ABORT = float(os.getenv("BALLHARM_CONVERGENCE_ABORT", 1e-6))
    BALLHARM_TAIL_FRACTION = float(os.getenv("BALLHARM_TAIL_FRACTION", 0.01))
    BALLHARM_TAIL_WINDOW = int(os.getenv("BALLHARM_TAIL_WINDOW", 5))
    BALLHARM_CERTIFY_DEGREE = int(os.getenv("BALLHARM_CERTIFY_DEGREE") or 0) or None
    BALLHARM_PRECISION_FLOOR = float(os.getenv("BALLHARM_PRECISION_FLOOR", 1e-11))
    BALLHARM_RATE_BOUND = float(os.getenv("BALLHARM_RATE_BOUND", 3.0))

    @staticmethod
    def init_app(app):
        output_path = Path(app.config["BALLHARM_OUTPUT_DIR"])
        output_path.mkdir(parents=True, exist_ok=True)
