"""Process-level configuration for the exterior decay lab."""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load .env from project root
PROJECT_ROOT = Path(__file__).parent.parent
load_dotenv(PROJECT_ROOT / ".env")

# Logging verbosity (DEBUG, INFO, WARNING, ERROR)
LOG_LEVEL = os.getenv("EDL_LOG", "WARNING").upper()

# Default root directory for run outputs
OUTPUT_DIR = Path(os.getenv("EDL_OUTPUT_DIR", "runs"))

# Default config file picked up when --config is omitted
DEFAULT_CONFIG_NAMES = ("experiment.yaml", "experiment.yml", "experiment.json")

# Float formatting for CSV artifacts
CSV_FLOAT_FORMAT = "%.17g"
