import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Logging configuration
LOG_LEVEL = os.getenv("HYDROMONITOR_LOG_LEVEL", "INFO")

# Output configuration: default parent directory for run outputs
OUT_DIR = os.getenv("HYDROMONITOR_OUT_DIR", "runs")
