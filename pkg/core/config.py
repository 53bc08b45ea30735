import os
from dotenv import load_dotenv

# Load .env file
load_dotenv()


class Settings:
    """Workbench configuration from environment variables."""

    # Output
    OCT_OUTPUT_DIR: str = os.getenv("OCT_OUTPUT_DIR", "runs")

    # Logging
    OCT_LOG_LEVEL: str = os.getenv("OCT_LOG_LEVEL", "INFO")

    # Worker processes for experiment cells
    OCT_JOBS: int = int(os.getenv("OCT_JOBS", os.cpu_count() or 1))

    # Inference benchmark
    OCT_BENCH_REPS: int = int(os.getenv("OCT_BENCH_REPS", "50"))
    OCT_BENCH_WARMUP: int = int(os.getenv("OCT_BENCH_WARMUP", "10"))


# Create an instance of Settings to use in other files
settings = Settings()
