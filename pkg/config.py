"""Configuration management for pairlab."""

import os
from pathlib import Path
from dotenv import load_dotenv
from pydantic import BaseModel, Field

__version__ = "0.1.0"

# Load .env from package directory, not CWD
_package_dir = Path(__file__).parent
load_dotenv(_package_dir / ".env")


class Config(BaseModel):
    """Application configuration."""

    # Logging
    log_level: str = Field(default_factory=lambda: os.getenv("PAIRLAB_LOG_LEVEL", "WARNING"))

    # Output
    output_dir: str = Field(default_factory=lambda: os.getenv("PAIRLAB_OUTPUT_DIR", "out"))
    csv_float_digits: int = 10

    # Monte-Carlo chunking (pairs generated per chunk)
    chunk_pairs: int = Field(
        default_factory=lambda: int(os.getenv("PAIRLAB_CHUNK_PAIRS", "500000"))
    )

    # TAC defaults (4 satellite periods at 80 MHz)
    tac_range_ns: float = 60.0
    tac_bin_ns: float = 0.1


def get_config() -> Config:
    """Get application configuration."""
    return Config()
