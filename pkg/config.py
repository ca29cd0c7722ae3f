"""
Configuration settings for strataflow.
"""

import os
import logging
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)


class StrataConfig:
    """Configuration class for the strataflow library and CLI."""

    # Property-test utilities only; enumeration never reads it
    SEED: int = int(os.getenv('STRATAFLOW_SEED', 20240601))
    PROPERTY_SAMPLES: int = int(os.getenv('STRATAFLOW_SAMPLES', 200))
    MAX_RANDOM_SIZE: int = 8

    # Poset isomorphism search
    ISO_SEARCH_BOUND: int = int(os.getenv('STRATAFLOW_ISO_BOUND', 24))

    # Enumeration
    MAX_CODIM: int = 3
    OUTPUT_DIR: str = os.getenv('STRATAFLOW_OUTPUT_DIR', 'output')

    # Logging Configuration
    LOG_LEVEL: str = os.getenv('LOG_LEVEL', 'WARNING')
    LOG_FORMAT: str = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    LOG_FILE: Optional[str] = os.getenv('STRATAFLOW_LOG_FILE')

    @classmethod
    def validate(cls) -> bool:
        """Validate configuration values."""
        valid = True
        if cls.ISO_SEARCH_BOUND < 1:
            logger.error(f"STRATAFLOW_ISO_BOUND must be positive, got {cls.ISO_SEARCH_BOUND}")
            valid = False
        if cls.PROPERTY_SAMPLES < 1:
            logger.error(f"STRATAFLOW_SAMPLES must be positive, got {cls.PROPERTY_SAMPLES}")
            valid = False
        if not hasattr(logging, cls.LOG_LEVEL.upper()):
            logger.error(f"Unknown LOG_LEVEL: {cls.LOG_LEVEL}")
            valid = False
        return valid

    @classmethod
    def print_config(cls):
        """Print current configuration."""
        print("Strataflow Configuration:")
        print(f"  Seed: {cls.SEED}")
        print(f"  Property samples: {cls.PROPERTY_SAMPLES}")
        print(f"  Isomorphism bound: {cls.ISO_SEARCH_BOUND}")
        print(f"  Max codimension: {cls.MAX_CODIM}")
        print(f"  Output directory: {cls.OUTPUT_DIR}")
        print(f"  Log level: {cls.LOG_LEVEL}")
        print(f"  Log file: {cls.LOG_FILE or 'none'}")


if __name__ == "__main__":
    StrataConfig.print_config()

    if StrataConfig.validate():
        print("Configuration is valid")
    else:
        print("Configuration is invalid")
