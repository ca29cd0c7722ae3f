"""
Utility functions for strataflow.
"""

import os
import sys
import hashlib
import logging
import random
from typing import List, Optional, Tuple

logger = logging.getLogger(__name__)


def setup_logging(level: str = 'WARNING', format_str: Optional[str] = None,
                  log_file: Optional[str] = None):
    """Set up logging configuration; records go to stderr, never stdout."""
    if format_str is None:
        format_str = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        directory = os.path.dirname(log_file)
        if directory:
            ensure_directory(directory)
        handlers.append(logging.FileHandler(log_file, mode='a'))

    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format=format_str,
        handlers=handlers,
        force=True,
    )


def ensure_directory(directory: str) -> bool:
    """Ensure directory exists, create if not."""
    try:
        os.makedirs(directory, exist_ok=True)
        return True
    except OSError as e:
        logger.error(f"Failed to create directory {directory}: {e}")
        return False


def file_digest(filepath: str) -> str:
    """Return the sha256 hex digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(filepath, 'rb') as f:
        for block in iter(lambda: f.read(65536), b''):
            digest.update(block)
    return digest.hexdigest()


def format_duration(seconds: float) -> str:
    """Format duration in seconds to human readable format."""
    if seconds < 60:
        return f"{seconds:.1f} seconds"
    elif seconds < 3600:
        minutes = seconds / 60
        return f"{minutes:.1f} minutes"
    else:
        hours = seconds / 3600
        return f"{hours:.1f} hours"


def random_poset(rng: random.Random, size: int,
                 density: float = 0.35) -> Tuple[List[str], List[Tuple[str, str]]]:
    """
    Draw a random poset as (elements, relation pairs).

    Pairs only go from a lower to a higher index, so the relation is acyclic;
    build_poset takes care of the transitive reduction.
    """
    elements = [f"x{i}" for i in range(size)]
    pairs = [(elements[i], elements[j])
             for i in range(size) for j in range(i + 1, size)
             if rng.random() < density]
    return elements, pairs
