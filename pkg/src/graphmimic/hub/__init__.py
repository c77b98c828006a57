"""CLI entry points, persistence, configuration, and the HTTP service."""

from .config import DATA_DIR_ENV, data_dir, load_config, resolve_artifact
from .weights import load_weights, save_weights

__all__ = [
    "DATA_DIR_ENV", "data_dir", "load_config", "load_weights",
    "resolve_artifact", "save_weights",
]
