"""Flat key=value config files and the artifact data directory.

Config keys mirror CLI flag dests (epochs=200, arch=sage, ...); flags
always win over file values. GRAPHMIMIC_DATA_DIR sets the default root
for artifacts written with relative paths.
"""

from __future__ import annotations

import os

DATA_DIR_ENV = "GRAPHMIMIC_DATA_DIR"


def data_dir() -> str:
    return os.environ.get(DATA_DIR_ENV, ".")


def resolve_artifact(path: str) -> str:
    """Relative artifact paths land under the data dir; absolute pass through."""
    if os.path.isabs(path):
        return path
    root = data_dir()
    os.makedirs(root, exist_ok=True)
    return os.path.join(root, path)


def load_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values
