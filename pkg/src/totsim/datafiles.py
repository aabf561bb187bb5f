"""Access to bundled data files, overridable via TOT_DATA_DIR."""

from __future__ import annotations

import json
import os
from importlib import resources
from pathlib import Path
from typing import Any

ENV_DATA_DIR = "TOT_DATA_DIR"


def load_json(name: str) -> Any:
    """Load a data file by name.

    If the TOT_DATA_DIR environment variable is set, <dir>/<name> is
    read instead of the packaged copy.
    """
    override = os.environ.get(ENV_DATA_DIR)
    if override:
        return json.loads(Path(override).joinpath(name).read_text("utf-8"))
    return json.loads(resources.files("totsim.data").joinpath(name).read_text("utf-8"))
