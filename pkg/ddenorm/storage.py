"""
Storage utilities for run artifacts
JSON documents with sorted keys and CSV tables at 17 significant digits
"""

import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd
import scipy
import sympy

from ddenorm.errors import _jsonable

CSV_FLOAT_FORMAT = "%.17g"


def package_version() -> str:
    from ddenorm import __version__
    return __version__


def metadata(
    config: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
    tolerances: Optional[Dict[str, Any]] = None,
    command: Optional[str] = None,
) -> Dict[str, Any]:
    """Provenance block attached to every artifact; only the timestamp varies between runs"""
    return {
        "command": command,
        "versions": {
            "ddenorm": package_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "sympy": sympy.__version__,
            "pandas": pd.__version__,
        },
        "seed": seed,
        "tolerances": tolerances or {},
        "config": config or {},
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def to_json_value(value: Any) -> Any:
    """Numpy, complex and non-finite values mapped onto JSON"""
    value = _jsonable(value)
    if isinstance(value, dict):
        return {k: to_json_value(v) for k, v in value.items()}
    if isinstance(value, list):
        return [to_json_value(v) for v in value]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def dumps(document: Dict[str, Any]) -> str:
    return json.dumps(to_json_value(document), sort_keys=True, indent=2, allow_nan=False) + "\n"


class LocalStorage:
    """Output directory of one run"""

    def __init__(self, base_dir: str = "./out"):
        self.base_dir = Path(base_dir)
        self.schemas_dir = self.base_dir / "schemas"

        # Create directories
        self.base_dir.mkdir(parents=True, exist_ok=True)

    def path(self, filename: str) -> Path:
        return self.base_dir / filename

    def save_json(self, filename: str, document: Dict[str, Any]) -> str:
        """
        Write a JSON artifact

        Args:
            filename: name inside the output directory
            document: JSON-able mapping (numpy and complex values allowed)

        Returns:
            Path to the saved file
        """
        file_path = self.path(filename)
        file_path.write_text(dumps(document))
        return str(file_path)

    def load_json(self, filename: str) -> Dict[str, Any]:
        return json.loads(self.path(filename).read_text())

    def save_csv(self, filename: str, frame: pd.DataFrame) -> str:
        file_path = self.path(filename)
        frame.to_csv(file_path, index=False, float_format=CSV_FLOAT_FORMAT)
        return str(file_path)

    def save_schema(self, name: str, schema: Dict[str, Any]) -> str:
        self.schemas_dir.mkdir(parents=True, exist_ok=True)
        file_path = self.schemas_dir / f"{name}.schema.json"
        file_path.write_text(json.dumps(schema, sort_keys=True, indent=2) + "\n")
        return str(file_path)

    def list_artifacts(self) -> list:
        if not self.base_dir.exists():
            return []
        return sorted(f.name for f in self.base_dir.iterdir() if f.is_file())
