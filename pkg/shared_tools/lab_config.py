"""Lab-wide parameter defaults, typed accessors and the resolved experiment configuration."""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from shared_tools.approximants import DEFAULT_APPROX_PARAMS
from shared_tools.branches import DEFAULT_BRANCH_PARAMS
from shared_tools.dilation_lab import DEFAULT_DILATION_PARAMS
from shared_tools.spaces import DEFAULT_SPACES_PARAMS
from shared_tools.zerosets import DEFAULT_ZEROSET_PARAMS

DEFAULT_LAB_PARAMS: Dict[str, Any] = {
    "debug_mode": False,
    "THREADS": 1,
    "SEED": 0,
    "OUTPUT_FORMAT": "auto",
    "LATTICE_MIN": -2.0,
    "LATTICE_MAX": 2.5,
    "LATTICE_N": 7,
}
DEFAULT_LAB_PARAMS.update(DEFAULT_SPACES_PARAMS)
DEFAULT_LAB_PARAMS.update(DEFAULT_APPROX_PARAMS)
DEFAULT_LAB_PARAMS.update(DEFAULT_DILATION_PARAMS)
DEFAULT_LAB_PARAMS.update(DEFAULT_ZEROSET_PARAMS)
DEFAULT_LAB_PARAMS.update(DEFAULT_BRANCH_PARAMS)

# Types handed to load_parameters_from_file; list-valued keys stay strings
# and are split by _param_float_list.
EXPECTED_LAB_PARAMETERS: Dict[str, type] = {
    key: (bool if isinstance(value, bool) else int if isinstance(value, int) else
          float if isinstance(value, float) else str)
    for key, value in DEFAULT_LAB_PARAMS.items()
}
EXPECTED_LAB_PARAMETERS.update({
    "LOG_FILE": str,
    "PROGRESS_JSON_FILE": str,
    "PERFORMANCE_FILE": str,
    "RESULTS_DIR": str,
})


def _float_or_none(value: Any) -> Optional[float]:
    if value is None or value == "":
        return None
    try:
        numeric = float(value)
    except (TypeError, ValueError):
        return None
    return numeric if math.isfinite(numeric) else None


def _param_float(params: Dict[str, Any], key: str) -> float:
    value = _float_or_none(params.get(key))
    return float(value if value is not None else DEFAULT_LAB_PARAMS[key])


def _param_int(params: Dict[str, Any], key: str) -> int:
    value = _float_or_none(params.get(key))
    return int(value if value is not None else DEFAULT_LAB_PARAMS[key])


def _param_bool(params: Dict[str, Any], key: str) -> bool:
    value = params.get(key)
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in ("true", "yes", "1", "false", "no", "0"):
        return value.strip().lower() in ("true", "yes", "1")
    return bool(DEFAULT_LAB_PARAMS[key])


def _param_float_list(params: Dict[str, Any], key: str) -> List[float]:
    """Comma-separated floats; the default when any entry fails to parse."""
    value = params.get(key)
    if isinstance(value, (list, tuple)):
        parsed = [_float_or_none(v) for v in value]
    elif isinstance(value, str) and value.strip():
        parsed = [_float_or_none(v.strip()) for v in value.split(",")]
    else:
        parsed = [None]
    if not parsed or any(v is None for v in parsed):
        return [float(v) for v in DEFAULT_LAB_PARAMS[key]]
    return [float(v) for v in parsed]


def threads_from_env(configured: int) -> int:
    """CYCLAB_THREADS wins over every other thread setting."""
    value = _float_or_none(os.environ.get("CYCLAB_THREADS"))
    if value is None or value < 1:
        return max(1, int(configured))
    return int(value)


@dataclass
class ExperimentConfig:
    """What one CLI run did, recorded in every artifact it writes."""

    command: str
    polynomial: Optional[str] = None
    polynomial_source: str = "inline"
    weights: List[List[float]] = field(default_factory=list)
    resolution: Dict[str, Any] = field(default_factory=dict)
    output: Optional[str] = None
    output_format: str = "json"
    seed: int = 0
    threads: int = 1
    parameter_files: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
