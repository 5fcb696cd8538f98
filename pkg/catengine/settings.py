"""
Run defaults for optimization and reporting.

Override values via environment variables when needed:
- CATENGINE_RESTARTS: Nelder-Mead restarts per optimization
- CATENGINE_SEED: seed of the low-discrepancy start sequence
- CATENGINE_THREADS: concurrent restarts
- CATENGINE_MAX_EVALUATIONS: objective evaluations per restart
- CATENGINE_OUTPUT_DIR: where data files and manifests are written
- CATENGINE_PASS_SLACK: allowed shortfall against tabulated fidelities
- CATENGINE_BOUNDS_JSON: JSON object of per-parameter [lo, hi] overrides,
  keyed by parameter family ("theta", "alpha", "alpha_0", "gamma", "beta_in")
- CATENGINE_LOG_LEVEL: logging level used by the CLI
"""

from __future__ import annotations

import json
import os
from typing import Dict, Tuple

_DEFAULT_BOUNDS: Dict[str, Tuple[float, float]] = {
    "theta": (0.05, 1.52),
    "alpha": (-4.0, 4.0),
    "alpha_0": (-4.0, 4.0),
    "gamma": (-3.0, 3.0),
    "beta_in": (0.1, 1.5),
}


def _load_json_override(env_key: str):
    raw = os.getenv(env_key)
    if not raw:
        return None
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{env_key} must be valid JSON: {exc}") from exc


def _resolve_bounds() -> Dict[str, Tuple[float, float]]:
    bounds = dict(_DEFAULT_BOUNDS)
    override = _load_json_override("CATENGINE_BOUNDS_JSON") or {}
    if not isinstance(override, dict):
        raise ValueError("CATENGINE_BOUNDS_JSON must be a JSON object")
    for family, pair in override.items():
        if family not in bounds:
            raise ValueError(f"CATENGINE_BOUNDS_JSON: unknown parameter family '{family}'")
        lo, hi = (float(v) for v in pair)
        if not lo < hi:
            raise ValueError(f"CATENGINE_BOUNDS_JSON: empty interval for '{family}'")
        bounds[family] = (lo, hi)
    return bounds


DEFAULT_RESTARTS: int = int(os.getenv("CATENGINE_RESTARTS", "64"))
DEFAULT_SEED: int = int(os.getenv("CATENGINE_SEED", "20240229"))
DEFAULT_THREADS: int = int(os.getenv("CATENGINE_THREADS", "4"))
DEFAULT_MAX_EVALUATIONS: int = int(os.getenv("CATENGINE_MAX_EVALUATIONS", "2000"))
OUTPUT_DIR: str = os.getenv("CATENGINE_OUTPUT_DIR", "output")
PASS_SLACK: float = float(os.getenv("CATENGINE_PASS_SLACK", "0.005"))
LOG_LEVEL: str = os.getenv("CATENGINE_LOG_LEVEL", "INFO").strip().upper()
DEFAULT_BOUNDS: Dict[str, Tuple[float, float]] = _resolve_bounds()
