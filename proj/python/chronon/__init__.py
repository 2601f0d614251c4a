"""Finite-difference chronon dynamics: Schrodinger, Liouville-von Neumann and
classical electron evolution with a fundamental time step."""

import json as _json

from ._core import (
    Error,
    IoError,
    Seeding,
    SimulationError,
    SpectralSystem,
    ValidationError,
    Variant,
    chronon_of,
    classical,
    constants,
    decohere,
    qevolve,
    run_config as _run_config,
    spectral_decompose,
)


def run_config(config):
    """Execute a run config given as a dict or JSON string."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _run_config(config)


__all__ = [
    "Error",
    "IoError",
    "Seeding",
    "SimulationError",
    "SpectralSystem",
    "ValidationError",
    "Variant",
    "chronon_of",
    "classical",
    "constants",
    "decohere",
    "qevolve",
    "run_config",
    "spectral_decompose",
]
