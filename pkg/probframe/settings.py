"""Centralized numerical tolerances and layout constants."""

from __future__ import annotations

import os
from functools import lru_cache

from pydantic import BaseModel, ConfigDict

LAYOUT_VERSION = 1
GENERATOR_ID = "numpy.random.PCG64"
ENV_PREFIX = "PROBFRAME_TOL_"


class Tolerances(BaseModel):
    """Tolerance constants used by validation, rank and search decisions."""

    model_config = ConfigDict(frozen=True)

    herm: float = 1e-12
    trace: float = 1e-10
    psd: float = 1e-9
    unit_norm: float = 1e-9
    orthogonality: float = 1e-9
    rank_cutoff: float = 1e-9
    param_trace: float = 1e-10
    normalization: float = 1e-6
    unitarity: float = 1e-9
    kraus: float = 1e-9


@lru_cache(maxsize=1)
def load_tolerances() -> Tolerances:
    """Defaults, overridden by ``PROBFRAME_TOL_<FIELD>`` environment variables."""
    overrides = {}
    for field in Tolerances.model_fields:
        raw = os.environ.get(ENV_PREFIX + field.upper())
        if raw:
            overrides[field] = float(raw)
    return Tolerances(**overrides)


def resolve(tol: Tolerances | None) -> Tolerances:
    return tol if tol is not None else load_tolerances()
