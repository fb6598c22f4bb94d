"""Run configuration read from JSON."""
from __future__ import annotations

import json
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: Literal["klein", "klein-printed", "shear", "contact", "modified", "counterexample"] = "klein"
    h_coeffs: List[float] = Field(default_factory=lambda: [2.0, -1.0])
    shear_ell: int = 1
    shear_reflect: bool = False
    T0: float = 1.0
    T: List[float] = Field(default_factory=lambda: [1.0, 2.0, 1.0, 3.0])
    delta: float = 0.1
    r_core: float = 0.3
    eps: float = 0.25
    chi_lo: float = 0.1
    chi_hi: float = 0.2
    chi_order: int = 2
    samples: int = 10000
    seed: int = 0
    tol: float = 1e-9

    @field_validator("T")
    @classmethod
    def _four(cls, v):
        if len(v) != 4:
            raise ValueError("T needs four entries")
        return v

    @field_validator("samples")
    @classmethod
    def _positive(cls, v):
        if v <= 0:
            raise ValueError("samples must be positive")
        return v


def load_config(path: Optional[str] = None, **overrides) -> RunConfig:
    data = {}
    if path:
        data = json.loads(Path(path).read_text())
    data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**data)
