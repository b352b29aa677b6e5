"""Numerical tolerances shared by every module."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Optional

ENV_PREFIX = "STUDYLINK_"


@dataclass(frozen=True)
class Context:
    """Tolerance bundle.

    tol_real
        a scalar counts as real when ``|im| <= tol_real`` (relative to the
        magnitude of the vector it belongs to).
    tol_proj
        projective equality threshold (sine of the principal angle).
    tol_rank
        relative singular-value threshold for numerical rank decisions.
    tol_axis
        Pluecker lines are identified when they agree up to scale within this.
    """

    tol_real: float = 1e-9
    tol_proj: float = 1e-9
    tol_rank: float = 1e-8
    tol_axis: float = 1e-7
    seed: Optional[int] = None

    def with_overrides(self, **kwargs) -> "Context":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs)

    @classmethod
    def from_env(cls, environ=None) -> "Context":
        environ = os.environ if environ is None else environ
        values = {}
        for name in ("tol_real", "tol_proj", "tol_rank", "tol_axis"):
            raw = environ.get(ENV_PREFIX + name.upper())
            if raw is not None:
                values[name] = float(raw)
        raw_seed = environ.get(ENV_PREFIX + "SEED")
        if raw_seed is not None:
            values["seed"] = int(raw_seed)
        return cls(**values)


DEFAULT = Context()


def resolve(ctx: Optional[Context]) -> Context:
    return DEFAULT if ctx is None else ctx
