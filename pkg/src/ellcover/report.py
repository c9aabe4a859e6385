"""Certification outcomes and their JSON form."""
from dataclasses import dataclass, field
import json
import math

import numpy as np

SCHEMA_VERSION = 1


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


@dataclass
class CertReport:
    """Outcome of one certification.

    ``constants`` holds estimated quantities under their conventional names
    (a1..a6, kappa, Q, c1, a, b, c, d, epsilon, s_star, ...); ``witnesses`` holds
    concrete violating samples, if any.
    """

    name: str
    passed: bool
    constants: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    seed: int | None = None
    samples: int = 0
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return _plain(
            {
                "name": self.name,
                "pass": bool(self.passed),
                "constants": self.constants,
                "witnesses": self.witnesses,
                "seed": self.seed,
                "samples": self.samples,
                "details": self.details,
            }
        )


def dumps(payload) -> str:
    return json.dumps(_plain(payload), indent=2, sort_keys=True)


def witness_rows(mask, max_rows=5, **columns):
    """First ``max_rows`` flagged samples as a list of dicts."""
    idx = np.flatnonzero(mask)[:max_rows]
    return [{k: _plain(np.asarray(v)[i]) for k, v in columns.items()} for i in idx]
