"""Attribution result container shared by every explainer."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass
class AttributionResult:
    """Per-feature attributions plus enough metadata to reproduce them."""

    values: np.ndarray
    method: str
    evaluations: int = 0
    seed: int | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self):
        return self.values.size

    def __getitem__(self, i):
        return self.values[i]

    def to_dict(self) -> dict:
        d = {
            "method": self.method,
            "values": [float(v) for v in self.values],
            "evaluations": int(self.evaluations),
            "seed": self.seed,
        }
        d.update(_plain(self.metadata))
        return d

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "AttributionResult":
        d = dict(d)
        return cls(
            values=np.asarray(d.pop("values"), dtype=float),
            method=d.pop("method"),
            evaluations=int(d.pop("evaluations", 0)),
            seed=d.pop("seed", None),
            metadata=d,
        )


def _plain(obj):
    """Convert numpy scalars/arrays nested in dicts and lists to JSON types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
