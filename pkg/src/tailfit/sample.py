"""Duration samples: sorted positive inter-event times with a time unit."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DurationSample:
    """A sorted array of strictly positive durations.

    ``unit`` is a label, ``unit_factor`` converts one unit to seconds
    (1.0 for seconds, 60.0 for minutes, ...).
    """

    values: np.ndarray
    unit: str = "seconds"
    unit_factor: float = 1.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("sample must be a non-empty 1-d array")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample contains non-finite durations")
        if np.min(values) <= 0:
            raise ValueError("durations must be strictly positive")
        if not _is_sorted(values):
            values = np.sort(values)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        if self.unit_factor <= 0:
            raise ValueError("unit_factor must be positive")

    def __len__(self) -> int:
        return self.values.size

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def x_min(self) -> float:
        return float(self.values[0])

    @property
    def x_max(self) -> float:
        return float(self.values[-1])


def _is_sorted(values: np.ndarray) -> bool:
    return bool(np.all(values[:-1] <= values[1:]))
