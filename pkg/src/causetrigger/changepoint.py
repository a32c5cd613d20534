"""Single-changepoint split maximizing the rise in the target's mean."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import EmptyRange, SeriesTooShort


@dataclass(frozen=True)
class SplitResult:
    """Split of [0, len) into I1 = [0, t1) and I2 = [t1, len)."""

    t1: int
    mean_I1: float
    mean_I2: float
    delta: float
    accepted: bool


def find_split(
    series: Sequence[float],
    min_size_I2: int = 30,
    threshold_y: float = 0.0,
    absolute: bool = False,
) -> SplitResult:
    """Scan every valid split point and keep the largest mean rise.

    ``delta`` is mean(I2) - mean(I1); with ``absolute`` it becomes
    |mean(I2)| - |mean(I1)|, for targets where a rise in magnitude rather
    than in signed level is the event of interest.  Ties break toward the
    earliest split point, and the split is accepted only when delta exceeds
    ``threshold_y``.
    """
    x = np.asarray(series, dtype=float)
    n = len(x)
    if min_size_I2 < 1:
        raise ValueError("min_size_I2 must be positive")
    if n < min_size_I2 + 2:
        raise SeriesTooShort(
            f"length {n} < min_size_I2 + 2 = {min_size_I2 + 2}"
        )

    # Prefix sums give every candidate's two means in one vectorized pass.
    csum = np.cumsum(x)
    total = csum[-1]
    t1_candidates = np.arange(1, n - min_size_I2 + 1)
    mean_left = csum[t1_candidates - 1] / t1_candidates
    mean_right = (total - csum[t1_candidates - 1]) / (n - t1_candidates)
    if absolute:
        deltas = np.abs(mean_right) - np.abs(mean_left)
    else:
        deltas = mean_right - mean_left

    best = int(np.argmax(deltas))  # argmax keeps the first (earliest) maximum
    t1 = int(t1_candidates[best])
    delta = float(deltas[best])
    return SplitResult(
        t1=t1,
        mean_I1=float(mean_left[best]),
        mean_I2=float(mean_right[best]),
        delta=delta,
        accepted=bool(delta > threshold_y),
    )


def mean_shift(
    series: Sequence[float],
    I1: Tuple[int, int],
    I2: Tuple[int, int],
) -> float:
    """mean(series over I2) - mean(series over I1), half-open ranges."""
    x = np.asarray(series, dtype=float)
    a1, b1 = I1
    a2, b2 = I2
    if b1 <= a1 or b2 <= a2:
        raise EmptyRange(f"ranges {I1}, {I2} must be nonempty")
    if not (0 <= a1 and b1 <= a2 and b2 <= len(x)):
        raise ValueError("ranges must be ordered, disjoint and in bounds")
    return float(np.mean(x[a2:b2]) - np.mean(x[a1:b1]))
