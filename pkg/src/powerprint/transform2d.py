"""1D signature to 2D matrix: min-max normalization and row-major reshaping."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .signals import PowerSignal


@dataclass(frozen=True, eq=False)
class PowerMatrix:
    """Normalized signature laid out row-major, tail padded with its last value."""

    values: np.ndarray
    pad_count: int

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def flatten(self) -> np.ndarray:
        """The normalized input, with padding removed."""
        flat = self.values.reshape(-1)
        return flat[: flat.size - self.pad_count]


def normalize(signal) -> np.ndarray:
    """Min-max scale to [0, 1]; a constant signature maps to all zeros.

    >>> normalize([0.0, 5.0, 10.0]).tolist()
    [0.0, 0.5, 1.0]
    """
    x = signal.samples if isinstance(signal, PowerSignal) else np.asarray(signal, dtype=np.float64)
    x = x.reshape(-1).astype(np.float64, copy=False)
    if x.size == 0:
        raise ValueError("cannot normalize an empty signal")
    lo = x.min()
    span = x.max() - lo
    if span == 0 or not np.isfinite(span):
        if not np.all(np.isfinite(x)):
            raise ValueError("samples must be finite")
        return np.zeros_like(x)
    out = (x - lo) / span
    # guard the last ulp so the [0, 1] contract is exact
    np.clip(out, 0.0, 1.0, out=out)
    return out


def matrix_shape(length: int, shape_policy: str = "square") -> tuple[int, int]:
    """Rows and columns used for a sequence of ``length`` samples.

    ``"square"`` takes ``cols = ceil(sqrt(length))`` and the fewest rows
    that hold every sample, so padding never fills a whole row.
    ``"rows:R"`` fixes the row count and derives the column count.
    """
    if length < 1:
        raise ValueError("length must be positive")
    if shape_policy == "square":
        cols = math.isqrt(length - 1) + 1
        rows = -(-length // cols)
    elif shape_policy.startswith("rows:"):
        try:
            rows = int(shape_policy[5:])
        except ValueError:
            raise ValueError(f"bad shape policy {shape_policy!r}") from None
        if rows < 1:
            raise ValueError("row count must be positive")
        cols = -(-length // rows)
        if rows * cols - length >= cols:
            raise ValueError(
                f"{rows} rows for {length} samples would leave a row of pure padding"
            )
    else:
        raise ValueError(f"unknown shape policy {shape_policy!r}; use 'square' or 'rows:R'")
    return rows, cols


def reshape_to_matrix(normalized, shape_policy: str = "square") -> PowerMatrix:
    x = np.asarray(normalized, dtype=np.float64).reshape(-1)
    rows, cols = matrix_shape(x.size, shape_policy)
    if rows < 3 or cols < 3:
        raise ValueError(
            f"{x.size} samples give a {rows}x{cols} matrix; at least 3x3 is needed"
        )
    pad = rows * cols - x.size
    if pad:
        x = np.concatenate([x, np.full(pad, x[-1])])
    values = x.reshape(rows, cols)
    values.setflags(write=False)
    return PowerMatrix(values, pad)


def to_matrix(signal, shape_policy: str = "square") -> PowerMatrix:
    return reshape_to_matrix(normalize(signal), shape_policy)
