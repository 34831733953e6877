"""Power signatures, labeled collections of them, and their CSV interchange.

A record in the CSV format is ``label,source_id,s0,s1,...,sn``: UTF-8,
``\\n`` line endings, ``.`` as decimal separator.  An empty label field
means the signature is unlabeled.  The same layout is used for descriptor
histograms (bins in place of samples).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MIN_SIGNAL_LENGTH = 9


class FormatError(ValueError):
    """A record in an input file could not be parsed."""

    def __init__(self, message, path=None, line=None, column=None):
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.path = path
        self.line = line
        self.column = column


@dataclass(frozen=True, eq=False)
class PowerSignal:
    """One appliance signature: a 1D sequence of power samples in watts."""

    samples: np.ndarray
    label: str | None = None
    source_id: str = ""
    sample_rate_hz: float = 1.0

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64).reshape(-1)
        if samples.size == 0:
            raise ValueError("a power signal needs at least one sample")
        if not np.all(np.isfinite(samples)):
            raise ValueError("power samples must be finite")
        if not (self.sample_rate_hz > 0 and math.isfinite(self.sample_rate_hz)):
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    def __eq__(self, other):
        if not isinstance(other, PowerSignal):
            return NotImplemented
        return (
            self.label == other.label
            and self.source_id == other.source_id
            and self.sample_rate_hz == other.sample_rate_hz
            and np.array_equal(self.samples, other.samples)
        )

    __hash__ = None


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of signatures plus the ordered class vocabulary."""

    signals: tuple[PowerSignal, ...]
    class_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        signals = tuple(self.signals)
        if not signals:
            raise ValueError("a dataset needs at least one signal")
        names = tuple(self.class_names)
        if len(set(names)) != len(names):
            raise ValueError("class_names must be distinct")
        known = set(names)
        for sig in signals:
            if sig.label is not None and sig.label not in known:
                raise ValueError(f"label {sig.label!r} is not in class_names")
        object.__setattr__(self, "signals", signals)
        object.__setattr__(self, "class_names", names)

    @classmethod
    def from_signals(cls, signals: Iterable[PowerSignal]) -> "Dataset":
        """Build a dataset whose class names are the labels in first-seen order."""
        signals = tuple(signals)
        names = []
        for sig in signals:
            if sig.label is not None and sig.label not in names:
                names.append(sig.label)
        return cls(signals, tuple(names))

    def __len__(self):
        return len(self.signals)

    def __iter__(self):
        return iter(self.signals)

    @property
    def labels(self) -> list[str | None]:
        return [s.label for s in self.signals]

    def label_indices(self) -> np.ndarray:
        """Class index of every signal; raises if any signal is unlabeled."""
        lookup = {name: i for i, name in enumerate(self.class_names)}
        try:
            return np.array([lookup[s.label] for s in self.signals], dtype=np.int64)
        except KeyError:
            raise ValueError("dataset contains unlabeled signals") from None

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(tuple(self.signals[i] for i in indices), self.class_names)


def format_float(x: float) -> str:
    """Shortest text that round-trips a float64 (at most 17 significant digits)."""
    return repr(float(x))


def _parse_record(text, path, lineno):
    fields = text.split(",")
    if len(fields) < 3:
        raise FormatError(
            "expected label,source_id followed by at least one sample", path, lineno
        )
    label, source_id = fields[0], fields[1]
    samples = np.empty(len(fields) - 2, dtype=np.float64)
    for j, raw in enumerate(fields[2:]):
        column = j + 3
        try:
            value = float(raw)
        except ValueError:
            raise FormatError(f"cannot parse sample {raw!r}", path, lineno, column) from None
        if not math.isfinite(value):
            raise FormatError(f"non-finite sample {raw!r}", path, lineno, column)
        samples[j] = value
    return PowerSignal(samples, label=label or None, source_id=source_id)


def read_records(path) -> list[PowerSignal]:
    """Parse every record of a signal/histogram CSV file, in file order."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    signals = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.rstrip("\r\n")
            if not text.strip():
                continue
            signals.append(_parse_record(text, path, lineno))
    if not signals:
        raise FormatError("no records", path)
    return signals


def load_csv(path) -> Dataset:
    """Load a dataset; class names are the distinct labels in first-seen order."""
    return Dataset.from_signals(read_records(path))


def format_record(label, source_id, values) -> str:
    for name, text in (("label", label or ""), ("source_id", source_id)):
        if any(c in text for c in ",\n\r"):
            raise ValueError(f"{name} {text!r} may not contain commas or newlines")
    return ",".join([label or "", source_id] + [format_float(v) for v in values])


def write_records(path, rows: Iterable[tuple[str | None, str, Sequence[float]]]) -> None:
    """Write ``(label, source_id, values)`` rows in the CSV record format."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for label, source_id, values in rows:
            fh.write(format_record(label, source_id, values))
            fh.write("\n")


def write_csv(dataset: Dataset, path) -> None:
    write_records(path, ((s.label, s.source_id, s.samples) for s in dataset.signals))
