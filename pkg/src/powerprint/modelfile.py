"""Text persistence of fitted IKNN models.

Layout (one item per line, fields separated by single spaces, floats
written with round-trip precision)::

    POWERPRINT-MODEL v1
    descriptor <KIND> <thr> <bsif_seed>
    config <k> <m|auto> <seed>
    dims <n_train> <n_bins> <n_classes> <n_groups>
    class <name>                      # n_classes lines, tab-free names
    entropy <label entropy, bits>
    priors <one per class>
    weights <one per class>
    labels <class index per training row>
    groups <subgroup id per training row>
    train                             # followed by n_train rows of n_bins floats
    centroids                         # followed by n_groups rows of n_bins floats
    bsif                              # BSIF models only: 8 rows of 9 filter coefficients
    end
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .descriptors import BsifBank, DescriptorKind, generate_bsif_bank
from .iknn import IknnConfig, IknnModel
from .signals import format_float

MAGIC = "POWERPRINT-MODEL"
VERSION = "v1"


class ModelFormatError(ValueError):
    """The file is not a readable model file."""


class ModelVersionError(ModelFormatError):
    """The header names a different format or version."""


class TruncatedModelError(ModelFormatError):
    """The file ends before the model is complete."""


def _floats(values) -> str:
    return " ".join(format_float(v) for v in np.asarray(values).reshape(-1))


def _ints(values) -> str:
    return " ".join(str(int(v)) for v in np.asarray(values).reshape(-1))


def model_lines(model: IknnModel) -> list[str]:
    d, cfg = model.descriptor, model.config
    lines = [
        f"{MAGIC} {VERSION}",
        f"descriptor {d.name} {format_float(d.thr)} {d.bsif_seed}",
        f"config {cfg.k} {'auto' if cfg.m is None else cfg.m} {cfg.seed}",
        f"dims {model.n_train} {model.n_bins} {len(model.class_names)} {model.n_groups}",
    ]
    for name in model.class_names:
        if any(c in name for c in "\t\n\r"):
            raise ValueError(f"class name {name!r} cannot be stored")
        lines.append(f"class {name}")
    lines += [
        f"entropy {format_float(model.entropy)}",
        f"priors {_floats(model.priors)}",
        f"weights {_floats(model.class_weights)}",
        f"labels {_ints(model.labels)}",
        f"groups {_ints(model.groups)}",
        "train",
    ]
    lines += [_floats(row) for row in model.train]
    lines.append("centroids")
    lines += [_floats(row) for row in model.centroids]
    if d.name == "BSIF":
        lines.append("bsif")
        lines += [_floats(f) for f in generate_bsif_bank(d.bsif_seed).filters]
    lines.append("end")
    return lines


def save_model(model: IknnModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(model_lines(model)) + "\n")


class _Reader:
    def __init__(self, lines, path):
        self.lines = lines
        self.pos = 0
        self.path = path

    def next(self, what):
        if self.pos >= len(self.lines):
            raise TruncatedModelError(f"{self.path}: file ends while reading {what}")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def keyed(self, key):
        line = self.next(key)
        head, _, rest = line.partition(" ")
        if head != key:
            raise ModelFormatError(f"{self.path}: line {self.pos}: expected {key!r}, got {head!r}")
        return rest

    def row(self, what, n, dtype=float):
        return self.values(self.next(what), what, n, dtype)

    def values(self, text, what, n, dtype=float):
        parts = text.split()
        if len(parts) != n:
            raise TruncatedModelError(
                f"{self.path}: line {self.pos}: {what} has {len(parts)} values, expected {n}"
            )
        try:
            return np.array([dtype(p) for p in parts], dtype=np.float64 if dtype is float else np.int64)
        except ValueError:
            raise ModelFormatError(f"{self.path}: line {self.pos}: bad number in {what}") from None


def load_model(path) -> IknnModel:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    r = _Reader(lines, path)
    if not text.strip():
        raise TruncatedModelError(f"{path}: empty model file")
    header = r.next("header")
    if header != f"{MAGIC} {VERSION}":
        raise ModelVersionError(
            f"{path}: unsupported model header {header[:40]!r}; expected '{MAGIC} {VERSION}'"
        )
    try:
        kind, thr, bseed = r.keyed("descriptor").split()
        k, m, cseed = r.keyed("config").split()
        n_train, n_bins, n_classes, n_groups = (int(v) for v in r.keyed("dims").split())
        descriptor = DescriptorKind(kind, float(thr), int(bseed))
        config = IknnConfig(int(k), None if m == "auto" else int(m), int(cseed))
    except ValueError as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"{path}: malformed model preamble ({exc})") from None

    class_names = tuple(r.keyed("class") for _ in range(n_classes))
    entropy = r.values(r.keyed("entropy"), "entropy", 1)[0]
    priors = r.values(r.keyed("priors"), "priors", n_classes)
    weights = r.values(r.keyed("weights"), "weights", n_classes)
    labels = r.values(r.keyed("labels"), "labels", n_train, int)
    groups = r.values(r.keyed("groups"), "groups", n_train, int)
    if r.next("train marker") != "train":
        raise ModelFormatError(f"{path}: line {r.pos}: expected 'train'")
    train = np.array([r.row("training row", n_bins) for _ in range(n_train)]).reshape(n_train, n_bins)
    if r.next("centroids marker") != "centroids":
        raise ModelFormatError(f"{path}: line {r.pos}: expected 'centroids'")
    centroids = np.array([r.row("centroid", n_bins) for _ in range(n_groups)]).reshape(n_groups, n_bins)
    if descriptor.name == "BSIF":
        if r.next("bsif marker") != "bsif":
            raise ModelFormatError(f"{path}: line {r.pos}: expected 'bsif'")
        filters = np.array([r.row("BSIF filter", 9) for _ in range(8)]).reshape(8, 3, 3)
        stored = BsifBank(filters, descriptor.bsif_seed)
        if stored != generate_bsif_bank(descriptor.bsif_seed):
            raise ModelFormatError(f"{path}: stored BSIF bank does not match seed {descriptor.bsif_seed}")
    if r.next("end marker") != "end":
        raise ModelFormatError(f"{path}: line {r.pos}: expected 'end'")
    return IknnModel(
        train=train, labels=labels, class_names=class_names, priors=priors, entropy=entropy,
        class_weights=weights, groups=groups, centroids=centroids, config=config,
        descriptor=descriptor,
    )
