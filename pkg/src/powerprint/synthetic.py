"""Seeded synthetic appliance signatures.

Each class is an archetype: a base shape scaled to a base power, plus
Gaussian noise.  Signatures of one class differ by a random phase and by
their noise draw.  Every signature gets its own generator keyed on
``(seed, class index, signature index)``, so a config always yields the
same dataset bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import MIN_SIGNAL_LENGTH, Dataset, PowerSignal

SHAPES = ("flat", "periodic-cycle", "spike-train", "ramp-plateau", "multi-state")

# relative levels visited by the multi-state archetype (washing-machine like)
_MULTI_STATE_LEVELS = (0.02, 1.0, 0.45, 0.8, 0.02, 0.6)


@dataclass(frozen=True)
class ArchetypeSpec:
    """One synthetic appliance class.

    ``period`` is the characteristic time scale in samples: cycle length
    for periodic-cycle, spacing for spike-train, length of each of the
    ramp/hold/idle phases for ramp-plateau and dwell time per state for
    multi-state.  It is ignored by ``flat``.
    """

    name: str
    shape: str
    base_watts: float
    noise_std: float
    period: int = 20

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}; expected one of {SHAPES}")
        if not self.base_watts > 0:
            raise ValueError("base_watts must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        if self.period < 2:
            raise ValueError("period must be at least 2 samples")
        if not self.name or any(c in self.name for c in ",\n\r"):
            raise ValueError(f"invalid class name {self.name!r}")


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    classes: tuple[ArchetypeSpec, ...]
    signatures_per_class: int = 40
    signal_length: int = 400
    sample_rate_hz: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        if not self.classes:
            raise ValueError("at least one archetype is required")
        names = [c.name for c in self.classes]
        if len(set(names)) != len(names):
            raise ValueError("archetype names must be distinct")
        if self.signatures_per_class < 1:
            raise ValueError("signatures_per_class must be >= 1")
        if self.signal_length < MIN_SIGNAL_LENGTH:
            raise ValueError(f"signal_length must be >= {MIN_SIGNAL_LENGTH}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


BENCHMARK_ARCHETYPES = (
    ArchetypeSpec("fridge", "periodic-cycle", 120.0, 4.0, period=46),
    ArchetypeSpec("freezer", "periodic-cycle", 90.0, 3.0, period=13),
    ArchetypeSpec("microwave", "spike-train", 1200.0, 25.0, period=27),
    ArchetypeSpec("kettle", "spike-train", 2000.0, 30.0, period=9),
    ArchetypeSpec("heater", "ramp-plateau", 1500.0, 20.0, period=120),
    ArchetypeSpec("dryer", "ramp-plateau", 2400.0, 40.0, period=18),
    ArchetypeSpec("washing-machine", "multi-state", 500.0, 10.0, period=33),
    ArchetypeSpec("dishwasher", "multi-state", 1800.0, 30.0, period=7),
)


def benchmark_config(n_classes: int = 8, per_class: int = 40, length: int = 400,
                     seed: int = 1) -> SynthConfig:
    """The shipped benchmark: the first ``n_classes`` built-in archetypes."""
    if not 1 <= n_classes <= len(BENCHMARK_ARCHETYPES):
        raise ValueError(f"n_classes must be in [1, {len(BENCHMARK_ARCHETYPES)}]")
    return SynthConfig(seed=seed, classes=BENCHMARK_ARCHETYPES[:n_classes],
                       signatures_per_class=per_class, signal_length=length)


def _shape(spec: ArchetypeSpec, length: int, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(length)
    p = spec.period
    phase = int(rng.integers(3 * p))
    if spec.shape == "flat":
        rel = np.ones(length)
    elif spec.shape == "periodic-cycle":
        # compressor on for the first half of each cycle, idle draw otherwise
        rel = np.where(((t + phase) % p) < p // 2, 1.0, 0.08)
    elif spec.shape == "spike-train":
        pos = (t + phase) % p
        rel = np.where(pos == 0, 1.0, np.where(pos == 1, 0.5, 0.03))
    elif spec.shape == "ramp-plateau":
        # ramp up, hold, then idle, one third of the cycle each
        pos = (t + phase) % (3 * p)
        rel = np.where(pos < 2 * p, np.minimum(pos / p, 1.0) * 0.98 + 0.02, 0.02)
    else:
        levels = np.asarray(_MULTI_STATE_LEVELS)
        rel = levels[((t + phase) // p) % levels.size]
    return spec.base_watts * rel


def generate_signature(spec: ArchetypeSpec, length: int, rng: np.random.Generator) -> np.ndarray:
    clean = _shape(spec, length, rng)
    if spec.noise_std == 0:
        return clean
    noisy = clean + rng.normal(0.0, spec.noise_std, size=length)
    return np.maximum(noisy, 0.0)


def generate_synthetic(cfg: SynthConfig) -> Dataset:
    """Build ``signatures_per_class * len(classes)`` labeled signatures, class-major."""
    signals = []
    for ci, spec in enumerate(cfg.classes):
        for si in range(cfg.signatures_per_class):
            rng = np.random.default_rng([cfg.seed, ci, si])
            samples = generate_signature(spec, cfg.signal_length, rng)
            signals.append(PowerSignal(samples, label=spec.name,
                                       source_id=f"{spec.name}-{si:04d}",
                                       sample_rate_hz=cfg.sample_rate_hz))
    return Dataset(tuple(signals), tuple(c.name for c in cfg.classes))
