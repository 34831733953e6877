"""Local texture histograms over the 2D power matrix.

Six descriptor families share the same scaffolding: every interior cell of
the matrix is the center of a 3x3 patch, the patch is reduced to an
integer code, and the codes are histogrammed and normalized to sum 1.

Neighbors are enumerated clockwise from the top-left cell and neighbor
``n`` carries weight ``2**n``::

    j0 j1 j2
    j7 jc j3
    j6 j5 j4

Code kernels work on whole shifted views of the matrix, one view per
neighbor, so the per-patch cost is a handful of vectorized operations.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .signals import MIN_SIGNAL_LENGTH, PowerSignal
from .transform2d import PowerMatrix, to_matrix

# (row, col) offsets of j0..j7 relative to the center
NEIGHBOR_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))

KINDS = ("LPH", "LBP", "LDP", "LTEP", "LTRP", "BSIF")

HISTOGRAM_LENGTHS = {"LPH": 256, "LBP": 256, "LDP": 56, "LTEP": 512, "LTRP": 256, "BSIF": 256}

DEFAULT_LTEP_THRESHOLD = 0.02
DEFAULT_BSIF_SEED = 7


@dataclass(frozen=True)
class DescriptorKind:
    """A descriptor family and its parameters.

    ``thr`` only affects LTEP and ``bsif_seed`` only affects BSIF.
    """

    name: str = "LPH"
    thr: float = DEFAULT_LTEP_THRESHOLD
    bsif_seed: int = DEFAULT_BSIF_SEED

    def __post_init__(self):
        name = self.name.upper()
        if name not in KINDS:
            raise ValueError(
                f"unknown descriptor {self.name!r}; expected one of {', '.join(k.lower() for k in KINDS)}"
            )
        if not self.thr >= 0:
            raise ValueError("LTEP threshold must be >= 0")
        if not 0 <= self.bsif_seed < 2**64:
            raise ValueError("BSIF seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "name", name)

    @property
    def length(self) -> int:
        return HISTOGRAM_LENGTHS[self.name]


def histogram_length(kind) -> int:
    return _as_kind(kind).length


@dataclass(frozen=True, eq=False)
class DescriptorHistogram:
    bins: np.ndarray
    kind: DescriptorKind

    def __len__(self):
        return self.bins.size

    def __eq__(self, other):
        if not isinstance(other, DescriptorHistogram):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.bins, other.bins)

    __hash__ = None


def _as_kind(kind) -> DescriptorKind:
    if isinstance(kind, DescriptorKind):
        return kind
    return DescriptorKind(str(kind))


def _values(matrix) -> np.ndarray:
    v = matrix.values if isinstance(matrix, PowerMatrix) else np.asarray(matrix, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] < 3:
        raise ValueError(f"descriptors need a matrix of at least 3x3, got shape {v.shape}")
    return v


def _views(v):
    """Center view and the eight neighbor views, all of shape (rows-2, cols-2)."""
    r, c = v.shape
    center = v[1:r - 1, 1:c - 1]
    neighbors = [v[1 + dr:r - 1 + dr, 1 + dc:c - 1 + dc] for dr, dc in NEIGHBOR_OFFSETS]
    return center, neighbors


# -- Kirsch compass masks -------------------------------------------------

def _ring_to_mask(ring):
    m = np.zeros((3, 3), dtype=np.int64)
    for (dr, dc), w in zip(NEIGHBOR_OFFSETS, ring):
        m[1 + dr, 1 + dc] = w
    return m


def kirsch_masks() -> np.ndarray:
    """The 8 Kirsch masks, shape (8, 3, 3), starting with east and turning counter-clockwise.

    Each is the base (east) mask with its outer ring rotated by one
    position per step, so mask ``o`` points at 45*o degrees.
    """
    east = (-3, -3, 5, 5, 5, -3, -3, -3)
    masks = []
    for o in range(8):
        # counter-clockwise turn = shifting the ring back along the clockwise order
        ring = east[o:] + east[:o]
        masks.append(_ring_to_mask(ring))
    return np.stack(masks)


KIRSCH_MASKS = kirsch_masks()
# ring coefficients per orientation, in neighbor order j0..j7
_KIRSCH_RING = np.array(
    [[KIRSCH_MASKS[o, 1 + dr, 1 + dc] for dr, dc in NEIGHBOR_OFFSETS] for o in range(8)],
    dtype=np.float64,
)

LDP_CODES = np.array(
    sorted(sum(1 << b for b in bits) for bits in combinations(range(8), 3)), dtype=np.int64
)
_LDP_BIN = np.full(256, -1, dtype=np.int64)
_LDP_BIN[LDP_CODES] = np.arange(LDP_CODES.size)


def ldp_bin(code: int) -> int:
    """Dense bin index of a 3-of-8 LDP byte (codes ordered ascending)."""
    b = int(_LDP_BIN[code])
    if b < 0:
        raise ValueError(f"{code:#010b} does not have exactly three set bits")
    return b


# -- BSIF filter bank ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BsifBank:
    """Eight zero-mean, mutually orthonormal 3x3 filters."""

    filters: np.ndarray
    seed: int

    def __eq__(self, other):
        if not isinstance(other, BsifBank):
            return NotImplemented
        return self.seed == other.seed and np.array_equal(self.filters, other.filters)

    __hash__ = None

    @property
    def ring(self) -> np.ndarray:
        """Filter coefficients at the 8 neighbor positions, shape (8, 8)."""
        return np.array(
            [[f[1 + dr, 1 + dc] for dr, dc in NEIGHBOR_OFFSETS] for f in self.filters]
        )


_BSIF_MAX_DRAWS = 16


def generate_bsif_bank(seed: int = DEFAULT_BSIF_SEED) -> BsifBank:
    """Seeded stand-in for a learned BSIF bank.

    Eight Gaussian 9-vectors are mean-centered and Gram-Schmidt
    orthonormalized in index order.  A draw whose centered vectors are
    (numerically) rank deficient is redrawn with the next sub-seed.
    """
    for attempt in range(_BSIF_MAX_DRAWS):
        rng = np.random.default_rng([seed, attempt])
        raw = rng.standard_normal((8, 9))
        raw -= raw.mean(axis=1, keepdims=True)
        basis = []
        for v in raw:
            w = v.copy()
            # two passes keep orthogonality at the 1e-16 level
            for _ in range(2):
                for b in basis:
                    w -= (w @ b) * b
            norm = np.linalg.norm(w)
            if norm < 1e-8:
                break
            basis.append(w / norm)
        if len(basis) == 8:
            filters = np.stack(basis).reshape(8, 3, 3)
            filters.setflags(write=False)
            return BsifBank(filters, seed)
    raise RuntimeError(f"could not draw a full-rank BSIF bank for seed {seed}")


_BANK_CACHE: dict[int, BsifBank] = {}


def bsif_bank_for(seed: int) -> BsifBank:
    bank = _BANK_CACHE.get(seed)
    if bank is None:
        bank = _BANK_CACHE.setdefault(seed, generate_bsif_bank(seed))
    return bank


# -- code kernels ------------------------------------------------------------

def _pack_bits(bits) -> np.ndarray:
    """Eight boolean planes (bit 0 first) packed into one integer code per cell."""
    return np.packbits(bits, axis=0, bitorder="little")[0].astype(np.int64)


def _compare_planes(center, nbrs, op) -> np.ndarray:
    planes = np.empty((8,) + center.shape, dtype=bool)
    for n, v in enumerate(nbrs):
        op(v, center, out=planes[n])
    return planes


def lph_code(patch) -> int:
    """LPH code of a single 3x3 patch: bit n set iff neighbor n >= center."""
    return int(lph_codes(_patch(patch))[0, 0])


def _patch(patch):
    p = np.asarray(patch, dtype=np.float64)
    if p.shape != (3, 3):
        raise ValueError("a patch is a 3x3 array")
    return p


def lph_codes(matrix) -> np.ndarray:
    center, nbrs = _views(_values(matrix))
    return _pack_bits(_compare_planes(center, nbrs, np.greater_equal))


def lbp_codes(matrix) -> np.ndarray:
    center, nbrs = _views(_values(matrix))
    return _pack_bits(_compare_planes(center, nbrs, np.greater))


def _ring_responses(nbrs, center, ring):
    """Responses of filters given by their ring coefficients to center-relative neighbors.

    The center coefficient multiplies ``center - center = 0`` so it drops out;
    for a zero-sum filter this equals the response to the raw (or
    mean-centered) patch, and a flat patch gives exactly zero.
    """
    diffs = [v - center for v in nbrs]
    out = np.zeros((ring.shape[0],) + center.shape)
    for f in range(ring.shape[0]):
        acc = out[f]
        for n in range(8):
            acc += ring[f, n] * diffs[n]
    return out


def kirsch_responses(matrix) -> np.ndarray:
    """Kirsch responses, shape (8, rows-2, cols-2).

    The center coefficient of every mask is 0, so only the ring enters.
    """
    _, nbrs = _views(_values(matrix))
    out = np.zeros((8,) + nbrs[0].shape)
    for o in range(8):
        acc = out[o]
        for n in range(8):
            acc += _KIRSCH_RING[o, n] * nbrs[n]
    return out


# |responses| closer than this fraction of the patch's largest possible
# response (30 * max |neighbor|) are ties; absorbs rounding in flat rings
LDP_TIE_RTOL = 1e-9


def ldp_codes(matrix) -> np.ndarray:
    """Bytes with the three strongest-|response| orientations set.

    Orientations are taken greedily; among those tied with the current
    maximum the lowest index wins, so a flat patch yields 0b00000111.
    """
    v = _values(matrix)
    mag = np.abs(kirsch_responses(v))
    _, nbrs = _views(v)
    tol = LDP_TIE_RTOL * 30.0 * np.max(np.abs(np.stack(nbrs)), axis=0)
    remaining = np.ones(mag.shape, dtype=bool)
    code = np.zeros(mag.shape[1:], dtype=np.int64)
    for _ in range(3):
        best = np.max(np.where(remaining, mag, -np.inf), axis=0)
        pick = np.argmax(remaining & (mag >= best - tol), axis=0)
        code |= np.left_shift(1, pick)
        np.put_along_axis(remaining, pick[None], False, axis=0)
    return code


def ltep_codes(matrix, thr: float = DEFAULT_LTEP_THRESHOLD) -> np.ndarray:
    """Upper and lower binary patterns, shape (2, rows-2, cols-2)."""
    if not thr >= 0:
        raise ValueError("LTEP threshold must be >= 0")
    center, nbrs = _views(_values(matrix))
    d = np.stack(nbrs) - center
    return np.stack([_pack_bits(d > thr), _pack_bits(d < -thr)])


def ltrp_codes(matrix) -> np.ndarray:
    """Bit n set iff the ``neighbor >= center`` sign changes between neighbors n and n+1 (mod 8)."""
    center, nbrs = _views(_values(matrix))
    signs = _compare_planes(center, nbrs, np.greater_equal)
    return _pack_bits(signs ^ np.roll(signs, -1, axis=0))


def bsif_codes(matrix, bank: BsifBank | None = None) -> np.ndarray:
    """Bit f set iff filter f has a strictly positive response on the centered patch."""
    if bank is None:
        bank = bsif_bank_for(DEFAULT_BSIF_SEED)
    center, nbrs = _views(_values(matrix))
    resp = _ring_responses(nbrs, center, bank.ring)
    return _pack_bits(np.asarray(resp) > 0)


def code_matrix(matrix, kind="LPH") -> np.ndarray:
    """Integer code matrix for ``kind``; LTEP returns (2, rows-2, cols-2)."""
    kind = _as_kind(kind)
    if kind.name == "LPH":
        return lph_codes(matrix)
    if kind.name == "LBP":
        return lbp_codes(matrix)
    if kind.name == "LDP":
        return ldp_codes(matrix)
    if kind.name == "LTEP":
        return ltep_codes(matrix, kind.thr)
    if kind.name == "LTRP":
        return ltrp_codes(matrix)
    return bsif_codes(matrix, bsif_bank_for(kind.bsif_seed))


# -- histograms ------------------------------------------------------------

def _normalized_counts(codes, length):
    counts = np.bincount(codes.ravel(), minlength=length).astype(np.float64)
    return counts / counts.sum()


def histogram_from_codes(codes: np.ndarray, kind="LPH") -> np.ndarray:
    kind = _as_kind(kind)
    if kind.name == "LDP":
        return _normalized_counts(_LDP_BIN[codes], 56)
    if kind.name == "LTEP":
        upper, lower = codes
        return _normalized_counts(np.concatenate([upper.ravel(), lower.ravel() + 256]), 512)
    return _normalized_counts(codes, 256)


def lph_histogram(matrix) -> np.ndarray:
    return _normalized_counts(lph_codes(matrix), 256)


def lbp_histogram(matrix) -> np.ndarray:
    return _normalized_counts(lbp_codes(matrix), 256)


def ldp_histogram(matrix) -> np.ndarray:
    return _normalized_counts(_LDP_BIN[ldp_codes(matrix)], 56)


def ltep_histogram(matrix, thr: float = DEFAULT_LTEP_THRESHOLD) -> np.ndarray:
    return histogram_from_codes(ltep_codes(matrix, thr), "LTEP")


def ltrp_histogram(matrix) -> np.ndarray:
    return _normalized_counts(ltrp_codes(matrix), 256)


def bsif_histogram(matrix, bank: BsifBank | None = None) -> np.ndarray:
    return _normalized_counts(bsif_codes(matrix, bank), 256)


def histogram(matrix, kind="LPH") -> np.ndarray:
    kind = _as_kind(kind)
    return histogram_from_codes(code_matrix(matrix, kind), kind)


def extract(kind, signal, shape_policy: str = "square") -> DescriptorHistogram:
    """Normalize, reshape and describe one signature."""
    kind = _as_kind(kind)
    n = len(signal.samples) if isinstance(signal, PowerSignal) else np.asarray(signal).size
    if n < MIN_SIGNAL_LENGTH:
        raise ValueError(f"signals need at least {MIN_SIGNAL_LENGTH} samples, got {n}")
    bins = histogram(to_matrix(signal, shape_policy), kind)
    return DescriptorHistogram(bins, kind)


def extract_many(kind, signals, threads: int = 1, shape_policy: str = "square") -> np.ndarray:
    """Histograms of every signal stacked row-wise, in input order."""
    kind = _as_kind(kind)
    signals = list(signals)
    if kind.name == "BSIF":
        bsif_bank_for(kind.bsif_seed)  # build once before fanning out

    def one(sig):
        return extract(kind, sig, shape_policy).bins

    if threads > 1 and len(signals) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, signals))
    else:
        rows = [one(s) for s in signals]
    if not rows:
        return np.zeros((0, kind.length))
    return np.vstack(rows)
