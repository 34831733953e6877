import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from powerprint import PowerSignal
from powerprint import descriptors as d
from powerprint.transform2d import reshape_to_matrix

KIND_NAMES = list(d.KINDS)


def matrices(max_side=8):
    shapes = st.tuples(st.integers(3, max_side), st.integers(3, max_side))
    # subnormals are excluded: their products underflow, which no exact oracle can mirror
    continuous = shapes.flatmap(lambda s: arrays(np.float64, s, elements=st.floats(0, 1, allow_subnormal=False)))
    # coarse levels force ties, which exercise the tie rules
    tied = shapes.flatmap(lambda s: arrays(np.int64, s, elements=st.integers(0, 4))).map(lambda a: a / 4)
    return st.one_of(continuous, tied)


# -- single-patch codes ------------------------------------------------------

def test_lph_code_examples(ramp_patch):
    assert d.lph_code(np.full((3, 3), 0.3)) == 255
    center_max = np.zeros((3, 3))
    center_max[1, 1] = 1.0
    assert d.lph_code(center_max) == 0
    assert d.lph_code(ramp_patch) == 120
    assert oracles.lph(ramp_patch.tolist()) == 120


def test_neighbor_weights_clockwise_from_top_left():
    for n, (r, c) in enumerate(oracles.CLOCKWISE):
        p = np.zeros((3, 3))
        p[1, 1] = 0.5
        p[r, c] = 1.0
        assert d.lbp_codes(p)[0, 0] == 2 ** n


def test_lph_histogram_examples():
    h = d.lph_histogram(np.full((5, 5), 0.7))
    assert h[255] == 1.0 and h.sum() == 1.0
    one = d.lph_histogram(np.random.default_rng(0).random((3, 3)))
    assert np.count_nonzero(one) == 1 and one.max() == 1.0
    ramp4 = np.arange(16).reshape(4, 4) / 15
    assert np.array_equal(d.lph_codes(ramp4), np.full((2, 2), 120))
    assert d.lph_histogram(ramp4)[120] == 1.0


def test_lbp_examples(ramp_patch):
    assert d.lbp_histogram(np.full((4, 4), 0.2))[0] == 1.0
    p = np.ones((3, 3))
    p[1, 1] = 0.0
    assert d.lbp_codes(p)[0, 0] == 255
    assert d.lbp_codes(ramp_patch)[0, 0] == 120


def test_ldp_examples():
    assert d.ldp_codes(np.full((3, 3), 0.3))[0, 0] == 0b111
    assert d.ldp_histogram(np.full((3, 3), 0.3))[0] == 1.0
    edge = np.array([[0, 1, 1], [0, 1, 1], [0, 1, 1]], dtype=float)
    # |Kirsch| = 9,9,1,7,15,7,1,9 -> W, then E and NE by the lower-index tie rule
    assert d.ldp_codes(edge)[0, 0] == oracles.ldp(edge.tolist()) == 0b10011
    assert d.ldp_bin(0b10011) == 4
    assert d.ldp_histogram(edge)[4] == 1.0


def test_ldp_code_table():
    assert d.LDP_CODES.tolist() == oracles.ldp_table()
    assert len(d.LDP_CODES) == 56
    with pytest.raises(ValueError):
        d.ldp_bin(0b1111)


def test_kirsch_bank():
    masks = d.KIRSCH_MASKS
    assert masks.shape == (8, 3, 3)
    assert np.all(masks.sum(axis=(1, 2)) == 0)
    assert np.array_equal(masks, np.array(oracles.KIRSCH))
    ring = [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0)]
    base = [masks[0][i][j] for i, j in ring]
    for o in range(8):
        assert [masks[o][i][j] for i, j in ring] == base[o:] + base[:o]


def test_ltep_examples():
    h = d.ltep_histogram(np.full((3, 3), 0.5), 0.02)
    assert h[0] == 0.5 and h[256] == 0.5 and h.size == 512
    p = np.full((3, 3), 0.5)
    p[0, 0] = 0.6
    p[2, 2] = 0.4
    upper, lower = d.ltep_codes(p, 0.02)
    assert upper[0, 0] == 1 and lower[0, 0] == 16


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_ltep_zero_threshold_upper_is_lbp(m):
    assert np.array_equal(d.ltep_codes(m, 0.0)[0], d.lbp_codes(m))


def test_ltrp_examples(ramp_patch):
    assert d.ltrp_codes(np.full((3, 3), 0.1))[0, 0] == 0
    alt = np.full((3, 3), 0.5)
    for n, (r, c) in enumerate(oracles.CLOCKWISE):
        alt[r, c] = 1.0 if n % 2 == 0 else 0.0
    assert d.ltrp_codes(alt)[0, 0] == 255
    # s = (0,0,0,1,1,1,1,0): transitions after positions 2 and 6
    assert d.ltrp_codes(ramp_patch)[0, 0] == oracles.ltrp(ramp_patch.tolist()) == 68


def test_bsif_examples(ramp_patch):
    bank = d.generate_bsif_bank(7)
    assert d.bsif_codes(np.full((3, 3), 0.4), bank)[0, 0] == 0
    code = d.bsif_codes(ramp_patch, bank)[0, 0]
    assert code == oracles.bsif(ramp_patch.tolist(), bank.filters) == 181
    assert d.bsif_codes(-ramp_patch, bank)[0, 0] == 255 - 181


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (5, 6), elements=st.floats(0, 1, allow_subnormal=False)))
def test_bsif_negation_complements_codes(m):
    bank = d.bsif_bank_for(7)
    a = d.bsif_codes(m, bank)
    b = d.bsif_codes(-m, bank)
    center, nbrs = d._views(m)
    r = d._ring_responses(nbrs, center, bank.ring)
    nonzero = np.all(r != 0, axis=0)
    assert np.array_equal((a ^ b)[nonzero], np.full(nonzero.sum(), 255))


def test_bsif_bank_properties():
    a, b = d.generate_bsif_bank(7), d.generate_bsif_bank(7)
    assert a == b
    flat = a.filters.reshape(8, 9)
    np.testing.assert_allclose(flat @ flat.T, np.eye(8), atol=1e-9)
    np.testing.assert_allclose(flat.sum(axis=1), 0, atol=1e-9)
    assert d.generate_bsif_bank(8) != a


@pytest.mark.parametrize("seed", [0, 1, 2**63, 2**64 - 1])
def test_bsif_bank_any_seed(seed):
    flat = d.generate_bsif_bank(seed).filters.reshape(8, 9)
    np.testing.assert_allclose(flat @ flat.T, np.eye(8), atol=1e-9)


# -- oracle equivalence and histogram properties ---------------------------

@settings(max_examples=150, deadline=None)
@given(matrices(), st.sampled_from(KIND_NAMES))
def test_code_matrix_matches_oracle(m, kind):
    k = d.DescriptorKind(kind)
    expected = oracles.code_matrix(m, kind, thr=k.thr, filters=d.bsif_bank_for(k.bsif_seed).filters)
    assert np.array_equal(d.code_matrix(m, k), expected)


@settings(max_examples=150, deadline=None)
@given(matrices(), st.sampled_from(KIND_NAMES))
def test_histograms_are_normalized(m, kind):
    h = d.histogram(m, kind)
    assert h.size == d.HISTOGRAM_LENGTHS[kind]
    assert abs(h.sum() - 1.0) <= 1e-9
    assert np.all((h >= 0) & (h <= 1))
    if kind == "LTEP":
        assert abs(h[:256].sum() - 0.5) <= 1e-9 and abs(h[256:].sum() - 0.5) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_ldp_popcount_is_three(m):
    codes = d.ldp_codes(m)
    assert all(bin(int(c)).count("1") == 3 for c in codes.ravel())


@settings(max_examples=100, deadline=None)
@given(matrices(), st.sampled_from([np.sqrt, np.exp, lambda x: x ** 3 + 2 * x, lambda x: np.log1p(x)]))
def test_lph_invariant_under_increasing_maps(m, fn):
    assert np.array_equal(d.lph_codes(fn(m)), d.lph_codes(m))


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_lph_and_lbp_differ_only_in_tied_bits(m):
    lph, lbp = d.lph_codes(m), d.lbp_codes(m)
    center, nbrs = d._views(m)
    tied = np.zeros(center.shape, dtype=np.int64)
    for n, v in enumerate(nbrs):
        tied |= (v == center).astype(np.int64) << n
    assert np.array_equal((lph ^ lbp) & ~tied, np.zeros_like(lph))
    assert np.array_equal(lph[tied == 0], lbp[tied == 0])


def test_matrix_too_small():
    for kind in KIND_NAMES:
        with pytest.raises(ValueError):
            d.histogram(np.zeros((2, 5)), kind)


# -- extraction --------------------------------------------------------------

@pytest.fixture
def signal100():
    rng = np.random.default_rng(4)
    return PowerSignal(100 + 50 * np.sin(np.arange(100) / 5) + rng.normal(0, 2, 100))


@pytest.mark.parametrize("kind, length", [("LPH", 256), ("LBP", 256), ("LDP", 56),
                                          ("LTEP", 512), ("LTRP", 256), ("BSIF", 256)])
def test_extract_lengths(signal100, kind, length):
    h = d.extract(kind, signal100)
    assert len(h) == length
    assert abs(h.bins.sum() - 1) <= 1e-9
    assert h == d.extract(kind, signal100)


def test_extract_requires_nine_samples():
    with pytest.raises(ValueError):
        d.extract("LPH", PowerSignal(np.arange(8.0)))


def test_extract_uses_the_shared_front_end(signal100):
    from powerprint.transform2d import normalize
    expected = d.lph_histogram(reshape_to_matrix(normalize(signal100)))
    assert np.array_equal(d.extract("lph", signal100).bins, expected)


def test_extract_many_is_order_stable():
    rng = np.random.default_rng(9)
    sigs = [PowerSignal(rng.random(50 + i)) for i in range(12)]
    one = d.extract_many("BSIF", sigs, threads=1)
    four = d.extract_many("BSIF", sigs, threads=4)
    assert np.array_equal(one, four)
    assert np.array_equal(one[3], d.extract("BSIF", sigs[3]).bins)


def test_descriptor_kind_validation():
    assert d.DescriptorKind("ltep").name == "LTEP"
    with pytest.raises(ValueError, match="lph, lbp, ldp, ltep, ltrp, bsif"):
        d.DescriptorKind("sift")
    with pytest.raises(ValueError):
        d.DescriptorKind("LTEP", thr=-0.1)
