import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ponqkd.distill import (
    DistillParams,
    SiftedKey,
    TranscriptEvent,
    binary_entropy,
    cascade_correct,
    distill,
    estimate_qber,
    net_bit_rate,
    pass_permutation,
    privacy_amplify,
    secure_length,
    toeplitz_extract,
    toeplitz_from_seed,
    toeplitz_hash,
    toeplitz_matrix,
)

# mpmath, 30 digits
H2_0P03 = 0.194391857831576160866
H2_0P12 = 0.529360865287364368511
NBR_EXAMPLE = 51510.4121493479201486


def noisy_pair(n, rate, seed):
    gen = np.random.default_rng(seed)
    a = gen.integers(0, 2, n, dtype=np.uint8)
    return a, a ^ (gen.random(n) < rate).astype(np.uint8)


# ----------------------------------------------------------------- entropy and rates


def test_binary_entropy_values():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.03) == pytest.approx(H2_0P03, rel=1e-13)
    assert binary_entropy(0.12) == pytest.approx(H2_0P12, rel=1e-13)


@pytest.mark.parametrize("e", [-0.01, 1.01])
def test_binary_entropy_range(e):
    with pytest.raises(ValueError):
        binary_entropy(e)


def test_net_bit_rate_examples():
    assert net_bit_rate(1e5, 0.0, 0.0, 1.2) == 1e5
    assert net_bit_rate(1e5, 0.5, 0.1, 1.2) == 0.0
    assert net_bit_rate(1e5, 0.03, 0.1, 1.2, 0.0) == pytest.approx(NBR_EXAMPLE, rel=1e-12)
    assert net_bit_rate(100.0, 0.0, 0.0, 1.2, epsilon_rate=500.0) == 0.0


fractions = st.floats(0, 0.5)


@given(fractions, fractions, st.floats(0, 0.9), st.floats(0, 0.9), st.floats(1, 2), st.floats(1, 2))
def test_net_bit_rate_monotone(q1, q2, s1, s2, f1, f2):
    lo, hi = sorted((q1, q2))
    assert net_bit_rate(1e5, hi, 0.1, 1.2) <= net_bit_rate(1e5, lo, 0.1, 1.2)
    lo, hi = sorted((s1, s2))
    assert net_bit_rate(1e5, 0.03, hi, 1.2) <= net_bit_rate(1e5, 0.03, lo, 1.2)
    lo, hi = sorted((f1, f2))
    assert net_bit_rate(1e5, 0.03, 0.1, hi) <= net_bit_rate(1e5, 0.03, 0.1, lo)


# ---------------------------------------------------------------- QBER estimation


def test_estimate_identical_and_complementary():
    a = SiftedKey(np.random.default_rng(0).integers(0, 2, 1000))
    q, ta, tb = estimate_qber(a, a, 0.1, seed=1)
    assert q == 0.0
    assert len(ta) == len(tb) == 900
    assert ta.disclosed_count == tb.disclosed_count == 100
    q, _, _ = estimate_qber(a, SiftedKey(1 - a.bits), 0.25, seed=1)
    assert q == 1.0


def test_estimate_planted_errors():
    n = 10_000
    gen = np.random.default_rng(7)
    a = gen.integers(0, 2, n, dtype=np.uint8)
    b = a.copy()
    b[gen.choice(n, 300, replace=False)] ^= 1
    q, ta, tb = estimate_qber(SiftedKey(a), SiftedKey(b), 0.2, seed=3)
    sigma = math.sqrt(0.03 * 0.97 / 2000)
    assert abs(q - 0.03) < 3 * sigma
    # the trimmed keys keep exactly the errors outside the sample
    assert np.count_nonzero(ta.bits != tb.bits) == 300 - round(q * 2000)


def test_estimate_errors():
    a = SiftedKey(np.zeros(10, dtype=np.uint8))
    with pytest.raises(ValueError, match="mismatch"):
        estimate_qber(a, SiftedKey(np.zeros(9, dtype=np.uint8)), 0.1, 0)
    with pytest.raises(ValueError, match="nothing left"):
        estimate_qber(SiftedKey(np.zeros(1, dtype=np.uint8)), SiftedKey(np.zeros(1, dtype=np.uint8)), 0.5, 0)
    with pytest.raises(ValueError):
        estimate_qber(a, a, 1.0, 0)


# ------------------------------------------------------------------------ Cascade


def test_cascade_identical_keys_leak_only_block_parities():
    key = np.random.default_rng(1).integers(0, 2, 64, dtype=np.uint8)
    res = cascade_correct(key, key, 0.0, passes=4)
    assert res.corrections == 0 and res.success
    assert res.leaked_bits == 4  # one whole-key block per pass
    res = cascade_correct(key, key, 0.03, passes=4)
    assert res.block_sizes == [25, 50, 64, 64]
    assert res.leaked_bits == 3 + 2 + 1 + 1


def test_cascade_single_error_hand_trace():
    alice = np.array([1, 0, 1, 1, 0, 0, 1, 0], dtype=np.uint8)
    bob = alice.copy()
    bob[5] ^= 1
    res = cascade_correct(alice, bob, 0.1, passes=1)  # ceil(0.73 / 0.1) = 8
    assert res.block_sizes == [8]
    assert res.success and res.corrections == 1
    # block parity, then halves [0,4), [4,6), [4,5)
    assert res.leaked_bits == 1 + 3
    parities = [(e.lo, e.hi) for e in res.transcript if e.kind == "PARITY"]
    assert parities == [(0, 8), (0, 4), (4, 6), (4, 5)]


def test_cascade_three_percent_typical_seed():
    a, b = noisy_pair(10_000, 0.03, 5)
    res = cascade_correct(a, b, 0.03, passes=4, seed=5)
    assert res.success
    assert np.array_equal(res.corrected, a)
    assert res.corrections == np.count_nonzero(a != b)
    assert res.leaked_bits <= 1.25 * H2_0P03 * 10_000


def test_cascade_transcript_replay():
    a, b = noisy_pair(3000, 0.05, 12)
    res = cascade_correct(a, b, 0.05, passes=4, seed=99)
    events = [TranscriptEvent.from_line(line) for line in res.transcript_text().splitlines()]
    assert events == res.transcript
    parity_events = [e for e in events if e.kind == "PARITY"]
    assert len(parity_events) == res.leaked_bits
    perms = [pass_permutation(a.size, j, 99) for j in range(4)]
    for e in parity_events:
        assert e.value == int(a[perms[e.pass_index][e.lo : e.hi]].sum() & 1)
    # replaying the flips on Bob's key reproduces the corrected key
    replay = b.copy()
    for e in events:
        if e.kind == "FLIP":
            replay[e.value] ^= 1
    assert np.array_equal(replay, res.corrected)


def test_cascade_flags_residual_errors():
    # an even number of errors in a single whole-key block is invisible to one pass
    a = np.zeros(16, dtype=np.uint8)
    b = a.copy()
    b[[2, 9]] = 1
    res = cascade_correct(a, b, 0.0, passes=1)
    assert not res.success
    assert res.leaked_bits == 1


def test_cascade_precondition_errors():
    a = np.zeros(8, dtype=np.uint8)
    with pytest.raises(ValueError):
        cascade_correct(a, a[:7], 0.1)
    with pytest.raises(ValueError):
        cascade_correct(a, a, 0.3)
    with pytest.raises(ValueError):
        cascade_correct(a, a, 0.1, passes=0)


@settings(max_examples=40, deadline=None)
@given(st.integers(16, 600), st.floats(0.0, 0.15), st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_cascade_never_increases_distance(n, rate, seed, passes):
    a, b = noisy_pair(n, rate, seed)
    before = int(np.count_nonzero(a != b))
    res = cascade_correct(a, b, max(rate, 0.01), passes=passes, seed=seed)
    after = int(np.count_nonzero(a != res.corrected))
    assert after <= before
    assert res.success == (after == 0)


# ---------------------------------------------------------------- Toeplitz hashing


def explicit_gf2_product(col, row, x):
    """Plain-python reference: build every entry from its diagonal and sum mod 2."""
    m, n = len(col), len(row)
    out = []
    for i in range(m):
        acc = 0
        for j in range(n):
            entry = col[i - j] if i >= j else row[j - i]
            acc ^= entry & x[j]
        out.append(acc)
    return out


def test_toeplitz_fixed_example():
    col = [1, 0, 1, 1]
    row = [1, 1, 0, 0, 1, 0, 1, 1]
    x = [1, 0, 1, 1, 0, 0, 1, 0]
    expected = [0, 1, 0, 0]  # worked by hand and by explicit_gf2_product
    assert explicit_gf2_product(col, row, x) == expected
    assert toeplitz_hash(x, col, row).tolist() == expected
    T = toeplitz_matrix(col, row)
    assert T.tolist() == [
        [1, 1, 0, 0, 1, 0, 1, 1],
        [0, 1, 1, 0, 0, 1, 0, 1],
        [1, 0, 1, 1, 0, 0, 1, 0],
        [1, 1, 0, 1, 1, 0, 0, 1],
    ]


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 300), st.integers(1, 200), st.integers(0, 2**32 - 1))
def test_toeplitz_hash_matches_dense_product(n, m, seed):
    gen = np.random.default_rng(seed)
    x = gen.integers(0, 2, n, dtype=np.uint8)
    col, row = toeplitz_from_seed(n, m, seed)
    dense = (toeplitz_matrix(col, row).astype(np.int64) @ x) % 2
    assert np.array_equal(toeplitz_hash(x, col, row), dense)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 128), st.integers(1, 64), st.integers(0, 2**32 - 1))
def test_toeplitz_linear(n, m, seed):
    gen = np.random.default_rng(seed)
    a = gen.integers(0, 2, n, dtype=np.uint8)
    b = gen.integers(0, 2, n, dtype=np.uint8)
    ta, tb, tab = (toeplitz_extract(v, m, seed) for v in (a, b, a ^ b))
    assert np.array_equal(tab, ta ^ tb)


def test_toeplitz_rejects_bad_shapes():
    with pytest.raises(ValueError):
        toeplitz_hash([1, 0, 1], [1, 0], [1, 0])
    with pytest.raises(ValueError):
        toeplitz_matrix([1, 0], [0, 1])


def test_privacy_amplify_lossless_case_is_full_length_transform():
    key = np.random.default_rng(2).integers(0, 2, 128, dtype=np.uint8)
    out = privacy_amplify(key, qber=0.0, leaked_bits=0, epsilon_bits=0, seed=4)
    assert len(out) == 128
    assert np.array_equal(out.bits, toeplitz_extract(key, 128, 4))


def test_privacy_amplify_high_qber_yields_nothing():
    n = 10_000
    leaked = math.ceil(H2_0P12 * n)
    assert 1 - 2 * H2_0P12 < 0
    assert secure_length(n, 0.12, leaked, 0) == 0
    out = privacy_amplify(np.ones(n, dtype=np.uint8), 0.12, leaked, epsilon_bits=0, seed=1)
    assert len(out) == 0


def test_secure_length_formula():
    assert secure_length(1000, 0.03, 100, 64) == math.floor(1000 * (1 - H2_0P03)) - 164


# ----------------------------------------------------------------------- pipeline


@pytest.mark.parametrize("seed", range(8))
def test_pipeline_keys_identical_or_both_empty(seed):
    a, b = noisy_pair(4000, 0.03, seed)
    out = distill(SiftedKey(a), SiftedKey(b), DistillParams(), seed)
    assert np.array_equal(out.alice.bits, out.bob.bits)
    if out.success:
        assert 0 < len(out.bob) < 4000
        assert out.bob.disclosed_count == 400
    else:
        assert len(out.alice) == len(out.bob) == 0


def test_pipeline_aborts_on_tiny_or_noisy_keys():
    one = SiftedKey(np.array([1], dtype=np.uint8))
    out = distill(one, one)
    assert not out.success and len(out.bob) == 0
    a, b = noisy_pair(2000, 0.4, 1)
    out = distill(SiftedKey(a), SiftedKey(b))
    assert out.aborted == "qber too high"


def test_distill_params_validation():
    with pytest.raises(ValueError):
        DistillParams(sample_fraction=0.0)
    with pytest.raises(ValueError):
        DistillParams(f_ec=0.9)
