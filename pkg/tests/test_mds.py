import galois
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cachesim.gf import field
from cachesim.mds import CodeError, ErasureCode, int_to_symbols, mds_decode, mds_encode, symbols_to_int

GF8 = galois.GF(2**8, irreducible_poly=0x11D)
GF16 = galois.GF(2**16, irreducible_poly=0x1100B)


@given(st.integers(0, 255), st.integers(0, 255))
def test_gf8_mul_matches_galois(a, b):
    assert field(8).mul(a, b) == int(GF8(a) * GF8(b))


@given(st.integers(1, 65535))
def test_gf16_inverse_matches_galois(a):
    assert field(16).inv(a) == int(GF16(a) ** -1)


def test_scale_vectorised():
    rng = np.random.default_rng(0)
    v = rng.integers(0, 256, 64, dtype=np.uint8)
    got = field(8).scale(0x53, v)
    assert np.array_equal(got, np.asarray(GF8(0x53) * GF8(v)))


def random_blocks(m, length, width, seed):
    rng = np.random.default_rng(seed)
    dtype = np.uint8 if width == 8 else np.uint16
    return [rng.integers(0, 1 << width, length, dtype=dtype) for _ in range(m)]


def oracle_encode(code, blocks, GF):
    G = GF([list(code.generator_row(i)) for i in range(code.n)])
    return np.asarray(G @ GF(np.stack(blocks)))


@pytest.mark.parametrize("m,n,width", [(4, 6, 8), (3, 10, 8), (5, 300, 16), (2, 2, 8)])
def test_encode_matches_matrix_oracle(m, n, width):
    code = ErasureCode.create(m, n)
    assert code.width == width
    blocks = random_blocks(m, 16, width, m * n)
    coded = np.stack(code.encode(blocks))
    assert np.array_equal(coded, oracle_encode(code, blocks, GF8 if width == 8 else GF16))
    assert np.array_equal(coded[:m], np.stack(blocks))


def test_identity_when_m_equals_n():
    code = ErasureCode.create(3, 3)
    blocks = random_blocks(3, 8, 8, 1)
    assert all(np.array_equal(a, b) for a, b in zip(code.encode(blocks), blocks))


def test_repetition_when_m_is_one():
    code = ErasureCode.create(1, 3)
    (b,) = random_blocks(1, 8, 8, 2)
    coded = code.encode([b])
    # the single parity coefficient row is a non-zero scalar, so every block determines b
    for i in range(3):
        assert np.array_equal(code.decode({i: coded[i]})[0], b)


def test_4_of_6_from_blocks_1_3_5_6():
    code = ErasureCode.create(4, 6)
    blocks = random_blocks(4, 32, 8, 3)
    coded = code.encode(blocks)
    got = mds_decode({i - 1: coded[i - 1] for i in (1, 3, 5, 6)}, code)
    assert all(np.array_equal(a, b) for a, b in zip(got, blocks))
    # oracle: invert the selected generator rows with galois
    G = GF8([list(code.generator_row(i - 1)) for i in (1, 3, 5, 6)])
    rec = np.linalg.inv(G) @ GF8(np.stack([coded[i - 1] for i in (1, 3, 5, 6)]))
    assert np.array_equal(np.asarray(rec), np.stack(blocks))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 8), st.randoms(use_true_random=False))
def test_any_m_subset_decodes(m, extra, rnd):
    n = m + extra
    code = ErasureCode.create(m, n)
    blocks = random_blocks(m, 8, 8, m * 100 + n)
    coded = mds_encode(blocks, code)
    keep = rnd.sample(range(n), m)
    got = code.decode({i: coded[i] for i in keep})
    assert all(np.array_equal(a, b) for a, b in zip(got, blocks))


@pytest.mark.parametrize("m,n", [(0, 3), (4, 3)])
def test_bad_parameters(m, n):
    with pytest.raises(CodeError):
        ErasureCode.create(m, n)


def test_too_large_for_field():
    with pytest.raises(CodeError):
        ErasureCode.create(10, 300, width=8)


def test_too_few_blocks():
    code = ErasureCode.create(3, 5)
    with pytest.raises(CodeError):
        code.decode({0: np.zeros(4, np.uint8)})


@pytest.mark.parametrize("width", [8, 16])
def test_symbol_packing_round_trip(width):
    x = 0x1234_5678_9ABC_DEF0
    assert symbols_to_int(int_to_symbols(x, 64, width), width) == x
    with pytest.raises(CodeError):
        int_to_symbols(x, 68, 16)
