# pylint: disable=redefined-outer-name
import math
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

from admmlp.core.code import (
    DimensionError,
    InvalidShiftError,
    ParityCheckMatrix,
    QcShiftMatrix,
    SamplingError,
    builtin_shift_matrix,
    check_degree_groups,
    expand_qc,
    girth,
    is_codeword,
    nullspace_basis,
    qc_girth,
    sample_codeword,
    sample_qc_ensemble,
    syndrome,
)
from admmlp.utils import ParserException, gf2_row_reduce

TANNER_SHIFTS = [[30, 29, 27, 23, 15], [26, 21, 11, 22, 13], [6, 12, 24, 17, 3]]
ENSEMBLE_SHIFTS = [
    [115, 13, 25, 166, 17, 129],
    [124, 38, 137, 13, 160, 136],
    [75, 152, 89, 73, 0, 145],
]


@pytest.fixture
def small_h():
    return ParityCheckMatrix.from_dense([[1, 1, 1], [0, 1, 1]])


@pytest.fixture
def tanner_h():
    return expand_qc(QcShiftMatrix.from_grid(31, TANNER_SHIFTS))


@pytest.fixture
def alist_file():
    return Path(__file__).parent / "test_files" / "small.alist"


@pytest.fixture
def shift_file():
    return Path(__file__).parent / "test_files" / "small.shift"


@pytest.fixture
def nonexistent_file():
    return Path(__file__).parent / "test_files" / "nonexistent.alist"


def test_from_dense(small_h):
    """Test building a matrix from a dense array"""
    assert small_h.m == 2
    assert small_h.n == 3
    assert small_h.check_nbrs == ((0, 1, 2), (1, 2))
    assert small_h.var_nbrs == ((0,), (0, 1), (0, 1))
    assert small_h.num_edges == 5
    assert small_h.check_degrees.tolist() == [3, 2]
    assert small_h.var_degrees.tolist() == [1, 2, 2]
    assert small_h.to_dense().tolist() == [[1, 1, 1], [0, 1, 1]]


def test_edge_order_is_check_major(small_h):
    """Test that edges are listed check by check"""
    assert small_h.edge_check.tolist() == [0, 0, 0, 1, 1]
    assert small_h.edge_var.tolist() == [0, 1, 2, 1, 2]


def test_from_sparse_is_canonical():
    """Test that sparse input is stored as sorted binary CSR"""
    coo = sp.coo_matrix(([1, 1, 1], ([0, 0, 1], [2, 0, 1])), shape=(2, 3))
    H = ParityCheckMatrix(matrix=coo)
    assert isinstance(H.matrix, sp.csr_matrix)
    assert H.matrix.dtype == np.uint8
    assert H.check_nbrs == ((0, 2), (1,))
    assert H.edge_var.tolist() == [0, 2, 1]


def test_input_matrix_is_not_modified():
    source = sp.csr_matrix(np.array([[1, 1, 0]], dtype=np.int64))
    ParityCheckMatrix(matrix=source)
    assert source.dtype == np.int64
    assert source.toarray().tolist() == [[1, 1, 0]]


def test_non_binary_entries():
    """Test that stored entries must be 0 or 1"""
    with pytest.raises(ValueError):
        ParityCheckMatrix(matrix=sp.csr_matrix(np.array([[1, 2]])))


def test_repeated_variable_in_check():
    with pytest.raises(ValueError):
        ParityCheckMatrix.from_check_nbrs(3, [[0, 1, 1]])


def test_empty_shape():
    with pytest.raises(ValueError):
        ParityCheckMatrix(matrix=sp.csr_matrix((0, 3), dtype=np.uint8))


def test_matrix_equality(small_h):
    assert ParityCheckMatrix.from_check_nbrs(3, [[2, 1, 0], [1, 2]]) == small_h
    assert ParityCheckMatrix.from_dense([[1, 1, 1], [1, 1, 0]]) != small_h


def test_out_of_range_variable():
    with pytest.raises(ValueError):
        ParityCheckMatrix.from_check_nbrs(2, [[0, 2]])


def test_from_dense_wrong_dimension():
    with pytest.raises(DimensionError):
        ParityCheckMatrix.from_dense([1, 1, 0])


def test_rank_and_rate(small_h, tanner_h):
    """Test GF(2) rank, dimension and rates"""
    assert small_h.rank == 2
    assert small_h.dimension == 1
    assert tanner_h.rank == 91
    assert tanner_h.dimension == 64
    assert tanner_h.rate == pytest.approx(64 / 155)
    assert tanner_h.design_rate == pytest.approx(1 - 93 / 155)


def test_expand_tanner(tanner_h):
    """Test expanding the Tanner shift matrix"""
    assert tanner_h.m == 93
    assert tanner_h.n == 155
    assert set(tanner_h.check_degrees.tolist()) == {5}
    assert set(tanner_h.var_degrees.tolist()) == {3}


def test_expand_identity():
    """Test that a single zero shift is the identity"""
    H = expand_qc(QcShiftMatrix.from_grid(3, [[0]]))
    assert np.array_equal(H.to_dense(), np.eye(3, dtype=np.uint8))


def test_expand_shift_direction():
    """Test that shift t places row u at column (u + t) mod p"""
    H = expand_qc(QcShiftMatrix.from_grid(4, [[1]]))
    assert H.check_nbrs == ((1,), (2,), (3,), (0,))


def test_expand_ensemble_example():
    """Test expanding the (3,6)-regular example"""
    H = expand_qc(QcShiftMatrix.from_grid(167, ENSEMBLE_SHIFTS))
    assert H.m == 501
    assert H.n == 1002
    assert set(H.check_degrees.tolist()) == {6}
    assert set(H.var_degrees.tolist()) == {3}


def test_expand_zero_and_summed_blocks(shift_file):
    """Test zero blocks and summed circulants"""
    H = expand_qc(QcShiftMatrix.parse(shift_file))
    assert H.m == 6
    assert H.n == 9
    assert H.check_nbrs[:3] == ((0, 4, 5), (1, 3, 5), (2, 3, 4))
    assert H.check_nbrs[3:] == ((5, 6), (3, 7), (4, 8))
    assert H.var_degrees.tolist() == [1, 1, 1, 3, 3, 3, 1, 1, 1]


def test_expand_cancelling_circulants():
    """Test that a circulant summed with itself cancels"""
    H = expand_qc(QcShiftMatrix.from_grid(3, [[(1, 1)]]))
    assert H.num_edges == 0


def test_invalid_shift_in_model():
    """Test that the shift model rejects out-of-range shifts"""
    with pytest.raises(ValueError):
        QcShiftMatrix.from_grid(3, [[3]])


def test_invalid_shift_in_expand():
    """Test that expansion rejects out-of-range shifts"""
    shifts = QcShiftMatrix.construct(p=3, shifts=(((0,), (5,)),))
    with pytest.raises(InvalidShiftError):
        expand_qc(shifts)


def test_ragged_shift_grid():
    with pytest.raises(ValueError):
        QcShiftMatrix.from_grid(3, [[0, 1], [2]])


@pytest.mark.parametrize(
    "bits,expected",
    [
        ([0, 0, 0], [0, 0]),
        ([1, 1, 0], [0, 1]),
        ([0, 1, 1], [0, 0]),
        ([1, 0, 0], [1, 0]),
    ],
)
def test_syndrome(small_h, bits, expected):
    assert syndrome(small_h, bits).tolist() == expected


def test_syndrome_all_zero(tanner_h):
    assert not syndrome(tanner_h, np.zeros(155, dtype=np.uint8)).any()


def test_syndrome_length_mismatch(small_h):
    with pytest.raises(DimensionError):
        syndrome(small_h, [0, 1])


def test_syndrome_is_linear(tanner_h):
    """Test that the syndrome of a sum is the sum of the syndromes"""
    rng = np.random.default_rng(21)
    for _ in range(200):
        a = rng.integers(0, 2, size=155, dtype=np.uint8)
        b = rng.integers(0, 2, size=155, dtype=np.uint8)
        assert np.array_equal(
            syndrome(tanner_h, a ^ b), syndrome(tanner_h, a) ^ syndrome(tanner_h, b)
        )


def test_syndrome_matches_dense_product(tanner_h):
    bits = np.random.default_rng(22).integers(0, 2, size=155)
    expected = tanner_h.to_dense().astype(np.int64) @ bits % 2
    assert syndrome(tanner_h, bits).tolist() == expected.tolist()


def test_is_codeword(small_h):
    assert is_codeword(small_h, [0, 1, 1])
    assert not is_codeword(small_h, [1, 1, 0])


def test_check_degree_groups(small_h):
    """Test grouping check edges by degree"""
    groups = check_degree_groups(small_h)
    assert [degree for degree, _ in groups] == [2, 3]
    assert groups[0][1].tolist() == [[3, 4]]
    assert groups[1][1].tolist() == [[0, 1, 2]]


def test_nullspace_repetition_code():
    """Test the nullspace of the length-2 repetition code"""
    basis = nullspace_basis(ParityCheckMatrix.from_dense([[1, 1]]))
    assert basis.tolist() == [[1, 1]]


def test_nullspace_small(small_h):
    basis = nullspace_basis(small_h)
    assert basis.dtype == np.uint8
    assert basis.tolist() == [[0, 1, 1]]


def test_nullspace_tanner(tanner_h):
    """Test that every Tanner basis vector is a codeword"""
    basis = nullspace_basis(tanner_h)
    assert basis.shape == (64, 155)
    for row in basis:
        assert is_codeword(tanner_h, row)
    _, pivots = gf2_row_reduce(basis)
    assert len(pivots) == 64


def test_sample_codeword_tanner(tanner_h):
    """Test that sampled Tanner codewords have zero syndrome"""
    basis = nullspace_basis(tanner_h)
    rng = np.random.default_rng(3)
    for _ in range(1000):
        assert is_codeword(tanner_h, sample_codeword(basis, rng))


def test_sample_codeword_single_vector():
    """Test that one basis vector yields zero or that vector"""
    basis = np.array([[1, 0, 1, 1]], dtype=np.uint8)
    rng = np.random.default_rng(0)
    seen = {tuple(sample_codeword(basis, rng).tolist()) for _ in range(50)}
    assert seen == {(0, 0, 0, 0), (1, 0, 1, 1)}


def test_sample_codeword_empty_basis():
    with pytest.raises(ValueError):
        sample_codeword(np.zeros((0, 4), dtype=np.uint8), np.random.default_rng(0))


@pytest.mark.parametrize(
    "dense,expected",
    [
        ([[1, 1], [1, 1]], 4),
        ([[1, 1, 0], [0, 1, 1]], math.inf),
        ([[1, 1, 0], [0, 1, 1], [1, 0, 1]], 6),
    ],
)
def test_girth(dense, expected):
    assert girth(ParityCheckMatrix.from_dense(dense)) == expected


def test_girth_is_even_or_infinite():
    """Test that bipartite Tanner graphs only have even cycles"""
    rng = np.random.default_rng(23)
    for _ in range(200):
        dense = (rng.random((5, 8)) < 0.3).astype(np.uint8)
        value = girth(ParityCheckMatrix.from_dense(dense))
        assert value == math.inf or (value >= 4 and value % 2 == 0)


def test_girth_tanner(tanner_h):
    """Test that the Tanner code has girth 8"""
    assert girth(tanner_h) == 8
    assert qc_girth(QcShiftMatrix.from_grid(31, TANNER_SHIFTS)) == 8


def test_girth_ensemble_example():
    """Test that the ensemble example has girth of at least 6"""
    shifts = QcShiftMatrix.from_grid(167, ENSEMBLE_SHIFTS)
    assert qc_girth(shifts) >= 6
    assert girth(expand_qc(shifts)) == qc_girth(shifts)


def test_sample_qc_ensemble():
    """Test drawing a girth-6 (3,6)-regular code"""
    shifts = sample_qc_ensemble(3, 6, 167, 6, np.random.default_rng(11))
    assert (shifts.r, shifts.s, shifts.p) == (3, 6, 167)
    H = expand_qc(shifts)
    assert (H.m, H.n) == (501, 1002)
    assert set(H.var_degrees.tolist()) == {3}
    assert qc_girth(shifts) >= 6


def test_sample_qc_ensemble_deterministic():
    """Test that a fixed seed gives the same grid"""
    first = sample_qc_ensemble(3, 6, 167, 6, np.random.default_rng(5))
    second = sample_qc_ensemble(3, 6, 167, 6, np.random.default_rng(5))
    assert first == second


def test_sample_qc_ensemble_weak_constraint():
    """Test that girth 4 accepts the first draw"""
    rng = np.random.default_rng(2)
    expected = rng.integers(0, 7, size=(2, 4)).tolist()
    shifts = sample_qc_ensemble(2, 4, 7, 4, np.random.default_rng(2))
    assert [[cell[0] for cell in row] for row in shifts.shifts] == expected


def test_sample_qc_ensemble_failure():
    """Test that an impossible girth exhausts the retry budget"""
    with pytest.raises(SamplingError):
        sample_qc_ensemble(2, 2, 1, 6, np.random.default_rng(0), max_attempts=5)


def test_parse_alist(alist_file, small_h):
    """Test reading an alist file"""
    H = ParityCheckMatrix.parse_alist(alist_file)
    assert H.n == small_h.n
    assert H.check_nbrs == small_h.check_nbrs
    assert H.var_nbrs == small_h.var_nbrs


def test_to_alist(alist_file, small_h):
    """Test that alist output is zero padded"""
    assert small_h.to_alist() == alist_file.read_text()


def test_to_alist_file(tmp_path, tanner_h):
    """Test writing and re-reading an alist file"""
    path = tmp_path / "tanner.alist"
    tanner_h.to_alist(path)
    assert ParityCheckMatrix.parse_alist(path).check_nbrs == tanner_h.check_nbrs


def test_parse_alist_nonexistent(nonexistent_file):
    with pytest.raises(ParserException):
        ParityCheckMatrix.parse_alist(nonexistent_file)


@pytest.mark.parametrize(
    "text,match",
    [
        ("3 2\n", "four header lines"),
        ("3 2 1\n2 3\n1 2 2\n3 2\n", "Line 1"),
        ("3 2\n2 3\n1 2\n3 2\n", "Degree lists"),
        ("3 2\n2 3\n1 2 2\n3 2\n1 0\n1 2\n1 2\n1 2 3\n", "neighborhood lines"),
        ("3 2\n2 3\n1 2 2\n3 2\n1 0\n1 2\n1 x\n1 2 3\n2 3 0\n", "Line 7"),
        ("3 2\n2 3\n1 2 2\n3 2\n1 0\n1 2\n1 2\n1 2 4\n2 3 0\n", "out of range"),
        ("3 2\n2 3\n1 2 2\n3 2\n2 0\n1 2\n1 2\n1 2 3\n2 3 0\n", "disagree"),
    ],
)
def test_from_alist_failure(text, match):
    with pytest.raises(ParserException, match=match):
        ParityCheckMatrix.from_alist(text)


def test_parse_shift_file(shift_file):
    """Test reading a shift file with comments, zero blocks and sums"""
    shifts = QcShiftMatrix.parse(shift_file)
    assert shifts.p == 3
    assert (shifts.r, shifts.s) == (2, 3)
    assert shifts.shifts == (((0,), (1, 2), ()), ((), (2,), (0,)))


def test_to_shift_file(shift_file):
    shifts = QcShiftMatrix.parse(shift_file)
    assert shifts.to_shift_file() == "3 2 3\n0 1+2 -\n- 2 0\n"


def test_to_shift_file_round_trip(tmp_path):
    path = tmp_path / "tanner.shift"
    shifts = QcShiftMatrix.from_grid(31, TANNER_SHIFTS)
    shifts.to_shift_file(path)
    assert QcShiftMatrix.parse(path) == shifts


@pytest.mark.parametrize(
    "text,match",
    [
        ("", "empty"),
        ("# only a comment\n", "empty"),
        ("3 1\n0\n", "Line 1"),
        ("0 1 1\n0\n", "positive"),
        ("3 2 1\n0\n", "macro-rows"),
        ("3 1 2\n0\n", "Line 2"),
        ("3 1 1\n3\n", "Line 2: Shifts must lie in 0..2"),
        ("3 1 1\na\n", "Line 2"),
    ],
)
def test_shift_file_failure(text, match):
    with pytest.raises(ParserException, match=match):
        QcShiftMatrix.from_text(text)


def test_parse_shift_file_nonexistent(nonexistent_file):
    with pytest.raises(ParserException):
        QcShiftMatrix.parse(nonexistent_file)


@pytest.mark.parametrize(
    "name,m,n",
    [("tanner155", 93, 155), ("wigig672", 126, 672), ("ensemble1002-example", 501, 1002)],
)
def test_builtin_shift_matrix(name, m, n):
    H = expand_qc(builtin_shift_matrix(name))
    assert (H.m, H.n) == (m, n)


def test_builtin_shift_matrix_unknown():
    with pytest.raises(ValueError, match="Unknown code"):
        builtin_shift_matrix("hamming7")
