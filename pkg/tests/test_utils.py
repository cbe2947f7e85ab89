import numpy as np
import pytest

from admmlp import utils


def test_iter_content_lines_skips_comments_and_blanks():
    """Test that comments and blank lines are skipped with 1-based numbers"""
    text = "# header\n\n3 1 2\n  0 -  \n# trailing\n"
    assert list(utils.iter_content_lines(text)) == [
        (3, ["3", "1", "2"]),
        (4, ["0", "-"]),
    ]


def test_parse_int():
    """Test parsing an integer token"""
    assert utils.parse_int("42") == 42
    assert utils.parse_int("-7") == -7


def test_parse_int_failure_quotes_line():
    """Test that a bad integer raises with the line number"""
    with pytest.raises(utils.ParserException, match="Line 5: "):
        utils.parse_int("x1", 5)


def test_parse_int_failure_without_line():
    """Test that a bad integer raises without a line prefix"""
    with pytest.raises(utils.ParserException, match="^Expected an integer"):
        utils.parse_int("1.5")


@pytest.mark.parametrize(
    "token,cell",
    [
        ("-", ()),
        ("0", (0,)),
        ("17", (17,)),
        ("1+2", (1, 2)),
        ("3+3+4", (3, 3, 4)),
    ],
)
def test_parse_shift_token(token, cell):
    assert utils.parse_shift_token(token) == cell
    assert utils.format_shift_cell(cell) == token


def test_parse_shift_token_failure():
    """Test that a malformed shift cell raises a ParserException"""
    with pytest.raises(utils.ParserException):
        utils.parse_shift_token("1+", 2)


def test_gf2_row_reduce():
    """Test reduced row-echelon form over GF(2)"""
    reduced, pivots = utils.gf2_row_reduce(np.array([[1, 1, 1], [0, 1, 1]]))
    assert pivots == [0, 1]
    assert reduced.tolist() == [[1, 0, 0], [0, 1, 1]]


def test_gf2_row_reduce_dependent_rows():
    """Test that a dependent row reduces to zero"""
    matrix = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    reduced, pivots = utils.gf2_row_reduce(matrix)
    assert len(pivots) == 2
    assert not reduced[2].any()


def test_gf2_row_reduce_does_not_modify_input():
    """Test that the input matrix is left untouched"""
    matrix = np.array([[0, 1], [1, 1]], dtype=np.uint8)
    utils.gf2_row_reduce(matrix)
    assert matrix.tolist() == [[0, 1], [1, 1]]


@pytest.mark.parametrize(
    "value,expected",
    [
        (np.int64(3), 3),
        (True, 1),
        (0.1, "0.1"),
        (np.float64(2.5e-05), "2.5e-05"),
        ("text", "text"),
    ],
)
def test_apply_csv_formatting_to_scalar(value, expected):
    assert utils.apply_csv_formatting_to_scalar(value) == expected
