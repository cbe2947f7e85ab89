from typing import Any, Iterator, List, Optional, Tuple

import numpy as np

COMMENT_CHARACTER = "#"
SUMMED_SHIFT_SEPARATOR = "+"
ZERO_BLOCK_TOKEN = "-"


class ParserException(Exception):
    pass


def iter_content_lines(text: str) -> Iterator[Tuple[int, List[str]]]:
    """Yield ``(line_number, tokens)`` for every line carrying data.

    Blank lines and lines starting with ``#`` are skipped. Line numbers are
    1-based so they can be quoted in error messages.
    """
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(COMMENT_CHARACTER):
            continue
        yield line_number, stripped.split()


def parse_int(token: str, line_number: Optional[int] = None) -> int:
    """Parse an integer token, raising ``ParserException`` on failure."""
    try:
        return int(token)
    except ValueError as e:
        prefix = f"Line {line_number}: " if line_number is not None else ""
        raise ParserException(f"{prefix}Expected an integer, got {token!r}.") from e


def parse_shift_token(token: str, line_number: Optional[int] = None) -> Tuple[int, ...]:
    """Parse one cell of a QC shift file.

    ``-`` is a zero block, a decimal is a single circulant and ``a+b`` is the
    sum of several circulants.

    Returns
    -------
    tuple of int
        The shifts in the cell; empty for a zero block.
    """
    if token == ZERO_BLOCK_TOKEN:
        return ()
    return tuple(
        parse_int(part, line_number) for part in token.split(SUMMED_SHIFT_SEPARATOR)
    )


def format_shift_cell(cell: Tuple[int, ...]) -> str:
    """Inverse of ``parse_shift_token``."""
    if not cell:
        return ZERO_BLOCK_TOKEN
    return SUMMED_SHIFT_SEPARATOR.join(str(shift) for shift in cell)


def gf2_row_reduce(matrix: np.ndarray) -> Tuple[np.ndarray, List[int]]:
    """Bring a binary matrix to reduced row-echelon form over GF(2).

    Parameters
    ----------
    matrix : np.ndarray
        Binary matrix of shape (m, n).

    Returns
    -------
    reduced : np.ndarray
        The reduced matrix, dtype uint8, zero rows at the bottom.
    pivot_cols : list of int
        Pivot column of each nonzero row. Its length is the GF(2) rank.
    """
    reduced = (np.asarray(matrix, dtype=np.uint8) % 2).copy()
    m, n = reduced.shape
    pivot_cols: List[int] = []
    pivot_row = 0

    for col in range(n):
        if pivot_row == m:
            break
        candidates = np.flatnonzero(reduced[pivot_row:, col])
        if candidates.size == 0:
            continue
        found = pivot_row + int(candidates[0])
        if found != pivot_row:
            reduced[[pivot_row, found]] = reduced[[found, pivot_row]]

        # Clear the column everywhere else, above and below
        rows = np.flatnonzero(reduced[:, col])
        rows = rows[rows != pivot_row]
        reduced[rows] ^= reduced[pivot_row]

        pivot_cols.append(col)
        pivot_row += 1

    return reduced, pivot_cols


def apply_csv_formatting_to_scalar(obj: Any) -> Any:
    """Format a record value so that CSV output is byte-stable."""
    if isinstance(obj, (bool, np.bool_)):
        return int(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return repr(float(obj))
    return obj
