from __future__ import annotations

import logging
import math
from collections import deque
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from pydantic import PrivateAttr, root_validator, validator
from pydantic.types import FilePath

from admmlp.core.base import BaseModel
from admmlp.utils import (
    ParserException,
    format_shift_cell,
    gf2_row_reduce,
    iter_content_lines,
    parse_int,
    parse_shift_token,
)

logger = logging.getLogger(__name__)

ENSEMBLE_RETRY_BUDGET = 10**4

ShiftCell = Tuple[int, ...]
ShiftGrid = Tuple[Tuple[ShiftCell, ...], ...]

BUILTIN_SHIFT_FILES: Dict[str, str] = {
    "tanner155": """\
# [155, 64, 20] Tanner code
31 3 5
30 29 27 23 15
26 21 11 22 13
6 12 24 17 3
""",
    "wigig672": """\
# Rate-13/16 WiGig code, '-' marks a zero block
42 3 16
29 30 0 8 33 22 17 4 27 28 20 27 24 23 - -
37 31 18 23 11 21 6 20 32 9 12 29 10 0 13 -
25 22 4 34 31 3 14 15 4 2 14 18 13 13 22 24
""",
    "ensemble1002-example": """\
# One girth-6 member of the random (3,6)-regular ensemble
167 3 6
115 13 25 166 17 129
124 38 137 13 160 136
75 152 89 73 0 145
""",
}


class InvalidShiftError(ValueError):
    """A circulant shift is outside ``0..p-1``."""


class DimensionError(ValueError):
    """A vector does not have the length its code requires."""


class SamplingError(RuntimeError):
    """The ensemble sampler ran out of attempts."""


def _neighborhoods(matrix: Any) -> Tuple[Tuple[int, ...], ...]:
    # Works on CSR rows and CSC columns alike
    indptr, indices = matrix.indptr, matrix.indices
    return tuple(
        tuple(indices[start:stop].tolist())
        for start, stop in zip(indptr[:-1], indptr[1:])
    )


class ParityCheckMatrix(BaseModel):
    """A sparse binary parity-check matrix.

    Parameters
    ----------
    matrix : scipy.sparse.csr_matrix
        The ``m x n`` matrix. Any sparse or dense 2-D input is converted to
        CSR with sorted indices and explicit zeros removed; every stored entry
        must be 1.

    Examples
    --------
    >>> H = ParityCheckMatrix.from_dense([[1, 1, 1], [0, 1, 1]])
    >>> H.var_nbrs
    ((0,), (0, 1), (0, 1))
    """

    matrix: sp.csr_matrix

    _edge_check: Optional[np.ndarray] = PrivateAttr(default=None)
    _reduced: Optional[Tuple[np.ndarray, List[int]]] = PrivateAttr(default=None)

    def __str__(self) -> str:
        return f"ParityCheckMatrix(m={self.m}, n={self.n}, edges={self.num_edges})"

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, ParityCheckMatrix):
            return NotImplemented
        return (
            self.matrix.shape == other.matrix.shape
            and (self.matrix != other.matrix).nnz == 0
        )

    @validator("matrix", pre=True)
    def _to_csr(cls, v: Any) -> sp.csr_matrix:
        if not sp.issparse(v) and np.ndim(v) != 2:
            raise DimensionError("A parity-check matrix must be 2-dimensional.")
        matrix = sp.csr_matrix(v, dtype=np.int64, copy=True)
        if matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise ValueError("A parity-check matrix needs at least one row and column.")
        matrix.sum_duplicates()
        matrix.eliminate_zeros()
        if (matrix.data != 1).any():
            raise ValueError("Parity-check entries must be 0 or 1.")
        matrix.sort_indices()
        return matrix.astype(np.uint8)

    @classmethod
    def from_check_nbrs(
        cls,
        n: int,
        check_nbrs: Sequence[Sequence[int]],
    ) -> ParityCheckMatrix:
        """Build the matrix from the variables of each check.

        Raises
        ------
        ValueError
            If a variable index is out of range or repeated within a check.
        """
        rows = [j for j, nbrs in enumerate(check_nbrs) for _ in nbrs]
        cols = [int(i) for nbrs in check_nbrs for i in nbrs]
        for j, i in zip(rows, cols):
            if not 0 <= i < n:
                raise ValueError(f"Variable {i} of check {j} is out of range.")
        matrix = sp.csr_matrix(
            (np.ones(len(cols), dtype=np.int64), (rows, cols)),
            shape=(len(check_nbrs), n),
        )
        return cls(matrix=matrix)

    @classmethod
    def from_dense(cls, matrix: Any) -> ParityCheckMatrix:
        """Build the matrix from a dense 0/1 array of shape (m, n)."""
        dense = np.asarray(matrix)
        if dense.ndim != 2:
            raise DimensionError("A dense parity-check matrix must be 2-dimensional.")
        return cls(matrix=sp.csr_matrix(dense % 2))

    def to_dense(self) -> np.ndarray:
        """Dense (m, n) uint8 copy of the matrix."""
        return self.matrix.toarray().astype(np.uint8)

    @property
    def m(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def n(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def check_nbrs(self) -> Tuple[Tuple[int, ...], ...]:
        """For each check, the sorted variables it involves."""
        return _neighborhoods(self.matrix)

    @property
    def var_nbrs(self) -> Tuple[Tuple[int, ...], ...]:
        """For each variable, the sorted checks it is involved in."""
        return _neighborhoods(self.matrix.tocsc())

    @property
    def edge_check(self) -> np.ndarray:
        """Check index of every edge, edges ordered check by check."""
        if self._edge_check is None:
            self._edge_check = np.repeat(
                np.arange(self.m, dtype=np.int64), self.check_degrees
            )
        return self._edge_check

    @property
    def edge_var(self) -> np.ndarray:
        """Variable index of every edge, in the order of ``edge_check``."""
        return self.matrix.indices.astype(np.int64)

    @property
    def num_edges(self) -> int:
        return int(self.matrix.nnz)

    @property
    def check_degrees(self) -> np.ndarray:
        return np.diff(self.matrix.indptr).astype(np.int64)

    @property
    def var_degrees(self) -> np.ndarray:
        return np.bincount(self.matrix.indices, minlength=self.n).astype(np.int64)

    def row_reduced(self) -> Tuple[np.ndarray, List[int]]:
        """Reduced row-echelon form over GF(2) and its pivot columns, cached."""
        if self._reduced is None:
            self._reduced = gf2_row_reduce(self.to_dense())
        return self._reduced

    @property
    def rank(self) -> int:
        """Rank of the matrix over GF(2)."""
        return len(self.row_reduced()[1])

    @property
    def dimension(self) -> int:
        """Code dimension ``k = n - rank``."""
        return self.n - self.rank

    @property
    def rate(self) -> float:
        return self.dimension / self.n

    @property
    def design_rate(self) -> float:
        """``1 - m/n``, ignoring redundant checks."""
        return 1 - self.m / self.n

    @classmethod
    def parse_alist(
        cls,
        path: Union[FilePath, str],
        encoding: str = "utf-8",
    ) -> ParityCheckMatrix:
        """Read a matrix from a MacKay alist file."""
        path = Path(path)
        if not path.exists():
            raise ParserException("The file does not exist.")
        return cls.from_alist(path.read_text(encoding=encoding))

    @classmethod
    def from_alist(cls, text: str) -> ParityCheckMatrix:
        """Parse alist text.

        The layout is ``n m``, the two maximum degrees, the ``n`` column
        degrees, the ``m`` row degrees, then one line of 1-based check indices
        per column followed by one line of 1-based variable indices per row.
        Zero padding is ignored.
        """
        lines = list(iter_content_lines(text))
        if len(lines) < 4:
            raise ParserException("An alist file needs at least four header lines.")

        def ints(entry: Tuple[int, List[str]]) -> List[int]:
            line_number, tokens = entry
            return [parse_int(token, line_number) for token in tokens]

        header = ints(lines[0])
        if len(header) != 2:
            raise ParserException(f"Line {lines[0][0]}: Expected 'n m'.")
        n, m = header
        col_degrees = ints(lines[2])
        row_degrees = ints(lines[3])
        if len(col_degrees) != n or len(row_degrees) != m:
            raise ParserException(
                f"Line {lines[2][0]}: Degree lists do not match n={n}, m={m}."
            )
        if len(lines) != 4 + n + m:
            raise ParserException(
                f"Expected {n + m} neighborhood lines, found {len(lines) - 4}."
            )

        def neighborhoods(
            entries: List[Tuple[int, List[str]]],
            degrees: List[int],
            bound: int,
        ) -> List[List[int]]:
            result = []
            for entry, degree in zip(entries, degrees):
                nbrs = [index - 1 for index in ints(entry) if index != 0]
                if len(nbrs) != degree:
                    raise ParserException(
                        f"Line {entry[0]}: Expected {degree} entries, found {len(nbrs)}."
                    )
                if any(not 0 <= index < bound for index in nbrs):
                    raise ParserException(f"Line {entry[0]}: Index out of range.")
                result.append(nbrs)
            return result

        columns = neighborhoods(lines[4 : 4 + n], col_degrees, m)
        rows = neighborhoods(lines[4 + n :], row_degrees, n)

        matrix = cls.from_check_nbrs(n, rows)
        if [sorted(column) for column in columns] != [list(v) for v in matrix.var_nbrs]:
            raise ParserException("Column and row lists of the alist file disagree.")
        return matrix

    def to_alist(
        self,
        path: Optional[Union[FilePath, str, None]] = None,
        encoding: str = "utf-8",
    ) -> str:
        """Write the matrix in alist layout, zero padding short lists."""
        col_degrees = self.var_degrees
        row_degrees = self.check_degrees
        max_col = int(col_degrees.max(initial=0))
        max_row = int(row_degrees.max(initial=0))

        def padded(nbrs: Tuple[int, ...], width: int) -> str:
            entries = [str(index + 1) for index in nbrs]
            entries += ["0"] * (width - len(nbrs))
            return " ".join(entries)

        lines = [
            f"{self.n} {self.m}",
            f"{max_col} {max_row}",
            " ".join(str(int(degree)) for degree in col_degrees),
            " ".join(str(int(degree)) for degree in row_degrees),
        ]
        lines += [padded(nbrs, max_col) for nbrs in self.var_nbrs]
        lines += [padded(nbrs, max_row) for nbrs in self.check_nbrs]
        alist = "\n".join(lines) + "\n"

        if path:
            Path(path).write_text(alist, encoding=encoding)

        return alist


class QcShiftMatrix(BaseModel):
    """A quasi-cyclic code given as a grid of circulant shifts.

    Parameters
    ----------
    p : int
        Circulant size.
    shifts : tuple of tuple of tuple of int
        ``r x s`` grid of cells. An empty cell is a zero block, a cell with one
        shift is a shifted identity and a cell with several shifts is their sum
        modulo 2.
    """

    p: int
    shifts: ShiftGrid

    @validator("p")
    def _check_p(cls, v: int) -> int:
        if v < 1:
            raise ValueError("The circulant size must be at least 1.")
        return v

    @validator("shifts")
    def _check_grid(cls, v: ShiftGrid) -> ShiftGrid:
        if not v or not v[0]:
            raise ValueError("The shift grid must have at least one row and column.")
        if any(len(row) != len(v[0]) for row in v):
            raise ValueError("Every macro-row must have the same number of cells.")
        return v

    @root_validator(skip_on_failure=True)
    def _check_shift_range(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        _validate_shifts(values["shifts"], values["p"])
        return values

    @property
    def r(self) -> int:
        return len(self.shifts)

    @property
    def s(self) -> int:
        return len(self.shifts[0])

    @classmethod
    def from_grid(cls, p: int, grid: Sequence[Sequence[Any]]) -> QcShiftMatrix:
        """Build from a grid whose cells are ints, ``None`` or int sequences."""

        def cell(entry: Any) -> ShiftCell:
            if entry is None:
                return ()
            if isinstance(entry, (int, np.integer)):
                return (int(entry),)
            return tuple(int(shift) for shift in entry)

        return cls(p=int(p), shifts=tuple(tuple(cell(e) for e in row) for row in grid))

    @classmethod
    def parse(
        cls,
        path: Union[FilePath, str],
        encoding: str = "utf-8",
    ) -> QcShiftMatrix:
        """Read a shift file from disk."""
        path = Path(path)
        if not path.exists():
            raise ParserException("The file does not exist.")
        return cls.from_text(path.read_text(encoding=encoding))

    @classmethod
    def from_text(cls, text: str) -> QcShiftMatrix:
        """Parse shift-file text.

        The first data line is ``p r s``; each of the next ``r`` lines holds
        ``s`` cells written as ``-``, a shift, or shifts joined by ``+``.
        Lines starting with ``#`` are comments.
        """
        lines = list(iter_content_lines(text))
        if not lines:
            raise ParserException("The file is empty.")

        header_line, header = lines[0]
        if len(header) != 3:
            raise ParserException(f"Line {header_line}: Expected 'p r s'.")
        p, r, s = (parse_int(token, header_line) for token in header)
        if p < 1 or r < 1 or s < 1:
            raise ParserException(f"Line {header_line}: p, r and s must be positive.")
        if len(lines) - 1 != r:
            raise ParserException(f"Expected {r} macro-rows, found {len(lines) - 1}.")

        grid = []
        for line_number, tokens in lines[1:]:
            if len(tokens) != s:
                raise ParserException(
                    f"Line {line_number}: Expected {s} cells, found {len(tokens)}."
                )
            row = tuple(parse_shift_token(token, line_number) for token in tokens)
            for cell in row:
                if any(not 0 <= shift < p for shift in cell):
                    raise ParserException(
                        f"Line {line_number}: Shifts must lie in 0..{p - 1}."
                    )
            grid.append(row)

        return cls(p=p, shifts=tuple(grid))

    def to_shift_file(
        self,
        path: Optional[Union[FilePath, str, None]] = None,
        encoding: str = "utf-8",
    ) -> str:
        """Write the grid in shift-file layout."""
        lines = [f"{self.p} {self.r} {self.s}"]
        lines += [" ".join(format_shift_cell(cell) for cell in row) for row in self.shifts]
        text = "\n".join(lines) + "\n"

        if path:
            Path(path).write_text(text, encoding=encoding)

        return text


def _validate_shifts(shifts: ShiftGrid, p: int) -> None:
    for a, row in enumerate(shifts):
        for b, cell in enumerate(row):
            for shift in cell:
                if not 0 <= shift < p:
                    raise InvalidShiftError(
                        f"Shift {shift} in block ({a}, {b}) is not in 0..{p - 1}."
                    )


def expand_qc(shifts: QcShiftMatrix) -> ParityCheckMatrix:
    """Expand a shift grid into its ``r*p x s*p`` parity-check matrix.

    Block ``(a, b)`` with shift ``t`` sets ``H[a*p + u, b*p + (u + t) % p]``
    for every ``u``. Overlapping circulants in a summed cell cancel.

    Raises
    ------
    InvalidShiftError
        If a shift is not in ``0..p-1``.
    """
    p = shifts.p
    _validate_shifts(shifts.shifts, p)

    u = np.arange(p, dtype=np.int64)
    rows: List[np.ndarray] = []
    cols: List[np.ndarray] = []
    for a, row in enumerate(shifts.shifts):
        for b, cell in enumerate(row):
            for t in cell:
                rows.append(a * p + u)
                cols.append(b * p + (u + t) % p)

    shape = (shifts.r * p, shifts.s * p)
    if not rows:
        return ParityCheckMatrix(matrix=sp.csr_matrix(shape, dtype=np.uint8))

    row_index = np.concatenate(rows)
    matrix = sp.csr_matrix(
        (np.ones(len(row_index), dtype=np.int64), (row_index, np.concatenate(cols))),
        shape=shape,
    )
    # Circulants overlapping in a summed cell cancel modulo 2
    matrix.sum_duplicates()
    matrix.data %= 2
    return ParityCheckMatrix(matrix=matrix)


def syndrome(H: ParityCheckMatrix, bits: Any) -> np.ndarray:
    """Parity of every check for a binary word.

    Raises
    ------
    DimensionError
        If ``bits`` does not have length ``n``.
    """
    bits = np.asarray(bits)
    if bits.shape != (H.n,):
        raise DimensionError(f"Expected a word of length {H.n}, got shape {bits.shape}.")
    return ((H.matrix @ (bits.astype(np.int64) % 2)) % 2).astype(np.uint8)


def check_degree_groups(H: ParityCheckMatrix) -> List[Tuple[int, np.ndarray]]:
    """Edge positions of the checks, grouped by check degree.

    Returns
    -------
    list of (int, np.ndarray)
        For each degree ``d`` present, an array of shape ``(k, d)`` whose row
        holds the positions in ``edge_var`` of one check's edges.
    """
    degrees = H.check_degrees
    offsets = H.matrix.indptr[:-1].astype(np.int64)
    groups = []
    for degree in np.unique(degrees):
        checks = np.flatnonzero(degrees == degree)
        groups.append(
            (int(degree), offsets[checks][:, None] + np.arange(degree, dtype=np.int64))
        )
    return groups


def is_codeword(H: ParityCheckMatrix, bits: Any) -> bool:
    return not syndrome(H, bits).any()


def nullspace_basis(H: ParityCheckMatrix) -> np.ndarray:
    """Basis of the code ``{x : Hx = 0 mod 2}``.

    Returns
    -------
    np.ndarray
        Array of shape (k, n), dtype uint8, one basis vector per row, with
        ``k = n - rank``.
    """
    reduced, pivots = H.row_reduced()
    free = np.setdiff1d(np.arange(H.n), pivots)

    basis = np.zeros((len(free), H.n), dtype=np.uint8)
    basis[np.arange(len(free)), free] = 1
    # Each pivot variable is the sum of the free variables in its row
    basis[:, pivots] = reduced[: len(pivots)][:, free].T
    return basis


def _adjacency(H: ParityCheckMatrix) -> List[List[int]]:
    # Checks are vertices 0..m-1, variables m..m+n-1
    return [[H.m + i for i in nbrs] for nbrs in H.check_nbrs] + [
        list(nbrs) for nbrs in H.var_nbrs
    ]


def _shortest_cycle_from(root: int, adjacency: List[List[int]], best: float) -> float:
    dist = [-1] * len(adjacency)
    parent = [-1] * len(adjacency)
    dist[root] = 0
    queue = deque([root])
    while queue:
        u = queue.popleft()
        # Cycles closed from here on have length at least 2 * dist[u] + 2
        if 2 * dist[u] + 2 >= best:
            break
        for w in adjacency[u]:
            if w == parent[u]:
                continue
            if dist[w] >= 0:
                best = min(best, dist[u] + dist[w] + 1)
            else:
                dist[w] = dist[u] + 1
                parent[w] = u
                queue.append(w)
    return best


def _girth_from_roots(H: ParityCheckMatrix, roots: Sequence[int]) -> Union[int, float]:
    adjacency = _adjacency(H)
    best: float = math.inf
    for root in roots:
        best = _shortest_cycle_from(root, adjacency, best)
        if best == 4:
            break
    return int(best) if best != math.inf else math.inf


def girth(H: ParityCheckMatrix) -> Union[int, float]:
    """Length of the shortest cycle of the Tanner graph.

    Every cycle passes through a check, so a breadth-first search from every
    check finds it. Returns ``math.inf`` for a forest.
    """
    return _girth_from_roots(H, range(H.m))


def qc_girth(shifts: QcShiftMatrix) -> Union[int, float]:
    """Girth of an expanded QC code.

    Checks of one macro-row are equivalent under the circulant automorphism,
    so one search root per macro-row suffices.
    """
    H = expand_qc(shifts)
    return _girth_from_roots(H, [a * shifts.p for a in range(shifts.r)])


def sample_qc_ensemble(
    r: int,
    s: int,
    p: int,
    min_girth: int,
    rng: np.random.Generator,
    max_attempts: int = ENSEMBLE_RETRY_BUDGET,
) -> QcShiftMatrix:
    """Draw a fully populated ``r x s`` shift grid with girth of at least ``min_girth``.

    Shifts are i.i.d. uniform in ``0..p-1``; grids failing the girth bound are
    discarded and redrawn.

    Raises
    ------
    SamplingError
        If no grid passes within ``max_attempts`` draws.
    """
    if min(r, s, p) < 1:
        raise ValueError("r, s and p must be positive.")

    for attempt in range(1, max_attempts + 1):
        draw = rng.integers(0, p, size=(r, s))
        shifts = QcShiftMatrix.from_grid(p, draw.tolist())
        if qc_girth(shifts) >= min_girth:
            logger.debug(f"Accepted ensemble sample after {attempt} attempt(s)")
            return shifts

    raise SamplingError(
        f"No {r}x{s} shift grid with girth >= {min_girth} found for p={p} "
        f"in {max_attempts} attempts."
    )


def builtin_shift_matrix(name: str) -> QcShiftMatrix:
    """Shift grid of a built-in code.

    Raises
    ------
    ValueError
        If ``name`` is not a built-in code.
    """
    try:
        text = BUILTIN_SHIFT_FILES[name]
    except KeyError as e:
        raise ValueError(
            f'Unknown code "{name}". Built-in codes: {", ".join(BUILTIN_SHIFT_FILES)}.'
        ) from e
    return QcShiftMatrix.from_text(text)
