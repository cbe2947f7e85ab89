"""Slow reference implementations for checking the fast code paths.

Nothing here is used by the decoders. Every routine enumerates vertices,
subsets or codewords, so the sizes they accept are capped.
"""

from typing import Any, Optional

import numpy as np

MAX_SIMPLEX_DEGREE = 64
MAX_VERTEX_DEGREE = 12
MAX_CODEBOOK_DIMENSION = 20
KKT_TOLERANCE = 1e-12


class CapacityError(ValueError):
    """The input is too large to enumerate."""


def _weight_parity_vertices(d: int, parity: int) -> np.ndarray:
    if not 1 <= d <= MAX_VERTEX_DEGREE:
        raise CapacityError(f"Vertex enumeration supports 1 <= d <= {MAX_VERTEX_DEGREE}.")
    words = np.arange(1 << d)
    bits = ((words[:, None] >> np.arange(d)) & 1).astype(np.uint8)
    return bits[bits.sum(axis=1) % 2 == parity]


def even_weight_vertices(d: int) -> np.ndarray:
    """The ``2**(d-1)`` even-weight binary words of length ``d``, as rows."""
    return _weight_parity_vertices(d, 0)


def max_cut_violation(
    x: Any,
    rng: Optional[np.random.Generator] = None,
    num_sets: int = 10**4,
) -> Any:
    """Largest violation of the parity polytope inequalities by ``x``.

    ``x`` is in centered coordinates. The inequalities are the box
    ``0 <= y <= 1`` and, for every odd-size set ``S``,
    ``sum(y[S]) - sum(y[not S]) <= |S| - 1`` with ``y = x + 1/2``. Up to
    ``d = 12`` all odd sets are checked; beyond that ``num_sets`` random odd
    sets drawn from ``rng`` are.

    Returns
    -------
    float or np.ndarray
        Zero or negative when ``x`` is feasible.
    """
    y = np.asarray(x, dtype=np.float64) + 0.5
    d = y.shape[-1]
    if d <= MAX_VERTEX_DEGREE:
        odd_sets = _weight_parity_vertices(d, 1)
    elif rng is not None:
        odd_sets = rng.integers(0, 2, size=(num_sets, d)).astype(np.uint8)
        even_rows = odd_sets.sum(axis=1) % 2 == 0
        odd_sets[even_rows, 0] ^= 1
    else:
        raise CapacityError("Pass an rng to sample odd sets for d > 12.")

    signs = 2.0 * odd_sets - 1.0
    cuts = y @ signs.T - odd_sets.sum(axis=1) + 1
    box = np.maximum(-y, y - 1).max(axis=-1)
    return np.maximum(cuts.max(axis=-1), box)


def oracle_project_simplex(v: Any) -> np.ndarray:
    """Centered simplex projection by trying every clip-set size.

    For ``kappa`` clipped entries the shift is fixed by the kept entries; the
    unique candidate satisfying the KKT sign conditions is returned.
    """
    v = np.asarray(v, dtype=np.float64)
    d = v.shape[0]
    if not 1 <= d <= MAX_SIMPLEX_DEGREE:
        raise CapacityError(f"Simplex oracle supports 1 <= d <= {MAX_SIMPLEX_DEGREE}.")

    y = v + 0.5
    order = np.argsort(-y, kind="stable")
    for kappa in range(d):
        kept = order[: d - kappa]
        clipped = order[d - kappa :]
        shift = (y[kept].sum() - 1) / (d - kappa)
        if (y[kept] - shift >= -KKT_TOLERANCE).all() and (
            y[clipped] - shift <= KKT_TOLERANCE
        ).all():
            w = np.zeros(d)
            w[kept] = y[kept] - shift
            return np.maximum(w, 0.0) - 0.5

    raise RuntimeError("No clip set satisfies the KKT conditions.")


def oracle_project_parity_polytope(
    v: Any,
    iters: int,
    gap_tolerance: float = 1e-14,
) -> np.ndarray:
    """Parity polytope projection by away-step Frank-Wolfe over its vertices.

    Minimizes ``||sum_e lambda_e (e - 1/2) - v||^2`` over convex weights on the
    even-weight vertices, stopping after ``iters`` steps or once the duality
    gap drops below ``gap_tolerance``. The iteration starts from equal weights,
    whose mean is the polytope center.

    Raises
    ------
    CapacityError
        If ``d > 12``.
    """
    v = np.asarray(v, dtype=np.float64)
    vertices = even_weight_vertices(v.shape[0]) - 0.5

    weights = np.full(len(vertices), 1.0 / len(vertices))
    x = weights @ vertices

    for _ in range(iters):
        gradient = x - v
        scores = vertices @ gradient
        toward = int(np.argmin(scores))
        active = np.flatnonzero(weights > 0)
        away = int(active[np.argmax(scores[active])])

        current = gradient @ x
        fw_gap = current - scores[toward]
        if fw_gap <= gap_tolerance:
            break

        toward_step = fw_gap >= scores[away] - current or weights[away] >= 1.0
        if toward_step:
            direction = vertices[toward] - x
            max_step = 1.0
        else:
            direction = x - vertices[away]
            max_step = weights[away] / (1.0 - weights[away])

        norm = direction @ direction
        if norm == 0:
            break
        step = min(max(-(gradient @ direction) / norm, 0.0), max_step)

        if toward_step:
            weights *= 1 - step
            weights[toward] += step
        else:
            weights *= 1 + step
            weights[away] -= step
        # Drop vertices whose weight vanished
        weights[weights < 1e-15] = 0.0
        weights /= weights.sum()
        x = weights @ vertices

    return x


def enumerate_codebook(basis: np.ndarray) -> np.ndarray:
    """Every codeword spanned by ``basis``, one per row."""
    k = len(basis)
    if k > MAX_CODEBOOK_DIMENSION:
        raise CapacityError(
            f"Codebook enumeration supports k <= {MAX_CODEBOOK_DIMENSION}."
        )
    coefficients = (np.arange(1 << k)[:, None] >> np.arange(k)) & 1
    return ((coefficients @ basis) % 2).astype(np.uint8)


def ml_codeword(codebook: np.ndarray, gamma: Any) -> np.ndarray:
    """The codeword minimizing ``gamma . c``."""
    return codebook[int(np.argmin(codebook @ np.asarray(gamma, dtype=np.float64)))]


def bitwise_map(codebook: np.ndarray, llr: Any) -> np.ndarray:
    """Bitwise MAP decisions under independent bit LLRs ``log P(0)/P(1)``."""
    log_weights = -(codebook @ np.asarray(llr, dtype=np.float64))
    log_weights -= log_weights.max()
    probabilities = np.exp(log_weights)
    ones = probabilities @ codebook
    return (ones > probabilities.sum() - ones).astype(np.uint8)
