"""Euclidean projections used by the ADMM check update.

All vector functions accept either a single vector of length ``d`` or a batch
of shape ``(k, d)`` and operate along the last axis. Coordinates are centered:
the hypercube is ``[-1/2, 1/2]^d`` and the parity polytope is the convex hull
of the even-weight ``+-1/2`` vertices.
"""

from typing import Any

import numpy as np

from admmlp.core.code import DimensionError
from admmlp.core.fixedpoint import (
    RECIPROCAL_FRAC_BITS,
    FixedFormats,
    reciprocal_raw,
    resize_raw,
    round_shift,
    saturate_raw,
)

MEMBERSHIP_TOLERANCE = 1e-12


class InvalidIntervalError(ValueError):
    """The lower end of an interval is above its upper end."""


def project_interval(x: float, lo: float, hi: float) -> float:
    """Clip ``x`` to ``[lo, hi]``.

    Raises
    ------
    InvalidIntervalError
        If ``lo > hi``.
    """
    if lo > hi:
        raise InvalidIntervalError(f"Empty interval [{lo}, {hi}].")
    return min(hi, max(lo, x))


def project_hypercube(v: Any) -> np.ndarray:
    return np.clip(np.asarray(v, dtype=np.float64), -0.5, 0.5)


def identify_facet(v: Any) -> np.ndarray:
    """Indicator of the odd-weight vertex closest to ``v``.

    ``f_i = 1`` where ``v_i >= 0``. If that leaves an even weight, the entry
    with the smallest ``|v_i|`` is flipped; the lowest index wins ties.

    Examples
    --------
    >>> identify_facet([0.4, -0.4, 0.3]).tolist()
    [1, 0, 0]
    """
    v = np.asarray(v)
    facet = (v >= 0).astype(np.uint8)
    even = np.asarray(facet.sum(axis=-1) % 2 == 0)
    closest = np.asarray(np.argmin(np.abs(v), axis=-1))
    flip = np.zeros_like(facet)
    np.put_along_axis(
        flip, closest[..., None], even[..., None].astype(np.uint8), axis=-1
    )
    return facet ^ flip


def similarity_transform(v: Any, facet: Any) -> np.ndarray:
    """Negate the entries of ``v`` selected by ``facet``. Self-inverse.

    Raises
    ------
    DimensionError
        If the shapes differ.
    """
    v = np.asarray(v)
    facet = np.asarray(facet)
    if v.shape != facet.shape:
        raise DimensionError(
            f"Shape {v.shape} does not match facet shape {facet.shape}."
        )
    return np.where(facet == 1, -v, v)


def project_centered_simplex(v: Any) -> np.ndarray:
    """Project onto ``{w : sum(w) = 1 - d/2, w_i >= -1/2}``.

    The sorted-shift method: with ``rho`` the entries in decreasing order,
    ``u_i = (rho_1 + ... + rho_i - 1) / i`` and ``i*`` the last ``i`` with
    ``rho_i > u_i``, the projection is ``max(v - u_{i*} - 1/2, -1/2)``.

    Examples
    --------
    >>> project_centered_simplex([1.0, 1.0]).tolist()
    [0.0, 0.0]
    """
    v = np.asarray(v, dtype=np.float64)
    d = v.shape[-1]
    rho = -np.sort(-v, axis=-1)
    shifts = (np.cumsum(rho, axis=-1) - 1) / np.arange(1, d + 1)
    active = rho > shifts
    last = np.asarray(d - 1 - np.argmax(active[..., ::-1], axis=-1))
    shift = np.take_along_axis(shifts, last[..., None], axis=-1)
    return np.maximum(v - shift - 0.5, -0.5)


def membership_test(v_tilde: Any) -> Any:
    """Whether the hypercube projection of ``v`` lies inside the parity polytope.

    ``v_tilde`` is ``v`` after the similarity transform of its facet. The test
    is ``sum(clip(v_tilde)) >= 1 - d/2``; the boundary counts as inside.
    """
    v_tilde = np.asarray(v_tilde, dtype=np.float64)
    d = v_tilde.shape[-1]
    total = project_hypercube(v_tilde).sum(axis=-1)
    return total >= 1 - d / 2 - MEMBERSHIP_TOLERANCE


def project_parity_polytope(v: Any) -> np.ndarray:
    """Exact Euclidean projection onto the centered parity polytope.

    Examples
    --------
    >>> np.round(project_parity_polytope([0.6, 0.6, 0.6]), 6).tolist()
    [0.166667, 0.166667, 0.166667]
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] < 2:
        raise DimensionError("Parity polytope projection needs d >= 2.")
    facet = identify_facet(v)
    v_tilde = similarity_transform(v, facet)
    inside = membership_test(v_tilde)
    shell = similarity_transform(project_centered_simplex(v_tilde), facet)
    return np.where(np.asarray(inside)[..., None], project_hypercube(v), shell)


def project_parity_polytope_fixed(v_raw: Any, formats: FixedFormats) -> np.ndarray:
    """Bit-accurate parity polytope projection.

    Parameters
    ----------
    v_raw : array_like of int
        Mantissas in ``formats.check_sum``, shape ``(d,)`` or ``(k, d)``.
    formats : FixedFormats
        Datapath formats.

    Returns
    -------
    np.ndarray
        Mantissas of the projection in ``formats.replica``.
    """
    v_raw = np.asarray(v_raw, dtype=np.int64)
    d = v_raw.shape[-1]
    if d < 2:
        raise DimensionError("Parity polytope projection needs d >= 2.")

    in_frac = formats.check_sum.frac_bits
    t_fmt = formats.pp_transformed
    sort_fmt = formats.simplex_sorted
    out_fmt = formats.simplex_output

    facet = identify_facet(v_raw)
    v_tilde = resize_raw(similarity_transform(v_raw, facet), in_frac, t_fmt)

    # Membership on exact integers: sum(clip(v~)) >= (2 - d) / 2
    t_half = 1 << (t_fmt.frac_bits - 1)
    clipped_sum = np.clip(v_tilde, -t_half, t_half).sum(axis=-1)
    inside = np.asarray(clipped_sum >= (2 - d) * t_half)

    # Sorted-shift simplex projection
    rho = resize_raw(-np.sort(-v_tilde, axis=-1), t_fmt.frac_bits, sort_fmt)
    prefix = np.cumsum(rho, axis=-1) - (1 << sort_fmt.frac_bits)
    recips = np.array([reciprocal_raw(i) for i in range(1, d + 1)], dtype=np.int64)
    product_frac = sort_fmt.frac_bits + RECIPROCAL_FRAC_BITS
    shifts = round_shift(prefix * recips, product_frac - out_fmt.frac_bits)
    rho_out = round_shift(rho, sort_fmt.frac_bits - out_fmt.frac_bits)
    active = rho_out > shifts
    last = np.asarray(d - 1 - np.argmax(active[..., ::-1], axis=-1))
    shift = np.take_along_axis(shifts, last[..., None], axis=-1)

    out_half = 1 << (out_fmt.frac_bits - 1)
    v_tilde_out = round_shift(v_tilde, t_fmt.frac_bits - out_fmt.frac_bits)
    w = np.maximum(v_tilde_out - shift - out_half, -out_half)
    w = saturate_raw(w, out_fmt)
    shell = resize_raw(
        similarity_transform(w, facet), out_fmt.frac_bits, formats.replica
    )

    in_half = 1 << (in_frac - 1)
    cube = resize_raw(np.clip(v_raw, -in_half, in_half), in_frac, formats.replica)
    return np.where(inside[..., None], cube, shell)
