"""Signed fixed-point arithmetic in Q format.

A ``Qi.f`` number has 1 sign bit, ``i`` integer bits and ``f`` fraction bits
and is stored as an integer mantissa ``raw`` with value ``raw * 2**-f``.
Saturation is symmetric: ``raw`` lies in ``[-(2**(W-1) - 1), 2**(W-1) - 1]``
where ``W = 1 + i + f``, so negation never overflows. Excess fraction bits are
always removed by rounding half away from zero, which keeps
``quantize(-x) == -quantize(x)``.

Scalar operations work on ``FixedValue`` models. The ``*_raw`` helpers apply
the same rules to integer numpy arrays and are what the decoder datapath uses.
"""

from __future__ import annotations

import math
import re
from enum import Enum
from typing import Any, Dict, Optional, Tuple, TypeVar, Union

import numpy as np
from pydantic import root_validator, validator

from admmlp.core.base import BaseModel
from admmlp.utils import ParserException

Q_FORMAT_PATTERN = re.compile(r"^Q(\d+)\.(\d+)$")
MAX_WIDTH = 64
# Widest format the float-backed array helpers can hold exactly
MAX_ARRAY_WIDTH = 53
RECIPROCAL_FRAC_BITS = 24

RawInt = TypeVar("RawInt", int, np.ndarray)


class ArithmeticProfile(str, Enum):
    """The arithmetic a decoder runs in."""

    DOUBLE = "double"
    FIXED = "fixed"


class QFormat(BaseModel):
    """A signed fixed-point number format.

    Parameters
    ----------
    int_bits : int
        Number of integer bits (excluding the sign bit).
    frac_bits : int
        Number of fraction bits.

    Examples
    --------
    >>> fmt = QFormat.parse("Q2.7")
    >>> fmt.width
    10
    >>> fmt.max_value
    3.9921875
    >>> str(fmt)
    'Q2.7'
    """

    int_bits: int
    frac_bits: int

    @validator("int_bits", "frac_bits")
    def _check_non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("Bit counts must be non-negative.")
        return v

    @root_validator(skip_on_failure=True)
    def _check_width(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        if 1 + values["int_bits"] + values["frac_bits"] > MAX_WIDTH:
            raise ValueError(f"Total width cannot exceed {MAX_WIDTH} bits.")
        return values

    def __str__(self) -> str:
        return f"Q{self.int_bits}.{self.frac_bits}"

    @property
    def width(self) -> int:
        return 1 + self.int_bits + self.frac_bits

    @property
    def max_raw(self) -> int:
        return (1 << (self.width - 1)) - 1

    @property
    def min_raw(self) -> int:
        return -self.max_raw

    @property
    def lsb(self) -> float:
        return 2.0**-self.frac_bits

    @property
    def max_value(self) -> float:
        return self.max_raw * self.lsb

    @classmethod
    def parse(cls, string: str) -> QFormat:
        """Parse a ``Qi.f`` string such as ``"Q2.7"``.

        Raises
        ------
        ParserException
            If the string is not in ``Qi.f`` notation.
        """
        match = Q_FORMAT_PATTERN.match(string.strip())
        if not match:
            raise ParserException(f"Invalid Q format: {string!r}")
        return cls(int_bits=int(match.group(1)), frac_bits=int(match.group(2)))


class FixedValue(BaseModel):
    """A value held in a ``QFormat``.

    Parameters
    ----------
    raw : int
        The integer mantissa.
    fmt : QFormat
        The format the mantissa is interpreted in.
    """

    raw: int
    fmt: QFormat

    @root_validator(skip_on_failure=True)
    def _check_range(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        fmt: QFormat = values["fmt"]
        if not fmt.min_raw <= values["raw"] <= fmt.max_raw:
            raise ValueError(f"Raw value {values['raw']} out of range for {fmt}.")
        return values

    def __str__(self) -> str:
        return f"{self.value} ({self.fmt})"

    def __neg__(self) -> FixedValue:
        return FixedValue(raw=-self.raw, fmt=self.fmt)

    @property
    def value(self) -> float:
        return self.raw * self.fmt.lsb


class FixedFormats(BaseModel):
    """The formats of every quantity in the fixed-point decoder.

    The defaults are the widths of the reference FPGA datapath: 8-bit LLRs,
    10-bit messages and check states, 13/14-bit projection internals.
    """

    llr: QFormat = QFormat(int_bits=0, frac_bits=7)
    var_sum: QFormat = QFormat(int_bits=4, frac_bits=7)
    var_penalized: QFormat = QFormat(int_bits=5, frac_bits=7)
    estimate: QFormat = QFormat(int_bits=0, frac_bits=9)
    message: QFormat = QFormat(int_bits=2, frac_bits=7)
    check_sum: QFormat = QFormat(int_bits=3, frac_bits=9)
    pp_transformed: QFormat = QFormat(int_bits=4, frac_bits=9)
    simplex_sorted: QFormat = QFormat(int_bits=4, frac_bits=9)
    simplex_output: QFormat = QFormat(int_bits=0, frac_bits=13)
    replica: QFormat = QFormat(int_bits=0, frac_bits=12)

    @validator("*")
    def _check_array_width(cls, v: QFormat) -> QFormat:
        if v.width > MAX_ARRAY_WIDTH:
            raise ValueError(f"Datapath formats are limited to {MAX_ARRAY_WIDTH} bits.")
        return v

    @validator("var_penalized", "simplex_sorted")
    def _check_reciprocal_product(cls, v: QFormat) -> QFormat:
        # Multiplied by 24-bit reciprocals in int64
        if v.width + RECIPROCAL_FRAC_BITS > 63:
            raise ValueError(
                f"{v} is too wide to scale by a reciprocal in 64-bit arithmetic."
            )
        return v

    @validator("estimate", "replica", "simplex_output")
    def _check_holds_half(cls, v: QFormat) -> QFormat:
        # These quantities live in [-1/2, 1/2] and need a fraction bit for it
        if v.frac_bits < 1:
            raise ValueError("Estimate and replica formats need a fraction bit.")
        return v


DATAPATH_FORMATS: Tuple[str, ...] = (
    "Q0.7",
    "Q4.7",
    "Q5.7",
    "Q0.9",
    "Q2.7",
    "Q3.9",
    "Q0.12",
    "Q4.9",
    "Q0.13",
)


def round_shift(raw: RawInt, shift: int) -> RawInt:
    """Multiply ``raw`` by ``2**-shift``, rounding half away from zero.

    A non-positive ``shift`` is an exact left shift.
    """
    if shift <= 0:
        return raw * (1 << -shift)
    half = 1 << (shift - 1)
    if isinstance(raw, np.ndarray):
        magnitude = (np.abs(raw) + half) >> shift
        return np.where(raw < 0, -magnitude, magnitude)
    magnitude = (abs(raw) + half) >> shift
    return -magnitude if raw < 0 else magnitude


def saturate_raw(raw: RawInt, fmt: QFormat) -> RawInt:
    """Clamp a mantissa to the symmetric range of ``fmt``."""
    if isinstance(raw, np.ndarray):
        return np.clip(raw, fmt.min_raw, fmt.max_raw)
    return max(fmt.min_raw, min(fmt.max_raw, raw))


def resize_raw(raw: RawInt, from_frac: int, fmt: QFormat) -> RawInt:
    """Move a mantissa with ``from_frac`` fraction bits into ``fmt``."""
    return saturate_raw(round_shift(raw, from_frac - fmt.frac_bits), fmt)


def quantize_raw(x: Union[float, np.ndarray], fmt: QFormat) -> Any:
    """Quantize real values to mantissas of ``fmt``.

    Scalars return a Python ``int``; arrays return ``int64`` arrays, for which
    ``fmt`` must be at most 53 bits wide.
    """
    scale = float(1 << fmt.frac_bits)
    if isinstance(x, np.ndarray):
        if fmt.width > MAX_ARRAY_WIDTH:
            raise ValueError(f"Array quantization supports up to {MAX_ARRAY_WIDTH} bits.")
        if np.isnan(x).any():
            raise ValueError("Cannot quantize NaN.")
        magnitude = np.minimum(np.floor(np.abs(x) * scale + 0.5), fmt.max_raw)
        return np.where(x < 0, -magnitude, magnitude).astype(np.int64)

    if math.isnan(x):
        raise ValueError("Cannot quantize NaN.")
    scaled = abs(x) * scale + 0.5
    magnitude = fmt.max_raw if scaled >= fmt.max_raw + 1 else math.floor(scaled)
    magnitude = min(magnitude, fmt.max_raw)
    return -magnitude if x < 0 else magnitude


def to_real(raw: np.ndarray, fmt: QFormat) -> np.ndarray:
    """Real values of an array of mantissas in ``fmt``."""
    return raw.astype(np.float64) * fmt.lsb


def quantize(x: float, fmt: QFormat) -> FixedValue:
    """Quantize a real number, rounding half away from zero and saturating.

    Examples
    --------
    >>> quantize(0.3, QFormat.parse("Q0.7")).raw
    38
    >>> quantize(5.0, QFormat.parse("Q0.7")).raw
    127
    """
    return FixedValue(raw=quantize_raw(float(x), fmt), fmt=fmt)


def resize(a: FixedValue, out_fmt: QFormat) -> FixedValue:
    """Convert a value to another format.

    Fraction bits are added exactly or removed by rounding; integer overflow
    saturates.
    """
    return FixedValue(raw=resize_raw(a.raw, a.fmt.frac_bits, out_fmt), fmt=out_fmt)


def add(a: FixedValue, b: FixedValue, out_fmt: QFormat) -> FixedValue:
    """Add two values exactly, then resize the sum to ``out_fmt``."""
    frac = max(a.fmt.frac_bits, b.fmt.frac_bits)
    total = round_shift(a.raw, a.fmt.frac_bits - frac) + round_shift(
        b.raw, b.fmt.frac_bits - frac
    )
    return FixedValue(raw=resize_raw(total, frac, out_fmt), fmt=out_fmt)


def reciprocal_raw(degree: int) -> int:
    """Mantissa of ``1/degree`` with 24 fraction bits.

    ``degree == 1`` yields ``2**24``, one past the Q0.24 range; multiplying
    by it is the exact identity that a degree-1 node needs.
    """
    if degree < 1:
        raise ValueError("Degree must be at least 1.")
    return _reciprocal_mantissa(degree)


def _reciprocal_mantissa(degree: int) -> int:
    numerator = 1 << RECIPROCAL_FRAC_BITS
    # round(2**24 / degree), half away from zero
    return (2 * numerator + degree) // (2 * degree)


def reciprocal(degree: int) -> FixedValue:
    """The 25-bit Q0.24 reciprocal of a node degree (degree >= 2)."""
    if degree < 2:
        raise ValueError("Q0.24 reciprocals exist for degrees of 2 or more.")
    return FixedValue(
        raw=_reciprocal_mantissa(degree),
        fmt=QFormat(int_bits=0, frac_bits=RECIPROCAL_FRAC_BITS),
    )


def mul_reciprocal(
    a: FixedValue,
    recip: FixedValue,
    out_fmt: Optional[QFormat] = None,
) -> FixedValue:
    """Multiply by a reciprocal constant and round into ``out_fmt``.

    Parameters
    ----------
    a : FixedValue
        The value to normalize.
    recip : FixedValue
        A Q0.24 reciprocal, see ``reciprocal``.
    out_fmt : QFormat, default=None
        Output format. Defaults to the format of ``a``.
    """
    if out_fmt is None:
        out_fmt = a.fmt
    product = a.raw * recip.raw
    return FixedValue(
        raw=resize_raw(product, a.fmt.frac_bits + recip.fmt.frac_bits, out_fmt),
        fmt=out_fmt,
    )
