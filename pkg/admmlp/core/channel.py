from __future__ import annotations

import math
from typing import Any, Dict, Optional

import numpy as np
from pydantic import root_validator, validator

from admmlp.core.base import BaseModel
from admmlp.core.fixedpoint import ArithmeticProfile, QFormat, quantize_raw, to_real

DEFAULT_LLR_FORMAT = QFormat(int_bits=0, frac_bits=7)


class ChannelConfig(BaseModel):
    """A BPSK transmission over an AWGN channel.

    Parameters
    ----------
    ebn0_db : float
        Energy per information bit over noise density, in dB.
    rate : float
        Code rate ``R`` in ``(0, 1]``.
    saturation_a : float, default=1.0
        Channel outputs are clamped to ``+-(1 + a * sigma)``.
    llr_format : QFormat, default=Q0.7
        Format of the quantized LLRs.
    seed : int, optional
        Seed for ``rng``.
    """

    ebn0_db: float
    rate: float
    saturation_a: float = 1.0
    llr_format: QFormat = DEFAULT_LLR_FORMAT
    seed: Optional[int] = None

    @validator("rate")
    def _check_rate(cls, v: float) -> float:
        if not 0 < v <= 1:
            raise ValueError("The code rate must lie in (0, 1].")
        return v

    @validator("saturation_a")
    def _check_saturation(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("The saturation factor must be positive.")
        return v

    @property
    def sigma(self) -> float:
        return sigma_from_ebn0(self.ebn0_db, self.rate)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


class LlrVector(BaseModel):
    """Channel log-likelihood ratios, positive values favoring bit 0.

    Parameters
    ----------
    values : np.ndarray
        Real LLR values, float64.
    fmt : QFormat, optional
        Set when the values are quantized; every value is then a multiple of
        the format's LSB inside its range.
    """

    values: np.ndarray
    fmt: Optional[QFormat] = None

    @root_validator(skip_on_failure=True)
    def _check_values(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        array = values["values"]
        if array.ndim != 1:
            raise ValueError("LLRs must be a 1-dimensional array.")
        fmt: Optional[QFormat] = values.get("fmt")
        if fmt is not None:
            scaled = array * (1 << fmt.frac_bits)
            if not np.array_equal(scaled, np.rint(scaled)):
                raise ValueError(f"LLR values are not representable in {fmt}.")
            if np.abs(scaled).max(initial=0) > fmt.max_raw:
                raise ValueError(f"LLR values exceed the range of {fmt}.")
        return values

    def __len__(self) -> int:
        return len(self.values)

    @property
    def raw(self) -> np.ndarray:
        """Integer mantissas of quantized LLRs."""
        if self.fmt is None:
            raise ValueError("Double-precision LLRs have no mantissas.")
        return np.rint(self.values * (1 << self.fmt.frac_bits)).astype(np.int64)


def sigma_from_ebn0(ebn0_db: float, rate: float) -> float:
    """Noise standard deviation for unit-energy BPSK.

    Examples
    --------
    >>> sigma_from_ebn0(0.0, 0.5)
    1.0
    """
    if not 0 < rate <= 1:
        raise ValueError("The code rate must lie in (0, 1].")
    return math.sqrt(1 / (2 * rate * 10 ** (ebn0_db / 10)))


def transmit(bits: Any, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Map bit 0 to +1 and bit 1 to -1 and add white Gaussian noise."""
    symbols = 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)
    if sigma == 0:
        return symbols
    return symbols + rng.normal(0.0, sigma, size=symbols.shape)


def llr_quantize(
    y: Any,
    sigma: float,
    cfg: ChannelConfig,
    profile: ArithmeticProfile = ArithmeticProfile.DOUBLE,
) -> LlrVector:
    """Saturate channel outputs and scale them into decoder LLRs.

    Outputs are clamped to ``+-S`` with ``S = 1 + a * sigma`` and divided by
    ``S``. The fixed profile then quantizes the result to the full range of
    ``cfg.llr_format``, so ``+-S`` maps to the largest LLR magnitude; the
    double profile keeps the unit scale.
    """
    y = np.asarray(y, dtype=np.float64)
    limit = 1 + cfg.saturation_a * sigma
    scaled = np.clip(y, -limit, limit) / limit

    if profile == ArithmeticProfile.FIXED:
        fmt = cfg.llr_format
        raw = quantize_raw(scaled * fmt.max_value, fmt)
        return LlrVector(values=to_real(raw, fmt), fmt=fmt)
    return LlrVector(values=scaled)


def channel_llr(y: Any, sigma: float) -> np.ndarray:
    """Exact BPSK-AWGN LLRs ``2y / sigma**2``, as used by belief propagation."""
    return 2.0 * np.asarray(y, dtype=np.float64) / sigma**2
