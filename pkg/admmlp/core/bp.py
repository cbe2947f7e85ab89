from __future__ import annotations

import logging
from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import validator

from admmlp.core.base import BaseModel
from admmlp.core.code import (
    DimensionError,
    ParityCheckMatrix,
    check_degree_groups,
    is_codeword,
)
from admmlp.core.decoder import DecodeResult, DecodeStatus, hard_decision

logger = logging.getLogger(__name__)

LLR_CLIP = 50.0
# Largest tanh product that still has a finite inverse
_TANH_LIMIT = np.nextafter(1.0, 0.0)


class BpVariant(str, Enum):
    SUM_PRODUCT = "sum-product"
    MIN_SUM = "min-sum"


class BpConfig(BaseModel):
    """Configuration of the belief-propagation baseline.

    Parameters
    ----------
    max_iters : int, default=60
        Iteration limit.
    variant : BpVariant, default=BpVariant.SUM_PRODUCT
        Check rule.
    early_termination : bool, default=True
        Stop as soon as the hard decision is a codeword.
    """

    max_iters: int = 60
    variant: BpVariant = BpVariant.SUM_PRODUCT
    early_termination: bool = True

    @validator("max_iters")
    def _check_max_iters(cls, v: int) -> int:
        if v < 1:
            raise ValueError("max_iters must be at least 1.")
        return v


def _exclusive_product(values: np.ndarray) -> np.ndarray:
    # Product of every other entry along the last axis, without division
    ones = np.ones(values.shape[:-1] + (1,))
    before = np.cumprod(np.concatenate([ones, values[..., :-1]], axis=-1), axis=-1)
    after = np.cumprod(
        np.concatenate([ones, values[..., :0:-1]], axis=-1), axis=-1
    )[..., ::-1]
    return before * after


def bp_check_update(incoming: Any, variant: BpVariant = BpVariant.SUM_PRODUCT) -> Any:
    """Extrinsic check-to-variable LLRs for checks of one degree.

    Parameters
    ----------
    incoming : array_like
        Variable-to-check LLRs, shape ``(d,)`` or ``(k, d)``.
    variant : BpVariant
        ``SUM_PRODUCT`` uses ``2 atanh(prod tanh(L/2))``; ``MIN_SUM`` uses the
        smallest other magnitude times the product of the other signs.
    """
    incoming = np.asarray(incoming, dtype=np.float64)
    if variant == BpVariant.SUM_PRODUCT:
        product = _exclusive_product(np.tanh(incoming / 2))
        return 2 * np.arctanh(np.clip(product, -_TANH_LIMIT, _TANH_LIMIT))

    signs = np.where(incoming < 0, -1.0, 1.0)
    magnitudes = np.abs(incoming)
    order = np.argsort(magnitudes, axis=-1, kind="stable")
    smallest = np.take_along_axis(magnitudes, order[..., :1], axis=-1)
    second = np.take_along_axis(magnitudes, order[..., 1:2], axis=-1)
    positions = np.arange(incoming.shape[-1])
    others_min = np.where(positions == order[..., :1], second, smallest)
    return _exclusive_product(signs) * others_min


def bp_decode(
    H: ParityCheckMatrix,
    gamma: Any,
    cfg: Optional[BpConfig] = None,
) -> DecodeResult:
    """Flooding belief propagation in the LLR domain.

    Parameters
    ----------
    H : ParityCheckMatrix
        The code; every check needs degree 2 or more.
    gamma : array_like
        Channel LLRs, positive values favoring bit 0.
    cfg : BpConfig, optional
        Decoder settings, defaults to ``BpConfig()``.

    Returns
    -------
    DecodeResult
        ``final_x`` holds ``-tanh(L/2)/2`` of the posterior LLRs ``L``, which
        shares its sign convention with the ADMM estimates.
    """
    if cfg is None:
        cfg = BpConfig()
    gamma = np.clip(np.asarray(gamma, dtype=np.float64), -LLR_CLIP, LLR_CLIP)
    if gamma.shape != (H.n,):
        raise DimensionError(f"Expected {H.n} LLRs, got an array of shape {gamma.shape}.")
    if H.check_degrees.min() < 2:
        raise ValueError("Every check must involve at least two variables.")

    edge_var = H.edge_var
    groups = check_degree_groups(H)
    to_check = gamma[edge_var]
    to_var = np.zeros_like(to_check)
    posterior = gamma.copy()
    bits = hard_decision(-posterior)

    iteration = 0
    while iteration < cfg.max_iters:
        iteration += 1
        for _, positions in groups:
            to_var[positions] = bp_check_update(to_check[positions], cfg.variant)
        to_var = np.clip(to_var, -LLR_CLIP, LLR_CLIP)

        posterior = gamma + np.bincount(edge_var, weights=to_var, minlength=H.n)
        to_check = np.clip(posterior[edge_var] - to_var, -LLR_CLIP, LLR_CLIP)
        bits = hard_decision(-posterior)
        if cfg.early_termination and is_codeword(H, bits):
            break

    status = (
        DecodeStatus.CODEWORD if is_codeword(H, bits) else DecodeStatus.NON_CODEWORD
    )
    logger.debug(f"BP stopped after {iteration} iteration(s): {status.value}")
    return DecodeResult(
        bits=bits,
        status=status,
        iterations_used=iteration,
        final_x=-np.tanh(posterior / 2) / 2,
    )
