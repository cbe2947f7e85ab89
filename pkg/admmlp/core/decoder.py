"""ADMM linear-programming decoder with an l1 penalty.

Each iteration runs every variable update, broadcasting the estimate ``x_i``
to all neighboring checks, then every check update. A check projects
``v = x + lambda`` onto the parity polytope, keeps ``lambda = v - z`` and
returns ``2z - v`` to its variables.

Two arithmetic profiles share the iteration: ``DOUBLE`` on float64 values and
``FIXED`` on integer mantissas in the formats of ``FixedFormats``.
"""

from __future__ import annotations

import logging
import math
from enum import Enum
from typing import Any, List, Optional, Tuple, Union

import numpy as np
from pydantic import validator

from admmlp.core.base import BaseModel, MutableModel
from admmlp.core.channel import LlrVector
from admmlp.core.code import (
    DimensionError,
    ParityCheckMatrix,
    check_degree_groups,
    is_codeword,
)
from admmlp.core.fixedpoint import (
    RECIPROCAL_FRAC_BITS,
    ArithmeticProfile,
    FixedFormats,
    quantize_raw,
    reciprocal_raw,
    resize_raw,
    round_shift,
    to_real,
)
from admmlp.core.projection import project_parity_polytope, project_parity_polytope_fixed

logger = logging.getLogger(__name__)

DOUBLE_INTEGRALITY_TOLERANCE = 1e-5

GammaLike = Union[LlrVector, np.ndarray, List[float]]


class DecodeStatus(str, Enum):
    """Outcome of a decode.

    ``PSEUDOCODEWORD_SUSPECT`` marks a failed decode whose estimates are all
    fractional.
    """

    CODEWORD = "codeword"
    NON_CODEWORD = "non-codeword"
    PSEUDOCODEWORD_SUSPECT = "pseudocodeword-suspect"


class DecoderConfig(BaseModel):
    """Configuration of the ADMM-LP decoder.

    Parameters
    ----------
    alpha : float, default=0.1
        Weight of the l1 penalty pushing estimates to the cube corners.
    max_iters : int, default=60
        Iteration limit.
    early_termination : bool, default=True
        Stop as soon as the hard decision is a codeword.
    profile : ArithmeticProfile, default=ArithmeticProfile.DOUBLE
        Arithmetic to decode in.
    formats : FixedFormats, optional
        Datapath formats of the fixed profile.
    convergence_tol : float, optional
        Double profile only. Stop once both the largest disagreement between
        an estimate and a check replica and the largest change of an estimate
        over one iteration fall to this value.
    """

    alpha: float = 0.1
    max_iters: int = 60
    early_termination: bool = True
    profile: ArithmeticProfile = ArithmeticProfile.DOUBLE
    formats: FixedFormats = FixedFormats()
    convergence_tol: Optional[float] = None

    @validator("alpha")
    def _check_alpha(cls, v: float) -> float:
        if not v >= 0:
            raise ValueError("alpha must be non-negative.")
        return v

    @validator("max_iters")
    def _check_max_iters(cls, v: int) -> int:
        if v < 1:
            raise ValueError("max_iters must be at least 1.")
        return v

    @validator("convergence_tol")
    def _check_tolerance(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and v <= 0:
            raise ValueError("convergence_tol must be positive.")
        return v

    @property
    def integrality_tolerance(self) -> float:
        """Distance from +-1/2 below which an estimate counts as fractional."""
        if self.profile == ArithmeticProfile.FIXED:
            return self.formats.estimate.lsb
        return DOUBLE_INTEGRALITY_TOLERANCE

    @property
    def alpha_raw(self) -> int:
        """``alpha`` quantized to the LLR format."""
        return quantize_raw(self.alpha, self.formats.llr)


class DecoderState(MutableModel):
    """Per-call decoder memory.

    ``lam`` and ``msgs`` are per-edge arrays in check-major edge order.
    Fixed-profile arrays hold mantissas.
    """

    x: np.ndarray
    lam: np.ndarray
    msgs: np.ndarray
    iteration: int = 0
    residual: float = math.inf

    @classmethod
    def initial(cls, H: ParityCheckMatrix, profile: ArithmeticProfile) -> DecoderState:
        dtype = np.int64 if profile == ArithmeticProfile.FIXED else np.float64
        return cls(
            x=np.zeros(H.n, dtype=dtype),
            lam=np.zeros(H.num_edges, dtype=dtype),
            msgs=np.zeros(H.num_edges, dtype=dtype),
        )


class DecodeResult(BaseModel):
    """Outcome of one decode.

    Parameters
    ----------
    bits : np.ndarray
        Hard decisions.
    status : DecodeStatus
        ``CODEWORD`` exactly when ``bits`` has a zero syndrome.
    iterations_used : int
        Iterations run.
    final_x : np.ndarray
        Last estimates, in ``[-1/2, 1/2]``.
    integrality_tol : float, default=0.0
        Tolerance used by ``is_integral``.
    """

    bits: np.ndarray
    status: DecodeStatus
    iterations_used: int
    final_x: np.ndarray
    integrality_tol: float = 0.0

    @property
    def is_codeword(self) -> bool:
        return self.status == DecodeStatus.CODEWORD

    @property
    def is_integral(self) -> bool:
        """Whether every estimate sits at a cube corner."""
        return bool((np.abs(self.final_x) >= 0.5 - self.integrality_tol).all())


def hard_decision(x: Any) -> np.ndarray:
    """Bit 1 where ``x_i > 0``, else bit 0."""
    return (np.asarray(x) > 0).astype(np.uint8)


def _variable_update_double(
    sums: np.ndarray,
    gamma: np.ndarray,
    alpha: float,
    degrees: np.ndarray,
) -> np.ndarray:
    t = sums - gamma
    # np.sign(0) == 0, so no penalty is applied when t is zero
    s = t + alpha * np.sign(t)
    return np.clip(s / degrees, -0.5, 0.5)


def _variable_update_fixed(
    sums: np.ndarray,
    gamma: np.ndarray,
    alpha_raw: int,
    recips: np.ndarray,
    formats: FixedFormats,
) -> np.ndarray:
    msg_frac = formats.message.frac_bits
    llr_frac = formats.llr.frac_bits

    frac = max(msg_frac, llr_frac)
    t = resize_raw(
        round_shift(sums, msg_frac - frac) - round_shift(gamma, llr_frac - frac),
        frac,
        formats.var_sum,
    )

    t_frac = formats.var_sum.frac_bits
    frac = max(t_frac, llr_frac)
    penalty = np.sign(t) * round_shift(alpha_raw, llr_frac - frac)
    s = resize_raw(
        round_shift(t, t_frac - frac) + penalty, frac, formats.var_penalized
    )

    x = resize_raw(
        s * recips,
        formats.var_penalized.frac_bits + RECIPROCAL_FRAC_BITS,
        formats.estimate,
    )
    half = 1 << (formats.estimate.frac_bits - 1)
    return np.clip(x, -half, half)


def variable_update(incoming: Any, gamma_i: float, alpha: float) -> float:
    """Estimate of one variable from its incoming check messages.

    ``t = sum(incoming) - gamma_i``, ``s = t + alpha * sign(t)`` and the
    estimate is ``s / deg`` clipped to ``[-1/2, 1/2]``.

    Examples
    --------
    >>> variable_update([0.5, 0.5, 0.5], -3.0, 0.0)
    0.5
    """
    incoming = np.asarray(incoming, dtype=np.float64)
    if incoming.ndim != 1 or incoming.size < 1:
        raise DimensionError("A variable needs at least one incoming message.")
    x = _variable_update_double(
        np.array([incoming.sum()]), np.array([gamma_i]), alpha, np.array([incoming.size])
    )
    return float(x[0])


def variable_update_fixed(
    incoming_raw: Any,
    gamma_raw: int,
    alpha_raw: int,
    formats: Optional[FixedFormats] = None,
) -> int:
    """Fixed-point ``variable_update`` on mantissas.

    Messages are in ``formats.message``, ``gamma_raw`` and ``alpha_raw`` in
    ``formats.llr``; the result is in ``formats.estimate``.
    """
    if formats is None:
        formats = FixedFormats()
    incoming_raw = np.asarray(incoming_raw, dtype=np.int64)
    if incoming_raw.ndim != 1 or incoming_raw.size < 1:
        raise DimensionError("A variable needs at least one incoming message.")
    x = _variable_update_fixed(
        np.array([incoming_raw.sum()]),
        np.array([gamma_raw], dtype=np.int64),
        alpha_raw,
        np.array([reciprocal_raw(incoming_raw.size)], dtype=np.int64),
        formats,
    )
    return int(x[0])


def _check_update_double(
    x_nbrs: np.ndarray,
    lam: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    v = x_nbrs + lam
    z = project_parity_polytope(v)
    lam_new = v - z
    return z, lam_new, z - lam_new


def _check_update_fixed(
    x_nbrs: np.ndarray,
    lam: np.ndarray,
    formats: FixedFormats,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    x_frac = formats.estimate.frac_bits
    msg_frac = formats.message.frac_bits
    frac = max(x_frac, msg_frac)
    v = resize_raw(
        round_shift(x_nbrs, x_frac - frac) + round_shift(lam, msg_frac - frac),
        frac,
        formats.check_sum,
    )
    z = project_parity_polytope_fixed(v, formats)

    # v and z share one wide accumulator so 2z - v == z - (v - z) exactly
    v_frac = formats.check_sum.frac_bits
    z_frac = formats.replica.frac_bits
    wide = max(v_frac, z_frac)
    v_wide = round_shift(v, v_frac - wide)
    z_wide = round_shift(z, z_frac - wide)
    lam_new = resize_raw(v_wide - z_wide, wide, formats.message)
    msgs = resize_raw(2 * z_wide - v_wide, wide, formats.message)
    return z, lam_new, msgs


def _check_lengths(x_nbrs: np.ndarray, lam: np.ndarray) -> None:
    if x_nbrs.shape != lam.shape:
        raise DimensionError(
            f"Estimate shape {x_nbrs.shape} does not match dual shape {lam.shape}."
        )
    if x_nbrs.shape[-1] < 2:
        raise DimensionError("A check needs at least two neighbors.")


def check_update(x_nbrs: Any, lambda_j: Any) -> Tuple[np.ndarray, np.ndarray]:
    """Dual and outgoing messages of a check.

    Accepts one check of degree ``d`` or a batch of shape ``(k, d)``.

    Returns
    -------
    lambda_new : np.ndarray
        ``v - z`` with ``v = x_nbrs + lambda_j`` and ``z`` its projection.
    msgs : np.ndarray
        ``2z - v``, which equals ``z - lambda_new``.
    """
    x_nbrs = np.asarray(x_nbrs, dtype=np.float64)
    lambda_j = np.asarray(lambda_j, dtype=np.float64)
    _check_lengths(x_nbrs, lambda_j)
    _, lam_new, msgs = _check_update_double(x_nbrs, lambda_j)
    return lam_new, msgs


def check_update_fixed(
    x_raw: Any,
    lambda_raw: Any,
    formats: Optional[FixedFormats] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Fixed-point ``check_update`` on mantissas.

    Estimates are in ``formats.estimate``; duals and messages in
    ``formats.message``.
    """
    if formats is None:
        formats = FixedFormats()
    x_raw = np.asarray(x_raw, dtype=np.int64)
    lambda_raw = np.asarray(lambda_raw, dtype=np.int64)
    _check_lengths(x_raw, lambda_raw)
    _, lam_new, msgs = _check_update_fixed(x_raw, lambda_raw, formats)
    return lam_new, msgs


class AdmmLpDecoder:
    """ADMM-LP decoder bound to one code and configuration.

    The degree grouping and reciprocal tables are built once, so the same
    instance should be reused across frames.

    Parameters
    ----------
    H : ParityCheckMatrix
        The code. Every check needs degree 2 or more and every variable
        degree 1 or more.
    cfg : DecoderConfig, optional
        Decoder settings, defaults to ``DecoderConfig()``.
    """

    def __init__(self, H: ParityCheckMatrix, cfg: Optional[DecoderConfig] = None):
        if cfg is None:
            cfg = DecoderConfig()
        if H.check_degrees.min() < 2:
            raise ValueError("Every check must involve at least two variables.")
        if H.var_degrees.min() < 1:
            raise ValueError("Every variable must be involved in a check.")

        self.H = H
        self.cfg = cfg
        self._fixed = cfg.profile == ArithmeticProfile.FIXED
        self._groups = check_degree_groups(H)
        self._edge_var = H.edge_var
        self._var_degrees = H.var_degrees
        self._recips = np.array(
            [reciprocal_raw(int(degree)) for degree in self._var_degrees],
            dtype=np.int64,
        )

    def __repr__(self) -> str:
        return f"AdmmLpDecoder(H={self.H}, profile={self.cfg.profile.value})"

    def _prepare_gamma(self, gamma: GammaLike) -> np.ndarray:
        llr_fmt = self.cfg.formats.llr
        if isinstance(gamma, LlrVector):
            if not self._fixed:
                values = gamma.values
            elif gamma.fmt == llr_fmt:
                values = gamma.raw
            else:
                values = quantize_raw(gamma.values, llr_fmt)
        else:
            values = np.asarray(gamma, dtype=np.float64)
            if self._fixed:
                values = quantize_raw(values, llr_fmt)

        if values.shape != (self.H.n,):
            raise DimensionError(
                f"Expected {self.H.n} LLRs, got an array of shape {values.shape}."
            )
        return values

    def _variable_updates(self, state: DecoderState, gamma: np.ndarray) -> None:
        sums = np.bincount(self._edge_var, weights=state.msgs, minlength=self.H.n)
        if self._fixed:
            state.x = _variable_update_fixed(
                np.rint(sums).astype(np.int64),
                gamma,
                self.cfg.alpha_raw,
                self._recips,
                self.cfg.formats,
            )
        else:
            state.x = _variable_update_double(
                sums, gamma, self.cfg.alpha, self._var_degrees
            )

    def _check_updates(self, state: DecoderState) -> None:
        residual = 0.0
        for _, positions in self._groups:
            x_nbrs = state.x[self._edge_var[positions]]
            if self._fixed:
                z, lam_new, msgs = _check_update_fixed(
                    x_nbrs, state.lam[positions], self.cfg.formats
                )
            else:
                z, lam_new, msgs = _check_update_double(x_nbrs, state.lam[positions])
                residual = max(residual, float(np.abs(x_nbrs - z).max()))
            state.lam[positions] = lam_new
            state.msgs[positions] = msgs
        state.residual = residual if not self._fixed else math.inf

    def iterate(self, state: DecoderState, gamma: np.ndarray) -> None:
        """Run one flooding iteration in place.

        In the double profile ``state.residual`` becomes the larger of the
        primal residual and the change of ``x``; the fixed profile leaves it
        infinite.
        """
        previous = state.x
        self._variable_updates(state, gamma)
        self._check_updates(state)
        if not self._fixed:
            change = float(np.abs(state.x - previous).max())
            state.residual = max(state.residual, change)
        state.iteration += 1

    def decode(self, gamma: GammaLike) -> DecodeResult:
        """Decode one frame of channel LLRs.

        Raises
        ------
        DimensionError
            If ``gamma`` does not have one entry per variable.
        """
        gamma_values = self._prepare_gamma(gamma)
        state = DecoderState.initial(self.H, self.cfg.profile)
        tol = self.cfg.convergence_tol if not self._fixed else None

        bits = hard_decision(state.x)
        found = False
        while state.iteration < self.cfg.max_iters:
            self.iterate(state, gamma_values)
            bits = hard_decision(state.x)
            if self.cfg.early_termination and is_codeword(self.H, bits):
                found = True
                break
            if tol is not None and state.residual <= tol:
                logger.debug(f"Residual {state.residual:.3g} reached tolerance")
                break

        final_x = (
            to_real(state.x, self.cfg.formats.estimate) if self._fixed else state.x
        )
        tolerance = self.cfg.integrality_tolerance
        if found or is_codeword(self.H, bits):
            status = DecodeStatus.CODEWORD
        elif np.abs(final_x).max() < 0.5 - tolerance:
            # Every estimate is fractional
            status = DecodeStatus.PSEUDOCODEWORD_SUSPECT
        else:
            status = DecodeStatus.NON_CODEWORD

        result = DecodeResult(
            bits=bits,
            status=status,
            iterations_used=state.iteration,
            final_x=final_x,
            integrality_tol=tolerance,
        )
        logger.debug(
            f"Decoding stopped after {state.iteration} iteration(s): "
            f"{result.status.value}"
        )
        return result


def decode(
    H: ParityCheckMatrix,
    gamma: GammaLike,
    cfg: Optional[DecoderConfig] = None,
) -> DecodeResult:
    """Decode one frame with a fresh ``AdmmLpDecoder``."""
    return AdmmLpDecoder(H, cfg).decode(gamma)
