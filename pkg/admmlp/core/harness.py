"""Monte-Carlo frame-error-rate experiments.

Frames are simulated in fixed-size batches. Frame ``i`` at a given SNR always
draws its codeword and noise from the same random stream, and batches are
accumulated in frame order, so results do not depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import multiprocessing
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import root_validator, validator
from pydantic.types import FilePath

from admmlp.core.base import BaseModel
from admmlp.core.bp import BpConfig, BpVariant, bp_decode
from admmlp.core.channel import (
    ChannelConfig,
    channel_llr,
    llr_quantize,
    sigma_from_ebn0,
    transmit,
)
from admmlp.core.code import (
    BUILTIN_SHIFT_FILES,
    ParityCheckMatrix,
    QcShiftMatrix,
    builtin_shift_matrix,
    expand_qc,
    nullspace_basis,
    sample_codeword,
)
from admmlp.core.decoder import AdmmLpDecoder, DecodeResult, DecoderConfig
from admmlp.core.fixedpoint import ArithmeticProfile
from admmlp.utils import apply_csv_formatting_to_scalar

if TYPE_CHECKING:
    import pandas as pd

logger = logging.getLogger(__name__)

CSV_FIELDS = (
    "snr_db",
    "frames",
    "frame_errors",
    "bit_errors",
    "fer",
    "ber",
    "mean_iterations",
)
WILSON_Z_95 = 1.959963984540054


class DecoderKind(str, Enum):
    ADMM_DOUBLE = "admm-double"
    ADMM_FIXED = "admm-fixed"
    BP = "bp"
    MIN_SUM = "min-sum"


class ExperimentSpec(BaseModel):
    """One FER sweep.

    Parameters
    ----------
    code : str
        A built-in code name, or the path of a shift file or ``.alist`` file.
    decoder : DecoderKind, default=DecoderKind.ADMM_DOUBLE
        Decoder to simulate.
    alpha : float, default=0.1
        ADMM penalty.
    max_iters : int, default=60
        Iteration limit of every decoder.
    snr_points_db : list of float
        Eb/N0 points in dB.
    target_frame_errors : int, default=100
        Stop a point once this many frame errors are seen.
    max_frames : int, default=1000000
        Never simulate more frames than this per point.
    seed : int, default=0
        Root of every frame's random stream.
    workers : int, default=1
        Worker processes; 1 runs in the calling process.
    saturation_a : float, default=1.0
        Channel saturation factor.
    batch_frames : int, default=64
        Frames per unit of work. Part of the result's identity: runs with a
        different batch size may stop at a different frame count.
    """

    code: str
    decoder: DecoderKind = DecoderKind.ADMM_DOUBLE
    alpha: float = 0.1
    max_iters: int = 60
    snr_points_db: List[float]
    target_frame_errors: int = 100
    max_frames: int = 10**6
    seed: int = 0
    workers: int = 1
    saturation_a: float = 1.0
    batch_frames: int = 64

    @validator("snr_points_db")
    def _check_snr_points(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("At least one SNR point is required.")
        return v

    @validator(
        "target_frame_errors", "max_frames", "workers", "max_iters", "batch_frames"
    )
    def _check_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("Counts must be at least 1.")
        return v

    @validator("seed")
    def _check_seed(cls, v: int) -> int:
        if v < 0:
            raise ValueError("The seed must be non-negative.")
        return v

    @validator("alpha")
    def _check_alpha(cls, v: float) -> float:
        if not v >= 0:
            raise ValueError("alpha must be non-negative.")
        return v

    @property
    def decoder_config(self) -> DecoderConfig:
        profile = (
            ArithmeticProfile.FIXED
            if self.decoder == DecoderKind.ADMM_FIXED
            else ArithmeticProfile.DOUBLE
        )
        return DecoderConfig(alpha=self.alpha, max_iters=self.max_iters, profile=profile)

    @property
    def bp_config(self) -> BpConfig:
        variant = BpVariant.SUM_PRODUCT
        if self.decoder == DecoderKind.MIN_SUM:
            variant = BpVariant.MIN_SUM
        return BpConfig(max_iters=self.max_iters, variant=variant)


class FerRecord(BaseModel):
    """Counts of one simulated operating point."""

    snr_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    fer: float
    ber: float
    mean_iterations: float

    @root_validator(skip_on_failure=True)
    def _check_counts(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        if values["frames"] < 1:
            raise ValueError("A record needs at least one frame.")
        if not 0 <= values["frame_errors"] <= values["frames"]:
            raise ValueError("Frame errors must lie between 0 and the frame count.")
        if values["bit_errors"] < 0:
            raise ValueError("Bit errors cannot be negative.")
        if not 0 <= values["fer"] <= 1:
            raise ValueError("The FER must lie in [0, 1].")
        return values

    @classmethod
    def from_counts(
        cls,
        snr_db: float,
        n: int,
        frames: int,
        frame_errors: int,
        bit_errors: int,
        total_iterations: int,
    ) -> FerRecord:
        return cls(
            snr_db=snr_db,
            frames=frames,
            frame_errors=frame_errors,
            bit_errors=bit_errors,
            fer=frame_errors / frames,
            ber=bit_errors / (frames * n),
            mean_iterations=total_iterations / frames,
        )

    def fer_confidence_interval(self, z: float = WILSON_Z_95) -> Tuple[float, float]:
        """Wilson score interval for the FER, 95% by default."""
        n = self.frames
        p = self.fer
        denominator = 1 + z**2 / n
        center = (p + z**2 / (2 * n)) / denominator
        half_width = z * math.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denominator
        low = 0.0 if self.frame_errors == 0 else max(0.0, center - half_width)
        high = 1.0 if self.frame_errors == n else min(1.0, center + half_width)
        return low, high


def load_builtin_code(name: str) -> ParityCheckMatrix:
    """Expand one of the built-in QC codes.

    Raises
    ------
    ValueError
        If ``name`` is not a built-in code.
    """
    return expand_qc(builtin_shift_matrix(name))


def load_code(code: Union[str, Path]) -> ParityCheckMatrix:
    """Load a built-in code by name, or a shift or ``.alist`` file by path."""
    if str(code) in BUILTIN_SHIFT_FILES:
        return load_builtin_code(str(code))

    path = Path(code)
    if not path.is_file():
        raise ValueError(
            f'"{code}" is neither a built-in code '
            f'({", ".join(BUILTIN_SHIFT_FILES)}) nor an existing file.'
        )
    if path.suffix.lower() == ".alist":
        return ParityCheckMatrix.parse_alist(path)
    return expand_qc(QcShiftMatrix.parse(path))


def frame_rng(seed: int, snr_db: float, frame_index: int) -> np.random.Generator:
    """Random stream of one frame, independent of which worker runs it."""
    snr_key = int(round(snr_db * 1000)) % 2**32
    return np.random.default_rng(np.random.SeedSequence([seed, snr_key, frame_index]))


class FrameSimulator:
    """Everything a worker needs to simulate frames of one spec."""

    def __init__(self, spec: ExperimentSpec):
        self.spec = spec
        self.H = load_code(spec.code)
        self.basis = nullspace_basis(self.H)
        if len(self.basis) == 0:
            raise ValueError("The code has dimension 0 and carries no information.")
        self.rate = len(self.basis) / self.H.n

        self._bp = spec.decoder in {DecoderKind.BP, DecoderKind.MIN_SUM}
        self._bp_config = spec.bp_config
        self._decoder_config = spec.decoder_config
        self._decoder = None if self._bp else AdmmLpDecoder(self.H, self._decoder_config)

    def decode_frame(
        self,
        y: np.ndarray,
        sigma: float,
        channel: ChannelConfig,
    ) -> DecodeResult:
        if self._bp:
            return bp_decode(self.H, channel_llr(y, sigma), self._bp_config)
        gamma = llr_quantize(y, sigma, channel, self._decoder_config.profile)
        return self._decoder.decode(gamma)  # type: ignore[union-attr]

    def run_batch(self, snr_db: float, start: int, stop: int) -> Tuple[int, int, int]:
        """Simulate frames ``start..stop-1``.

        Returns
        -------
        tuple of int
            Frame errors, bit errors and total iterations.
        """
        channel = ChannelConfig(
            ebn0_db=snr_db,
            rate=self.rate,
            saturation_a=self.spec.saturation_a,
        )
        sigma = sigma_from_ebn0(snr_db, self.rate)

        frame_errors = bit_errors = iterations = 0
        for frame_index in range(start, stop):
            rng = frame_rng(self.spec.seed, snr_db, frame_index)
            codeword = sample_codeword(self.basis, rng)
            y = transmit(codeword, sigma, rng)
            result = self.decode_frame(y, sigma, channel)

            errors = int(np.count_nonzero(result.bits != codeword))
            frame_errors += errors > 0
            bit_errors += errors
            iterations += result.iterations_used
        return frame_errors, bit_errors, iterations


_WORKER_SIMULATOR: Optional[FrameSimulator] = None


def _init_worker(spec: ExperimentSpec) -> None:
    global _WORKER_SIMULATOR
    _WORKER_SIMULATOR = FrameSimulator(spec)


def _run_batch_in_worker(batch: Tuple[float, int, int]) -> Tuple[int, int, int]:
    assert _WORKER_SIMULATOR is not None
    return _WORKER_SIMULATOR.run_batch(*batch)


class _Runner:
    """Dispatches batches in process or to a worker pool."""

    def __init__(self, spec: ExperimentSpec):
        self.spec = spec
        self.simulator = FrameSimulator(spec)
        self.pool: Optional[Any] = None
        if spec.workers > 1:
            self.pool = multiprocessing.Pool(
                processes=spec.workers,
                initializer=_init_worker,
                initargs=(spec,),
            )

    def __enter__(self) -> _Runner:
        return self

    def __exit__(self, *exc: Any) -> None:
        if self.pool is not None:
            self.pool.terminate()
            self.pool.join()

    def run(self, batches: List[Tuple[float, int, int]]) -> List[Tuple[int, int, int]]:
        if self.pool is None:
            return [self.simulator.run_batch(*batch) for batch in batches]
        return self.pool.map(_run_batch_in_worker, batches)

    def run_point(self, snr_db: float) -> FerRecord:
        spec = self.spec
        frames = frame_errors = bit_errors = iterations = 0
        next_frame = 0

        while frame_errors < spec.target_frame_errors and next_frame < spec.max_frames:
            batches = []
            for _ in range(spec.workers):
                if next_frame >= spec.max_frames:
                    break
                stop = min(next_frame + spec.batch_frames, spec.max_frames)
                batches.append((snr_db, next_frame, stop))
                next_frame = stop

            # Batches past the one reaching the target are discarded so the
            # totals match a single-worker run
            for (_, start, stop), counts in zip(batches, self.run(batches)):
                frames += stop - start
                frame_errors += counts[0]
                bit_errors += counts[1]
                iterations += counts[2]
                if frame_errors >= spec.target_frame_errors:
                    break

        record = FerRecord.from_counts(
            snr_db=snr_db,
            n=self.simulator.H.n,
            frames=frames,
            frame_errors=frame_errors,
            bit_errors=bit_errors,
            total_iterations=iterations,
        )
        logger.info(
            f"Eb/N0 {snr_db} dB: {frame_errors} frame errors in {frames} frames "
            f"(FER {record.fer:.3e})"
        )
        return record


def run_point(spec: ExperimentSpec, snr_db: float) -> FerRecord:
    """Simulate one Eb/N0 point until the frame-error target or frame cap."""
    with _Runner(spec) as runner:
        return runner.run_point(snr_db)


def run_sweep(
    spec: ExperimentSpec,
    out: Optional[Union[FilePath, str, None]] = None,
    json_path: Optional[Union[FilePath, str, None]] = None,
) -> List[FerRecord]:
    """Simulate every SNR point of ``spec`` in order.

    Parameters
    ----------
    spec : ExperimentSpec
        The experiment.
    out : Union[FilePath, str, None], optional
        Where to write the CSV results.
    json_path : Union[FilePath, str, None], optional
        Where to write the JSON results with the spec echoed.
    """
    with _Runner(spec) as runner:
        records = [runner.run_point(snr_db) for snr_db in spec.snr_points_db]

    by_snr = sorted(records, key=lambda record: record.snr_db)
    for previous, current in zip(by_snr, by_snr[1:]):
        if current.fer > previous.fer:
            logger.warning(
                f"FER rises from {previous.fer:.3e} at {previous.snr_db} dB to "
                f"{current.fer:.3e} at {current.snr_db} dB"
            )

    if out:
        records_to_csv(records, path=out)
    if json_path:
        records_to_json(records, spec, path=json_path)
    return records


def records_to_csv(
    records: List[FerRecord],
    path: Optional[Union[FilePath, str, None]] = None,
    encoding: str = "utf-8",
) -> str:
    """Write records as CSV, one row per SNR point."""
    output = io.StringIO()
    writer = csv.DictWriter(
        output,
        fieldnames=CSV_FIELDS,
        extrasaction="ignore",
        dialect="unix",
        quoting=csv.QUOTE_MINIMAL,
    )
    writer.writeheader()
    for record in records:
        writer.writerow(
            {k: apply_csv_formatting_to_scalar(v) for k, v in record.to_dict().items()}
        )

    return_value = output.getvalue()

    if path:
        Path(path).write_text(return_value, encoding=encoding)

    return return_value


def records_to_json(
    records: List[FerRecord],
    spec: ExperimentSpec,
    path: Optional[Union[FilePath, str, None]] = None,
    encoding: str = "utf-8",
) -> str:
    """Write records as JSON together with the spec that produced them."""
    spec_dict = spec.to_dict()
    spec_dict["decoder"] = spec.decoder.value
    return_value = json.dumps(
        {"spec": spec_dict, "records": [record.to_dict() for record in records]},
        indent=2,
    )

    if path:
        Path(path).write_text(return_value + "\n", encoding=encoding)

    return return_value


def records_to_dataframe(records: List[FerRecord]) -> pd.DataFrame:
    """Convert records to a Pandas DataFrame."""
    try:
        import pandas as pd
    except ModuleNotFoundError as e:
        raise ModuleNotFoundError(
            "The pandas package is required to convert FER records to DataFrames. Please install it using `pip install admmlp[pandas]`."
        ) from e

    return pd.DataFrame(
        [record.to_dict() for record in records], columns=list(CSV_FIELDS)
    )

