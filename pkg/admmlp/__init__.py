"""
admmlp is a Python package for ADMM-based linear-programming decoding of
binary LDPC codes.

The package decodes in double precision or in bit-accurate fixed point,
provides the parity polytope and simplex projections the decoder is built on,
a belief-propagation baseline, an AWGN channel and a Monte-Carlo frame error
rate harness with the built-in Tanner, WiGig and (3,6)-regular codes.
"""

from admmlp.core.bp import BpConfig, BpVariant, bp_check_update, bp_decode
from admmlp.core.channel import (
    ChannelConfig,
    LlrVector,
    channel_llr,
    llr_quantize,
    sigma_from_ebn0,
    transmit,
)
from admmlp.core.code import (
    DimensionError,
    InvalidShiftError,
    ParityCheckMatrix,
    QcShiftMatrix,
    SamplingError,
    expand_qc,
    girth,
    nullspace_basis,
    qc_girth,
    sample_codeword,
    sample_qc_ensemble,
    syndrome,
)
from admmlp.core.decoder import (
    AdmmLpDecoder,
    DecodeResult,
    DecoderConfig,
    DecoderState,
    DecodeStatus,
    check_update,
    check_update_fixed,
    decode,
    hard_decision,
    variable_update,
    variable_update_fixed,
)
from admmlp.core.fixedpoint import (
    DATAPATH_FORMATS,
    ArithmeticProfile,
    FixedFormats,
    FixedValue,
    QFormat,
    add,
    mul_reciprocal,
    quantize,
    reciprocal,
    resize,
)
from admmlp.core.harness import (
    DecoderKind,
    ExperimentSpec,
    FerRecord,
    load_builtin_code,
    load_code,
    records_to_csv,
    records_to_dataframe,
    records_to_json,
    run_point,
    run_sweep,
)
from admmlp.core.projection import (
    InvalidIntervalError,
    identify_facet,
    membership_test,
    project_centered_simplex,
    project_hypercube,
    project_interval,
    project_parity_polytope,
    project_parity_polytope_fixed,
    similarity_transform,
)
from admmlp.utils import ParserException
