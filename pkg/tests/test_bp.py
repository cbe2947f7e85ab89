import numpy as np
import pytest

from admmlp import oracles
from admmlp.core.bp import (
    LLR_CLIP,
    BpConfig,
    BpVariant,
    bp_check_update,
    bp_decode,
)
from admmlp.core.code import DimensionError, ParityCheckMatrix, nullspace_basis
from admmlp.core.decoder import DecodeStatus
from admmlp.core.harness import load_builtin_code

TREE = [
    [1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, 1, 0, 1, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1],
]


def test_bp_config_defaults():
    cfg = BpConfig()
    assert cfg.max_iters == 60
    assert cfg.variant == BpVariant.SUM_PRODUCT
    assert cfg.early_termination


def test_bp_config_validation():
    with pytest.raises(ValueError):
        BpConfig(max_iters=0)


def test_bp_config_variant_from_string():
    assert BpConfig(variant="min-sum").variant == BpVariant.MIN_SUM


def test_sum_product_check_update():
    """Test the tanh rule on one check"""
    incoming = np.array([1.0, -2.0, 3.0])
    out = bp_check_update(incoming)
    t = np.tanh(incoming / 2)
    expected = 2 * np.arctanh([t[1] * t[2], t[0] * t[2], t[0] * t[1]])
    assert out == pytest.approx(expected)


def test_min_sum_check_update():
    """Test the min-sum rule on one check"""
    out = bp_check_update([1.0, -2.0, 3.0], BpVariant.MIN_SUM)
    assert out.tolist() == [-2.0, 1.0, -1.0]


def test_min_sum_repeated_minimum():
    """Test that a repeated smallest magnitude is used for both positions"""
    out = bp_check_update([0.5, -0.5, 4.0], BpVariant.MIN_SUM)
    assert out.tolist() == [-0.5, 0.5, -0.5]


def test_check_update_signs_agree():
    """Test that both variants give the same outgoing signs"""
    rng = np.random.default_rng(9)
    incoming = rng.normal(0, 3, size=(200, 6))
    sum_product = bp_check_update(incoming, BpVariant.SUM_PRODUCT)
    min_sum = bp_check_update(incoming, BpVariant.MIN_SUM)
    assert np.array_equal(np.sign(sum_product), np.sign(min_sum))


def test_sum_product_saturated_inputs_stay_finite():
    """Test that saturated LLRs do not overflow arctanh"""
    out = bp_check_update([LLR_CLIP, LLR_CLIP, -LLR_CLIP])
    assert np.isfinite(out).all()
    assert np.sign(out).tolist() == [-1.0, -1.0, 1.0]


def test_bp_decode_repetition():
    """Test combining evidence on a length-2 repetition code"""
    H = ParityCheckMatrix.from_dense([[1, 1]])
    result = bp_decode(H, [2.0, -1.0])
    assert result.bits.tolist() == [0, 0]
    assert result.status == DecodeStatus.CODEWORD
    assert result.iterations_used == 1


def test_bp_decode_zero_noise():
    """Test that strong LLRs decode in one iteration"""
    H = load_builtin_code("tanner155")
    codeword = nullspace_basis(H)[3]
    gamma = 20.0 * (1.0 - 2.0 * codeword)
    for variant in BpVariant:
        result = bp_decode(H, gamma, BpConfig(variant=variant))
        assert np.array_equal(result.bits, codeword)
        assert result.iterations_used == 1


def test_bp_final_x_convention():
    """Test that estimates share the ADMM sign convention"""
    H = ParityCheckMatrix.from_dense([[1, 1]])
    result = bp_decode(H, [4.0, 4.0])
    assert (result.final_x < 0).all()
    assert (np.abs(result.final_x) <= 0.5).all()


def test_bp_decode_non_codeword():
    """Test a failed decode without early termination"""
    H = ParityCheckMatrix.from_dense([[1, 1, 0], [0, 1, 1]])
    cfg = BpConfig(max_iters=1)
    result = bp_decode(H, [-3.0, 5.0, -3.0], cfg)
    assert result.bits.tolist() == [0, 1, 0]
    assert result.status == DecodeStatus.NON_CODEWORD


def test_bp_decode_runs_all_iterations():
    H = ParityCheckMatrix.from_dense([[1, 1]])
    result = bp_decode(H, [2.0, 2.0], BpConfig(max_iters=4, early_termination=False))
    assert result.iterations_used == 4


def test_bp_decode_dimension_mismatch():
    H = ParityCheckMatrix.from_dense([[1, 1]])
    with pytest.raises(DimensionError):
        bp_decode(H, [1.0, 1.0, 1.0])


def test_bp_decode_rejects_degree_one_checks():
    H = ParityCheckMatrix.from_dense([[1, 0], [1, 1]])
    with pytest.raises(ValueError):
        bp_decode(H, [1.0, 1.0])


def test_sum_product_is_bitwise_map_on_trees():
    """Test that sum-product on a cycle-free graph gives bitwise MAP decisions"""
    H = ParityCheckMatrix.from_dense(TREE)
    codebook = oracles.enumerate_codebook(nullspace_basis(H))
    rng = np.random.default_rng(13)
    cfg = BpConfig(max_iters=30, early_termination=False)
    for _ in range(100):
        llr = rng.normal(1.0, 2.0, size=H.n)
        result = bp_decode(H, llr, cfg)
        assert np.array_equal(result.bits, oracles.bitwise_map(codebook, llr))
