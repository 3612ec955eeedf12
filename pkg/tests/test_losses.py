import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mifi import (
    AsymmetricLoss,
    CaslConfig,
    CrossEntropy,
    CyclicalFocalLoss,
    FocalLoss,
    InvalidInputError,
    NumericError,
    asymmetric_loss,
    casl_alpha,
    casl_le,
    casl_lh,
    casl_loss,
    cross_entropy,
    finite_diff_check,
    focal_loss,
    loss_grad_wrt_logits,
    make_loss,
    softmax,
)
from mifi.losses import batch_loss, loss_value_from_logits

CFG = CaslConfig()


# -- scalar oracles, written directly from the loss definitions --------------

def oracle_le(p, g):
    return -((1 + p) ** g) * math.log(p)


def oracle_lh(p, l1, l2):
    return -((1 - p) ** l1) * math.log(p) - (p**l2) * math.log(1 - p)


def oracle_alpha(e, beta, et):
    if beta * e <= et:
        a = 1 - beta * e / et
    else:
        a = (beta * e / et - 1) / (beta - 1)
    return min(1.0, max(0.0, a))


# -- frozen reference values (computed with the oracles above) ----------------

def test_ce_at_point_seven():
    assert cross_entropy([0.7, 0.2, 0.1], 0).value == pytest.approx(0.356675, abs=1e-6)


def test_ce_gradient_is_p_minus_onehot():
    p = np.array([0.7, 0.2, 0.1])
    np.testing.assert_allclose(cross_entropy(p, 0).grad_logits, [-0.3, 0.2, 0.1], atol=1e-15)


def test_easy_term_values():
    assert casl_le(0.5, 0) == pytest.approx(0.693147, abs=1e-6)
    assert casl_le(0.5, 2) == pytest.approx(1.559581, abs=1e-6)
    assert casl_le(0.5, 2) == pytest.approx(oracle_le(0.5, 2), rel=1e-12)


def test_hard_term_values():
    assert casl_lh(0.9, 0, 4) == pytest.approx(1.616087, abs=1e-6)
    assert casl_lh(0.5, 0, 4) == pytest.approx(0.736469, abs=1e-6)
    assert casl_lh(0.9, 0, 4) == pytest.approx(oracle_lh(0.9, 0, 4), rel=1e-12)


def test_casl_at_epoch_fifty():
    p = np.array([0.9, 0.1])
    v = casl_loss(p, 0, 50, CFG).value
    a = 1 / 3
    assert v == pytest.approx(a * oracle_le(0.9, 0) + (1 - a) * oracle_lh(0.9, 0, 4), rel=1e-12)
    assert v == pytest.approx(1.112512, abs=1e-6)


def test_focal_and_asymmetric_values():
    assert focal_loss([0.9, 0.1], 0, 2.0).value == pytest.approx(0.00105361, abs=1e-8)
    assert asymmetric_loss([0.9, 0.1], 0, 1.0, 4.0).value == pytest.approx(1.521262, abs=1e-6)


def test_probability_clamp_keeps_loss_finite():
    v = cross_entropy([1.0, 0.0], 1).value
    assert math.isfinite(v) and v == pytest.approx(-math.log(1e-7), rel=1e-9)
    assert math.isfinite(casl_lh(1.0, 0, 4))


@pytest.mark.parametrize("fn,args", [(casl_le, (2.0,)), (casl_lh, (0.0, 4.0))])
def test_probability_out_of_range_rejected(fn, args):
    with pytest.raises(InvalidInputError):
        fn(1.5, *args)
    with pytest.raises(InvalidInputError):
        fn(-0.1, *args)


def test_probs_must_sum_to_one():
    with pytest.raises(InvalidInputError):
        cross_entropy([0.5, 0.6], 0)


def test_negative_exponents_rejected():
    with pytest.raises(InvalidInputError):
        CaslConfig(gamma=-1)
    with pytest.raises(InvalidInputError):
        CaslConfig(lambda2=-0.5)
    with pytest.raises(InvalidInputError):
        casl_le(0.5, -1)


# -- schedule ----------------------------------------------------------------

@pytest.mark.parametrize("epoch,expected", [(0, 1.0), (25, 0.0), (50, 1 / 3), (100, 1.0)])
def test_alpha_anchor_values(epoch, expected):
    assert casl_alpha(epoch, CFG) == expected


def test_alpha_matches_oracle_everywhere():
    for beta in (1.0, 2.0, 3.0, 4.0, 5.0, 6.0):
        cfg = CaslConfig(beta=beta)
        for e in range(101):
            assert casl_alpha(e, cfg) == pytest.approx(oracle_alpha(e, beta, 100), abs=1e-15)


def test_alpha_epoch_out_of_range():
    with pytest.raises(InvalidInputError):
        casl_alpha(101, CFG)
    with pytest.raises(InvalidInputError):
        casl_alpha(-1, CFG)


@given(st.floats(1.0, 8.0), st.integers(1, 500), st.data())
def test_alpha_in_unit_interval(beta, et, data):
    e = data.draw(st.floats(0, et))
    a = casl_alpha(e, CaslConfig(beta=beta, total_epochs=et))
    assert 0.0 <= a <= 1.0


# -- reductions --------------------------------------------------------------

def _random_probs(seed, k=16):
    r = np.random.default_rng(seed)
    return softmax(r.normal(scale=3, size=k)), int(r.integers(k))


def test_casl_with_alpha_one_is_ce():
    for s in range(50):
        p, t = _random_probs(s)
        for e in (0, 100):
            assert abs(casl_loss(p, t, e, CFG).value - cross_entropy(p, t).value) <= 1e-12


def test_focal_gamma_zero_is_ce():
    for s in range(50):
        p, t = _random_probs(s)
        a, b = focal_loss(p, t, 0.0), cross_entropy(p, t)
        assert abs(a.value - b.value) <= 1e-12
        np.testing.assert_allclose(a.grad_logits, b.grad_logits, atol=1e-15)


def test_hard_term_with_lambda2_zero_is_ce_when_alpha_zero():
    cfg = CaslConfig(lambda1=0, lambda2=0)
    p = np.array([0.6, 0.4])
    # with lambda2 = 0, L_h = -log p - log(1-p)
    assert casl_loss(p, 0, 25, cfg).value == pytest.approx(-math.log(0.6) - math.log(0.4), rel=1e-12)


# -- gradients ---------------------------------------------------------------

KINDS = {
    "ce": CrossEntropy(),
    "fl": FocalLoss(),
    "asl": AsymmetricLoss(),
    "casl": CyclicalFocalLoss(CFG),
}


@pytest.mark.parametrize("name", list(KINDS))
def test_finite_difference_agreement(name):
    r = np.random.default_rng(99)
    worst = 0.0
    for _ in range(30):
        z = r.normal(scale=2, size=16)
        t = int(r.integers(16))
        worst = max(worst, finite_diff_check(KINDS[name], z, t, int(r.integers(101))))
    assert worst < 1e-6


def test_float32_analytic_side_is_looser_but_close():
    z = np.random.default_rng(5).normal(size=16)
    err = finite_diff_check(KINDS["casl"], z, 3, 40, dtype=np.float32)
    assert err < 1e-4


def test_gradient_sums_to_zero():
    z = np.random.default_rng(6).normal(size=16)
    for kind in KINDS.values():
        assert abs(loss_grad_wrt_logits(kind, z, 2, 10).sum()) < 1e-12


@settings(max_examples=50)
@given(st.lists(st.floats(-10, 10), min_size=2, max_size=16), st.floats(-20, 20), st.sampled_from(list(KINDS)))
def test_loss_is_shift_invariant_in_logits(z, c, name):
    z = np.array(z)
    a = loss_value_from_logits(KINDS[name], z, 0, 50)
    b = loss_value_from_logits(KINDS[name], z + c, 0, 50)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


def test_batch_loss_matches_single_sample_calls():
    r = np.random.default_rng(8)
    probs = softmax(r.normal(size=(5, 4)))
    targets = np.array([0, 1, 2, 3, 0])
    values, grads = batch_loss(KINDS["casl"], probs, targets, 50)
    for i in range(5):
        single = casl_loss(probs[i], targets[i], 50, CFG)
        assert values[i] == pytest.approx(single.value, rel=1e-14)
        np.testing.assert_allclose(grads[i], single.grad_logits, rtol=1e-14)


def test_batch_loss_rejects_non_finite_probs():
    with pytest.raises((NumericError, InvalidInputError)):
        batch_loss(KINDS["ce"], np.array([[np.nan, 1.0]]), np.array([0]))


def test_make_loss_names():
    assert isinstance(make_loss("ce"), CrossEntropy)
    assert make_loss("fl", gamma_fl=1.5).gamma == 1.5
    assert make_loss("casl", beta=2.0, total_epochs=40).config.total_epochs == 40
    with pytest.raises(ValueError):
        make_loss("hinge")


@pytest.mark.parametrize("epoch", [0, 25, 50, 100])
def test_cyclical_gradient_at_schedule_anchors(epoch):
    r = np.random.default_rng(epoch)
    for _ in range(10):
        assert finite_diff_check(KINDS["casl"], r.normal(scale=2, size=16), int(r.integers(16)), epoch) < 1e-5
