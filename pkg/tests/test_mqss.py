"""Secret-sharing protocol: channel checks, GHZ step, round trips."""

from fractions import Fraction

import numpy as np
import pytest

from walknet.mqss import (
    INTERCEPT_RESEND,
    MqssConfig,
    channel_check,
    encode_public,
    generate_shared_ghz,
    intercept_resend_error_rate,
    reconstruct,
    run_mqss,
    shared_ghz_closed_form,
)
from walknet.qudit import apply, canonical_bell, canonical_ghz, fidelity, fourier_op


@pytest.mark.parametrize("d", range(2, 8))
def test_twirl_leaves_reference_bell_invariant(d):
    f = fourier_op(d)
    state = canonical_bell(d, 0, 0)
    twirled = apply(apply(state, f, [0]), f.dagger(), [1])
    assert fidelity(twirled, state) >= 1 - 1e-10


@pytest.mark.parametrize("d", range(2, 8))
def test_no_eavesdropper_error_rate_exactly_zero(d):
    rate, abort = channel_check(d, pairs=80, seed=d * 7)
    assert rate == 0.0
    assert not abort


@pytest.mark.parametrize("d", [2, 3, 5])
def test_intercept_resend_oracle_closed_form(d):
    # attacker guesses the right basis half the time; a wrong guess leaves
    # both readouts uniform, so the error probability is (1 - 1/d) / 2
    assert intercept_resend_error_rate(d) == pytest.approx((1 - 1 / d) / 2, abs=1e-12)


def test_sampled_error_rate_matches_oracle_within_3_sigma():
    pairs = 10_000
    rate, _ = channel_check(2, pairs=pairs, eavesdropper=INTERCEPT_RESEND,
                            seed=5, threshold=0.9)
    p = intercept_resend_error_rate(2)
    sigma = np.sqrt(p * (1 - p) / pairs)
    assert abs(rate - p) <= 3 * sigma


def test_zero_threshold_aborts_under_attack():
    rate, abort = channel_check(2, pairs=50, eavesdropper=INTERCEPT_RESEND,
                                seed=3, threshold=0.0)
    assert rate > 0
    assert abort


def test_channel_check_validation():
    with pytest.raises(ValueError):
        channel_check(2, pairs=0)
    with pytest.raises(ValueError):
        channel_check(2, pairs=5, eavesdropper="entangling-probe")


@pytest.mark.parametrize("d,m", [(2, 1), (2, 3), (3, 2), (5, 2), (7, 3)])
def test_generate_shared_ghz_matches_closed_form(d, m):
    state, coins, u0 = generate_shared_ghz(d, m, seed=d * 100 + m)
    assert len(coins) == m
    assert state.n == m + 1
    assert fidelity(state, shared_ghz_closed_form(d, coins, u0)) >= 1 - 1e-9


def test_zero_outcomes_give_canonical_ghz():
    assert fidelity(shared_ghz_closed_form(3, [0, 0], 0),
                    canonical_ghz(3, 3)) >= 1 - 1e-12


def test_two_party_case_is_bell():
    state, coins, u0 = generate_shared_ghz(2, 1, seed=0)
    assert state.n == 2
    assert fidelity(state, shared_ghz_closed_form(2, coins, u0)) >= 1 - 1e-9


def test_encode_example():
    p = encode_public(5, [1, 3], 2, 2)
    assert p == Fraction(-3, 2)
    assert reconstruct(p, [1, 3], 2, 2) == 5


def test_encode_trivial_cases():
    assert encode_public(6, [0, 0], 0, 2) == Fraction(3)
    assert encode_public(0, [0, 0], 0, 2) == 0
    assert reconstruct(Fraction(3), [0, 0], 0, 2) == 6


def test_classical_round_trip_randomized():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        d = int(rng.integers(2, 8))
        m = int(rng.integers(2, 6))
        s = int(rng.integers(-10_000, 10_000))
        coins = [int(rng.integers(0, d)) for _ in range(m)]
        r0 = int(rng.integers(0, d))
        assert reconstruct(encode_public(s, coins, r0, m), coins, r0, m) == s


def test_run_mqss_end_to_end():
    t = run_mqss(MqssConfig(d=3, participants=2, secret=7, detect_pairs=8, seed=42))
    assert not t.aborted
    assert t.reconstructed == 7
    assert len(t.channel_checks) == 2
    assert all(c["error_rate"] == 0.0 for c in t.channel_checks)
    # measured values satisfy the mod-d relation against the dealer's result
    for k, v in enumerate(t.participant_results):
        assert v == (t.dealer_result + t.coin_results[k]) % 3


def test_run_mqss_smallest_case():
    t = run_mqss(MqssConfig(d=2, participants=2, secret=1, detect_pairs=3, seed=9))
    assert t.reconstructed == 1


def test_run_mqss_abort_on_attack():
    t = run_mqss(MqssConfig(d=2, participants=2, secret=4, detect_pairs=500,
                            threshold=0.05, eavesdrop_channel=1, seed=31))
    assert t.aborted
    assert t.reconstructed is None
    assert t.channel_checks[-1]["abort"]


def test_secret_independence_in_event_order():
    t = run_mqss(MqssConfig(d=3, participants=3, secret=11, detect_pairs=4, seed=2))
    first_read = next(i for i, e in enumerate(t.events) if "secret read" in e)
    last_quantum = max(i for i, e in enumerate(t.events)
                       if e.startswith(("step1", "step2", "step3"))
                       or "measured" in e)
    assert first_read > last_quantum


def test_transcript_serialization():
    t = run_mqss(MqssConfig(d=2, participants=2, secret=3, detect_pairs=3, seed=0))
    blob = t.to_dict()
    assert blob["reconstructed"] == 3
    assert isinstance(blob["public_value"], str)
    t.to_json()


def test_config_validation():
    with pytest.raises(ValueError):
        MqssConfig(d=1, participants=2, secret=0).validate()
    with pytest.raises(ValueError):
        MqssConfig(d=2, participants=1, secret=0).validate()
    with pytest.raises(ValueError):
        MqssConfig(d=2, participants=2, secret=0, threshold=0.0).validate()
    with pytest.raises(ValueError):
        MqssConfig(d=2, participants=2, secret=0, eavesdrop_channel=5).validate()
