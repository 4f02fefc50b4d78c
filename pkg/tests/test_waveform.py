"""Spreading codes, scrambling, framing and pulse synthesis."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jrcsar.oracles import periodic_correlation
from jrcsar.waveform import (
    WaveformError,
    build_pulse,
    build_pulse_train,
    despread_hard,
    get_codec,
    interleave_even_odd,
    kasami_small_set,
    m_sequence,
    qpsk_baseband,
    random_payloads,
    scramble_bits,
    scramble_mask,
    split_even_odd,
    spread,
)


def test_m_sequence_balance_and_period():
    for degree in (4, 6, 8):
        seq = m_sequence(degree)
        n = 2**degree - 1
        assert seq.size == n
        assert int(seq.sum()) == 2 ** (degree - 1)  # ones outnumber zeros by one
        # two-level periodic autocorrelation of the +/-1 mapping
        pm = 1.0 - 2.0 * seq.astype(float)
        corr = periodic_correlation(pm, pm).real
        assert corr[0] == pytest.approx(n)
        np.testing.assert_allclose(corr[1:], -1.0, atol=1e-9)


def test_kasami_small_set_size_and_distinctness():
    codes = [kasami_small_set(6, i) for i in range(8)]
    assert all(c.chips.size == 63 for c in codes)
    chips = {c.chips.tobytes() for c in codes}
    assert len(chips) == 8
    with pytest.raises(WaveformError):
        kasami_small_set(5, 0)  # degree must be even
    with pytest.raises(WaveformError):
        kasami_small_set(6, 8)


def test_spread_despread_roundtrip():
    code = kasami_small_set(6, 2)
    bits = np.array([0, 1, 1, 0, 1], dtype=np.uint8)
    chips = spread(bits, code)
    assert chips.size == bits.size * 63
    np.testing.assert_array_equal(despread_hard(chips, code), bits)


@given(st.integers(min_value=1, max_value=600), st.integers(min_value=0, max_value=5000))
@settings(max_examples=40, deadline=None)
def test_scramble_is_involutive(n, pulse_index):
    rng = np.random.default_rng(n)
    bits = rng.integers(0, 2, size=n, dtype=np.uint8)
    once = scramble_bits(bits, pulse_index)
    np.testing.assert_array_equal(scramble_bits(once, pulse_index), bits)


def test_scramble_mask_varies_per_pulse():
    masks = {scramble_mask(64, p).tobytes() for p in range(16)}
    assert len(masks) == 16


def test_split_interleave_inverse():
    bits = np.array([1, 0, 0, 1, 1, 1, 0, 0], dtype=np.uint8)
    b1, b2, padded = split_even_odd(bits)
    assert not padded
    np.testing.assert_array_equal(interleave_even_odd(b1, b2), bits)
    odd = np.array([1, 0, 1], dtype=np.uint8)
    b1, b2, padded = split_even_odd(odd)
    assert padded
    np.testing.assert_array_equal(interleave_even_odd(b1, b2)[:3], odd)


def test_repetition_codec_roundtrip_and_soft_decision():
    codec = get_codec("repetition8")
    assert codec.rate == pytest.approx(1.0 / 8.0)
    bits = np.array([1, 0, 1, 1], dtype=np.uint8)
    coded = codec.encode(bits)
    assert coded.size == 32
    soft = 1.0 - 2.0 * coded.astype(float)
    decoded, erasure = codec.decode_soft(soft)
    np.testing.assert_array_equal(decoded, bits)
    assert not np.any(erasure)
    # flipping three of eight repeats must not change the majority decision
    soft[:3] = -soft[:3]
    decoded, _ = codec.decode_soft(soft)
    np.testing.assert_array_equal(decoded, bits)


def test_qpsk_baseband_bit_energy():
    code = kasami_small_set(6, 0)
    bits1 = np.array([0, 1, 0], dtype=np.uint8)
    bits2 = np.array([1, 1, 0], dtype=np.uint8)
    chip_duration = 1e-8
    eb = 2.5e-9
    pulse = qpsk_baseband(
        spread(bits1, code),
        spread(bits2, code),
        chips_per_symbol=63,
        chip_duration=chip_duration,
        oversample=1,
        bit_energy=eb,
        shaping="rect",
        rolloff=0.25,
        carrier_frequency=10e9,
    )
    energy = np.sum(np.abs(pulse.samples) ** 2) * chip_duration
    assert energy == pytest.approx(eb * 6, rel=1e-9)  # 6 bits on the pulse


def test_build_pulse_deterministic_and_index_sensitive(waveform_params):
    payload = np.zeros(waveform_params.payload_bits_per_pulse, dtype=np.uint8)
    a = build_pulse(payload, waveform_params, 3)
    b = build_pulse(payload, waveform_params, 3)
    c = build_pulse(payload, waveform_params, 4)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_identical_payloads_give_decorrelated_pulses(waveform_params):
    """The per-pulse scrambler must keep equal-payload pulses nearly orthogonal,
    otherwise range compression against the wrong pulse's reference would
    still produce a peak."""
    payload = np.ones(waveform_params.payload_bits_per_pulse, dtype=np.uint8)
    a = build_pulse(payload, waveform_params, 0).samples
    auto = abs(np.vdot(a, a))
    cross = [
        abs(np.vdot(a, build_pulse(payload, waveform_params, k).samples)) / auto
        for k in range(1, 31)
    ]
    # random-phase symbol sum: rms ~ 1/sqrt(symbols_per_pulse) ~ 0.17
    assert float(np.sqrt(np.mean(np.square(cross)))) < 0.3
    assert max(cross) < 0.6


def test_build_pulse_train_matches_scalar_builds(waveform_params):
    payloads = random_payloads(3, waveform_params, 11)
    train = build_pulse_train(payloads, waveform_params)
    for p, row in enumerate(payloads):
        np.testing.assert_array_equal(train[p].samples, build_pulse(row, waveform_params, p).samples)


def test_build_pulse_rejects_wrong_payload_size(waveform_params):
    with pytest.raises(WaveformError):
        build_pulse(np.zeros(waveform_params.payload_bits_per_pulse + 1, dtype=np.uint8), waveform_params)
