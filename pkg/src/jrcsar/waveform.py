"""Transmit-side synthesis: bits -> coded -> Kasami-spread -> QPSK baseband pulses.

Chip-to-amplitude mapping is 0 -> +1, 1 -> -1. Each data symbol occupies one
full period of the spreading code (processing gain = code length). Rectangular
chip shaping is the default; a raised-cosine shaping filter is available with
rolloff 0.25 by default.

Pulse framing: every pulse starts with one pilot symbol whose two coded bits
are fixed to (0, 0), so the pilot's chip content on both lanes equals the
spreading code itself. The pilot gives the receiver a known training reference
for equalization and a carrier-phase anchor. The remaining symbols carry the
codec-encoded payload of that pulse, XORed with a fixed pseudo-random
scrambling mask. Scrambling matters for the radar half: without it a
repetition codec makes the data symbols identical, the pulse becomes periodic
at the code length, and range compression grows ambiguity peaks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class WaveformError(ValueError):
    """Invalid waveform synthesis input."""


# ---------------------------------------------------------------------------
# Kasami small-set spreading codes
# ---------------------------------------------------------------------------

# primitive polynomials over GF(2), bit i = coefficient of x^i
_PRIMITIVE_POLY = {
    4: 0b10011,               # x^4 + x + 1
    6: 0b1000011,             # x^6 + x + 1
    8: 0b100011101,           # x^8 + x^4 + x^3 + x^2 + 1
    10: 0b10000001001,        # x^10 + x^3 + 1
    12: 0b1000001010011,      # x^12 + x^6 + x^4 + x + 1
    14: 0b100010001000011,    # x^14 + x^10 + x^6 + x + 1
    16: 0b10001000000001011,  # x^16 + x^12 + x^3 + x + 1
}


def m_sequence(n: int) -> np.ndarray:
    """Maximal-length sequence of period 2^n - 1 from the built-in primitive polynomial."""
    if n not in _PRIMITIVE_POLY:
        raise WaveformError(f"degree {n} not supported (even, 4..16)")
    poly = _PRIMITIVE_POLY[n]
    taps = [i for i in range(n) if (poly >> i) & 1]  # feedback taps below x^n
    state = 1
    period = (1 << n) - 1
    out = np.empty(period, dtype=np.uint8)
    for i in range(period):
        out[i] = state & 1
        fb = 0
        for tap in taps:
            fb ^= (state >> tap) & 1
        state = (state >> 1) | (fb << (n - 1))
    return out


@dataclass(frozen=True)
class SpreadingCode:
    """One small-set Kasami sequence."""

    chips: np.ndarray
    degree: int
    index: int

    def __len__(self) -> int:
        return self.chips.size

    @property
    def amplitudes(self) -> np.ndarray:
        """Chips mapped to +/-1 (0 -> +1, 1 -> -1)."""
        return 1.0 - 2.0 * self.chips.astype(float)


def kasami_small_set(n: int, index: int) -> SpreadingCode:
    """index-th small-set Kasami sequence of period 2^n - 1.

    Built from an m-sequence u and its decimation v by 2^(n/2) + 1:
    index 0 is u itself, index k >= 1 is u XOR (v cyclically shifted by k-1).
    The family has 2^(n/2) members with three-valued correlations.
    """
    if n % 2 != 0 or not (4 <= n <= 16):
        raise WaveformError(f"degree must be even in [4, 16], got {n}")
    family = 1 << (n // 2)
    if not (0 <= index < family):
        raise WaveformError(f"index must be in [0, {family}), got {index}")
    u = m_sequence(n)
    if index == 0:
        chips = u.copy()
    else:
        period = u.size
        s = (1 << (n // 2)) + 1
        v = u[(s * np.arange(period)) % period]
        chips = u ^ np.roll(v, -(index - 1))
    chips.setflags(write=False)
    return SpreadingCode(chips=chips, degree=n, index=index)


# ---------------------------------------------------------------------------
# Bit plumbing
# ---------------------------------------------------------------------------

def split_even_odd(bits) -> tuple[np.ndarray, np.ndarray, bool]:
    """Serial-to-parallel split: even-indexed bits -> lane 1, odd-indexed -> lane 2.

    Odd-length input is padded with one trailing 0 bit; the returned flag
    records whether padding was applied.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size == 0:
        raise WaveformError("empty bit stream")
    padded = bool(bits.size % 2)
    if padded:
        bits = np.concatenate([bits, [0]])
    return bits[0::2], bits[1::2], padded


def interleave_even_odd(b1, b2) -> np.ndarray:
    """Inverse of split_even_odd (pad bit, if any, is kept)."""
    b1 = np.asarray(b1, dtype=np.uint8)
    b2 = np.asarray(b2, dtype=np.uint8)
    if b1.size != b2.size:
        raise WaveformError("lane length mismatch")
    out = np.empty(2 * b1.size, dtype=np.uint8)
    out[0::2] = b1
    out[1::2] = b2
    return out


_SCRAMBLE_SALT = 0x73637261  # fixed salt so masks are part of the waveform standard


def scramble_mask(n: int, pulse_index: int = 0) -> np.ndarray:
    """Deterministic pseudo-random bit mask for one pulse, length n.

    Each pulse gets an independent mask (keyed by its index) so that pulses
    carrying correlated payloads (small payloads under a repetition codec)
    still transmit decorrelated chip streams. Without this, every pulse
    pair would share enough structure that range compression against the
    wrong pulse's reference leaves a strong residual peak. Cyclic shifts of
    a single m-sequence will not do here: shift-and-add closure makes such
    masks linearly dependent, so a seeded generator is used instead.
    """
    if n < 1:
        raise WaveformError("mask length must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([_SCRAMBLE_SALT, pulse_index]))
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def scramble_bits(bits, pulse_index: int = 0) -> np.ndarray:
    """XOR with the pulse's mask; involutive, so it also descrambles."""
    bits = np.asarray(bits, dtype=np.uint8)
    return bits ^ scramble_mask(bits.size, pulse_index)


def spread(data_bits, code: SpreadingCode, oversample: int = 1) -> np.ndarray:
    """XOR each data bit against one full code period; chips repeated `oversample` times."""
    if oversample < 1:
        raise WaveformError("oversample must be >= 1")
    data_bits = np.asarray(data_bits, dtype=np.uint8)
    chips = (data_bits[:, None] ^ code.chips[None, :]).ravel()
    if oversample > 1:
        chips = np.repeat(chips, oversample)
    return chips


def despread_hard(chips, code: SpreadingCode, oversample: int = 1) -> np.ndarray:
    """Majority-vote inverse of spread for hard chips (XOR involution)."""
    chips = np.asarray(chips, dtype=np.uint8)
    seg = code.chips.size * oversample
    if chips.size % seg:
        raise WaveformError("chip count not a multiple of the symbol span")
    ref = np.repeat(code.chips, oversample)
    x = chips.reshape(-1, seg) ^ ref[None, :]
    return (x.sum(axis=1) * 2 > seg).astype(np.uint8)


# ---------------------------------------------------------------------------
# QPSK baseband synthesis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PulseTrain:
    """Sampled complex baseband transmit waveform with its timing bookkeeping."""

    samples: np.ndarray
    sample_rate: float
    chip_duration: float
    symbol_interval: float  # T_S
    bit_interval: float  # T_B == T_S / 2
    bit_energy: float  # E_B
    carrier_frequency: float = 0.0
    shaping: str = "rect"
    rolloff: float = 0.25

    def __post_init__(self):
        if not math.isclose(self.symbol_interval, 2.0 * self.bit_interval, rel_tol=1e-12):
            raise WaveformError("symbol interval must equal twice the bit interval")

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    @property
    def n_symbols(self) -> int:
        return int(round(self.duration / self.symbol_interval))

    def energy(self) -> float:
        """Bandpass-equivalent energy: 0.5 * integral of |s_LP|^2 dt."""
        return 0.5 * float(np.sum(np.abs(self.samples) ** 2)) / self.sample_rate

    def energy_per_bit(self) -> float:
        return self.energy() / (2 * self.n_symbols)


def raised_cosine_taps(oversample: int, rolloff: float, span: int = 8) -> np.ndarray:
    """Raised-cosine chip-shaping impulse response over `span` chips, unit peak."""
    n = span * oversample
    t = (np.arange(-n // 2, n // 2 + 1)) / oversample  # in chip durations
    taps = np.sinc(t) * np.cos(np.pi * rolloff * t)
    den = 1.0 - (2.0 * rolloff * t) ** 2
    sing = np.isclose(den, 0.0)
    taps = np.where(sing, np.pi / 4.0 * np.sinc(1.0 / (2.0 * rolloff)), taps / np.where(sing, 1.0, den))
    return taps


def _shape_chips(amps: np.ndarray, oversample: int, shaping: str, rolloff: float) -> np.ndarray:
    if shaping == "rect":
        return np.repeat(amps, oversample).astype(float)
    if shaping == "raised-cosine":
        taps = raised_cosine_taps(oversample, rolloff)
        # scale so the shaped train has the same mean power as the rect train
        taps = taps * math.sqrt(oversample / np.sum(taps**2))
        up = np.zeros(amps.size * oversample)
        up[::oversample] = amps
        return np.convolve(up, taps, mode="same")
    raise WaveformError(f"unknown shaping {shaping!r}")


def qpsk_baseband(
    b1_chips,
    b2_chips,
    chips_per_symbol: int,
    chip_duration: float,
    *,
    oversample: int = 1,
    bit_energy: float = 1.0,
    shaping: str = "rect",
    rolloff: float = 0.25,
    carrier_frequency: float = 0.0,
) -> PulseTrain:
    """Complex baseband s_LP = sqrt(E_B/T_S) * (p1 + j*p2) from two chip lanes.

    Each lane carries one bit per symbol interval T_S, so the lane amplitude
    sqrt(E_B/T_S) puts exactly E_B of energy on every transmitted bit.
    """
    b1 = np.asarray(b1_chips, dtype=np.uint8)
    b2 = np.asarray(b2_chips, dtype=np.uint8)
    if b1.size != b2.size:
        raise WaveformError("lane length mismatch")
    if b1.size % chips_per_symbol:
        raise WaveformError("chip count not a multiple of chips_per_symbol")
    t_s = chips_per_symbol * chip_duration
    t_b = 0.5 * t_s
    amp = math.sqrt(bit_energy / t_s)
    p1 = _shape_chips(1.0 - 2.0 * b1.astype(float), oversample, shaping, rolloff)
    p2 = _shape_chips(1.0 - 2.0 * b2.astype(float), oversample, shaping, rolloff)
    samples = amp * (p1 + 1j * p2)
    return PulseTrain(
        samples=samples,
        sample_rate=oversample / chip_duration,
        chip_duration=chip_duration,
        symbol_interval=t_s,
        bit_interval=t_b,
        bit_energy=bit_energy,
        carrier_frequency=carrier_frequency,
        shaping=shaping,
        rolloff=rolloff,
    )


# ---------------------------------------------------------------------------
# Codec abstraction
# ---------------------------------------------------------------------------

class Codec:
    """Channel codec contract: decode(encode(bits)) == bits on a clean channel.

    decode_soft takes per-bit soft values with the convention value > 0 means
    bit 0; it returns (bits, erasure_mask) and never raises on bad input.
    """

    name: str
    rate: float

    def encode(self, bits: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def decode_soft(self, soft: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def decode_hard(self, bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.decode_soft(1.0 - 2.0 * np.asarray(bits, dtype=float))


class IdentityCodec(Codec):
    """Uncoded passthrough."""

    name = "identity"
    rate = 1.0

    def encode(self, bits):
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.size == 0:
            raise WaveformError("empty payload")
        return bits.copy()

    def decode_soft(self, soft):
        soft = np.asarray(soft, dtype=float)
        return (soft < 0).astype(np.uint8), soft == 0


class RepetitionCodec(Codec):
    """Block-interleaved repetition code; `copies` repeats give rate 1/copies.

    Copies of each payload bit are separated by the payload length, so a burst
    shorter than the payload touches each bit at most once. Soft decoding sums
    the copies; an exact tie is flagged as an erasure (decoded as 0).
    """

    def __init__(self, copies: int = 8):
        if copies < 2:
            raise WaveformError("copies must be >= 2")
        self.copies = copies
        self.name = f"repetition{copies}"
        self.rate = 1.0 / copies

    def encode(self, bits):
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.size == 0:
            raise WaveformError("empty payload")
        return np.tile(bits, self.copies)

    def decode_soft(self, soft):
        soft = np.asarray(soft, dtype=float)
        if soft.size % self.copies:
            # undecodable length: flag the whole block as erased
            n = soft.size // self.copies
            return np.zeros(max(n, 1), dtype=np.uint8), np.ones(max(n, 1), dtype=bool)
        acc = soft.reshape(self.copies, -1).sum(axis=0)
        return (acc < 0).astype(np.uint8), acc == 0


def get_codec(name: str) -> Codec:
    """Codec registry; the extension point for stronger codes."""
    if name == "identity":
        return IdentityCodec()
    if name.startswith("repetition"):
        copies = int(name[len("repetition"):] or 8)
        return RepetitionCodec(copies)
    raise WaveformError(f"unknown codec {name!r}")


# ---------------------------------------------------------------------------
# Per-pulse framing shared by the transmitter and the reference reconstruction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WaveformParams:
    """Everything needed to synthesize (or re-synthesize) one pulse."""

    degree: int = 6
    code_index: int = 0
    chip_duration: float = 1e-8  # 100 Mchip/s default
    oversample: int = 1
    symbols_per_pulse: int = 9  # one pilot + eight data symbols
    codec_name: str = "repetition8"
    bit_energy: float = 1.0
    shaping: str = "rect"
    rolloff: float = 0.25
    carrier_frequency: float = 10e9

    _code: SpreadingCode = field(init=False, repr=False, compare=False)
    _codec: Codec = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.symbols_per_pulse < 2:
            raise WaveformError("need at least one pilot and one data symbol")
        object.__setattr__(self, "_code", kasami_small_set(self.degree, self.code_index))
        object.__setattr__(self, "_codec", get_codec(self.codec_name))

    @property
    def code(self) -> SpreadingCode:
        return self._code

    @property
    def codec(self) -> Codec:
        return self._codec

    @property
    def data_symbols_per_pulse(self) -> int:
        return self.symbols_per_pulse - 1  # minus pilot

    @property
    def coded_bits_per_pulse(self) -> int:
        return 2 * self.data_symbols_per_pulse

    @property
    def payload_bits_per_pulse(self) -> int:
        n = self.coded_bits_per_pulse * self.codec.rate
        if abs(n - round(n)) > 1e-9 or round(n) < 1:
            raise WaveformError(
                f"{self.coded_bits_per_pulse} coded bits at rate {self.codec.rate} "
                "does not give an integer payload size"
            )
        return int(round(n))

    @property
    def samples_per_pulse(self) -> int:
        return self.symbols_per_pulse * len(self.code) * self.oversample

    @property
    def wavelength(self) -> float:
        return 299792458.0 / self.carrier_frequency


def build_pulse(payload_bits, params: WaveformParams, pulse_index: int = 0) -> PulseTrain:
    """Synthesize one pulse: pilot symbol + codec-encoded payload, spread and modulated.

    Deterministic; the receiver re-runs this on decoded bits to reconstruct
    bit-identical references.
    """
    payload_bits = np.asarray(payload_bits, dtype=np.uint8)
    if payload_bits.size != params.payload_bits_per_pulse:
        raise WaveformError(
            f"expected {params.payload_bits_per_pulse} payload bits, got {payload_bits.size}"
        )
    coded = scramble_bits(params.codec.encode(payload_bits), pulse_index)
    frame = np.concatenate([np.zeros(2, dtype=np.uint8), coded])  # pilot bits (0, 0)
    b1, b2, _ = split_even_odd(frame)
    c1 = spread(b1, params.code)
    c2 = spread(b2, params.code)
    return qpsk_baseband(
        c1,
        c2,
        chips_per_symbol=len(params.code),
        chip_duration=params.chip_duration,
        oversample=params.oversample,
        bit_energy=params.bit_energy,
        shaping=params.shaping,
        rolloff=params.rolloff,
        carrier_frequency=params.carrier_frequency,
    )


def build_pulse_train(payloads: np.ndarray, params: WaveformParams) -> list[PulseTrain]:
    """Synthesize one pulse per payload row."""
    return [build_pulse(row, params, p) for p, row in enumerate(payloads)]


def random_payloads(n_pulses: int, params: WaveformParams, seed: int) -> np.ndarray:
    """Deterministic per-pulse payload bits, shape (n_pulses, payload_bits_per_pulse)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x7061796C]))
    return rng.integers(0, 2, size=(n_pulses, params.payload_bits_per_pulse), dtype=np.uint8)
