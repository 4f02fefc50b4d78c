"""Communication half of the joint receiver: equalize, despread, decode,
measure BER, and rebuild the transmitted reference pulses for the SAR half.

Per-pulse flow: the echo segment of a pulse is located with the coarse delay
track (symbol timing is assumed known, as in the simulation). The channel
impulse response is estimated by correlating the pilot symbol (whose chips
equal the spreading code on both lanes) against the received window, and the
segment is passed through the channel-matched filter; this coherently
combines multipath energy from extended targets, where a pilot-trained
linear equalizer alone would hit a noise floor at channel spectral nulls.
A Wiener MMSE equalizer trained on the pilot then shortens the combined
response, the equalized chips are despread symbol by symbol, and the codec
decodes the payload. Decoded bits re-enter the shared pulse synthesis path,
so a clean decode reconstructs the transmitted reference bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .echo_sim import EchoRaster
from .waveform import (
    PulseTrain,
    SpreadingCode,
    WaveformParams,
    build_pulse,
    scramble_bits,
    scramble_mask,
)


class CommReceiverError(ValueError):
    """Invalid receiver input."""


class EqualizationError(RuntimeError):
    """Numerically unusable equalizer solve."""


# ---------------------------------------------------------------------------
# Channel estimation and Wiener equalization
# ---------------------------------------------------------------------------

@dataclass
class ChannelEstimate:
    """Autocovariance lags, optional impulse-response taps, equalizer taps."""

    lags: np.ndarray  # r(0..order-1), biased estimates
    order: int
    regularization: float
    impulse_response: np.ndarray | None = None  # h-hat, centered on lag 0
    taps: np.ndarray | None = None
    condition: float | None = None

    @property
    def matrix(self) -> np.ndarray:
        """Hermitian Toeplitz autocovariance with diagonal loading applied."""
        r = self.lags.copy()
        m = sla.toeplitz(r, np.conj(r))
        m[np.diag_indices_from(m)] += self.regularization * np.real(r[0])
        return m


def estimate_autocovariance(
    received, order: int, *, regularization: float = 1e-6
) -> ChannelEstimate:
    """Biased lag estimates r(0..order-1) arranged as a Hermitian Toeplitz matrix."""
    y = np.asarray(received, dtype=complex)
    if y.size < 4 * order:
        raise CommReceiverError(f"need at least {4 * order} samples for order {order}")
    n = y.size
    lags = np.empty(order, dtype=complex)
    for k in range(order):
        lags[k] = np.dot(y[k:], np.conj(y[: n - k])) / n
    lags[0] = np.real(lags[0])
    return ChannelEstimate(lags=lags, order=order, regularization=regularization)


def estimate_impulse_response(
    received, training, *, max_lag: int, threshold: float = 0.1
) -> np.ndarray:
    """Channel taps h(-max_lag .. +max_lag) by correlating against the training span.

    `received` must hold the training span at index max_lag (i.e. include
    max_lag samples of lead-in and tail). Taps below `threshold` of the
    strongest tap are zeroed; they are dominated by correlation self-noise.
    """
    y = np.asarray(received, dtype=complex)
    d = np.asarray(training, dtype=complex)
    n_lags = 2 * max_lag + 1
    if y.size < d.size + 2 * max_lag:
        raise CommReceiverError("window too short for the requested lag span")
    energy = np.vdot(d, d)
    h = np.array([np.dot(y[l : l + d.size], np.conj(d)) for l in range(n_lags)]) / energy
    if threshold > 0:
        h = np.where(np.abs(h) >= threshold * np.abs(h).max(), h, 0.0)
    return h


def matched_filter_channel(received, h: np.ndarray) -> np.ndarray:
    """Correlate the received window with the channel estimate (maximum-ratio
    combining across taps); unit combined gain at the peak.

    `received` carries the same max_lag lead-in/tail as the channel estimate;
    the output is trimmed back to the original segment timing.
    """
    y = np.asarray(received, dtype=complex)
    h = np.asarray(h, dtype=complex)
    power = np.sum(np.abs(h) ** 2)
    if power == 0:
        raise CommReceiverError("all-zero channel estimate")
    return np.correlate(y, h, mode="valid") / power


def wiener_equalize(
    received,
    estimate: ChannelEstimate,
    training,
    *,
    train_offset: int = 0,
) -> np.ndarray:
    """Solve the Toeplitz normal equations against the training span and filter.

    The equalizer length equals the autocovariance order (odd, center tap at
    delay D = (order-1)/2). After filtering, the output is renormalized by the
    least-squares complex gain over the training span so diagonal loading does
    not bias the overall scale.
    """
    y = np.asarray(received, dtype=complex)
    d = np.asarray(training, dtype=complex)
    order = estimate.order
    if order % 2 == 0:
        raise CommReceiverError("equalizer length must be odd")
    delay = (order - 1) // 2
    if train_offset < 0 or train_offset + d.size > y.size:
        raise CommReceiverError("training span outside the received sequence")

    # cross-correlation p[i] = E[ d[n] * conj(y[n + D - i]) ]
    p = np.zeros(order, dtype=complex)
    count = np.zeros(order)
    for i in range(order):
        idx = train_offset + np.arange(d.size) + delay - i
        ok = (idx >= 0) & (idx < y.size)
        p[i] = np.dot(d[ok], np.conj(y[idx[ok]]))
        count[i] = ok.sum()
    p /= np.maximum(count, 1)

    r = sla.toeplitz(estimate.lags, np.conj(estimate.lags))
    r[np.diag_indices_from(r)] += estimate.regularization * np.real(estimate.lags[0])
    cond = float(np.linalg.cond(r))
    if not np.isfinite(cond) or cond > 1e14:
        raise EqualizationError(f"autocovariance system is singular (condition {cond:.3e})")
    taps = np.linalg.solve(r, p)

    out = np.convolve(y, taps)[delay : delay + y.size]
    # gain renormalization on the training span
    seg = out[train_offset : train_offset + d.size]
    denom = np.vdot(seg, seg)
    if abs(denom) > 0:
        out = out * (np.vdot(seg, d) / denom)
    estimate.taps = taps
    estimate.condition = cond
    return out


# ---------------------------------------------------------------------------
# Despreading and decoding
# ---------------------------------------------------------------------------

def despread_demap(
    equalized, code: SpreadingCode, oversample: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Correlate each symbol interval against the code; I and Q lane soft values.

    Soft value > 0 means chip/bit 0 (+1 amplitude). Hard decisions are the
    soft-value signs.
    """
    y = np.asarray(equalized, dtype=complex)
    seg = len(code) * oversample
    if y.size == 0 or y.size % seg:
        raise CommReceiverError(f"length {y.size} is not a multiple of the symbol span {seg}")
    ref = np.repeat(code.amplitudes, oversample)
    blocks = y.reshape(-1, seg)
    soft_i = blocks.real @ ref
    soft_q = blocks.imag @ ref
    return soft_i, soft_q


@dataclass
class DecodedMessage:
    """Decoded payload plus per-pulse bookkeeping and quality measures."""

    payload_bits: np.ndarray  # (n_pulses, payload_bits_per_pulse)
    erasures: np.ndarray  # (n_pulses,) bool
    coded_bits: np.ndarray | None = None  # hard coded bits as received
    ber: float | None = None
    coded_ber: float | None = None
    equalizer_conditions: np.ndarray | None = None

    @property
    def n_pulses(self) -> int:
        return self.payload_bits.shape[0]

    @property
    def bits_flat(self) -> np.ndarray:
        return self.payload_bits.ravel()


def decode_symbols(
    soft_i: np.ndarray, soft_q: np.ndarray, params: WaveformParams, pulse_index: int = 0
) -> tuple[np.ndarray, bool]:
    """Decode one pulse's despread soft symbols (pilot first) into payload bits."""
    if soft_i.size != params.symbols_per_pulse:
        raise CommReceiverError(
            f"expected {params.symbols_per_pulse} symbols, got {soft_i.size}"
        )
    # drop the pilot, interleave lanes back into coded-bit order, descramble
    soft = np.empty(2 * (soft_i.size - 1))
    soft[0::2] = soft_i[1:]
    soft[1::2] = soft_q[1:]
    soft *= 1.0 - 2.0 * scramble_mask(soft.size, pulse_index)
    bits, erasure = params.codec.decode_soft(soft)
    return bits.astype(np.uint8), bool(np.any(erasure))


def decode_message(
    soft_i,
    soft_q,
    params: WaveformParams,
    truth: np.ndarray | None = None,
) -> DecodedMessage:
    """Decode stacked per-pulse soft symbols, optionally measuring BER vs truth."""
    soft_i = np.atleast_2d(np.asarray(soft_i, dtype=float))
    soft_q = np.atleast_2d(np.asarray(soft_q, dtype=float))
    n_pulses = soft_i.shape[0]
    payload = np.zeros((n_pulses, params.payload_bits_per_pulse), dtype=np.uint8)
    erasures = np.zeros(n_pulses, dtype=bool)
    coded = np.zeros((n_pulses, params.coded_bits_per_pulse), dtype=np.uint8)
    for p in range(n_pulses):
        payload[p], erasures[p] = decode_symbols(soft_i[p], soft_q[p], params, p)
        hard = np.empty(params.coded_bits_per_pulse, dtype=np.uint8)
        hard[0::2] = soft_i[p, 1:] < 0
        hard[1::2] = soft_q[p, 1:] < 0
        coded[p] = scramble_bits(hard, p)  # report in descrambled coded-bit order
    msg = DecodedMessage(payload_bits=payload, erasures=erasures, coded_bits=coded)
    if truth is not None:
        truth = np.asarray(truth, dtype=np.uint8).reshape(payload.shape)
        msg.ber = float(np.mean(payload != truth))
    return msg


def reconstruct_reference(
    message: DecodedMessage, params: WaveformParams
) -> list[PulseTrain | None]:
    """Re-synthesize per-pulse references from decoded bits.

    Erasure-flagged pulses yield None: the SAR half skips them rather than
    risk range compression against a wrong reference.
    """
    refs: list[PulseTrain | None] = []
    for p in range(message.n_pulses):
        if message.erasures[p]:
            refs.append(None)
        else:
            refs.append(build_pulse(message.payload_bits[p], params, p))
    return refs


# ---------------------------------------------------------------------------
# BER Monte-Carlo
# ---------------------------------------------------------------------------

def simulate_qpsk_ber(
    params: WaveformParams,
    ebn0_db: float,
    n_bits: int,
    seed: int,
    *,
    chunk_symbols: int = 25000,
) -> tuple[float, float]:
    """Uncoded spread-QPSK BER over AWGN; returns (rate, Monte-Carlo sigma).

    Chip-level simulation through the production despreader: each symbol's two
    bit lanes are spread with the configured Kasami code, complex white noise
    is added at the requested Eb/N0, and the despread soft-value signs are
    compared with the sent bits. The per-chip noise deviation follows from the
    matched-filter SNR: sigma = a * sqrt(Nc / (2 Eb/N0)) per real lane, with a
    the chip amplitude and Nc the code length.
    """
    if n_bits < 2:
        raise CommReceiverError("need at least one symbol (2 bits)")
    nc = len(params.code) * params.oversample
    amp = math.sqrt(params.bit_energy / (0.5 * nc * params.chip_duration / params.oversample))
    gamma = 10.0 ** (ebn0_db / 10.0)
    sigma = amp * math.sqrt(nc / (2.0 * gamma))
    ref = np.repeat(params.code.amplitudes, params.oversample)

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x626572]))
    n_symbols = (n_bits + 1) // 2
    errors = 0
    done = 0
    while done < n_symbols:
        m = min(chunk_symbols, n_symbols - done)
        bits = rng.integers(0, 2, size=(2, m))
        signs = 1.0 - 2.0 * bits  # bit 0 -> +1
        clean = amp * signs[:, :, None] * ref[None, None, :]
        noise = rng.normal(scale=sigma, size=(2, m, nc))
        soft = np.einsum("lmc,c->lm", clean + noise, ref)
        errors += int(np.sum((soft < 0) != (bits == 1)))
        done += m
    total = 2 * n_symbols
    rate = errors / total
    return rate, math.sqrt(max(rate * (1.0 - rate), 1.0 / total) / total)


# ---------------------------------------------------------------------------
# Raster-level demodulation
# ---------------------------------------------------------------------------

def demodulate_raster(
    raster: EchoRaster,
    delay_track: np.ndarray,
    params: WaveformParams,
    *,
    equalizer_order: int = 31,
    max_channel_lag: int = 24,
    truth: np.ndarray | None = None,
) -> DecodedMessage:
    """Run the per-pulse comm chain over a raster.

    delay_track gives, per pulse, the (possibly fractional) sample index where
    the pulse's echo starts; the integer part selects the segment and the
    channel-matched filter plus equalizer absorb the sub-sample remainder
    together with the carrier phase rotation. max_channel_lag bounds the
    multipath spread the front end can combine; it is clipped to the raster
    margins around each segment.
    """
    delay_track = np.asarray(delay_track, dtype=float)
    if delay_track.size != raster.n_pulses:
        raise CommReceiverError("delay track length must match the pulse count")
    n_seg = params.samples_per_pulse
    pilot_len = len(params.code) * params.oversample
    pilot_ref = math.sqrt(params.bit_energy / (0.5 * len(params.code) * params.chip_duration)) * (
        1.0 + 1.0j
    ) * np.repeat(params.code.amplitudes, params.oversample)

    soft_i = np.zeros((raster.n_pulses, params.symbols_per_pulse))
    soft_q = np.zeros_like(soft_i)
    conds = np.zeros(raster.n_pulses)
    for p in range(raster.n_pulses):
        start = int(round(delay_track[p]))
        if start < 0 or start + n_seg > raster.n_fast:
            raise CommReceiverError(f"pulse {p}: echo segment outside the raster")
        lag = min(max_channel_lag, start, raster.n_fast - start - n_seg)
        row = np.asarray(raster.data[p], dtype=complex)
        h = estimate_impulse_response(
            row[start - lag : start + pilot_len + lag], pilot_ref, max_lag=lag
        )
        seg = matched_filter_channel(row[start - lag : start + n_seg + lag], h)
        est = estimate_autocovariance(seg, equalizer_order)
        est.impulse_response = h
        eq = wiener_equalize(seg, est, pilot_ref, train_offset=0)
        conds[p] = est.condition
        soft_i[p], soft_q[p] = despread_demap(eq, params.code, params.oversample)

    msg = decode_message(soft_i, soft_q, params, truth=truth)
    msg.equalizer_conditions = conds
    return msg
