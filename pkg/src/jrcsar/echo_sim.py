"""Slow-time x fast-time echo raster synthesis plus clutter and noise.

Each pulse row is the transmitted pulse train of that pulse, delayed by the
scatterer's bistatic delay (fractional delays via frequency-domain linear
phase), scaled by its reflectivity and rotated by exp(-j*2*pi*R_B(t)/lambda).
The "stop-and-go" approximation freezes the geometry over each pulse's fast
time. Phase and delay are referenced to the scene center's initial bistatic
range R_T0 + R_R0: the dropped constant is a global phase/delay offset and
keeps full double precision over the gigameter-scale GEO leg.

Scatterer offsets (dx along-track, dy ground-range) are realized per leg as a
slow-time shift dx / V_ground (shifted closest approach) plus the static range
offset -dy * cos(bearing) * cos(elevation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .geometry import C_LIGHT, PlatformTrack, TargetMotion
from .waveform import PulseTrain


class EchoSimError(ValueError):
    """Invalid simulation setup."""


@dataclass(frozen=True)
class Scatterer:
    offset_x: float  # m, along-track
    offset_y: float  # m, ground range
    motion: TargetMotion
    reflectivity: float


@dataclass(frozen=True)
class Scene:
    """Scatterer collection around a common reference (scene center)."""

    scatterers: tuple

    def __post_init__(self):
        if len(self.scatterers) == 0:
            raise EchoSimError("scene needs at least one scatterer")
        object.__setattr__(self, "scatterers", tuple(self.scatterers))

    @classmethod
    def point(cls, motion: TargetMotion, reflectivity: float = 1.0) -> "Scene":
        return cls((Scatterer(0.0, 0.0, motion, reflectivity),))

    @classmethod
    def ship_matrix(
        cls,
        stencil: list[str],
        spacing_x: float,
        spacing_y: float,
        motion: TargetMotion,
        reflectivity: float = 1.0,
    ) -> "Scene":
        """Dot-matrix ship: rows of 0/1 marks, one shared TargetMotion for the hull."""
        rows = [r for r in stencil if r.strip()]
        if not rows:
            raise EchoSimError("empty stencil")
        ny = len(rows)
        nx = max(len(r) for r in rows)
        scat = []
        for iy, row in enumerate(rows):
            for ix, mark in enumerate(row):
                if mark in "1#*x":
                    dx = (ix - (nx - 1) / 2.0) * spacing_x
                    dy = ((ny - 1) / 2.0 - iy) * spacing_y
                    scat.append(Scatterer(dx, dy, motion, reflectivity))
        if not scat:
            raise EchoSimError("stencil has no marks")
        return cls(tuple(scat))


@dataclass(frozen=True)
class SceneGeometry:
    """Platform tracks plus the angles needed to place off-center scatterers."""

    tx_track: PlatformTrack
    rx_track: PlatformTrack
    tx_bearing: float
    tx_elevation: float
    rx_bearing: float
    rx_elevation: float
    wavelength: float


@dataclass(frozen=True)
class RasterTiming:
    prf: float
    n_pulses: int
    sample_rate: float
    n_fast: int
    fast_time_origin: float = 0.0  # s, delay relative to (R_T0+R_R0)/c at the window start

    @property
    def slow_times(self) -> np.ndarray:
        """Centered slow-time grid: aperture midpoint at t = 0."""
        return (np.arange(self.n_pulses) - (self.n_pulses - 1) / 2.0) / self.prf


@dataclass
class EchoRaster:
    """2-D complex raster, slow time (rows) x fast time (cols)."""

    data: np.ndarray
    prf: float
    sample_rate: float
    slow_time_origin: float
    fast_time_origin: float
    pulse_payloads: np.ndarray | None = None  # per-pulse payload bits carried

    def __post_init__(self):
        if self.data.ndim != 2 or 0 in self.data.shape:
            raise EchoSimError("raster must be a nonempty 2-D array")

    @property
    def n_pulses(self) -> int:
        return self.data.shape[0]

    @property
    def n_fast(self) -> int:
        return self.data.shape[1]

    @property
    def slow_times(self) -> np.ndarray:
        return self.slow_time_origin + np.arange(self.n_pulses) / self.prf


def scatterer_range_delta(
    scat: Scatterer, geom: SceneGeometry, t: np.ndarray
) -> np.ndarray:
    """Bistatic range of a scatterer minus the scene-center constant R_T0 + R_R0."""
    bt, ct = geometry.range_coefficients_tx(geom.tx_track, scat.motion)
    br, cr = geometry.range_coefficients_rx(geom.rx_track, scat.motion)
    # per-leg slow-time shift from the along-track offset
    dt_t = scat.offset_x / geom.tx_track.ground_velocity
    dt_r = scat.offset_x / geom.rx_track.ground_velocity
    # static ground-range offset projected on each line of sight
    dr0 = -scat.offset_y * (
        math.cos(geom.tx_bearing) * math.cos(geom.tx_elevation)
        + math.cos(geom.rx_bearing) * math.cos(geom.rx_elevation)
    )
    tt = t + dt_t
    tr = t + dt_r
    return (
        dr0
        + bt * tt
        + ct * tt * tt
        + br * tr
        + cr * tr * tr
        + 2.0 * scat.motion.heave.displacement(t)
    )


def simulate_echo(
    scene: Scene,
    geom: SceneGeometry,
    pulses: list[PulseTrain],
    timing: RasterTiming,
) -> EchoRaster:
    """Superpose delayed, phase-rotated copies of each pulse into the raster."""
    if len(pulses) != timing.n_pulses:
        raise EchoSimError(f"need {timing.n_pulses} pulses, got {len(pulses)}")
    fs = timing.sample_rate
    n_fast = timing.n_fast
    t_slow = timing.slow_times
    lam = geom.wavelength

    pulse_len = pulses[0].samples.size
    if any(p.samples.size != pulse_len for p in pulses):
        raise EchoSimError("all pulses must share one length")
    if pulse_len > n_fast:
        raise EchoSimError("fast-time window shorter than the pulse")

    # spectra of all pulses (padded to the fast-time window)
    block = np.zeros((timing.n_pulses, n_fast), dtype=complex)
    for i, p in enumerate(pulses):
        block[i, :pulse_len] = p.samples
    spectra = np.fft.fft(block, axis=1)
    freqs = np.fft.fftfreq(n_fast)  # cycles per sample

    data = np.zeros((timing.n_pulses, n_fast), dtype=complex)
    for k, scat in enumerate(scene.scatterers):
        if scat.reflectivity == 0.0:
            continue
        r_rel = scatterer_range_delta(scat, geom, t_slow)
        delay_samples = (r_rel / C_LIGHT - timing.fast_time_origin) * fs
        bad = (delay_samples < 0) | (delay_samples + pulse_len > n_fast)
        if np.any(bad):
            p_idx = int(np.argmax(bad))
            raise EchoSimError(
                f"scatterer {k} delay outside the fast-time window at pulse {p_idx} "
                f"(offset {delay_samples[p_idx]:.2f} samples)"
            )
        phase = np.exp(-2j * np.pi * r_rel / lam)
        ramp = np.exp(-2j * np.pi * freqs[None, :] * delay_samples[:, None])
        data += (scat.reflectivity * phase)[:, None] * np.fft.ifft(spectra * ramp, axis=1)

    return EchoRaster(
        data=data,
        prf=timing.prf,
        sample_rate=fs,
        slow_time_origin=float(t_slow[0]),
        fast_time_origin=timing.fast_time_origin,
    )


@dataclass(frozen=True)
class ClutterSpec:
    """Interference description: clutter family plus white-noise SNR.

    snr_db and clutter_to_signal_db are referenced to the mean signal power
    over the raster samples where the clean signal is nonzero. None disables
    the corresponding term. The K-distributed model draws one gamma texture
    per sample (shape nu, unit mean) multiplying a complex-Gaussian speckle.
    """

    model: str = "none"  # none | gaussian | k
    shape: float = 1.5  # K-distribution shape nu
    clutter_to_signal_db: float | None = None
    snr_db: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.model not in ("none", "gaussian", "k"):
            raise EchoSimError(f"unknown clutter model {self.model!r}")
        if self.model == "k" and self.shape <= 0:
            raise EchoSimError("K-distribution shape must be > 0")


def add_interference(raster: EchoRaster, spec: ClutterSpec) -> EchoRaster:
    """Return raster + clutter + white Gaussian noise at the requested power ratios.

    Deterministic under spec.seed; the RNG is split per pulse so serial and
    parallel row assembly agree bit-exactly.
    """
    want_noise = spec.snr_db is not None and np.isfinite(spec.snr_db)
    want_clutter = spec.model != "none" and spec.clutter_to_signal_db is not None
    if not want_noise and not want_clutter:
        return raster

    support = np.abs(raster.data) > 0
    n_sig = int(support.sum())
    if n_sig == 0:
        raise EchoSimError("raster has no signal support to reference power ratios")
    p_sig = float(np.mean(np.abs(raster.data[support]) ** 2))

    n_pulses, n_fast = raster.data.shape
    seeds = np.random.SeedSequence([spec.seed, 0x636C7574]).spawn(n_pulses)
    out = raster.data.copy()
    p_noise = p_sig * 10 ** (-spec.snr_db / 10.0) if want_noise else 0.0
    p_clut = p_sig * 10 ** (spec.clutter_to_signal_db / 10.0) if want_clutter else 0.0
    for i in range(n_pulses):
        rng = np.random.default_rng(seeds[i])
        if want_clutter:
            speckle = (rng.normal(size=n_fast) + 1j * rng.normal(size=n_fast)) * math.sqrt(
                p_clut / 2.0
            )
            if spec.model == "k":
                texture = rng.gamma(spec.shape, 1.0 / spec.shape, size=n_fast)
                speckle *= np.sqrt(texture)
            out[i] += speckle
        if want_noise:
            out[i] += (rng.normal(size=n_fast) + 1j * rng.normal(size=n_fast)) * math.sqrt(
                p_noise / 2.0
            )
    return replace_raster(raster, out)


def replace_raster(raster: EchoRaster, data: np.ndarray) -> EchoRaster:
    return EchoRaster(
        data=data,
        prf=raster.prf,
        sample_rate=raster.sample_rate,
        slow_time_origin=raster.slow_time_origin,
        fast_time_origin=raster.fast_time_origin,
        pulse_payloads=raster.pulse_payloads,
    )
