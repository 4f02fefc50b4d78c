"""Reproducible experiment driver: config in, artifacts + manifest out.

Modes
-----
point  : single scatterer with the configured motion; full tx -> channel ->
         joint receiver pipeline, baseline and compensated images per SNR.
ship   : dot-matrix ship built from the configured stencil; same pipeline,
         plus a truth-layout image.
comm   : chip-level uncoded QPSK BER sweep against the analytic curve.

Every artifact is written under the output directory and listed in
`manifest.json` with its SHA-256. Wall-clock timings go to a separate
`timings.json` sidecar that is deliberately NOT listed in the manifest, so
manifests from identical seeds are byte-identical. A lock file serializes
concurrent runs against one output directory.
"""

from __future__ import annotations

import concurrent.futures
import math
import time
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path

import numpy as np
from filelock import FileLock

from . import __version__, container, plots
from .config import ScenarioConfig, serialize_config
from .echo_sim import EchoRaster, Scatterer, Scene, add_interference, simulate_echo
from .geometry import C_LIGHT
from .oracles import qfunction
from .receiver_comm import demodulate_raster, reconstruct_reference, simulate_qpsk_ber
from .receiver_sar import (
    compensate_and_focus,
    estimate_motion,
    extract_rcm_line,
    peak_to_background_db,
    range_compress,
    truth_delay_track,
)
from .waveform import build_pulse_train, random_payloads

MODES = ("point", "ship", "comm")

_METRIC_COLUMNS = (
    "mode,snr_db,method,ber,erasures,peak_to_background_db,"
    "range_width_bins,azimuth_width_bins,pslr_db,islr_db,entropy,contrast,"
    "doppler_centroid_hz,doppler_rate_hz_s,omega_rad_s,p_m,q_m"
)


class ScenarioError(RuntimeError):
    """Pipeline failure, annotated with the failing stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


@dataclass
class _SnrResult:
    snr_db: float | None
    rows: list
    artifacts: dict  # name -> path
    summary: dict


def _snr_tag(snr_db) -> str:
    if snr_db is None:
        return "clean"
    return f"snr{format(float(snr_db), 'g').replace('-', 'm').replace('.', 'p')}"


def _run_imaging_one_snr(
    cfg: ScenarioConfig,
    mode: str,
    snr_db,
    clean: EchoRaster,
    payloads: np.ndarray,
    out: Path,
    make_figures: bool,
) -> _SnrResult:
    params = cfg.waveform_params()
    geom = cfg.scene_geometry()
    timing = cfg.raster_timing()
    tag = _snr_tag(snr_db)
    artifacts: dict = {}
    rows: list = []

    def stage(name, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except Exception as exc:  # noqa: BLE001 - annotate and re-raise
            raise ScenarioError(name, exc) from exc

    raster = stage("interference", add_interference, clean, cfg.clutter_spec(snr_db=snr_db))
    center = Scatterer(0.0, 0.0, cfg.target_motion(), cfg.target.reflectivity)
    t_slow = timing.slow_times
    track = truth_delay_track(center, geom, raster, t_slow)

    msg = stage("demodulate", demodulate_raster, raster, track, params, truth=payloads)
    refs = stage("reconstruct", reconstruct_reference, msg, params)
    rc = stage("range_compress", range_compress, raster, refs)
    x = stage("rcm_line", extract_rcm_line, rc, track)
    est = stage(
        "estimate_motion", estimate_motion, x, t_slow, cfg.prf, cfg.wavelength, model_order=1
    )

    tx, rx = geom.tx_track, geom.rx_track
    baseline = stage(
        "focus_baseline", compensate_and_focus, rc, None, tx, rx, cfg.wavelength,
        coarse_track=track,
    )
    comp = stage(
        "focus_compensated", compensate_and_focus, rc, est, tx, rx, cfg.wavelength,
        coarse_track=track,
    )

    def put_array(name, data, kind, aux):
        path = out / f"{name}_{tag}.bin"
        container.write_array(path, data, kind=kind, sample_rate=raster.sample_rate, aux=aux)
        artifacts[path.name] = path

    put_array("raster", raster.data, container.KIND_RASTER, raster.prf)
    put_array("image_baseline", baseline.image, container.KIND_IMAGE, raster.prf)
    put_array("image_compensated", comp.image, container.KIND_IMAGE, raster.prf)
    for name, report in (("baseline", baseline), ("compensated", comp)):
        pgm = out / f"image_{name}_{tag}.pgm"
        container.write_pgm(pgm, report.image)
        artifacts[pgm.name] = pgm
        if make_figures:
            png = out / f"image_{name}_{tag}.png"
            plots.save_image_figure(report.image, png, f"{mode} target, {name}, {tag}")
            artifacts[png.name] = png
    if make_figures:
        cuts = out / f"cuts_compensated_{tag}.png"
        plots.save_cut_figure(comp.image, comp.peak, cuts, f"compensated IRF cuts, {tag}")
        artifacts[cuts.name] = cuts

    ptb = peak_to_background_db(rc)
    for report in (baseline, comp):
        comp_fields = (
            [est.doppler_centroid, est.doppler_rate]
            + (list(est.wave_components[0]) if est.wave_components else [None, None, None])
            if report.method == "compensated"
            else [None] * 5
        )
        rows.append(
            [
                mode, snr_db, report.method, msg.ber, int(msg.erasures.sum()), ptb,
                report.range_metrics.width_3db_bins,
                report.azimuth_metrics.width_3db_bins,
                report.range_metrics.pslr_db,
                report.range_metrics.islr_db,
                report.entropy, report.contrast,
            ]
            + comp_fields
        )

    summary = {
        "snr_db": snr_db,
        "ber": msg.ber,
        "erasures": int(msg.erasures.sum()),
        "peak_to_background_db": ptb,
        "entropy_baseline": baseline.entropy,
        "entropy_compensated": comp.entropy,
        "azimuth_width_baseline": baseline.azimuth_metrics.width_3db_bins,
        "azimuth_width_compensated": comp.azimuth_metrics.width_3db_bins,
        "estimate": {
            "doppler_centroid_hz": est.doppler_centroid,
            "doppler_rate_hz_s": est.doppler_rate,
            "wave_components": [list(c) for c in est.wave_components],
            "residual_rms_hz": est.residual_rms,
        },
    }
    payload_path = out / f"payload_{tag}.bin"
    payload_path.write_bytes(np.packbits(msg.payload_bits.ravel()).tobytes())
    artifacts[payload_path.name] = payload_path
    return _SnrResult(snr_db=snr_db, rows=rows, artifacts=artifacts, summary=summary)


def _run_imaging(cfg, mode, snr_list, out, parallel, make_figures, manifest):
    params = cfg.waveform_params()
    timing = cfg.raster_timing()
    payloads = random_payloads(cfg.n_pulses, params, cfg.seed)
    pulses = build_pulse_train(payloads, params)
    scene = Scene.point(cfg.target_motion()) if mode == "point" else cfg.ship_scene()
    clean = simulate_echo(scene, cfg.scene_geometry(), pulses, timing)
    clean.pulse_payloads = payloads

    if mode == "ship":
        stencil_rows = [r for r in cfg.ship_stencil.split(";") if r.strip()]
        truth = np.array(
            [[1.0 if ch in "1#*x" else 0.0 for ch in row.ljust(max(map(len, stencil_rows)))]
             for row in stencil_rows]
        )
        pgm = out / "ship_truth.pgm"
        container.write_pgm(pgm, truth)
        manifest["artifacts_paths"][pgm.name] = pgm
        if make_figures:
            png = out / "ship_truth.png"
            plots.save_image_figure(truth, png, "ship stencil truth layout")
            manifest["artifacts_paths"][png.name] = png

    def run_one(snr):
        return _run_imaging_one_snr(cfg, mode, snr, clean, payloads, out, make_figures)

    if parallel and len(snr_list) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=min(4, len(snr_list))) as pool:
            results = list(pool.map(run_one, snr_list))
    else:
        results = [run_one(snr) for snr in snr_list]

    lines = [_METRIC_COLUMNS]
    for res in results:
        manifest["artifacts_paths"].update(res.artifacts)
        manifest["runs"].append(res.summary)
        for row in res.rows:
            lines.append(",".join(_fmt(v) for v in row))
    metrics = out / "metrics.csv"
    metrics.write_text("\n".join(lines) + "\n")
    manifest["artifacts_paths"][metrics.name] = metrics


def _run_comm(cfg, snr_list, out, make_figures, manifest, n_bits):
    params = cfg.waveform_params()
    uncoded = params if params.codec_name == "identity" else None
    if uncoded is None:
        from dataclasses import replace as _replace

        uncoded = _replace(params, codec_name="identity")
    ebn0 = [float(s) for s in snr_list]
    lines = ["ebn0_db,ber_measured,ber_sigma,ber_analytic,n_bits"]
    measured, analytic = [], []
    for s in ebn0:
        rate, sigma = simulate_qpsk_ber(uncoded, s, n_bits, cfg.seed)
        theory = qfunction(math.sqrt(2.0 * 10 ** (s / 10.0)))
        measured.append(rate)
        analytic.append(theory)
        lines.append(",".join(_fmt(v) for v in (s, rate, sigma, theory, n_bits)))
        manifest["runs"].append(
            {"ebn0_db": s, "ber": rate, "sigma": sigma, "analytic": theory, "n_bits": n_bits}
        )
    ber_csv = out / "ber.csv"
    ber_csv.write_text("\n".join(lines) + "\n")
    manifest["artifacts_paths"][ber_csv.name] = ber_csv
    if make_figures:
        png = out / "ber.png"
        plots.save_ber_figure(ebn0, measured, analytic, png)
        manifest["artifacts_paths"][png.name] = png


def run_scenario(
    cfg: ScenarioConfig,
    mode: str,
    *,
    snr_list=None,
    parallel: bool = False,
    make_figures: bool = True,
    comm_bits: int = 200000,
) -> dict:
    """Execute one scenario mode; returns the manifest dict (also written to disk)."""
    if mode not in MODES:
        raise ScenarioError("setup", ValueError(f"unknown mode {mode!r} (use {MODES})"))
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    if snr_list is None:
        snr_list = [2.0, 4.0, 6.0, 8.0] if mode == "comm" else [cfg.snr_db]

    manifest = {
        "mode": mode,
        "seed": cfg.seed,
        "snr_list": list(snr_list),
        # the output directory is run placement, not scenario physics: normalize
        # it so identical runs in different directories hash identically
        "config": serialize_config(dc_replace(cfg, output="out")),
        "versions": {"jrcsar": __version__, "numpy": np.__version__},
        "parameters": {
            "n_pulses": cfg.n_pulses,
            "prf_hz": cfg.prf,
            "wavelength_m": cfg.wavelength,
            "chip_duration_s": cfg.chip_duration,
            "aperture_time_s": cfg.aperture_time,
            "range_bin_m": C_LIGHT / (2.0 * cfg.bandwidth),
        },
        "runs": [],
        "artifacts_paths": {},  # replaced by hashes before writing
        "error": None,
    }
    timings: dict = {}
    t0 = time.perf_counter()
    with FileLock(out / ".lock"):
        try:
            if mode == "comm":
                _run_comm(cfg, snr_list, out, make_figures, manifest, comm_bits)
            else:
                _run_imaging(cfg, mode, snr_list, out, parallel, make_figures, manifest)
        except ScenarioError as exc:
            manifest["error"] = {"stage": exc.stage, "message": str(exc.cause)}
            raise
        finally:
            timings["total_s"] = time.perf_counter() - t0
            paths = manifest.pop("artifacts_paths")
            manifest["artifacts"] = {
                name: container.sha256_of(p) for name, p in sorted(paths.items())
            }
            container.write_json(out / "manifest.json", manifest)
            container.write_json(out / "timings.json", timings)
    return manifest
