"""Report figures rendered to files (headless matplotlib backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _db_magnitude(image, floor_db: float = -60.0) -> np.ndarray:
    mag = np.abs(np.asarray(image))
    peak = mag.max()
    if peak <= 0:
        return np.full(mag.shape, floor_db)
    return 20.0 * np.log10(np.maximum(mag, peak * 10 ** (floor_db / 20.0)) / peak)


def save_image_figure(image, path, title: str, floor_db: float = -60.0) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    im = ax.imshow(_db_magnitude(image, floor_db), aspect="auto", cmap="gray",
                   vmin=floor_db, vmax=0.0, origin="lower")
    ax.set_xlabel("range bin")
    ax.set_ylabel("azimuth bin")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, label="dB")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_cut_figure(image, point, path, title: str) -> None:
    """Range and azimuth magnitude cuts (dB) through a peak."""
    image = np.asarray(image)
    r, c = point
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 5), sharey=True)
    for ax, cut, name in (
        (ax1, image[r, :], "range cut"),
        (ax2, image[:, c], "azimuth cut"),
    ):
        ax.plot(_db_magnitude(cut))
        ax.set_ylabel("dB")
        ax.set_title(name)
        ax.grid(True, alpha=0.3)
    ax2.set_xlabel("bin")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_doppler_figure(t, measured, model, path, title: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, measured, lw=0.6, label="extracted")
    if model is not None:
        ax.plot(t, model, lw=1.2, label="estimated model")
    ax.set_xlabel("slow time [s]")
    ax.set_ylabel("Doppler [Hz]")
    ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_ber_figure(ebn0_db, measured, analytic, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(ebn0_db, analytic, "k-", label="QPSK theory")
    ax.semilogy(ebn0_db, measured, "o", label="measured")
    ax.set_xlabel("Eb/N0 [dB]")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
