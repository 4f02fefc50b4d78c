"""Kinematics: range polynomials, bistatic range, Doppler, heave."""

import math

import numpy as np
import pytest

from jrcsar import geometry
from jrcsar.geometry import (
    GeometryError,
    HeaveModel,
    PlatformTrack,
    TargetMotion,
    bistatic_range,
    bistatic_range_delta,
    doppler_centroid_stationary,
    doppler_history,
    doppler_rate_stationary,
    effective_velocity,
    line_of_sight,
    range_history_rx,
    range_history_tx,
)
from jrcsar.oracles import finite_difference


def test_effective_velocity_is_geometric_mean():
    assert effective_velocity(2300.0, 1800.0) == pytest.approx(math.sqrt(2300.0 * 1800.0))
    with pytest.raises(GeometryError):
        effective_velocity(-1.0, 5.0)


def test_line_of_sight_is_unit_vector():
    for bearing, elev in [(0.0, 0.3), (0.07, 1.2), (-0.5, 0.0)]:
        u = line_of_sight(bearing, elev)
        assert np.linalg.norm(u) == pytest.approx(1.0)
        assert u[2] == pytest.approx(math.sin(elev))


def test_heave_displacement_and_rate_consistent():
    heave = HeaveModel(components=((1.7952, 1.6, 0.0), (0.9, 0.2, -0.1)))
    for t in (-0.6, 0.0, 0.4):
        want = finite_difference(heave.displacement, t, 1e-6)
        assert heave.rate(t) == pytest.approx(want, rel=1e-6)


def test_heave_rejects_duplicate_or_nonpositive_frequencies():
    with pytest.raises(GeometryError):
        HeaveModel(components=((1.0, 0.1, 0.0), (1.0, 0.2, 0.0)))
    with pytest.raises(GeometryError):
        HeaveModel(components=((-2.0, 0.1, 0.0),))


def test_stationary_range_history_matches_exact_hyperbola():
    """For a broadside stationary target the polynomial model must agree with
    the exact root-sum-square range over a short aperture."""
    v = 200.0
    r0 = 18447.0
    track = PlatformTrack(
        absolute_velocity=v,
        ground_velocity=v,
        squint_angle=0.0,
        altitude=8000.0,
        initial_range_to_target=r0,
    )
    motion = TargetMotion.stationary()
    t = np.linspace(-0.6, 0.6, 41)
    exact = np.sqrt(r0**2 + (v * t) ** 2)
    model = range_history_tx(track, motion, t)
    # second-order expansion: error is O((vt/r0)^4 * r0)
    assert np.max(np.abs(model - exact)) < 1e-4


def test_radial_velocity_enters_linearly():
    track = PlatformTrack(200.0, 200.0, 0.0, 8000.0, 18447.0)
    moving = TargetMotion(v_rad_rx=3.0)
    still = TargetMotion.stationary()
    t = np.linspace(-0.5, 0.5, 11)
    diff = range_history_rx(track, moving, t) - range_history_rx(track, still, t)
    np.testing.assert_allclose(diff, 3.0 * t, atol=1e-9)


def test_heave_counts_twice_in_bistatic_range(ref_config):
    geom = ref_config.scene_geometry()
    heave = HeaveModel(components=((1.7952, 1.6, 0.0),))
    with_heave = TargetMotion(heave=heave)
    without = TargetMotion.stationary()
    t = np.linspace(-0.5, 0.5, 21)
    diff = bistatic_range_delta(geom.tx_track, geom.rx_track, with_heave, t) - (
        bistatic_range_delta(geom.tx_track, geom.rx_track, without, t)
    )
    np.testing.assert_allclose(diff, 2.0 * heave.displacement(t), atol=1e-9)


def test_bistatic_range_delta_consistent_with_absolute(ref_config):
    geom = ref_config.scene_geometry()
    motion = ref_config.target_motion()
    t = np.linspace(-0.6, 0.6, 13)
    absolute = bistatic_range(geom.tx_track, geom.rx_track, motion, t)
    r0 = geom.tx_track.initial_range_to_target + geom.rx_track.initial_range_to_target
    delta = bistatic_range_delta(geom.tx_track, geom.rx_track, motion, t)
    # absolute ranges are ~3.4e9 m so only ~1e-7 m of precision survives there
    np.testing.assert_allclose(absolute - r0, delta, atol=1e-5)


def test_doppler_history_matches_finite_difference(ref_config):
    geom = ref_config.scene_geometry()
    motion = ref_config.target_motion()
    lam = geom.wavelength
    for t in np.linspace(-0.68, 0.68, 9):
        fd = -finite_difference(
            lambda tau: bistatic_range_delta(geom.tx_track, geom.rx_track, motion, tau),
            float(t),
            1e-5,
        ) / lam
        closed = doppler_history(geom.tx_track, geom.rx_track, motion, lam, float(t))
        assert closed == pytest.approx(fd, rel=1e-7)


def test_reference_scenario_doppler_numbers(ref_config):
    """The packaged scenario's stationary centroid/rate and the moving-target
    centroid at mid-aperture, from the closed forms."""
    geom = ref_config.scene_geometry()
    lam = geom.wavelength
    c_stat = doppler_centroid_stationary(geom.tx_track, geom.rx_track, lam)
    k_stat = doppler_rate_stationary(geom.tx_track, geom.rx_track, lam)
    assert c_stat == pytest.approx(-465.7, abs=0.5)
    tx, rx = geom.tx_track, geom.rx_track
    want_rate = -(
        tx.effective_velocity**2 / tx.initial_range_to_target
        + rx.effective_velocity**2 / rx.initial_range_to_target
    ) / lam
    assert k_stat == pytest.approx(want_rate, rel=1e-12)
    assert k_stat == pytest.approx(-72.4, abs=0.5)
    motion = ref_config.target_motion()
    no_heave = TargetMotion(
        v_rad_tx=motion.v_rad_tx,
        v_al_tx=motion.v_al_tx,
        a_rad_tx=motion.a_rad_tx,
        v_rad_rx=motion.v_rad_rx,
        v_al_rx=motion.v_al_rx,
        a_rad_rx=motion.a_rad_rx,
    )
    centroid = doppler_history(geom.tx_track, geom.rx_track, no_heave, lam, 0.0)
    assert centroid == pytest.approx(-112.18, abs=0.1)


def test_moving_target_doppler_stays_unaliased(ref_config):
    geom = ref_config.scene_geometry()
    motion = ref_config.target_motion()
    t = np.linspace(-ref_config.aperture_time / 2, ref_config.aperture_time / 2, 400)
    f = doppler_history(geom.tx_track, geom.rx_track, motion, geom.wavelength, t)
    assert np.max(np.abs(f)) < ref_config.prf / 2.0


def test_from_speed_heading_projection():
    """A target moving straight at a zero-bearing platform shows pure closing
    radial velocity scaled by cos(elevation)."""
    elev = 0.45
    m = geometry.TargetMotion.from_speed_heading(
        speed=10.0,
        heading=math.pi / 2.0,  # +y, toward the zero-bearing line of sight
        acceleration=0.0,
        tx_bearing=0.0,
        tx_elevation=elev,
        rx_bearing=0.0,
        rx_elevation=elev,
    )
    assert m.v_rad_tx == pytest.approx(-10.0 * math.cos(elev))
    assert m.v_al_tx == pytest.approx(0.0, abs=1e-12)
