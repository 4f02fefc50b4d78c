"""Bistatic SAR kinematics: range histories, bistatic range and Doppler history.

Quadratic flat-earth model over a short aperture (~1.4 s): each leg's range
history is R0 + heave + linear*t + quadratic*t^2. The transmitter is a GEO
satellite, the receiver an airplane; platform tracks are constant-velocity.

Convention notes
----------------
* Doppler is reported in Hz with the conventional -(1/lambda) scaling of the
  bistatic range rate. The derivative is taken in closed form so it is exactly
  consistent with the range polynomials.
* The ship's heave displacement enters BOTH legs additively, so the bistatic
  range carries 2*delta(t).
* Target (speed, heading) are resolved onto each platform's line of sight via
  a standard projection: the line-of-sight unit vector from the target toward
  a platform with bearing beta and elevation eps is
  (sin(beta)*cos(eps), cos(beta)*cos(eps), sin(eps)) in scene coordinates with
  x along the platform tracks and y the horizontal ground-range direction.
  A target moving toward a platform has negative radial velocity-to-range
  contribution, i.e. v_rad = -v . u_los.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

C_LIGHT = 299792458.0


class GeometryError(ValueError):
    """Invalid kinematic input."""


def effective_velocity(absolute: float, ground: float) -> float:
    """Effective platform velocity sqrt(V_abs * V_ground) for the flat-earth model."""
    if absolute <= 0 or ground <= 0:
        raise GeometryError(
            f"velocities must be positive, got absolute={absolute}, ground={ground}"
        )
    return math.sqrt(absolute * ground)


@dataclass(frozen=True)
class PlatformTrack:
    """Constant-velocity platform with squint geometry toward the scene center."""

    absolute_velocity: float
    ground_velocity: float
    squint_angle: float  # rad
    altitude: float  # m
    initial_range_to_target: float  # m

    def __post_init__(self):
        if self.initial_range_to_target <= 0:
            raise GeometryError("initial_range_to_target must be > 0")
        if self.altitude < 0:
            raise GeometryError("altitude must be >= 0")
        # triggers the positivity check
        effective_velocity(self.absolute_velocity, self.ground_velocity)

    @property
    def effective_velocity(self) -> float:
        return effective_velocity(self.absolute_velocity, self.ground_velocity)


@dataclass(frozen=True)
class HeaveModel:
    """Vertical ship displacement as a superposition of harmonic terms.

    components: sequence of (omega [rad/s], p [m], q [m]) triples giving
    delta(t) = sum_k p_k*cos(omega_k*t) + q_k*sin(omega_k*t).
    An empty component list means delta(t) == 0.
    """

    components: tuple = ()

    def __post_init__(self):
        comps = tuple(tuple(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        omegas = [c[0] for c in comps]
        if any(w <= 0 for w in omegas):
            raise GeometryError("heave frequencies must be > 0")
        if len(set(omegas)) != len(omegas):
            raise GeometryError("heave frequencies must be distinct")

    def displacement(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for omega, p, q in self.components:
            out = out + p * np.cos(omega * t) + q * np.sin(omega * t)
        return out if out.ndim else float(out)

    def rate(self, t):
        """d/dt of displacement."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for omega, p, q in self.components:
            out = out + omega * (q * np.cos(omega * t) - p * np.sin(omega * t))
        return out if out.ndim else float(out)


def heave_displacement(heave: HeaveModel, t):
    return heave.displacement(t)


def line_of_sight(bearing: float, elevation: float) -> np.ndarray:
    """Unit vector from the target toward a platform (x along-track, y ground range, z up)."""
    return np.array(
        [
            math.sin(bearing) * math.cos(elevation),
            math.cos(bearing) * math.cos(elevation),
            math.sin(elevation),
        ]
    )


@dataclass(frozen=True)
class TargetMotion:
    """Horizontal ship motion components per platform plus the harmonic heave model."""

    v_rad_tx: float = 0.0
    v_al_tx: float = 0.0
    a_rad_tx: float = 0.0
    v_rad_rx: float = 0.0
    v_al_rx: float = 0.0
    a_rad_rx: float = 0.0
    heave: HeaveModel = field(default_factory=HeaveModel)
    reflectivity_amplitude: float = 1.0
    speed: float | None = None  # m/s, relative to receiver velocity direction
    heading: float | None = None  # rad

    @classmethod
    def stationary(cls, reflectivity_amplitude: float = 1.0) -> "TargetMotion":
        return cls(reflectivity_amplitude=reflectivity_amplitude)

    @classmethod
    def from_speed_heading(
        cls,
        speed: float,
        heading: float,
        acceleration: float,
        tx_bearing: float,
        tx_elevation: float,
        rx_bearing: float,
        rx_elevation: float,
        heave: HeaveModel = HeaveModel(),
        reflectivity_amplitude: float = 1.0,
    ) -> "TargetMotion":
        """Resolve (speed, heading) and a same-heading acceleration onto both lines of sight."""
        v = speed * np.array([math.cos(heading), math.sin(heading), 0.0])
        a = acceleration * np.array([math.cos(heading), math.sin(heading), 0.0])
        u_tx = line_of_sight(tx_bearing, tx_elevation)
        u_rx = line_of_sight(rx_bearing, rx_elevation)
        return cls(
            v_rad_tx=-float(v @ u_tx),
            v_al_tx=float(v[0]),
            a_rad_tx=-float(a @ u_tx),
            v_rad_rx=-float(v @ u_rx),
            v_al_rx=float(v[0]),
            a_rad_rx=-float(a @ u_rx),
            heave=heave,
            reflectivity_amplitude=reflectivity_amplitude,
            speed=speed,
            heading=heading,
        )


@dataclass(frozen=True)
class NormalizedMotion:
    """Dimensionless motion parameters of the expanded azimuth phase model."""

    mu_tx: float
    mu_rx: float
    nu_tx: float
    nu_rx: float
    eta_tx: float
    eta_rx: float

    @classmethod
    def from_components(
        cls, tx: PlatformTrack, rx: PlatformTrack, motion: TargetMotion
    ) -> "NormalizedMotion":
        return cls(
            mu_tx=motion.v_rad_tx / tx.absolute_velocity,
            mu_rx=motion.v_rad_rx / rx.absolute_velocity,
            nu_tx=motion.v_al_tx / tx.absolute_velocity,
            nu_rx=motion.v_al_rx / rx.absolute_velocity,
            eta_tx=tx.initial_range_to_target * motion.a_rad_tx / tx.absolute_velocity**2,
            eta_rx=rx.initial_range_to_target * motion.a_rad_rx / rx.absolute_velocity**2,
        )


def range_coefficients_tx(track: PlatformTrack, motion: TargetMotion) -> tuple[float, float]:
    """(linear, quadratic) coefficients of the transmitter-leg range polynomial."""
    linear = track.absolute_velocity * track.squint_angle + motion.v_rad_tx
    quadratic = 0.5 * (
        track.effective_velocity**2 / track.initial_range_to_target
        - 2.0 * track.absolute_velocity * motion.v_al_tx / track.initial_range_to_target
        + motion.a_rad_tx
    )
    return linear, quadratic


def range_coefficients_rx(track: PlatformTrack, motion: TargetMotion) -> tuple[float, float]:
    """(linear, quadratic) coefficients of the receiver-leg range polynomial."""
    linear = track.absolute_velocity * track.squint_angle + motion.v_rad_rx
    quadratic = 0.5 * (
        track.effective_velocity**2 / track.initial_range_to_target
        - 2.0 * track.absolute_velocity * motion.v_al_rx / track.initial_range_to_target
        + motion.a_rad_rx
    )
    return linear, quadratic


def range_history_tx(track: PlatformTrack, motion: TargetMotion, t):
    """Transmitter-leg slant range at slow time t."""
    b, cc = range_coefficients_tx(track, motion)
    t = np.asarray(t, dtype=float)
    r = track.initial_range_to_target + motion.heave.displacement(t) + b * t + cc * t * t
    return r if np.ndim(r) else float(r)


def range_history_rx(track: PlatformTrack, motion: TargetMotion, t):
    """Receiver-leg slant range at slow time t."""
    b, cc = range_coefficients_rx(track, motion)
    t = np.asarray(t, dtype=float)
    r = track.initial_range_to_target + motion.heave.displacement(t) + b * t + cc * t * t
    return r if np.ndim(r) else float(r)


def bistatic_range(tx: PlatformTrack, rx: PlatformTrack, motion: TargetMotion, t):
    """Bistatic range: sum of the transmitter and receiver leg histories."""
    return range_history_tx(tx, motion, t) + range_history_rx(rx, motion, t)


def bistatic_range_delta(tx: PlatformTrack, rx: PlatformTrack, motion: TargetMotion, t):
    """Bistatic range minus the constant R_T0 + R_R0.

    Computed without forming the (possibly enormous) absolute ranges, so it
    keeps full double precision for phase synthesis.
    """
    bt, ct = range_coefficients_tx(tx, motion)
    br, cr = range_coefficients_rx(rx, motion)
    t = np.asarray(t, dtype=float)
    d = 2.0 * motion.heave.displacement(t) + (bt + br) * t + (ct + cr) * t * t
    return d if np.ndim(d) else float(d)


def doppler_history(
    tx: PlatformTrack, rx: PlatformTrack, motion: TargetMotion, wavelength: float, t
):
    """Bistatic Doppler history in Hz: -(1/lambda) d/dt of the bistatic range.

    Closed form, exactly consistent with the range polynomials: the linear and
    quadratic range terms contribute a constant plus a linear Doppler ramp, and
    the heave contributes 2*delta'(t) through both legs.
    """
    if wavelength <= 0:
        raise GeometryError("wavelength must be > 0")
    bt, ct = range_coefficients_tx(tx, motion)
    br, cr = range_coefficients_rx(rx, motion)
    t = np.asarray(t, dtype=float)
    rate = 2.0 * motion.heave.rate(t) + (bt + br) + 2.0 * (ct + cr) * t
    f = -rate / wavelength
    return f if np.ndim(f) else float(f)


def doppler_centroid_stationary(tx: PlatformTrack, rx: PlatformTrack, wavelength: float) -> float:
    """Doppler centroid of a stationary scene-center target (squint contribution only)."""
    return -(
        tx.absolute_velocity * tx.squint_angle + rx.absolute_velocity * rx.squint_angle
    ) / wavelength


def doppler_rate_stationary(tx: PlatformTrack, rx: PlatformTrack, wavelength: float) -> float:
    """Doppler rate of a stationary scene-center target in Hz/s."""
    return -(
        tx.effective_velocity**2 / tx.initial_range_to_target
        + rx.effective_velocity**2 / rx.initial_range_to_target
    ) / wavelength
