"""Scenario configuration: INI-style text with SI-unit suffixes.

Grammar: `[section]` headers, `key = value` lines, `#` or `;` comments, blank
lines ignored. Values may carry an SI unit with a standard prefix (`100 MHz`,
`36000 km`, `10 ns`); angles are given in `deg` or `rad` and held in radians
internally. Unknown sections or keys are rejected with their line number, as
are missing required keys.

The shipped `table123.cfg` mirrors the reference scenario: 100 MHz chip-rate
bandwidth at a 10 GHz carrier, Kasami-spread QPSK, a GEO transmitter and an
airborne receiver, and a heaving ship target (1.6 m amplitude, 3.5 s period).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace

from .echo_sim import ClutterSpec, RasterTiming, Scene, SceneGeometry
from .geometry import C_LIGHT, HeaveModel, PlatformTrack, TargetMotion
from .waveform import WaveformParams, get_codec


class ConfigError(ValueError):
    """Malformed or invalid scenario configuration."""


_PREFIX = {
    "G": 1e9, "M": 1e6, "k": 1e3,
    "m": 1e-3, "u": 1e-6, "n": 1e-9, "p": 1e-12,
}
# base units accepted per quantity kind; factor applied after SI prefix
_UNIT_KINDS = {
    "frequency": {"Hz": 1.0},
    "time": {"s": 1.0},
    "length": {"m": 1.0},
    "speed": {"m/s": 1.0},
    "acceleration": {"m/s^2": 1.0, "m/s2": 1.0},
    "angle": {"rad": 1.0, "deg": math.pi / 180.0},
    "db": {"dB": 1.0},
    "plain": {"": 1.0},
}

_NUMBER_RE = re.compile(r"^\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*(.*?)\s*$")


def parse_quantity(text: str, kind: str) -> float:
    """Parse `number [prefix]unit` into SI base units (angles into radians)."""
    units = _UNIT_KINDS[kind]
    m = _NUMBER_RE.match(text)
    if not m:
        raise ConfigError(f"cannot parse quantity {text!r}")
    value = float(m.group(1))
    unit = m.group(2)
    if unit in units:
        return value * units[unit]
    if len(unit) > 1 and unit[0] in _PREFIX and unit[1:] in units:
        return value * _PREFIX[unit[0]] * units[unit[1:]]
    if kind == "plain" or unit == "":
        if unit:
            raise ConfigError(f"unexpected unit {unit!r} on dimensionless value {text!r}")
        return value
    raise ConfigError(f"bad unit {unit!r} for {kind} quantity {text!r}")


@dataclass(frozen=True)
class PlatformConfig:
    altitude: float  # m
    speed: float  # m/s absolute
    ground_speed: float  # m/s
    elevation: float  # rad
    bearing: float  # rad (also used as the squint angle)

    @property
    def initial_range(self) -> float:
        """Slant range to the scene center: altitude / sin(elevation)."""
        if not (0 < self.elevation < math.pi / 2):
            raise ConfigError("elevation must be in (0, 90) deg")
        return self.altitude / math.sin(self.elevation)

    def track(self) -> PlatformTrack:
        return PlatformTrack(
            absolute_velocity=self.speed,
            ground_velocity=self.ground_speed,
            squint_angle=self.bearing,
            altitude=self.altitude,
            initial_range_to_target=self.initial_range,
        )


@dataclass(frozen=True)
class TargetConfig:
    speed: float  # m/s
    acceleration: float  # m/s^2, along the heading
    heading: float  # rad from the receiver's velocity direction
    reflectivity: float
    heave_amplitude: float  # m (cosine amplitude p; q = 0)
    heave_period: float  # s

    def heave(self) -> HeaveModel:
        if self.heave_amplitude == 0.0:
            return HeaveModel()
        omega = 2.0 * math.pi / self.heave_period
        return HeaveModel(components=((omega, self.heave_amplitude, 0.0),))


@dataclass(frozen=True)
class ScenarioConfig:
    # system block
    bandwidth: float
    carrier: float
    modulation: str
    spreading: str
    spreading_degree: int
    code_index: int
    codec: str
    code_rate: float
    prf: float
    aperture_length: float
    symbols_per_pulse: int
    # platforms and target
    transmitter: PlatformConfig
    receiver: PlatformConfig
    target: TargetConfig
    # interference block
    clutter_model: str
    clutter_shape: float
    clutter_to_signal_db: float | None
    snr_db: float | None
    # run block
    seed: int
    output: str
    n_pulses_override: int | None
    fast_window: int
    fast_origin_samples: float
    ship_stencil: str
    ship_spacing_x: float
    ship_spacing_y: float

    def __post_init__(self):
        if self.modulation.lower() != "qpsk":
            raise ConfigError(f"unsupported modulation {self.modulation!r}")
        if self.spreading.lower() != "kasami":
            raise ConfigError(f"unsupported spreading family {self.spreading!r}")
        for name in ("bandwidth", "carrier", "prf", "aperture_length"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"system.{name} must be > 0")
        rate = get_codec(self.codec).rate
        if abs(rate - self.code_rate) > 1e-9:
            raise ConfigError(
                f"system.code_rate {self.code_rate} disagrees with codec "
                f"{self.codec!r} (rate {rate})"
            )

    # -- derived pieces -----------------------------------------------------

    @property
    def chip_duration(self) -> float:
        return 1.0 / self.bandwidth

    @property
    def wavelength(self) -> float:
        return C_LIGHT / self.carrier

    @property
    def aperture_time(self) -> float:
        return self.aperture_length / self.receiver.speed

    @property
    def n_pulses(self) -> int:
        if self.n_pulses_override is not None:
            return self.n_pulses_override
        return int(round(self.prf * self.aperture_time))

    def waveform_params(self) -> WaveformParams:
        return WaveformParams(
            degree=self.spreading_degree,
            code_index=self.code_index,
            chip_duration=self.chip_duration,
            symbols_per_pulse=self.symbols_per_pulse,
            codec_name=self.codec,
            carrier_frequency=self.carrier,
        )

    def target_motion(self) -> TargetMotion:
        return TargetMotion.from_speed_heading(
            speed=self.target.speed,
            heading=self.target.heading,
            acceleration=self.target.acceleration,
            tx_bearing=self.transmitter.bearing,
            tx_elevation=self.transmitter.elevation,
            rx_bearing=self.receiver.bearing,
            rx_elevation=self.receiver.elevation,
            heave=self.target.heave(),
            reflectivity_amplitude=self.target.reflectivity,
        )

    def scene_geometry(self) -> SceneGeometry:
        return SceneGeometry(
            tx_track=self.transmitter.track(),
            rx_track=self.receiver.track(),
            tx_bearing=self.transmitter.bearing,
            tx_elevation=self.transmitter.elevation,
            rx_bearing=self.receiver.bearing,
            rx_elevation=self.receiver.elevation,
            wavelength=self.wavelength,
        )

    def raster_timing(self) -> RasterTiming:
        fs = 1.0 / self.chip_duration
        return RasterTiming(
            prf=self.prf,
            n_pulses=self.n_pulses,
            sample_rate=fs,
            n_fast=self.fast_window,
            fast_time_origin=-self.fast_origin_samples / fs,
        )

    def clutter_spec(self, seed: int | None = None, snr_db=...) -> ClutterSpec:
        return ClutterSpec(
            model=self.clutter_model,
            shape=self.clutter_shape,
            clutter_to_signal_db=self.clutter_to_signal_db,
            snr_db=self.snr_db if snr_db is ... else snr_db,
            seed=self.seed if seed is None else seed,
        )

    def ship_scene(self) -> Scene:
        rows = [r for r in self.ship_stencil.split(";") if r.strip()]
        return Scene.ship_matrix(
            rows,
            self.ship_spacing_x,
            self.ship_spacing_y,
            self.target_motion(),
            reflectivity=self.target.reflectivity,
        )


# ---------------------------------------------------------------------------
# Schema-driven parsing
# ---------------------------------------------------------------------------

# (kind, required, default); kind "int"/"str" handled specially
_SCHEMA = {
    "system": {
        "bandwidth": ("frequency", True, None),
        "carrier": ("frequency", True, None),
        "modulation": ("str", False, "qpsk"),
        "spreading": ("str", False, "kasami"),
        "spreading_degree": ("int", False, 6),
        "code_index": ("int", False, 0),
        "codec": ("str", False, "repetition8"),
        "code_rate": ("plain", False, 0.125),
        "prf": ("frequency", True, None),
        "aperture_length": ("length", True, None),
        "symbols_per_pulse": ("int", False, 33),
    },
    "transmitter": {
        "altitude": ("length", True, None),
        "speed": ("speed", True, None),
        "ground_speed": ("speed", False, None),  # defaults to speed
        "elevation": ("angle", True, None),
        "bearing": ("angle", False, 0.0),
    },
    "receiver": {
        "altitude": ("length", True, None),
        "speed": ("speed", True, None),
        "ground_speed": ("speed", False, None),
        "elevation": ("angle", True, None),
        "bearing": ("angle", False, 0.0),
    },
    "target": {
        "speed": ("speed", False, 0.0),
        "acceleration": ("acceleration", False, 0.0),
        "heading": ("angle", False, 0.0),
        "reflectivity": ("plain", False, 1.0),
        "heave_amplitude": ("length", False, 0.0),
        "heave_period": ("time", False, 3.5),
    },
    "interference": {
        "model": ("str", False, "none"),
        "shape": ("plain", False, 1.5),
        "clutter_to_signal": ("db?", False, None),
        "snr": ("db?", False, None),
    },
    "run": {
        "seed": ("int", False, 0),
        "output": ("str", False, "out"),
        "n_pulses": ("int?", False, None),
        "fast_window": ("int", False, 2176),
        "fast_origin_samples": ("plain", False, 32.0),
        "ship_stencil": ("str", False, "0110;1111;1111;0110"),
        "ship_spacing_x": ("length", False, 8.0),
        "ship_spacing_y": ("length", False, 8.0),
    },
}


def _coerce(kind: str, raw: str, where: str):
    try:
        if kind == "str":
            return raw
        if kind == "int" or kind == "int?":
            if not re.fullmatch(r"[-+]?[0-9]+", raw):
                raise ConfigError(f"expected an integer, got {raw!r}")
            return int(raw)
        if kind == "db?":
            return None if raw.lower() == "none" else parse_quantity(raw, "db")
        return parse_quantity(raw, kind)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate scenario text; raises ConfigError with line info."""
    values: dict = {s: {} for s in _SCHEMA}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        # a stencil value legitimately contains ';', so trailing '#' comments
        # are stripped per value, not per line
        stripped = raw.strip()
        if not stripped or stripped.startswith(("#", ";")):
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError(f"line {lineno}: unterminated section header {stripped!r}")
            section = stripped[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in stripped:
            col = len(raw) - len(raw.lstrip()) + 1
            raise ConfigError(f"line {lineno}, column {col}: expected `key = value`, got {stripped!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, _, val = stripped.partition("=")
        key = key.strip()
        val = val.strip()
        if key != "ship_stencil":
            val = val.split("#", 1)[0].strip()
        if key not in _SCHEMA[section]:
            col = raw.index(key) + 1
            raise ConfigError(f"line {lineno}, column {col}: unknown key {section}.{key}")
        kind = _SCHEMA[section][key][0]
        values[section][key] = _coerce(kind, val, f"line {lineno}, key {section}.{key}")

    for sec, keys in _SCHEMA.items():
        for key, (kind, required, default) in keys.items():
            if key not in values[sec]:
                if required:
                    raise ConfigError(f"missing required key {sec}.{key}")
                values[sec][key] = default

    def platform(sec: str) -> PlatformConfig:
        v = values[sec]
        ground = v["ground_speed"] if v["ground_speed"] is not None else v["speed"]
        return PlatformConfig(
            altitude=v["altitude"],
            speed=v["speed"],
            ground_speed=ground,
            elevation=v["elevation"],
            bearing=v["bearing"],
        )

    s, t, i, r = values["system"], values["target"], values["interference"], values["run"]
    return ScenarioConfig(
        bandwidth=s["bandwidth"],
        carrier=s["carrier"],
        modulation=s["modulation"],
        spreading=s["spreading"],
        spreading_degree=s["spreading_degree"],
        code_index=s["code_index"],
        codec=s["codec"],
        code_rate=s["code_rate"],
        prf=s["prf"],
        aperture_length=s["aperture_length"],
        symbols_per_pulse=s["symbols_per_pulse"],
        transmitter=platform("transmitter"),
        receiver=platform("receiver"),
        target=TargetConfig(
            speed=t["speed"],
            acceleration=t["acceleration"],
            heading=t["heading"],
            reflectivity=t["reflectivity"],
            heave_amplitude=t["heave_amplitude"],
            heave_period=t["heave_period"],
        ),
        clutter_model=i["model"],
        clutter_shape=i["shape"],
        clutter_to_signal_db=i["clutter_to_signal"],
        snr_db=i["snr"],
        seed=r["seed"],
        output=r["output"],
        n_pulses_override=r["n_pulses"],
        fast_window=r["fast_window"],
        fast_origin_samples=r["fast_origin_samples"],
        ship_stencil=r["ship_stencil"],
        ship_spacing_x=r["ship_spacing_x"],
        ship_spacing_y=r["ship_spacing_y"],
    )


def load_config(path) -> ScenarioConfig:
    with open(path) as f:
        return parse_config(f.read())


def serialize_config(cfg: ScenarioConfig) -> str:
    """Plain-SI-unit rendering; parse(serialize(cfg)) == cfg."""
    def q(x):  # bare SI magnitude
        return f"{x!r}"

    lines = [
        "[system]",
        f"bandwidth = {q(cfg.bandwidth)} Hz",
        f"carrier = {q(cfg.carrier)} Hz",
        f"modulation = {cfg.modulation}",
        f"spreading = {cfg.spreading}",
        f"spreading_degree = {cfg.spreading_degree}",
        f"code_index = {cfg.code_index}",
        f"codec = {cfg.codec}",
        f"code_rate = {q(cfg.code_rate)}",
        f"prf = {q(cfg.prf)} Hz",
        f"aperture_length = {q(cfg.aperture_length)} m",
        f"symbols_per_pulse = {cfg.symbols_per_pulse}",
        "",
    ]
    for name, p in (("transmitter", cfg.transmitter), ("receiver", cfg.receiver)):
        lines += [
            f"[{name}]",
            f"altitude = {q(p.altitude)} m",
            f"speed = {q(p.speed)} m/s",
            f"ground_speed = {q(p.ground_speed)} m/s",
            f"elevation = {q(p.elevation)} rad",
            f"bearing = {q(p.bearing)} rad",
            "",
        ]
    t = cfg.target
    lines += [
        "[target]",
        f"speed = {q(t.speed)} m/s",
        f"acceleration = {q(t.acceleration)} m/s^2",
        f"heading = {q(t.heading)} rad",
        f"reflectivity = {q(t.reflectivity)}",
        f"heave_amplitude = {q(t.heave_amplitude)} m",
        f"heave_period = {q(t.heave_period)} s",
        "",
        "[interference]",
        f"model = {cfg.clutter_model}",
        f"shape = {q(cfg.clutter_shape)}",
        f"clutter_to_signal = {'none' if cfg.clutter_to_signal_db is None else q(cfg.clutter_to_signal_db) + ' dB'}",
        f"snr = {'none' if cfg.snr_db is None else q(cfg.snr_db) + ' dB'}",
        "",
        "[run]",
        f"seed = {cfg.seed}",
        f"output = {cfg.output}",
    ]
    if cfg.n_pulses_override is not None:
        lines.append(f"n_pulses = {cfg.n_pulses_override}")
    lines += [
        f"fast_window = {cfg.fast_window}",
        f"fast_origin_samples = {q(cfg.fast_origin_samples)}",
        f"ship_stencil = {cfg.ship_stencil}",
        f"ship_spacing_x = {q(cfg.ship_spacing_x)} m",
        f"ship_spacing_y = {q(cfg.ship_spacing_y)} m",
        "",
    ]
    return "\n".join(lines)


def with_overrides(cfg: ScenarioConfig, *, seed=None, output=None, snr_db=...):
    changes = {}
    if seed is not None:
        changes["seed"] = seed
    if output is not None:
        changes["output"] = output
    if snr_db is not ...:
        changes["snr_db"] = snr_db
    return replace(cfg, **changes) if changes else cfg
