"""Configuration parsing, serialization round trip and the CLI entry point."""

import math
from pathlib import Path

import pytest

from jrcsar.cli import build_parser, default_config_path, main
from jrcsar.config import (
    ConfigError,
    load_config,
    parse_config,
    parse_quantity,
    serialize_config,
    with_overrides,
)


def test_parse_quantity_prefixes_and_units():
    assert parse_quantity("100 MHz", "frequency") == pytest.approx(1e8)
    assert parse_quantity("863 Hz", "frequency") == pytest.approx(863.0)
    assert parse_quantity("10 ns", "time") == pytest.approx(1e-8)
    assert parse_quantity("36000 km", "length") == pytest.approx(3.6e7)
    assert parse_quantity("200 m/s", "speed") == pytest.approx(200.0)
    assert parse_quantity("1.0 m/s^2", "acceleration") == pytest.approx(1.0)
    assert parse_quantity("30.2 deg", "angle") == pytest.approx(math.radians(30.2))
    assert parse_quantity("20 dB", "db") == pytest.approx(20.0)
    assert parse_quantity("1.1", "plain") == pytest.approx(1.1)


def test_parse_quantity_rejects_wrong_unit():
    with pytest.raises(ConfigError):
        parse_quantity("10 m", "frequency")
    with pytest.raises(ConfigError):
        parse_quantity("garbage", "length")


def test_packaged_config_derived_values(ref_config):
    cfg = ref_config
    assert cfg.wavelength == pytest.approx(0.0299792458)
    assert cfg.chip_duration == pytest.approx(1e-8)
    assert cfg.n_pulses == 1178
    assert cfg.aperture_time == pytest.approx(273.1 / 200.0)
    geom = cfg.scene_geometry()
    assert geom.tx_track.initial_range_to_target == pytest.approx(3.4378e9, rel=1e-3)
    assert geom.rx_track.initial_range_to_target == pytest.approx(18447.7, rel=1e-3)


def test_parse_config_reports_line_numbers():
    text = Path(default_config_path()).read_text()
    broken = text.replace("carrier = 10 GHz", "carrier == 10 GHz")
    with pytest.raises(ConfigError, match=r"line \d+"):
        parse_config(broken)


def test_parse_config_rejects_unknown_key_and_section():
    text = Path(default_config_path()).read_text()
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(text + "\n[system]\nbogus = 1\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(text + "\n[nonsense]\n")


def test_parse_config_codec_rate_consistency():
    text = Path(default_config_path()).read_text()
    with pytest.raises(ConfigError):
        parse_config(text.replace("code_rate = 0.125", "code_rate = 0.5"))


def test_serialize_config_roundtrip(ref_config):
    text = serialize_config(ref_config)
    again = parse_config(text)
    assert again == ref_config
    # and serialization is a fixed point
    assert serialize_config(again) == text


def test_with_overrides(ref_config):
    cfg = with_overrides(ref_config, seed=42, snr_db=3.0)
    assert cfg.seed == 42
    assert cfg.snr_db == 3.0
    assert cfg.prf == ref_config.prf
    # sentinel default must leave snr untouched
    same = with_overrides(ref_config, seed=7)
    assert same.snr_db == ref_config.snr_db


def test_build_parser_flags():
    parser = build_parser()
    args = parser.parse_args(
        ["--config", "x.cfg", "--mode", "comm", "--seed", "9", "--out", "o",
         "--snr-list", "0", "5", "10"]
    )
    assert args.mode == "comm"
    assert args.seed == 9
    assert args.snr_list == [0.0, 5.0, 10.0]


def test_cli_comm_mode_end_to_end(tmp_path):
    out = tmp_path / "run"
    rc = main(
        ["--config", str(default_config_path()), "--mode", "comm", "--seed", "3",
         "--out", str(out), "--snr-list", "4", "6", "--comm-bits", "100000"]
    )
    assert rc == 0
    assert (out / "manifest.json").exists()
    ber = (out / "ber.csv").read_text().strip().splitlines()
    assert ber[0].startswith("ebn0_db,")
    assert len(ber) == 3


def test_cli_reports_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[system]\nbandwidth = oops\n")
    rc = main(["--config", str(bad), "--mode", "comm", "--out", str(tmp_path / "o")])
    assert rc == 2


def test_cli_missing_config_file(tmp_path):
    rc = main(["--config", str(tmp_path / "nope.cfg"), "--mode", "comm",
               "--out", str(tmp_path / "o")])
    assert rc != 0
