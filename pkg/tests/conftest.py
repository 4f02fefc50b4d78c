"""Shared fixtures: the packaged reference scenario at several scales."""

import dataclasses

import pytest

from jrcsar.cli import default_config_path
from jrcsar.config import load_config


@pytest.fixture(scope="session")
def ref_config():
    """The packaged reference scenario configuration, full aperture."""
    return load_config(default_config_path())


@pytest.fixture(scope="session")
def small_config(ref_config):
    """Same scenario truncated to 64 pulses for fast unit tests."""
    return dataclasses.replace(ref_config, n_pulses_override=64)


@pytest.fixture(scope="session")
def waveform_params(ref_config):
    return ref_config.waveform_params()
