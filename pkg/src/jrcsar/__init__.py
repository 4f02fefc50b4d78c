"""Joint radar-communications bistatic SAR: waveform, echo simulation, joint receiver."""

__version__ = "0.1.0"
