"""Unit handling. Internally everything is SI: angular frequency in rad/s, time in s."""

import math
import re

TWO_PI = 2.0 * math.pi

_FREQ_SCALE = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_TIME_SCALE = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]+)\s*$")


def mhz(value: float) -> float:
    """Linear frequency in MHz -> angular frequency in rad/s."""
    return TWO_PI * 1e6 * value


def ghz(value: float) -> float:
    return TWO_PI * 1e9 * value


def to_mhz(omega: float) -> float:
    return omega / (TWO_PI * 1e6)


def ns(value: float) -> float:
    return value * 1e-9


def to_ns(seconds: float) -> float:
    return seconds * 1e9


def parse_frequency(text) -> float:
    """Parse a linear frequency with a mandatory unit suffix ("5 GHz", "0.6MHz") to rad/s."""
    if not isinstance(text, str):
        raise ValueError(f"frequency {text!r} needs a unit suffix (Hz, kHz, MHz, GHz)")
    match = _QUANTITY.match(text)
    if match is None or match.group(2).lower() not in _FREQ_SCALE:
        raise ValueError(f"cannot parse frequency {text!r}; expected e.g. '0.6 MHz'")
    return TWO_PI * float(match.group(1)) * _FREQ_SCALE[match.group(2).lower()]


def parse_duration(text) -> float:
    """Parse a duration; bare numbers are taken as nanoseconds."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text) * 1e-9
    match = _QUANTITY.match(str(text))
    if match is None or match.group(2).lower() not in _TIME_SCALE:
        raise ValueError(f"cannot parse duration {text!r}; expected e.g. '500 ns'")
    return float(match.group(1)) * _TIME_SCALE[match.group(2).lower()]
