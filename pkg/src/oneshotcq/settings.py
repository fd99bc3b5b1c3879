"""Process-wide knobs: logarithm base and composite-dimension cap.

All entropic quantities are reported in bits unless switched to nats::

    with log_units("nats"):
        value = dh(rho, sigma, 0.1)
"""

import contextlib
import math

_state = {"base": 2.0, "dim_cap": 4096}


def log_base():
    return _state["base"]


def set_log_units(units):
    if units == "bits":
        _state["base"] = 2.0
    elif units == "nats":
        _state["base"] = math.e
    else:
        raise ValueError(f"unknown units {units!r}; expected 'bits' or 'nats'")


@contextlib.contextmanager
def log_units(units):
    old = _state["base"]
    set_log_units(units)
    try:
        yield
    finally:
        _state["base"] = old


def dim_cap():
    return _state["dim_cap"]


def set_dim_cap(cap):
    if int(cap) < 1:
        raise ValueError("dimension cap must be positive")
    _state["dim_cap"] = int(cap)


def log(x):
    """Logarithm in the configured base; log(0) is -inf."""
    if x <= 0.0:
        return -math.inf
    return math.log(x) / math.log(_state["base"])


def neg_log(x):
    return -log(x)
