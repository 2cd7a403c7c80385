"""Tunable constants, read at call time so experiments can override them."""
from __future__ import annotations

import contextlib
from dataclasses import asdict, dataclass, fields


@dataclass
class Constants:
    c_cmp: float = 16
    c_probe: float = 32
    c_u: float = 8
    c_na: float = 5
    # reject-fraction threshold of the non-adaptive estimator, frozen from
    # calibrate_nonadaptive_threshold(2**16, seed=2024)
    theta_na: float = 0.3175

    def as_dict(self) -> dict:
        return asdict(self)


CONSTANTS = Constants()


@contextlib.contextmanager
def overridden(**values):
    """Temporarily replace some constants (unknown names raise ``TypeError``)."""
    names = {f.name for f in fields(Constants)}
    bad = set(values) - names
    if bad:
        raise TypeError(f"unknown constants: {sorted(bad)}")
    saved = CONSTANTS.as_dict()
    try:
        for k, v in values.items():
            if v is not None:
                setattr(CONSTANTS, k, v)
        yield CONSTANTS
    finally:
        for k, v in saved.items():
            setattr(CONSTANTS, k, v)
