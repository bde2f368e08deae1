"""Order-of-magnitude counts of intricacy waves driven by an outside gas.

All inputs are SI and supplied by the caller; no physical constants are
built in.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class CensusInputs:
    n_e: float          # environment number density, 1/m^3
    v_e: float          # environment mean molecular speed, m/s
    v_prime: float      # front speed inside the box, m/s
    L: float            # box length scale, m
    lambda_mfp: float   # mean free path inside the box, m

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{f.name} must be a finite positive number, got {v!r}")


@dataclass(frozen=True)
class Census:
    rate_tau_d_inv: float   # waves created per second
    waves_in_box: float     # waves still moving through the box
    active_waves: float     # waves whose front is crossing a given point

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def wave_census(inputs: CensusInputs) -> Census:
    n, ve, vp, L, lam = (inputs.n_e, inputs.v_e, inputs.v_prime, inputs.L, inputs.lambda_mfp)
    return Census(rate_tau_d_inv=n * ve * L ** 2,
                  waves_in_box=n * (ve / vp) * L ** 3,
                  active_waves=n * L ** 2 * lam)


def report(inputs: CensusInputs, census: Census) -> list[str]:
    """Three human-readable lines."""
    return [
        f"wave creation rate 1/tau_d = {census.rate_tau_d_inv:.3e} 1/s",
        f"moving waves in the box    = {census.waves_in_box:.3e}",
        f"active waves at a point    = {census.active_waves:.3e}",
    ]
