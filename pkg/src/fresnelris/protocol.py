"""TDD frame overhead accounting for location-driven vs channel-estimation schemes.

Costs are in symbols.  The uplink pilot cost doubles as the per-unknown pilot
unit for the channel-estimation schemes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

LOCATION_DRIVEN = "location-driven"
CE_PER_ELEMENT = "ce-per-element"
CE_PARAMETRIC = "ce-parametric"
SCHEMES = (LOCATION_DRIVEN, CE_PER_ELEMENT, CE_PARAMETRIC)


class OverheadError(ValueError):
    """Overhead exceeds the frame length."""


@dataclass(frozen=True)
class FrameModel:
    scheme: str = LOCATION_DRIVEN
    frame_length: int = 10_000
    uplink_pilot_cost: int = 1
    control_cost: int = 10
    num_ris: int = 1
    elements_per_ris: int = 6400
    paths_per_ris: int = 1
    enabled_ris_fraction: float = 1.0
    # localization from uplink pilots; False when sensing needs no pilots
    location_pilots: bool = True

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.frame_length <= 0:
            raise ValueError("frame_length must be positive")
        if self.num_ris < 1:
            raise ValueError("num_ris must be at least 1")
        for name in ("uplink_pilot_cost", "control_cost", "elements_per_ris", "paths_per_ris"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not 0 < self.enabled_ris_fraction <= 1:
            raise ValueError("enabled_ris_fraction must lie in (0, 1]")

    @property
    def enabled_ris(self) -> int:
        # guard against 3 * (1/3) landing a hair above 1
        return math.ceil(round(self.num_ris * self.enabled_ris_fraction, 9))


def _raw_overhead(model: FrameModel) -> float:
    if model.scheme == LOCATION_DRIVEN:
        pilots = model.uplink_pilot_cost * model.enabled_ris if model.location_pilots else 0
        return pilots + model.control_cost
    if model.scheme == CE_PER_ELEMENT:
        unknowns = model.num_ris * model.elements_per_ris
    else:
        unknowns = model.num_ris * model.paths_per_ris
    return unknowns * model.uplink_pilot_cost + model.control_cost


def overhead_symbols(model: FrameModel) -> float:
    total = _raw_overhead(model)
    if total > model.frame_length:
        raise OverheadError(
            f"{model.scheme} overhead {total} symbols exceeds frame length {model.frame_length}")
    return total


def effective_rate(se: float, model: FrameModel) -> float:
    """Spectral efficiency scaled by the data fraction of the frame."""
    return se * (model.frame_length - overhead_symbols(model)) / model.frame_length


def crossover_elements(base: FrameModel, se_location: float, se_ce: float,
                       max_elements: int = 1_000_000) -> int | None:
    """Smallest per-RIS element count at which location-driven beats per-element CE.

    ``se_location`` and ``se_ce`` are the data-phase spectral efficiencies of
    the two schemes.  Returns ``None`` if per-element CE still wins (or its
    overhead overflows the frame first) up to ``max_elements``.
    """
    loc = effective_rate(se_location, replace(base, scheme=LOCATION_DRIVEN))
    for n in range(max_elements + 1):
        ce_model = replace(base, scheme=CE_PER_ELEMENT, elements_per_ris=n)
        if _raw_overhead(ce_model) > ce_model.frame_length:
            return n if loc > 0 else None
        if loc > effective_rate(se_ce, ce_model):
            return n
    return None


def frame_table(base: FrameModel, element_counts, se: float = 1.0):
    """Rows of (scheme, R, N, L, overhead, overhead_fraction, effective_rate)."""
    rows = []
    for n in element_counts:
        for scheme in SCHEMES:
            model = replace(base, scheme=scheme, elements_per_ris=int(n))
            try:
                ov = overhead_symbols(model)
            except OverheadError:
                # no data phase left; report the raw overhead
                ov = _raw_overhead(model)
                rate = 0.0
            else:
                rate = effective_rate(se, model)
            rows.append((scheme, model.num_ris, model.elements_per_ris, model.paths_per_ris,
                         ov, ov / model.frame_length, rate))
    return rows
