"""Parametric location-error models producing presumed terminal positions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FIXED_MAGNITUDE = "fixed-magnitude"
GAUSSIAN = "gaussian"
KINDS = (FIXED_MAGNITUDE, GAUSSIAN)
AXES = "xyz"


def parse_axes(mask) -> tuple[bool, bool, bool]:
    """``"xz"`` or an iterable of booleans -> a 3-tuple of flags."""
    if isinstance(mask, str):
        unknown = set(mask) - set(AXES)
        if unknown:
            raise ValueError(f"unknown axes {sorted(unknown)} in mask {mask!r}")
        return tuple(a in mask for a in AXES)
    flags = tuple(bool(f) for f in mask)
    if len(flags) != 3:
        raise ValueError(f"axis mask needs three flags, got {mask!r}")
    return flags


@dataclass(frozen=True)
class ErrorModel:
    """Location error: fixed magnitude in a uniform random direction, or per-axis Gaussian.

    ``magnitude`` is the error norm for the fixed kind; ``sigma`` (scalar or
    per-axis) is the standard deviation for the Gaussian kind.
    """

    kind: str = FIXED_MAGNITUDE
    magnitude: float = 0.0
    sigma: float | tuple[float, float, float] = 0.0
    axes: str | tuple[bool, bool, bool] = AXES

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown error kind {self.kind!r}; expected one of {KINDS}")
        if not self.magnitude >= 0:
            raise ValueError(f"error magnitude must be nonnegative, got {self.magnitude!r}")
        sigma = np.broadcast_to(np.asarray(self.sigma, dtype=np.float64), (3,))
        if np.any(~(sigma >= 0)):
            raise ValueError(f"sigma must be nonnegative, got {self.sigma!r}")
        object.__setattr__(self, "sigma", tuple(float(s) for s in sigma))
        object.__setattr__(self, "axes", parse_axes(self.axes))

    @property
    def mask(self) -> np.ndarray:
        return np.array(self.axes, dtype=bool)


def sample_location_error(model: ErrorModel, rng: np.random.Generator) -> np.ndarray:
    mask = model.mask
    k = int(mask.sum())
    out = np.zeros(3)
    if model.kind == FIXED_MAGNITUDE:
        if model.magnitude == 0:
            return out
        if k == 0:
            raise ValueError("error magnitude is positive but the axis mask is empty")
        if k == 1:
            direction = np.array([1.0 if rng.random() < 0.5 else -1.0])
        else:
            direction = rng.standard_normal(k)
            norm = np.linalg.norm(direction)
            while norm == 0:  # pragma: no cover - probability zero
                direction = rng.standard_normal(k)
                norm = np.linalg.norm(direction)
            direction /= norm
        out[mask] = model.magnitude * direction
        return out
    out[mask] = rng.standard_normal(k) * np.asarray(model.sigma)[mask]
    return out


def presumed_position(true_position, model: ErrorModel, rng: np.random.Generator) -> np.ndarray:
    return np.asarray(true_position, dtype=np.float64) + sample_location_error(model, rng)


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the work item ``key`` under ``seed``.

    Streams are split by ``SeedSequence`` spawn keys, so a trial's draws do not
    depend on which worker runs it or in what order.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))
