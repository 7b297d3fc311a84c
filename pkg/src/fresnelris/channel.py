"""Free-space spherical-wave channel through a passive RIS."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import GeometryError, RisGeometry, as_point, element_positions, wavelength

MIN_DISTANCE = 1e-9


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * np.log10(watts) + 30.0


@dataclass(frozen=True)
class Scenario:
    """One link: terminals (true and presumed), powers and the LoS flag.

    ``tx_presumed`` defaults to ``tx_true`` and ``rx_presumed`` to ``rx_true``.
    """

    frequency: float
    tx_true: np.ndarray
    rx_true: np.ndarray
    rx_presumed: np.ndarray | None = None
    transmit_power: float = 1.0
    noise_power: float = 1e-12
    los_blocked: bool = True
    seed: int = 0
    tx_presumed: np.ndarray | None = None

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError(f"frequency must be positive, got {self.frequency!r}")
        if not self.transmit_power >= 0:
            raise ValueError(f"transmit power must be nonnegative, got {self.transmit_power!r}")
        if not self.noise_power > 0:
            raise ValueError(f"noise power must be positive, got {self.noise_power!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        tx, rx = as_point(self.tx_true), as_point(self.rx_true)
        object.__setattr__(self, "tx_true", tx)
        object.__setattr__(self, "rx_true", rx)
        object.__setattr__(self, "rx_presumed",
                           rx if self.rx_presumed is None else as_point(self.rx_presumed))
        object.__setattr__(self, "tx_presumed",
                           tx if self.tx_presumed is None else as_point(self.tx_presumed))

    @property
    def wavelength(self) -> float:
        return wavelength(self.frequency)

    @property
    def snr_scale(self) -> float:
        return self.transmit_power / self.noise_power


@dataclass(frozen=True)
class CascadedGains:
    """Per-element cascaded gains ``c_n`` plus the direct gain (zero when blocked).

    ``total_path`` holds ``d1_n + d2_n`` and is used to pick the NLoS phase reference.
    """

    gains: np.ndarray
    direct: complex = 0j
    total_path: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return self.gains.size

    @property
    def los(self) -> bool:
        return self.direct != 0

    def reference_phase(self) -> float:
        """Phase of the direct path, or of the shortest-total-path element in NLoS."""
        if self.los:
            return float(np.angle(self.direct))
        if self.total_path is None:
            idx = int(np.argmax(np.abs(self.gains)))
        else:
            idx = int(np.argmin(self.total_path))
        return float(np.angle(self.gains[idx]))


def freespace_gain(a, b, lam: float):
    """``(lam / (4 pi d)) * exp(-2j pi d / lam)``; ``b`` may be an ``(n, 3)`` array."""
    a = as_point(a)
    d = np.linalg.norm(np.asarray(b, dtype=np.float64) - a, axis=-1)
    if np.any(d < MIN_DISTANCE):
        raise GeometryError("coincident points in free-space gain")
    return _gain_from_distance(d, lam)


def _gain_from_distance(d, lam):
    # reduce modulo one wavelength before scaling so large d keeps phase precision
    cycles = np.mod(d, lam) / lam
    g = (lam / (4 * np.pi * d)) * np.exp(-2j * np.pi * cycles)
    return complex(g) if np.ndim(g) == 0 else g


def cascaded_gains(scenario: Scenario, geom: RisGeometry, tx=None, rx=None) -> CascadedGains:
    """Cascaded tx -> element -> rx gains for isotropic, lossless elements.

    Uses the true terminal positions unless ``tx``/``rx`` are given (the
    benchmark schemes evaluate this at presumed positions).
    """
    tx = scenario.tx_true if tx is None else as_point(tx)
    rx = scenario.rx_true if rx is None else as_point(rx)
    lam = scenario.wavelength
    q = element_positions(geom)
    d1 = np.linalg.norm(q - tx, axis=-1)
    d2 = np.linalg.norm(rx - q, axis=-1)
    if np.any(d1 < MIN_DISTANCE) or np.any(d2 < MIN_DISTANCE):
        raise GeometryError("a terminal coincides with an RIS element")
    total = d1 + d2
    mag = lam ** 2 / (16 * np.pi ** 2 * d1 * d2)
    gains = mag * np.exp(-2j * np.pi * (np.mod(total, lam) / lam))
    direct = 0j if scenario.los_blocked else freespace_gain(tx, rx, lam)
    return CascadedGains(gains, complex(direct), total)


def effective_channel(gains: CascadedGains, config) -> complex:
    """``h_d + sum(beta_n * exp(1j*theta_n) * c_n)`` with ``beta_n`` the reflect mask."""
    if len(config) != len(gains):
        raise ValueError(f"configuration has {len(config)} elements, gains have {len(gains)}")
    terms = np.where(config.reflect, np.exp(1j * config.theta) * gains.gains, 0)
    return complex(gains.direct + terms.sum())


def spectral_efficiency(h_eff, transmit_power: float, noise_power: float) -> float:
    """``log2(1 + P |h|^2 / noise)`` in bits/s/Hz."""
    if not noise_power > 0:
        raise ValueError(f"noise power must be positive, got {noise_power!r}")
    if transmit_power < 0:
        raise ValueError(f"transmit power must be nonnegative, got {transmit_power!r}")
    return float(np.log2(1.0 + transmit_power * abs(h_eff) ** 2 / noise_power))
