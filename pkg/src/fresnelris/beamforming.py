"""RIS configuration schemes.

The location-driven scheme (:func:`tposj_configure`) needs only the Fresnel
map computed from presumed positions.  The remaining schemes work from
per-element channel gains and serve as baselines or ground truth.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import CascadedGains
from .geometry import FresnelMap

ZONE_PARITY = "zone-parity"
NEAREST_PHASE = "nearest-phase"
RULES = (ZONE_PARITY, NEAREST_PHASE)

MAX_EXHAUSTIVE = 20
# angular slack for the pi/2 tie in nearest-phase quantization
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class RisConfiguration:
    """Per-element reflect/absorb mode and phase shift (radians)."""

    reflect: np.ndarray
    theta: np.ndarray
    one_bit: bool = True

    def __post_init__(self):
        reflect = np.asarray(self.reflect, dtype=bool)
        theta = np.asarray(self.theta, dtype=np.float64)
        if reflect.shape != theta.shape or reflect.ndim != 1:
            raise ValueError("reflect and theta must be 1-D arrays of equal length")
        if self.one_bit and not np.all((theta == 0.0) | (theta == np.pi)):
            raise ValueError("one-bit configuration phases must be exactly 0 or pi")
        object.__setattr__(self, "reflect", reflect)
        object.__setattr__(self, "theta", theta)

    def __len__(self):
        return self.theta.size

    @property
    def bits(self) -> np.ndarray:
        return (self.theta == np.pi).astype(np.int8)

    @property
    def reflect_count(self) -> int:
        return int(self.reflect.sum())

    @classmethod
    def from_bits(cls, bits) -> "RisConfiguration":
        bits = np.asarray(bits, dtype=bool)
        return cls(np.ones(bits.size, dtype=bool), np.where(bits, np.pi, 0.0))


@dataclass(frozen=True)
class TposjParams:
    """Robustness threshold ``xi`` (meters) and the phase bucketing rule."""

    xi: float
    rule: str = ZONE_PARITY

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown bucketing rule {self.rule!r}; expected one of {RULES}")
        if not (np.isfinite(self.xi) and self.xi >= 0):
            raise ValueError(f"xi must be a nonnegative length, got {self.xi!r}")

    @classmethod
    def in_wavelengths(cls, xi_wl: float, lam: float, rule: str = ZONE_PARITY) -> "TposjParams":
        return cls(xi_wl * lam, rule)


def _parity_phase(zone: np.ndarray) -> np.ndarray:
    return np.where(zone % 2 == 1, 0.0, np.pi)


def zone_parity_phases(fmap: FresnelMap) -> np.ndarray:
    """0 on odd Fresnel zones, pi on even ones."""
    return _parity_phase(fmap.zone)


def _nearest_phase_buckets(fmap: FresnelMap):
    """Zones shifted by a quarter wave, so flips sit where the bounce is in quadrature
    with the direct path.  Returns ``(phases, residual measured from the flip loci)``."""
    shifted = FresnelMap.from_excess(fmap.excess + fmap.wavelength / 4,
                                     fmap.wavelength, fmap.los_distance)
    return _parity_phase(shifted.zone), shifted.residual


def nearest_phase_bits(gains: CascadedGains) -> np.ndarray:
    """Quantize each element to the bit that points ``c_n`` closest to the reference.

    The reference is the direct-path phase, or in NLoS the phase of the
    shortest-total-path element.  An exact quadrature tie keeps ``theta = 0``.
    """
    ref = gains.reference_phase()
    offset = np.angle(gains.gains * np.exp(-1j * ref))
    return np.where(np.abs(offset) > np.pi / 2 + TIE_TOLERANCE, np.pi, 0.0)


def tposj_configure(fmap: FresnelMap, params: TposjParams) -> RisConfiguration:
    """Two-step position-aided on/off judgement.

    Step one picks each element's bit from the Fresnel map.  Step two absorbs
    the "indistinct" elements whose residual sits within ``(lam/2 - xi)/2`` of
    a bit-flip locus; equivalently an element reflects iff
    ``|rho - lam/4| <= xi/2``.  ``xi = lam/2`` reflects everything and
    ``xi = 0`` absorbs everything but exact zone centers.
    """
    lam = fmap.wavelength
    if params.xi > lam / 2 * (1 + 1e-12):
        raise ValueError(f"xi = {params.xi!r} m exceeds half a wavelength ({lam / 2!r} m)")
    if params.rule == ZONE_PARITY:
        theta, rho = zone_parity_phases(fmap), fmap.residual
    else:
        theta, rho = _nearest_phase_buckets(fmap)
    reflect = np.abs(rho - lam / 4) <= params.xi / 2
    return RisConfiguration(reflect, theta)


def continuous_conjugate(gains: CascadedGains) -> RisConfiguration:
    """Ideal continuous phases co-phasing every element with the reference."""
    ref = gains.reference_phase()
    theta = np.mod(ref - np.angle(gains.gains), 2 * np.pi)
    return RisConfiguration(np.ones(len(gains), dtype=bool), theta, one_bit=False)


def nearest_phase_configuration(gains: CascadedGains) -> RisConfiguration:
    theta = nearest_phase_bits(gains)
    return RisConfiguration(np.ones(theta.size, dtype=bool), theta)


def random_configuration(n: int, rng: np.random.Generator) -> RisConfiguration:
    if n < 1:
        raise ValueError(f"element count must be positive, got {n}")
    bits = rng.integers(0, 2, size=n)
    return RisConfiguration(np.ones(n, dtype=bool), np.where(bits == 1, np.pi, 0.0))


def _require_onebit_all_reflect(config: RisConfiguration):
    if not config.one_bit or not np.all(config.reflect):
        raise ValueError("search requires a one-bit, all-reflect configuration")


@dataclass
class GreedyTrace:
    config: RisConfiguration
    objective: list[float]
    flip_tests: int
    sweeps: int
    converged: bool


def greedy_trace(gains: CascadedGains, init: RisConfiguration, max_sweeps: int = 100) -> GreedyTrace:
    """Coordinate ascent on ``|h_eff|^2`` with the full bookkeeping.

    Each test costs O(1): flipping element ``n`` moves the running sum by
    ``-2 * exp(1j*theta_n) * c_n``.  ``objective`` records the value after
    every accepted flip, starting from the initial value.
    """
    _require_onebit_all_reflect(init)
    if len(init) != len(gains):
        raise ValueError("initial configuration length does not match gains")
    c = gains.gains
    sign = np.where(init.theta == np.pi, -1.0, 1.0)
    total = complex(gains.direct + np.sum(sign * c))
    best = abs(total) ** 2
    trace = [best]
    tests = 0
    sweeps = 0
    converged = False
    # plain Python scalars are much faster than numpy scalars in this loop
    cl = c.tolist()
    sl = sign.tolist()
    while sweeps < max_sweeps:
        sweeps += 1
        flipped = False
        for n, cn in enumerate(cl):
            tests += 1
            cand = total - 2 * sl[n] * cn
            val = cand.real * cand.real + cand.imag * cand.imag
            if val > best * (1 + 1e-15):
                total, best = cand, val
                sl[n] = -sl[n]
                trace.append(best)
                flipped = True
        if not flipped:
            converged = True
            break
    theta = np.where(np.array(sl) < 0, np.pi, 0.0)
    config = RisConfiguration(np.ones(theta.size, dtype=bool), theta)
    return GreedyTrace(config, trace, tests, sweeps, converged)


def greedy_onebit_search(gains: CascadedGains, init: RisConfiguration | None = None,
                         max_sweeps: int = 100) -> RisConfiguration:
    """Single-flip local search; warm-started from :func:`nearest_phase_bits` by default."""
    if init is None:
        init = nearest_phase_configuration(gains)
    return greedy_trace(gains, init, max_sweeps).config


def gray_code_objectives(gains: CascadedGains):
    """Enumerate every bit pattern in Gray-code order with incremental updates.

    Returns ``(patterns, objectives)`` where ``patterns[k]`` is the integer
    whose bit ``i`` is element ``i``'s bit, and ``objectives[k] = |h_eff|^2``.
    """
    n = len(gains)
    if n > MAX_EXHAUSTIVE:
        raise ValueError(f"exhaustive search limited to {MAX_EXHAUSTIVE} elements, got {n}")
    cl = gains.gains.tolist()
    total = complex(gains.direct + sum(cl))
    sign = [1.0] * n
    count = 1 << n
    patterns = np.empty(count, dtype=np.int64)
    values = np.empty(count)
    pattern = 0
    patterns[0] = 0
    values[0] = abs(total) ** 2
    for k in range(1, count):
        bit = (k & -k).bit_length() - 1
        total -= 2 * sign[bit] * cl[bit]
        sign[bit] = -sign[bit]
        pattern ^= 1 << bit
        patterns[k] = pattern
        values[k] = total.real * total.real + total.imag * total.imag
    return patterns, values


def _lexicographic_key(pattern: int, n: int) -> int:
    # element 0 becomes the most significant bit
    return int(format(pattern, f"0{n}b")[::-1], 2) if n else 0


def exhaustive_onebit(gains: CascadedGains, rel_tol: float = 1e-12) -> RisConfiguration:
    """Global optimum over all ``2**n`` one-bit patterns (``n <= 20``).

    Values within ``rel_tol`` of the best count as ties; among ties the
    lexicographically smallest pattern ``(bit_0, bit_1, ...)`` wins.
    """
    n = len(gains)
    patterns, values = gray_code_objectives(gains)
    best = values.max()
    tied = patterns[values >= best * (1 - rel_tol)]
    winner = min(tied.tolist(), key=lambda p: _lexicographic_key(p, n))
    bits = [(winner >> i) & 1 for i in range(n)]
    return RisConfiguration.from_bits(bits)
