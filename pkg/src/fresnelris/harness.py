"""Seeded Monte-Carlo sweeps and complexity measurements.

Every trial draws from its own generator derived from ``(seed, error index,
trial index, stream)``; results are assembled in index order, so output does
not depend on the number of workers.
"""
from __future__ import annotations

import math
import statistics
import timeit
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .beamforming import (
    MAX_EXHAUSTIVE,
    ZONE_PARITY,
    RisConfiguration,
    TposjParams,
    continuous_conjugate,
    exhaustive_onebit,
    greedy_trace,
    gray_code_objectives,
    nearest_phase_configuration,
    random_configuration,
    tposj_configure,
)
from .channel import Scenario, cascaded_gains, effective_channel, spectral_efficiency
from .geometry import PlaneFrame, RisGeometry, build_fresnel_map
from .localization import FIXED_MAGNITUDE, ErrorModel, sample_location_error, trial_rng

TPOSJ = "tposj"
BENCHMARK_ONEBIT = "benchmark-onebit"
BENCHMARK_CONTINUOUS = "benchmark-continuous"
RANDOM = "random"
GREEDY = "greedy"
EXHAUSTIVE = "exhaustive"
SWEEP_SCHEMES = (TPOSJ, BENCHMARK_ONEBIT, BENCHMARK_CONTINUOUS, RANDOM, GREEDY, EXHAUSTIVE)

DEFAULT_ERROR_GRID = (0.0, 0.125, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0)
DEFAULT_XI = (0.1, 0.25, 0.5)

# distance pair, zone bucketing, band test per element
TPOSJ_OPS_PER_ELEMENT = 4
SDR = "sdr"
MJCE = "mjce"


def default_scenario(**overrides) -> Scenario:
    """28 GHz, tx (0, 12, 0), rx (5, 0, 0), 30 dBm transmit, -90 dBm noise, NLoS."""
    kw = dict(frequency=28e9, tx_true=(0.0, 12.0, 0.0), rx_true=(5.0, 0.0, 0.0),
              transmit_power=1.0, noise_power=1e-12, los_blocked=True, seed=0)
    kw.update(overrides)
    return Scenario(**kw)


def default_geometry(scenario: Scenario, nx: int = 80, ny: int = 80,
                   spacing_wavelengths: float = 0.5, center=(0.0, 0.0, 0.0)) -> RisGeometry:
    frame = PlaneFrame.bisector(center, scenario.tx_true, scenario.rx_true)
    return RisGeometry(frame, nx, ny, spacing_wavelengths * scenario.wavelength)


@dataclass(frozen=True)
class SweepSpec:
    scenario: Scenario
    geometry: RisGeometry
    schemes: tuple[str, ...] = (TPOSJ, BENCHMARK_ONEBIT, BENCHMARK_CONTINUOUS, RANDOM)
    xi_wavelengths: tuple[float, ...] = DEFAULT_XI
    # meters; defaults to DEFAULT_ERROR_GRID in wavelengths
    errors: tuple[float, ...] | None = None
    trials: int = 200
    rule: str = ZONE_PARITY
    error_kind: str = FIXED_MAGNITUDE
    error_axes: str = "xyz"
    error_on_tx: bool = False
    greedy_max_sweeps: int = 100
    greedy_warm_start: bool = True

    def __post_init__(self):
        if self.errors is None:
            lam = self.scenario.wavelength
            object.__setattr__(self, "errors", tuple(e * lam for e in DEFAULT_ERROR_GRID))
        object.__setattr__(self, "errors", tuple(float(e) for e in self.errors))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        unknown = set(self.schemes) - set(SWEEP_SCHEMES)
        if unknown:
            raise ValueError(f"unknown schemes {sorted(unknown)}")
        for xi in self.xi_wavelengths:
            if not 0 <= xi <= 0.5:
                raise ValueError(f"xi = {xi} wavelengths is outside [0, 0.5]")
        if any(not e >= 0 for e in self.errors):
            raise ValueError("error magnitudes must be nonnegative")
        if EXHAUSTIVE in self.schemes and self.geometry.size > MAX_EXHAUSTIVE:
            raise ValueError(
                f"exhaustive scheme limited to {MAX_EXHAUSTIVE} elements, RIS has {self.geometry.size}")
        TposjParams(0.0, self.rule)  # validates the rule name

    def variants(self) -> list[tuple[str, float | None]]:
        out = []
        for scheme in self.schemes:
            if scheme == TPOSJ:
                out.extend((TPOSJ, xi) for xi in self.xi_wavelengths)
            else:
                out.append((scheme, None))
        return out

    def error_model(self, magnitude: float) -> ErrorModel:
        if self.error_kind == FIXED_MAGNITUDE:
            return ErrorModel(FIXED_MAGNITUDE, magnitude=magnitude, axes=self.error_axes)
        return ErrorModel(self.error_kind, sigma=magnitude, axes=self.error_axes)


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    xi_wavelengths: float | None
    epsilon: float
    mean: float
    std: float
    p05: float
    p95: float
    trials: int


@dataclass
class SweepResult:
    rows: list[SweepRow]
    seed: int
    metadata: dict = field(default_factory=dict)
    samples: np.ndarray | None = field(default=None, repr=False)

    def lookup(self, scheme: str, epsilon: float, xi: float | None = None) -> SweepRow:
        for row in self.rows:
            if row.scheme == scheme and row.xi_wavelengths == xi and math.isclose(row.epsilon, epsilon):
                return row
        raise KeyError((scheme, xi, epsilon))


def _configure(spec: SweepSpec, variant, tx_p, rx_p, rng_random) -> RisConfiguration:
    scheme, xi = variant
    scn, geom = spec.scenario, spec.geometry
    lam = scn.wavelength
    if scheme == TPOSJ:
        fmap = build_fresnel_map(tx_p, rx_p, geom, lam)
        return tposj_configure(fmap, TposjParams.in_wavelengths(xi, lam, spec.rule))
    if scheme == RANDOM:
        return random_configuration(geom.size, rng_random)
    presumed = cascaded_gains(scn, geom, tx=tx_p, rx=rx_p)
    if scheme == BENCHMARK_CONTINUOUS:
        return continuous_conjugate(presumed)
    if scheme == BENCHMARK_ONEBIT:
        return nearest_phase_configuration(presumed)
    if scheme == GREEDY:
        init = (nearest_phase_configuration(presumed) if spec.greedy_warm_start
                else RisConfiguration.from_bits(np.zeros(geom.size)))
        return greedy_trace(presumed, init, spec.greedy_max_sweeps).config
    if scheme == EXHAUSTIVE:
        return exhaustive_onebit(presumed)
    raise ValueError(f"unknown scheme {scheme!r}")


def _run_items(spec: SweepSpec, items):
    """SE samples for each ``(error index, trial)`` work item, one value per variant."""
    scn = spec.scenario
    true_gains = cascaded_gains(scn, spec.geometry)
    variants = spec.variants()
    out = []
    for e_idx, trial in items:
        rng_err = trial_rng(scn.seed, e_idx, trial, 0)
        rng_random = trial_rng(scn.seed, e_idx, trial, 1)
        model = spec.error_model(spec.errors[e_idx])
        rx_p = scn.rx_true + sample_location_error(model, rng_err)
        tx_p = scn.tx_true + sample_location_error(model, rng_err) if spec.error_on_tx else scn.tx_true
        row = []
        for variant in variants:
            config = _configure(spec, variant, tx_p, rx_p, rng_random)
            h = effective_channel(true_gains, config)
            row.append(spectral_efficiency(h, scn.transmit_power, scn.noise_power))
        out.append(row)
    return out


def _summarize(values: np.ndarray) -> tuple[float, float, float, float]:
    if np.all(values == values[0]):
        v = float(values[0])
        return v, 0.0, v, v
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    p05, p95 = (float(x) for x in np.percentile(values, [5, 95]))
    return mean, std, p05, p95


def sweep_metadata(spec: SweepSpec) -> dict:
    f = spec.geometry.frame
    return {
        "code_version": __version__,
        "wavelength_m": spec.scenario.wavelength,
        "ris_center": tuple(f.center),
        "ris_u_axis": tuple(f.u_axis),
        "ris_v_axis": tuple(f.v_axis),
        "ris_normal": tuple(f.normal),
        "rule": spec.rule,
        "nlos_reference": "shortest total path element",
        "error_kind": spec.error_kind,
        "error_axes": spec.error_axes,
        "error_on_tx": spec.error_on_tx,
    }


def run_error_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    items = [(e, t) for e in range(len(spec.errors)) for t in range(spec.trials)]
    if workers <= 1:
        samples = _run_items(spec, items)
    else:
        chunks = [items[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_items, [spec] * len(chunks), chunks))
        by_item = {}
        for chunk, part in zip(chunks, parts):
            by_item.update(zip(chunk, part))
        samples = [by_item[item] for item in items]
    arr = np.asarray(samples).reshape(len(spec.errors), spec.trials, -1)
    rows = []
    for v_idx, (scheme, xi) in enumerate(spec.variants()):
        for e_idx, eps in enumerate(spec.errors):
            rows.append(SweepRow(scheme, xi, eps, *_summarize(arr[e_idx, :, v_idx]), spec.trials))
    return SweepResult(rows, spec.scenario.seed, sweep_metadata(spec), arr)


@dataclass(frozen=True)
class ComplexityRow:
    scheme: str
    n: int
    op_count: float
    wall_seconds: float | None
    kind: str  # "measured" or "model"


def _bench_geometry(scenario: Scenario, n: int) -> RisGeometry:
    ny = max(d for d in range(1, int(math.isqrt(n)) + 1) if n % d == 0)
    return default_geometry(scenario, n // ny, ny)


def _timed(fn, repetitions):
    """Result of ``fn`` and the median per-call time over ``repetitions`` batches.

    Each batch repeats ``fn`` enough times to run at least 0.2 s, so fast
    calls are not dominated by timer resolution.
    """
    result = fn()
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    times = timer.repeat(repeat=repetitions, number=number)
    return result, statistics.median(times) / number


def run_complexity_bench(n_list, schemes=(TPOSJ, GREEDY, SDR, MJCE), repetitions: int = 5,
                         scenario: Scenario | None = None, sdr_constant: float = 1.0,
                         mjce_constant: float = 1.0) -> list[ComplexityRow]:
    """Operation counts and median wall-clock per scheme and element count.

    ``tposj`` counts per-element geometry and assignment steps, ``greedy``
    counts flip tests, ``exhaustive`` counts enumerated states.  ``sdr`` and
    ``mjce`` are closed-form models (``k N^4.5`` and ``k N^2`` flops) and are
    labelled as such.
    """
    n_list = [int(n) for n in n_list]
    if not n_list or n_list != sorted(n_list):
        raise ValueError("n_list must be nonempty and ascending")
    if EXHAUSTIVE in schemes and n_list[-1] > MAX_EXHAUSTIVE:
        raise ValueError(f"exhaustive benchmark limited to {MAX_EXHAUSTIVE} elements")
    scenario = scenario or default_scenario()
    lam = scenario.wavelength
    rows = []
    for scheme in schemes:
        for n in n_list:
            if scheme == SDR:
                rows.append(ComplexityRow(SDR, n, sdr_constant * n ** 4.5, None, "model"))
                continue
            if scheme == MJCE:
                rows.append(ComplexityRow(MJCE, n, mjce_constant * n ** 2, None, "model"))
                continue
            geom = _bench_geometry(scenario, n)
            if scheme == TPOSJ:
                params = TposjParams(lam / 4)

                def run():
                    fmap = build_fresnel_map(scenario.tx_presumed, scenario.rx_presumed, geom, lam)
                    tposj_configure(fmap, params)
                    return TPOSJ_OPS_PER_ELEMENT * len(fmap)

                ops, wall = _timed(run, repetitions)
            elif scheme == GREEDY:
                gains = cascaded_gains(scenario, geom)
                init = nearest_phase_configuration(gains)
                trace, wall = _timed(lambda: greedy_trace(gains, init), repetitions)
                ops = trace.flip_tests
            elif scheme == EXHAUSTIVE:
                gains = cascaded_gains(scenario, geom)
                (patterns, _), wall = _timed(lambda: gray_code_objectives(gains), repetitions)
                ops = patterns.size
            else:
                raise ValueError(f"unknown complexity scheme {scheme!r}")
            rows.append(ComplexityRow(scheme, n, float(ops), wall, "measured"))
    return rows


def linear_fit_r2(x, y) -> float:
    """Coefficient of determination of a least-squares line through ``(x, y)``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    return float(1 - np.sum(resid ** 2) / ss_tot) if ss_tot > 0 else 1.0


@dataclass(frozen=True)
class OracleRow:
    instance: int
    scheme: str
    abs_h: float
    se: float
    ratio_to_exhaustive: float


def run_oracle_comparison(scenario: Scenario, nx: int = 4, ny: int = 3, instances: int = 20,
                          spacing_wavelengths: float = 0.5) -> list[OracleRow]:
    """Exhaustive vs greedy vs location-driven schemes on a tiny RIS.

    Instance 0 uses the scenario's receiver; later instances move the receiver
    uniformly within a 2 m cube around it (seeded).  All schemes see exact
    positions, so TPOSJ here measures the cost of geometric 1-bit rounding only.
    """
    if nx * ny > 12:
        raise ValueError("oracle comparison is limited to 12 elements")
    lam = scenario.wavelength
    geom = default_geometry(scenario, nx, ny, spacing_wavelengths)
    rows = []
    for k in range(instances):
        rx = scenario.rx_true if k == 0 else scenario.rx_true + trial_rng(scenario.seed, k).uniform(-1, 1, 3)
        scn = replace(scenario, rx_true=rx, rx_presumed=rx)
        gains = cascaded_gains(scn, geom)
        warm = nearest_phase_configuration(gains)
        configs = {
            "continuous": continuous_conjugate(gains),
            EXHAUSTIVE: exhaustive_onebit(gains),
            GREEDY: greedy_trace(gains, warm).config,
            "nearest-phase": warm,
            "tposj-0.5": tposj_configure(build_fresnel_map(scn.tx_true, rx, geom, lam),
                                         TposjParams(lam / 2)),
        }
        best = abs(effective_channel(gains, configs[EXHAUSTIVE]))
        for name, cfg in configs.items():
            h = abs(effective_channel(gains, cfg))
            rows.append(OracleRow(k, name, h, spectral_efficiency(h, scn.transmit_power, scn.noise_power),
                                  h / best if best > 0 else 1.0))
    return rows
