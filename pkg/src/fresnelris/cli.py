"""Command-line front end.

    fresnelris {map,sweep-error,sweep-xi,complexity,frame,oracle}
               [--config FILE] [--out FILE] [--seed N] [--workers N]

Exit codes: 0 success, 1 usage or configuration error, 2 non-finite output.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .beamforming import RULES, TposjParams, tposj_configure
from .channel import Scenario, dbm_to_watts
from .geometry import (
    PlaneFrame,
    RisGeometry,
    build_fresnel_map,
    far_field_fresnel_map,
    far_field_zone_boundary,
    zone_boundary_conic,
)
from .harness import (
    DEFAULT_ERROR_GRID,
    EXHAUSTIVE,
    GREEDY,
    MJCE,
    SDR,
    SWEEP_SCHEMES,
    TPOSJ,
    SweepSpec,
    run_complexity_bench,
    run_error_sweep,
    run_oracle_comparison,
)
from .localization import KINDS, parse_axes
from .protocol import FrameModel, frame_table

log = logging.getLogger("fresnelris")

SUBCOMMANDS = ("map", "sweep-error", "sweep-xi", "complexity", "frame", "oracle")


class ConfigError(ValueError):
    pass


def _float(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("value must be finite")
    return value


def _int(text):
    return int(text)


def _bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text):
    return tuple(_float(t) for t in text.split(",") if t.strip())


def _ints(text):
    return tuple(int(t) for t in text.split(",") if t.strip())


def _point(text):
    values = _floats(text)
    if len(values) != 3:
        raise ValueError("expected three comma-separated coordinates")
    return values


def _words(text):
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _orientation(text):
    text = text.strip()
    if text == "bisector":
        return text
    parts = text.split(";")
    if len(parts) != 2:
        raise ValueError("expected 'bisector' or 'ux, uy, uz; vx, vy, vz'")
    return _point(parts[0]), _point(parts[1])


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)  # shortest string that round-trips exactly
    if isinstance(value, tuple):
        if len(value) == 2 and all(isinstance(v, tuple) for v in value):
            return "; ".join(_fmt(v) for v in value)
        return ", ".join(_fmt(v) for v in value)
    return str(value)


# key -> (parser, default, constraint or None)
KEYS = {
    "frequency_hz": (_float, 28e9, lambda v: v > 0),
    "tx": (_point, (0.0, 12.0, 0.0), None),
    "rx": (_point, (5.0, 0.0, 0.0), None),
    "ris_nx": (_int, 80, lambda v: v >= 1),
    "ris_ny": (_int, 80, lambda v: v >= 1),
    "ris_spacing_wavelengths": (_float, 0.5, lambda v: v > 0),
    "ris_center": (_point, (0.0, 0.0, 0.0), None),
    "ris_orientation": (_orientation, "bisector", None),
    "tx_power_dbm": (_float, 30.0, None),
    "noise_power_dbm": (_float, -90.0, None),
    "los_blocked": (_bool, True, None),
    "seed": (_int, 0, lambda v: 0 <= v < 2 ** 64),
    "rule": (str, "zone-parity", lambda v: v in RULES),
    "xi_list_wavelengths": (_floats, (0.1, 0.25, 0.5), lambda v: v and all(0 <= x <= 0.5 for x in v)),
    "xi_sweep_wavelengths": (_floats, tuple(round(0.05 * k, 2) for k in range(11)),
                             lambda v: v and all(0 <= x <= 0.5 for x in v)),
    "error_grid_wavelengths": (_floats, DEFAULT_ERROR_GRID, lambda v: v and all(x >= 0 for x in v)),
    "trials": (_int, 200, lambda v: v >= 1),
    "schemes": (_words, ("tposj", "benchmark-onebit", "benchmark-continuous", "random"),
                lambda v: v and set(v) <= set(SWEEP_SCHEMES)),
    "error_kind": (str, "fixed-magnitude", lambda v: v in KINDS),
    "error_axes": (str, "xyz", lambda v: parse_axes(v) is not None),
    "error_on_tx": (_bool, False, None),
    "greedy_max_sweeps": (_int, 100, lambda v: v >= 1),
    "greedy_init": (str, "warm", lambda v: v in ("warm", "cold")),
    "map_xi_wavelengths": (_float, 0.25, lambda v: 0 <= v <= 0.5),
    "map_m_max": (_int, 0, lambda v: v >= 0),
    "frame_length": (_int, 10_000, lambda v: v > 0),
    "frame_pilot_cost": (_int, 1, lambda v: v >= 0),
    "frame_control_cost": (_int, 10, lambda v: v >= 0),
    "frame_num_ris": (_int, 1, lambda v: v >= 1),
    "frame_paths": (_int, 1, lambda v: v >= 0),
    "frame_enabled_fraction": (_float, 1.0, lambda v: 0 < v <= 1),
    "frame_location_pilots": (_bool, True, None),
    "frame_elements": (_ints, (100, 400, 1600, 6400), lambda v: v and all(x >= 0 for x in v)),
    "frame_se": (_float, 1.0, lambda v: v >= 0),
    "complexity_n_list": (_ints, (100, 1000, 10000), lambda v: v and list(v) == sorted(v) and v[0] >= 1),
    "complexity_exhaustive_n_list": (_ints, (4, 6, 8, 10, 12, 14, 16),
                                     lambda v: list(v) == sorted(v) and all(1 <= x <= 20 for x in v)),
    "complexity_repetitions": (_int, 5, lambda v: v >= 1),
    "sdr_model_constant": (_float, 1.0, lambda v: v > 0),
    "mjce_model_constant": (_float, 1.0, lambda v: v > 0),
    "oracle_nx": (_int, 4, lambda v: v >= 1),
    "oracle_ny": (_int, 3, lambda v: v >= 1),
    "oracle_instances": (_int, 20, lambda v: v >= 1),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def scenario(self) -> Scenario:
        v = self.values
        return Scenario(frequency=v["frequency_hz"], tx_true=v["tx"], rx_true=v["rx"],
                        transmit_power=dbm_to_watts(v["tx_power_dbm"]),
                        noise_power=dbm_to_watts(v["noise_power_dbm"]),
                        los_blocked=v["los_blocked"], seed=v["seed"])

    def frame(self, scenario: Scenario) -> PlaneFrame:
        o = self.values["ris_orientation"]
        if o == "bisector":
            return PlaneFrame.bisector(self.values["ris_center"], scenario.tx_true, scenario.rx_true)
        return PlaneFrame.from_axes(self.values["ris_center"], *o)

    def geometry(self, scenario: Scenario) -> RisGeometry:
        v = self.values
        return RisGeometry(self.frame(scenario), v["ris_nx"], v["ris_ny"],
                           v["ris_spacing_wavelengths"] * scenario.wavelength)

    def header_lines(self) -> list[str]:
        return [f"# {key} = {_fmt(self.values[key])}" for key in KEYS]


def _validate(key, text, where):
    parser, _, check = KEYS[key]
    try:
        value = parser(text.strip())
        ok = check is None or check(value)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: cannot parse {key} = {text.strip()!r}: {exc}") from None
    if not ok:
        raise ConfigError(f"{where}: {key} = {text.strip()!r} violates its constraint")
    return value


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = _validate(key, value, f"{source}:{lineno}")
    for key, (_, default, _) in KEYS.items():
        if key not in values:
            log.info("default %s = %s", key, _fmt(default))
            values[key] = default
    return RunConfig(values)


def parse_config(path) -> RunConfig:
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), str(path))


def config_from_header(csv_text: str) -> str:
    """Recover the config text recorded in an output file's ``# `` header lines."""
    lines = [ln[2:] for ln in csv_text.splitlines() if ln.startswith("# ")]
    return "\n".join(lines) + "\n"


class NumericError(RuntimeError):
    pass


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise NumericError(f"non-finite value {value!r} in output")
        return format(float(value), ".17g")
    return str(value)


def _table(columns, rows) -> list[str]:
    return [",".join(columns)] + [",".join(_cell(v) for v in row) for row in rows]


def _derived(scenario: Scenario, geom: RisGeometry, extra=None) -> list[str]:
    f = geom.frame
    meta = {
        "code_version": __version__,
        "wavelength_m": scenario.wavelength,
        "ris_center": tuple(float(x) for x in f.center),
        "ris_u_axis": tuple(float(x) for x in f.u_axis),
        "ris_v_axis": tuple(float(x) for x in f.v_axis),
        "ris_normal": tuple(float(x) for x in f.normal),
        "nlos_reference": "shortest total path element",
    }
    meta.update(extra or {})
    return [f"## {k} = {_fmt(v)}" for k, v in meta.items()]


def _map_rows(fmap, config):
    i, j = np.meshgrid(np.arange(fmap.nx), np.arange(fmap.ny), indexing="ij")
    modes = np.where(config.reflect, "reflect", "absorb")
    return zip(i.ravel().tolist(), j.ravel().tolist(), fmap.excess.tolist(), fmap.zone.tolist(),
               fmap.residual.tolist(), modes.tolist(), config.theta.tolist())


MAP_COLUMNS = ("i", "j", "delta_m", "zone", "residual_m", "mode", "theta_rad")
CONIC_COLUMNS = ("field", "m", "A", "B", "C", "D", "E", "F", "classification")


def cmd_map(cfg: RunConfig, workers: int):
    scn = cfg.scenario()
    geom = cfg.geometry(scn)
    lam = scn.wavelength
    params = TposjParams.in_wavelengths(cfg["map_xi_wavelengths"], lam, cfg["rule"])
    near = build_fresnel_map(scn.tx_true, scn.rx_true, geom, lam)
    far = far_field_fresnel_map(scn.tx_true, scn.rx_true, geom, lam)
    m_max = cfg["map_m_max"] or int(near.zone.max()) + 1
    conics = []
    for m in range(1, m_max + 1):
        for name, fn in (("near", zone_boundary_conic), ("far", far_field_zone_boundary)):
            c = fn(scn.tx_true, scn.rx_true, geom.frame, m, lam)
            conics.append((name, m, *c.coefficients, c.classification))
    return {
        "": _table(MAP_COLUMNS, _map_rows(near, tposj_configure(near, params))),
        "_farfield": _table(MAP_COLUMNS, _map_rows(far, tposj_configure(far, params))),
        "_conics": _table(CONIC_COLUMNS, conics),
    }, _derived(scn, geom, {"m_max": m_max})


SWEEP_COLUMNS = ("scheme", "xi_wavelengths", "epsilon_m", "mean_se", "std_se", "p05", "p95", "trials")


def _sweep(cfg: RunConfig, workers: int, schemes, xi_list):
    scn = cfg.scenario()
    geom = cfg.geometry(scn)
    lam = scn.wavelength
    spec = SweepSpec(scn, geom, schemes=schemes, xi_wavelengths=xi_list,
                     errors=tuple(e * lam for e in cfg["error_grid_wavelengths"]),
                     trials=cfg["trials"], rule=cfg["rule"], error_kind=cfg["error_kind"],
                     error_axes=cfg["error_axes"], error_on_tx=cfg["error_on_tx"],
                     greedy_max_sweeps=cfg["greedy_max_sweeps"],
                     greedy_warm_start=cfg["greedy_init"] == "warm")
    result = run_error_sweep(spec, workers=workers)
    rows = [(r.scheme, r.xi_wavelengths, r.epsilon, r.mean, r.std, r.p05, r.p95, r.trials)
            for r in result.rows]
    return {"": _table(SWEEP_COLUMNS, rows)}, _derived(scn, geom, {"rule": cfg["rule"]})


def cmd_sweep_error(cfg, workers):
    return _sweep(cfg, workers, cfg["schemes"], cfg["xi_list_wavelengths"])


def cmd_sweep_xi(cfg, workers):
    return _sweep(cfg, workers, (TPOSJ,), cfg["xi_sweep_wavelengths"])


def cmd_complexity(cfg, workers):
    scn = cfg.scenario()
    reps = cfg["complexity_repetitions"]
    rows = run_complexity_bench(cfg["complexity_n_list"], (TPOSJ, GREEDY, SDR, MJCE), reps, scn,
                                cfg["sdr_model_constant"], cfg["mjce_model_constant"])
    if cfg["complexity_exhaustive_n_list"]:
        rows += run_complexity_bench(cfg["complexity_exhaustive_n_list"], (EXHAUSTIVE,), reps, scn)
    table = [(r.scheme, r.n, r.op_count, r.wall_seconds, r.kind) for r in rows]
    return ({"": _table(("scheme", "n", "op_count", "wall_seconds", "kind"), table)},
            [f"## code_version = {__version__}", "## wall_seconds = median over repetitions, blank for model rows"])


def cmd_frame(cfg, workers):
    base = FrameModel(frame_length=cfg["frame_length"], uplink_pilot_cost=cfg["frame_pilot_cost"],
                      control_cost=cfg["frame_control_cost"], num_ris=cfg["frame_num_ris"],
                      paths_per_ris=cfg["frame_paths"], enabled_ris_fraction=cfg["frame_enabled_fraction"],
                      location_pilots=cfg["frame_location_pilots"])
    rows = frame_table(base, cfg["frame_elements"], cfg["frame_se"])
    cols = ("scheme", "R", "N", "L", "overhead_symbols", "overhead_fraction", "effective_rate")
    return {"": _table(cols, rows)}, [f"## code_version = {__version__}"]


def cmd_oracle(cfg, workers):
    scn = cfg.scenario()
    n = cfg["oracle_nx"] * cfg["oracle_ny"]
    if n > 12:
        raise ConfigError(f"oracle_nx * oracle_ny = {n} exceeds 12 elements")
    rows = run_oracle_comparison(scn, cfg["oracle_nx"], cfg["oracle_ny"], cfg["oracle_instances"],
                                 cfg["ris_spacing_wavelengths"])
    table = [(r.instance, r.scheme, r.abs_h, r.se, r.ratio_to_exhaustive) for r in rows]
    return {"": _table(("instance", "scheme", "abs_h", "se", "ratio_to_exhaustive"), table)}, \
        [f"## code_version = {__version__}"]


COMMANDS = {
    "map": cmd_map,
    "sweep-error": cmd_sweep_error,
    "sweep-xi": cmd_sweep_xi,
    "complexity": cmd_complexity,
    "frame": cmd_frame,
    "oracle": cmd_oracle,
}


def _emit(outputs: dict, header: list[str], out: str | None):
    if out is None:
        blocks = ["\n".join(header + lines) for lines in outputs.values()]
        sys.stdout.write("\n\n\n".join(blocks) + "\n")
        return
    path = Path(out)
    for suffix, lines in outputs.items():
        target = path if not suffix else path.with_name(path.stem + suffix + path.suffix)
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(header + lines) + "\n")


def dispatch(subcommand: str, cfg: RunConfig, out: str | None = None, workers: int = 1) -> int:
    if subcommand not in COMMANDS:
        log.error("unknown subcommand %r", subcommand)
        return 1
    try:
        outputs, derived = COMMANDS[subcommand](cfg, workers)
        _emit(outputs, cfg.header_lines() + derived, out)
    except NumericError as exc:
        log.error("%s", exc)
        return 2
    except (ConfigError, ValueError) as exc:
        log.error("%s", exc)
        return 1
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fresnelris", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--out", help="output CSV path (default: stdout)")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--workers", type=int, default=1)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = parse_config(args.config) if args.config else parse_config_text("", "<defaults>")
        if args.seed is not None:
            cfg.values["seed"] = _validate("seed", str(args.seed), "--seed")
    except (ConfigError, OSError) as exc:
        log.error("%s", exc)
        return 1
    if args.workers < 1:
        log.error("--workers must be at least 1")
        return 1
    return dispatch(args.subcommand, cfg, args.out, args.workers)
