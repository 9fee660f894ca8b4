"""Command-line front end.

    ssbtma {baseline,optimize,verify,reconfigure,pattern} --config CONFIG.json
           [--out DIR] [--seed N] [--mode dual|single] [--result REPORT.json]

Reports are JSON; pattern cuts and cost traces are CSV.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .errors import ConfigError, MetricsUndefined, TmaError
from .geometry import ArrayGeometry, ArrayKind, CarrierConfig, linear_uniform
from .modulation import BeamMode, BeamTask, ExcitationWeights, ModulationSchedule
from .optimizer import DeConfig, DeResult, de_optimize, design_metrics, reconfigure
from .oracle import OracleConfig, verify
from .pattern import angle_grid, chebyshev_taper, harmonic_pattern, peak_magnitude
from .power import PowerReport, TmaDesign, power_report, steered_design

log = logging.getLogger("ssbtma")

COMMANDS = ("baseline", "optimize", "verify", "reconfigure", "pattern")


@dataclass
class RunConfig:
    geometry: ArrayGeometry
    carrier: CarrierConfig
    task: BeamTask
    amplitudes: np.ndarray
    taper: dict
    optimizer: DeConfig = field(default_factory=DeConfig)
    oracle: OracleConfig = field(default_factory=lambda: OracleConfig(sphere_grid=(128, 128)))
    n_random: int = 20
    sigma: Optional[np.ndarray] = None
    explicit: Optional[dict] = None
    output_dir: Path = Path("out")

    def design(self) -> TmaDesign:
        """The design described by the config: explicit schedule if given, else steered sigma."""
        if self.explicit is not None:
            n = self.geometry.n_elements
            phases = self.explicit.get("phases_rad", [0.0] * n)
            return TmaDesign(self.geometry, ExcitationWeights(self.amplitudes, phases),
                             ModulationSchedule.from_arrays(self.explicit["xi_on"], self.explicit["xi_off"]),
                             self.carrier)
        sigma = np.ones(self.geometry.n_elements) if self.sigma is None else self.sigma
        return steered_design(self.geometry, self.task, sigma, self.amplitudes, self.carrier)


# --------------------------------------------------------------------------
# Config parsing

def _get(block: dict, key: str, where: str, default: Any = ConfigError):
    if not isinstance(block, dict):
        raise ConfigError(f"'{where}' must be an object")
    if key not in block:
        if default is ConfigError:
            raise ConfigError(f"missing field '{where}.{key}'" if where else f"missing field '{key}'")
        return default
    return block[key]


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field '{name}' must be a number, got {value!r}")
    return float(value)


def _build(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except TmaError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid '{name}': {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid '{name}': {exc}") from exc


def _parse_geometry(block) -> ArrayGeometry:
    kind = _get(block, "kind", "geometry", "linear-z")
    if "positions" in block:
        return _build("geometry.positions", ArrayGeometry, np.asarray(block["positions"], dtype=float),
                      ArrayKind(kind))
    n = _get(block, "n_elements", "geometry")
    spacing = _number(_get(block, "spacing", "geometry"), "geometry.spacing")
    return _build("geometry", linear_uniform, n, spacing)


def _parse_taper(block, n: int) -> np.ndarray:
    kind = _get(block, "kind", "taper")
    if kind == "chebyshev":
        sll = _number(_get(block, "sll_target_db", "taper"), "taper.sll_target_db")
        return _build("taper", chebyshev_taper, n, sll)
    if kind == "uniform":
        return np.ones(n)
    if kind == "explicit":
        amps = np.asarray(_get(block, "amplitudes", "taper"), dtype=float)
        if amps.shape != (n,):
            raise ConfigError(f"'taper.amplitudes' must list {n} values")
        return amps
    raise ConfigError(f"'taper.kind' must be chebyshev, uniform or explicit, got {kind!r}")


def parse_config(data: dict, base_dir: Path = Path(".")) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    geometry = _parse_geometry(_get(data, "geometry", ""))
    n = geometry.n_elements

    cb = _get(data, "carrier", "", {})
    carrier = _build("carrier", CarrierConfig,
                     _number(_get(cb, "carrier_frequency_hz", "carrier", 1e9), "carrier.carrier_frequency_hz"),
                     _number(_get(cb, "modulation_frequency_hz", "carrier", 50e6),
                             "carrier.modulation_frequency_hz"))

    tb = _get(data, "task", "")
    mode = _get(tb, "mode", "task", "dual")
    if mode not in ("dual", "single"):
        raise ConfigError(f"'task.mode' must be dual or single, got {mode!r}")
    task = _build("task", BeamTask,
                  _number(_get(tb, "theta_plus1_deg", "task"), "task.theta_plus1_deg"),
                  _number(_get(tb, "theta_minus3_deg", "task", 120.0), "task.theta_minus3_deg"),
                  BeamMode(mode))

    taper = _get(data, "taper", "")
    amplitudes = _parse_taper(taper, n)

    ob = _get(data, "optimizer", "", {})
    allowed = set(DeConfig.__dataclass_fields__)
    unknown = set(ob) - allowed
    if unknown:
        raise ConfigError(f"unknown field(s) in 'optimizer': {sorted(unknown)}")
    optimizer = _build("optimizer", DeConfig, **ob)

    orb = _get(data, "oracle", "", {})
    oracle = _build("oracle", OracleConfig,
                    int(_get(orb, "truncation", "oracle", 10_000)),
                    int(_get(orb, "waveform_samples", "oracle", 2 ** 16)),
                    tuple(_get(orb, "sphere_grid", "oracle", (128, 128))))
    n_random = int(_get(orb, "n_random", "oracle", 20))

    sigma = _get(data, "sigma", "", None)
    if sigma is not None:
        sigma = np.asarray(sigma, dtype=float)
        if sigma.shape != (n,) or np.any((sigma < 0) | (sigma > 1)):
            raise ConfigError(f"'sigma' must list {n} values in [0, 1]")
    explicit = _get(data, "schedule", "", None)
    if explicit is not None:
        for key in ("xi_on", "xi_off"):
            if len(_get(explicit, key, "schedule")) != n:
                raise ConfigError(f"'schedule.{key}' must list {n} values")
        if sigma is not None:
            raise ConfigError("give either 'sigma' or 'schedule', not both")

    out = Path(_get(data, "output_dir", "", "out"))
    if not out.is_absolute():
        out = base_dir / out
    cfg = RunConfig(geometry, carrier, task, amplitudes, taper, optimizer, oracle, n_random,
                    sigma, explicit, out)
    if explicit is not None:
        _build("schedule", cfg.design)
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(data, path.parent)


# --------------------------------------------------------------------------
# Output helpers

def _clean(value):
    """JSON-safe copy: numpy to Python, non-finite floats to null."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (np.floating, float)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_report(path: Path, report: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(report), indent=2, sort_keys=True) + "\n")
    return path


def read_report(path) -> dict:
    """Load a report; the ``power`` block comes back as a ``PowerReport``."""
    data = json.loads(Path(path).read_text())
    if data.get("power") is not None:
        data["power"] = PowerReport.from_dict(data["power"])
    return data


def write_pattern_csv(path: Path, angles, magnitudes, reference: float) -> Path:
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(np.asarray(magnitudes) / reference)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["angle_deg", "mag_linear", "mag_db_re_plus1_peak"])
        for a, m, d in zip(angles, magnitudes, db):
            w.writerow([repr(float(a)), repr(float(m)), repr(float(d))])
    return path


def write_trace_csv(path: Path, trace) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["generation", "best_cost"])
        for g, c in enumerate(trace):
            w.writerow([g, repr(float(c))])
    return path


def _task_dict(task: BeamTask) -> dict:
    return {"mode": task.mode.value, "theta_plus1_deg": task.theta_plus1, "theta_minus3_deg": task.theta_minus3}


def _design_outputs(design: TmaDesign, out: Path, prefix: str, grid_step: float) -> dict:
    """Power report, metrics and pattern CSVs for a design."""
    result = {"design": design.to_dict(), "power": power_report(design).to_dict()}
    grid = angle_grid(grid_step)
    p1 = harmonic_pattern(design, 1, grid)
    p3 = harmonic_pattern(design, -3, grid)
    ref = peak_magnitude(p1)
    try:
        m1, m3 = design_metrics(design, grid_step)
        result["metrics_plus1"], result["metrics_minus3"] = m1.to_dict(), m3.to_dict()
    except MetricsUndefined as exc:
        log.warning("pattern metrics undefined: %s", exc)
        result["metrics_plus1"] = result["metrics_minus3"] = None
    out.mkdir(parents=True, exist_ok=True)
    result["pattern_files"] = {
        "plus1": write_pattern_csv(out / f"{prefix}_pattern_plus1.csv", grid, p1.magnitudes, ref).name,
        "minus3": write_pattern_csv(out / f"{prefix}_pattern_minus3.csv", grid, p3.magnitudes, ref).name,
    }
    return result


# --------------------------------------------------------------------------
# Commands

def cmd_baseline(cfg: RunConfig, args) -> int:
    report = {"command": "baseline", "task": _task_dict(cfg.task), "taper": cfg.taper}
    report.update(_design_outputs(cfg.design(), cfg.output_dir, "baseline", cfg.optimizer.grid_step))
    path = write_report(cfg.output_dir / "baseline_report.json", report)
    p = report["power"]
    print(f"loss_dual = {p['loss_dual_percent']:.2f}%  loss_single = {p['loss_single_percent']:.2f}%")
    print(f"report written to {path}")
    return 0


def cmd_optimize(cfg: RunConfig, args) -> int:
    log.info("running DE: mode=%s NP=%d G_max=%d seed=%d", cfg.task.mode.value, cfg.optimizer.population,
             cfg.optimizer.max_generations, cfg.optimizer.seed)
    result = de_optimize(cfg.task, cfg.geometry, cfg.amplitudes, cfg.optimizer, cfg.carrier)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    trace = write_trace_csv(out / "optimize_trace.csv", result.cost_trace)
    report = {
        "command": "optimize",
        "task": _task_dict(cfg.task),
        "taper": cfg.taper,
        "optimizer": cfg.optimizer.__dict__,
        "best_sigma": result.best_sigma,
        "best_cost": result.best_cost,
        "generations": len(result.cost_trace) - 1,
        "trace_file": trace.name,
    }
    report.update(_design_outputs(result.design, out, "optimize", cfg.optimizer.grid_step))
    path = write_report(out / "optimize_report.json", report)
    frac = result.report.loss_fraction(cfg.task.mode)
    print(f"best cost = {result.best_cost:.6f}  loss_{cfg.task.mode.value} = {100 * frac:.2f}%  "
          f"SLL+1 = {result.metrics_plus1.sll_db:.2f} dB")
    print(f"report written to {path}")
    return 0


def cmd_verify(cfg: RunConfig, args) -> int:
    checks = verify(cfg.design(), n_random=cfg.n_random, seed=cfg.optimizer.seed, config=cfg.oracle)
    print(f"{'check':<16}{'max error':>14}{'tolerance':>12}  result")
    for c in checks:
        print(f"{c.name:<16}{c.max_error:>14.3e}{c.tolerance:>12.1e}  {'PASS' if c.passed else 'FAIL'}")
    write_report(cfg.output_dir / "verify_report.json",
                 {"command": "verify", "checks": [c.__dict__ for c in checks]})
    return 0 if all(c.passed for c in checks) else 1


def cmd_reconfigure(cfg: RunConfig, args) -> int:
    src = Path(args.result) if args.result else cfg.output_dir / "optimize_report.json"
    if not src.exists():
        raise ConfigError(f"saved result not found: {src}")
    saved = read_report(src)
    try:
        design = TmaDesign.from_dict(saved["design"])
        sigma = np.asarray(saved["best_sigma"], dtype=float)
    except KeyError as exc:
        raise ConfigError(f"saved result lacks field {exc}") from exc
    prior = DeResult(sigma, float(saved.get("best_cost", math.nan)), np.array([]), cfg.task,
                     design.geometry, design.weights.amplitudes, cfg.optimizer, design.carrier)
    weights, schedule = reconfigure(prior, cfg.task)
    new = TmaDesign(design.geometry, weights, schedule, design.carrier)
    report = {"command": "reconfigure", "source": str(src), "task": _task_dict(cfg.task), "best_sigma": sigma}
    report.update(_design_outputs(new, cfg.output_dir, "reconfigure", cfg.optimizer.grid_step))
    path = write_report(cfg.output_dir / "reconfigure_report.json", report)
    print(f"retargeted to theta+1 = {cfg.task.theta_plus1} deg, theta-3 = {cfg.task.theta_minus3} deg")
    print(f"report written to {path}")
    return 0


def cmd_pattern(cfg: RunConfig, args) -> int:
    d = _design_outputs(cfg.design(), cfg.output_dir, "pattern", cfg.optimizer.grid_step)
    for f in d["pattern_files"].values():
        print(cfg.output_dir / f)
    return 0


_HANDLERS = {"baseline": cmd_baseline, "optimize": cmd_optimize, "verify": cmd_verify,
             "reconfigure": cmd_reconfigure, "pattern": cmd_pattern}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssbtma", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="DE seed (overrides config)")
    parser.add_argument("--mode", choices=("dual", "single"), help="beam mode (overrides config)")
    parser.add_argument("--result", help="saved optimize report for 'reconfigure'")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg.output_dir = Path(args.out)
        if args.seed is not None:
            cfg.optimizer = replace(cfg.optimizer, seed=args.seed)
        if args.mode:
            cfg.task = replace(cfg.task, mode=BeamMode(args.mode))
        return _HANDLERS[args.command](cfg, args)
    except TmaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
