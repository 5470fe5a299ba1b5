"""Config-driven sweeps: phase diagrams, fixed-phi1 slices and
threshold-versus-degree tables, each written as CSV plus a JSON run record."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .attack import ATTACK_KINDS, AttackSpec
from .core import joint_degree_histogram, pooled_histogram, product_poisson_histogram, save_multiplex, seed_sequence
from .netgen import GeneratorSpec, generate_multiplex
from .percolation import run_ensemble
from .theory import analyze, symmetric_threshold, threshold_curve

log = logging.getLogger(__name__)

PHASE_HEADER = ["phi1", "phi2", "r_sim_mean", "r_sim_std", "r_theory", "lambda"]
CURVE_HEADER = ["phi1", "phi2_c", "flag"]
DEGREE_HEADER = ["z", "phi_c_multiplex", "phi_c_layer", "attack_kind", "topology"]

# stream key for the networks an empirical theory histogram is pooled from
EMPIRICAL_KEY = (1 << 31) + 1


@dataclass
class ExperimentConfig:
    topology: str = "er"
    n: int = 5000
    z1: float = 2.0
    z2: float = 3.0
    attack: str = "layer-random"
    phi1: tuple = (0.0,)
    phi2: tuple = ()
    grid_step: float = 0.02
    phi_min: float = 0.0
    phi_max: float = 1.0
    runs: int = 50
    seed: int = 20160101
    theory: str = ""
    theory_instances: int = 10
    z_min: float = 1.0
    z_max: float = 6.0
    z_step: float = 1.0
    workers: int = 1
    out: str = "out"
    preset: str = ""

    def __post_init__(self):
        self.phi1 = _floats(self.phi1)
        self.phi2 = _floats(self.phi2)
        if self.attack not in ATTACK_KINDS:
            raise ValueError(f"unknown attack {self.attack!r}; choose from {', '.join(ATTACK_KINDS)}")
        if self.topology not in ("er", "ba"):
            raise ValueError(f"unknown topology {self.topology!r}")
        if not 0.0 <= self.phi_min <= self.phi_max <= 1.0:
            raise ValueError("grid bounds must satisfy 0 <= phi_min <= phi_max <= 1")
        if any(not 0.0 <= p <= 1.0 for p in self.phi1 + self.phi2):
            raise ValueError("phi values must lie in [0, 1]")
        if self.grid_step <= 0:
            raise ValueError("grid step must be positive")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.z1 < 0 or self.z2 < 0 or self.z_min < 0:
            raise ValueError("mean degrees must be non-negative")
        if self.z_step <= 0 or self.z_max < self.z_min:
            raise ValueError("degree range must have z_min <= z_max and z_step > 0")
        if not self.theory:
            self.theory = "analytic" if self.topology == "er" else "empirical"
        if self.theory not in ("analytic", "empirical"):
            raise ValueError(f"theory source must be analytic or empirical, got {self.theory!r}")
        if self.theory == "analytic" and self.topology != "er":
            raise ValueError("analytic theory is only available for ER layers")

    def generator(self, z=None, fractional_ba: bool = False) -> GeneratorSpec:
        return GeneratorSpec(self.topology, self.n, z or (self.z1, self.z2), fractional_ba=fractional_ba)

    def grid(self) -> list:
        """Sweep values from ``phi_min`` to ``phi_max`` inclusive."""
        count = int(round((self.phi_max - self.phi_min) / self.grid_step))
        return [round(self.phi_min + i * self.grid_step, 12) for i in range(count + 1)]

    def degrees(self) -> list:
        count = int(round((self.z_max - self.z_min) / self.z_step))
        return [round(self.z_min + i * self.z_step, 12) for i in range(count + 1)]

    def snapshot(self) -> dict:
        return dataclasses.asdict(self)


def _floats(value) -> tuple:
    if isinstance(value, str):
        return tuple(float(x) for x in value.replace(",", " ").split())
    if np.ndim(value) == 0:
        return (float(value),)
    return tuple(float(x) for x in value)


def _coerce(name: str, raw: str):
    kind = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}[name]
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "tuple":
        return _floats(raw)
    return raw


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment. Keys may use dashes."""
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return values


PRESETS = {
    "fig3a": ("phase", dict(z1=1, z2=1, attack="layer-random")),
    "fig3b": ("phase", dict(z1=2, z2=3, attack="layer-random")),
    "fig4a": ("slice", dict(z1=1, z2=1, attack="layer-random", phi1=(0.0, 0.2, 0.4, 0.6))),
    "fig4b": ("slice", dict(z1=2, z2=3, attack="layer-random", phi1=(0.0, 0.3, 0.6, 0.9))),
    "fig5a": ("phase", dict(z1=2, z2=2, attack="layer-targeted")),
    "fig5b": ("phase", dict(z1=2, z2=4, attack="layer-targeted")),
    "fig6a": ("slice", dict(z1=2, z2=2, attack="layer-targeted", phi1=(0.0, 0.1, 0.2, 0.3))),
    "fig6b": ("slice", dict(z1=2, z2=4, attack="layer-targeted", phi1=(0.0, 0.1, 0.2, 0.4))),
    "fig7a": ("threshold", dict(topology="er", attack="layer-random")),
    "fig7b": ("threshold", dict(topology="ba", attack="layer-random")),
    "fig8a": ("threshold", dict(topology="er", attack="layer-targeted")),
    "fig8b": ("threshold", dict(topology="ba", attack="layer-targeted")),
}


def preset_config(name: str, **overrides) -> tuple:
    """``(command, config)`` for a named figure preset."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    command, values = PRESETS[name]
    return command, ExperimentConfig(**{**values, **overrides, "preset": name})


def theory_histogram(cfg: ExperimentConfig, z=None, fractional_ba: bool = False):
    """Degree law the theory is evaluated on: product Poisson or pooled instances."""
    z = z or (cfg.z1, cfg.z2)
    if cfg.theory == "analytic":
        return product_poisson_histogram(z)
    gen = cfg.generator(z, fractional_ba)
    nets = [generate_multiplex(gen, seed_sequence(cfg.seed, EMPIRICAL_KEY, i))
            for i in range(cfg.theory_instances)]
    return pooled_histogram(nets)


def _point(cfg, gen, hist, phi1, phi2) -> dict:
    spec = AttackSpec(cfg.attack, phi1, phi2)
    sim = run_ensemble(gen, spec, cfg.runs, cfg.seed, workers=cfg.workers)
    th = analyze(hist, spec.resolve(hist))
    return {"phi1": phi1, "phi2": phi2, "r_sim_mean": sim.r_mean, "r_sim_std": sim.r_std,
            "r_theory": th.r, "lambda": th.lam}


def _require_layer_attack(cfg):
    if not cfg.attack.startswith("layer"):
        raise ValueError("phase diagrams and slices need a layer-random or layer-targeted attack")


def phase_diagram(cfg: ExperimentConfig) -> tuple:
    """Simulated and predicted R on the (phi1, phi2) grid, plus the threshold curve."""
    _require_layer_attack(cfg)
    gen, hist, grid = cfg.generator(), theory_histogram(cfg), cfg.grid()
    rows = []
    for phi1 in grid:
        log.info("phase: phi1=%.3f", phi1)
        rows.extend(_point(cfg, gen, hist, phi1, phi2) for phi2 in grid)
    curve = [dict(zip(CURVE_HEADER, row)) for row in threshold_curve(hist, cfg.attack, grid)]
    return rows, curve


def slice_sweep(cfg: ExperimentConfig) -> list:
    """R against phi2 for each fixed phi1 in ``cfg.phi1``."""
    _require_layer_attack(cfg)
    gen, hist = cfg.generator(), theory_histogram(cfg)
    phi2s = cfg.phi2 or tuple(cfg.grid())
    rows = []
    for phi1 in cfg.phi1:
        log.info("slice: phi1=%.3f", phi1)
        rows.extend(_point(cfg, gen, hist, phi1, phi2) for phi2 in phi2s)
    return rows


def threshold_vs_degree(cfg: ExperimentConfig) -> list:
    """Critical fraction for multiplex-node and layer-node attacks, per mean degree.

    Both layers get the same mean degree and lose the same share. The
    random/targeted choice comes from ``cfg.attack``. Odd BA degrees use
    mixed attachment counts.
    """
    scope = "targeted" if cfg.attack.endswith("targeted") else "random"
    rows = []
    for z in cfg.degrees():
        hist = theory_histogram(cfg, (z, z), fractional_ba=cfg.topology == "ba")
        mult = symmetric_threshold(hist, f"multiplex-{scope}")
        layer = symmetric_threshold(hist, f"layer-{scope}")
        log.info("threshold: z=%g multiplex=%.6f layer=%.6f", z, mult.phi_c, layer.phi_c)
        rows.append({"z": z, "phi_c_multiplex": mult.phi_c, "phi_c_layer": layer.phi_c,
                     "attack_kind": scope, "topology": cfg.topology})
    return rows


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=header, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@dataclass
class RunRecord:
    command: str
    config: dict
    seed: int
    version: str = __version__
    started: str = ""
    finished: str = ""
    wall_time_s: float = 0.0
    outputs: list = field(default_factory=list)
    points: list = field(default_factory=list)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(dataclasses.asdict(self), indent=2))

    @classmethod
    def load(cls, path) -> "RunRecord":
        return cls(**json.loads(Path(path).read_text()))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_command(command: str, cfg: ExperimentConfig) -> RunRecord:
    """Run one experiment command and write its CSVs and JSON record to ``cfg.out``."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    started, t0 = _now(), time.perf_counter()
    outputs, points = [], []
    if command == "generate":
        net = generate_multiplex(cfg.generator(), seed_sequence(cfg.seed, 0))
        outputs = [p.name for p in save_multiplex(net, out)]
        joint_degree_histogram(net).to_csv(out / "histogram.csv")
        outputs.append("histogram.csv")
    elif command == "phase":
        rows, curve = phase_diagram(cfg)
        write_csv(out / "phase.csv", PHASE_HEADER, rows)
        write_csv(out / "threshold.csv", CURVE_HEADER, curve)
        outputs, points = ["phase.csv", "threshold.csv"], rows
    elif command == "slice":
        rows = slice_sweep(cfg)
        write_csv(out / "slice.csv", PHASE_HEADER, rows)
        outputs, points = ["slice.csv"], rows
    elif command == "threshold":
        rows = threshold_vs_degree(cfg)
        write_csv(out / "threshold_vs_degree.csv", DEGREE_HEADER, rows)
        outputs, points = ["threshold_vs_degree.csv"], rows
    else:
        raise ValueError(f"unknown command {command!r}")
    record = RunRecord(command, cfg.snapshot(), cfg.seed, started=started, finished=_now(),
                       wall_time_s=time.perf_counter() - t0, outputs=outputs, points=points)
    record.save(out / f"{command}.json")
    return record


def replay(record: RunRecord, out=None) -> RunRecord:
    """Re-run a recorded experiment from its config snapshot."""
    values = dict(record.config)
    if out is not None:
        values["out"] = str(out)
    return run_command(record.command, ExperimentConfig(**values))
