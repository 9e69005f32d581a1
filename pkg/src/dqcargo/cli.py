"""Command-line entry point: ``dqcargo {run,montecarlo,plots}``.

Every run writes a bundle directory holding CSV logs and a ``manifest.json``
that echoes the full configuration, so ``--config manifest.json`` reproduces
the run exactly.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import __version__
from .control import SlackGains, TautGains
from .dqmath import DualVector
from .dynamics import CargoParams, RigidBodyParams
from .mission import GuardConfig, MissionConfig, ModeTag
from .sim import (
    ERROR_COLUMNS,
    INTEGRATORS,
    NOISE_TARGETS,
    TRAJECTORY_COLUMNS,
    BatchResult,
    NoiseConfig,
    SimConfig,
    TrajectoryLog,
    monte_carlo,
    run,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIM = 3
EXIT_IO = 4

OUT_ENV = "DQCARGO_OUT"
CSV_FORMAT = "%.17g"


class ConfigError(ValueError):
    """Invalid run configuration; ``problems`` lists one message per field."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


class SchemaError(ValueError):
    """A bundle file is missing, empty, or lacks a required column."""


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------

def _f(default, kind: str):
    if isinstance(default, (list, dict)):
        return field(default_factory=lambda: json.loads(json.dumps(default)), metadata={"kind": kind})
    return field(default=default, metadata={"kind": kind})


@dataclass
class SystemSection:
    uav_mass: float = _f(0.7, "float")
    uav_inertia: list = _f([[0.005, 0.0, 0.0], [0.0, 0.007, 0.0], [0.0, 0.0, 0.006]], "mat3")
    load_mass: float = _f(0.05, "float")
    cable_length: float = _f(0.3, "float")


@dataclass
class GainsSection:
    kp_uav: dict = _f({"real": [10.0, 10.0, 10.0], "dual": [1.0, 1.0, 4.0]}, "dualgain")
    kv_uav: dict = _f({"real": [1.0, 1.0, 1.0], "dual": [1.0, 1.0, 4.0]}, "dualgain")
    kp_load: dict = _f({"real": [2.0, 2.0, 2.0], "dual": [1.0, 1.0, 4.0]}, "dualgain")
    kv_load: dict = _f({"real": [0.5, 0.5, 0.5], "dual": [1.0, 1.0, 4.0]}, "dualgain")


@dataclass
class MissionSection:
    setup_attitude: list = _f([1.0, 0.0, 0.0, 0.0], "quat")
    setup_position: list | None = _f(None, "vec3|null")
    load_start: list = _f([0.0, 0.0, 0.0], "vec3")
    uav_start_offset: list = _f([0.15, 0.0, 0.0], "vec3")
    raise_height: float = _f(0.9, "float")
    raise_speed: float = _f(0.5, "float")
    raise_period: float = _f(3.0, "float")
    raise_profile: str = _f("sinusoid", "str")
    track_amplitude: list = _f([1.0, 0.5, 0.5], "vec3")
    track_omega: list = _f([math.pi / 6, math.pi / 6, math.pi / 3], "vec3")
    track_duration: float = _f(6.0, "float")
    track_shape: str = _f("sin", "str")


@dataclass
class GuardsSection:
    cable_tol: float = _f(1e-3, "float")
    stability_tol_logq: float = _f(5e-2, "float")
    stability_tol_twist: float = _f(5e-2, "float")
    height_tol: float = _f(2e-2, "float")


@dataclass
class SimSection:
    dt: float = _f(0.01, "float")
    horizon: float = _f(15.0, "float")
    integrator: str = _f("rk4", "str")
    renormalize: bool = _f(True, "bool")
    seed: int = _f(0, "int")
    gravity: float = _f(9.81, "float")
    workers: int = _f(1, "int")


@dataclass
class NoiseSection:
    snr_db: float = _f(35.0, "float")
    targets: list = _f(sorted(NOISE_TARGETS), "strlist")
    per_run_reseed: bool = _f(True, "bool")
    linear_ratio: bool = _f(False, "bool")
    perturb_controller: bool = _f(True, "bool")
    runs: int = _f(100, "int")


@dataclass
class OutputSection:
    out_dir: str | None = _f(None, "str|null")


SECTIONS = {
    "system": SystemSection,
    "gains": GainsSection,
    "mission": MissionSection,
    "guards": GuardsSection,
    "sim": SimSection,
    "noise": NoiseSection,
    "output": OutputSection,
}


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _vec(x, n) -> bool:
    return isinstance(x, list) and len(x) == n and all(_is_num(v) for v in x)


def _check_kind(path: str, value, kind: str) -> tuple[Any, str | None]:
    """Coerce ``value`` to ``kind``; return (value, problem-or-None)."""
    if kind.endswith("|null"):
        if value is None:
            return None, None
        kind = kind[: -len("|null")]
    if kind == "float":
        if _is_num(value):
            return float(value), None
        return value, f"{path}: expected a number, got {value!r}"
    if kind == "int":
        if isinstance(value, int) and not isinstance(value, bool):
            return value, None
        return value, f"{path}: expected an integer, got {value!r}"
    if kind == "bool":
        if isinstance(value, bool):
            return value, None
        return value, f"{path}: expected true/false, got {value!r}"
    if kind == "str":
        if isinstance(value, str):
            return value, None
        return value, f"{path}: expected a string, got {value!r}"
    if kind == "strlist":
        if isinstance(value, list) and all(isinstance(v, str) for v in value):
            return list(value), None
        return value, f"{path}: expected a list of strings, got {value!r}"
    if kind in ("vec3", "quat"):
        n = 3 if kind == "vec3" else 4
        if _vec(value, n):
            return [float(v) for v in value], None
        return value, f"{path}: expected a list of {n} numbers, got {value!r}"
    if kind == "mat3":
        if isinstance(value, list) and len(value) == 3 and all(_vec(r, 3) for r in value):
            return [[float(v) for v in r] for r in value], None
        return value, f"{path}: expected a 3x3 list of numbers, got {value!r}"
    if kind == "dualgain":
        if isinstance(value, dict) and set(value) == {"real", "dual"} and _vec(value["real"], 3) and _vec(value["dual"], 3):
            return {"real": [float(v) for v in value["real"]], "dual": [float(v) for v in value["dual"]]}, None
        return value, f"{path}: expected {{real: [3 numbers], dual: [3 numbers]}}, got {value!r}"
    raise AssertionError(kind)


@dataclass
class RunConfig:
    """Complete, serialisable description of a run or a batch.

    Defaults reproduce the reference lifting and tracking scenario.
    """

    system: SystemSection = field(default_factory=SystemSection)
    gains: GainsSection = field(default_factory=GainsSection)
    mission: MissionSection = field(default_factory=MissionSection)
    guards: GuardsSection = field(default_factory=GuardsSection)
    sim: SimSection = field(default_factory=SimSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    output: OutputSection = field(default_factory=OutputSection)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict | None) -> "RunConfig":
        """Parse and validate; unknown keys and bad values are all reported together."""
        data = {} if data is None else data
        problems: list[str] = []
        if not isinstance(data, dict):
            raise ConfigError([f"<root>: expected a mapping, got {type(data).__name__}"])
        for key in data:
            if key not in SECTIONS:
                problems.append(f"{key}: unknown section")
        sections = {}
        for name, section_cls in SECTIONS.items():
            raw = data.get(name) or {}
            if not isinstance(raw, dict):
                problems.append(f"{name}: expected a mapping")
                raw = {}
            known = {f.name: f for f in dataclasses.fields(section_cls)}
            for key in raw:
                if key not in known:
                    problems.append(f"{name}.{key}: unknown field")
            kwargs = {}
            for key, fld in known.items():
                if key in raw:
                    value, problem = _check_kind(f"{name}.{key}", raw[key], fld.metadata["kind"])
                    if problem:
                        problems.append(problem)
                    else:
                        kwargs[key] = value
            sections[name] = section_cls(**kwargs)
        if problems:
            raise ConfigError(problems)
        cfg = cls(**sections)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RunConfig":
        """Read YAML (or a bundle ``manifest.json``, whose ``config`` key is used)."""
        path = Path(path)
        text = path.read_text()
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
        if isinstance(data, dict) and "config" in data and "version" in data:
            data = data["config"]
        return cls.from_dict(data)

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    # -- construction of library objects -----------------------------------

    def params(self) -> CargoParams:
        s = self.system
        uav = RigidBodyParams(s.uav_mass, np.array(s.uav_inertia))
        return CargoParams(uav, s.load_mass, s.cable_length)

    def controller_gains(self) -> tuple[SlackGains, TautGains]:
        g = self.gains

        def dv(d):
            return DualVector(np.array(d["real"]), np.array(d["dual"]))

        slack = SlackGains(dv(g.kp_uav), dv(g.kv_uav))
        taut = TautGains(dv(g.kp_load), dv(g.kv_load), np.array(g.kp_uav["real"]), np.array(g.kv_uav["real"]))
        return slack, taut

    def mission_config(self) -> MissionConfig:
        kw = dataclasses.asdict(self.mission)
        for k, v in kw.items():
            if isinstance(v, list):
                kw[k] = np.array(v, dtype=float)
        return MissionConfig(horizon=self.sim.horizon, **kw)

    def guard_config(self) -> GuardConfig:
        return GuardConfig(**dataclasses.asdict(self.guards))

    def sim_config(self) -> SimConfig:
        s = self.sim
        return SimConfig(s.dt, s.horizon, s.integrator, s.renormalize, s.seed, s.gravity)

    def noise_config(self) -> NoiseConfig | None:
        n = self.noise
        if math.isinf(n.snr_db):
            return None
        return NoiseConfig(n.snr_db, frozenset(n.targets), n.per_run_reseed, n.linear_ratio, n.perturb_controller)

    def validate(self) -> None:
        problems = []
        builders = [
            ("system", self.params),
            ("gains", self.controller_gains),
            ("mission", self.mission_config),
            ("guards", self.guard_config),
            ("sim", self.sim_config),
            ("noise", self.noise_config),
        ]
        for name, build in builders:
            try:
                build()
            except (ValueError, np.linalg.LinAlgError) as exc:
                msg = str(exc)
                problems.append(msg if msg.startswith(name + ".") else f"{name}: {msg}")
        if self.noise.runs < 1:
            problems.append("noise.runs: must be at least 1")
        if self.sim.workers < 1:
            problems.append("sim.workers: must be at least 1")
        if problems:
            raise ConfigError(problems)


def apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    data = cfg.to_dict()
    if getattr(args, "seed", None) is not None:
        data["sim"]["seed"] = args.seed
    if getattr(args, "dt", None) is not None:
        data["sim"]["dt"] = args.dt
    if getattr(args, "horizon", None) is not None:
        data["sim"]["horizon"] = args.horizon
    if getattr(args, "integrator", None) is not None:
        data["sim"]["integrator"] = args.integrator
    if getattr(args, "snr", None) is not None:
        data["noise"]["snr_db"] = args.snr
    if getattr(args, "runs", None) is not None:
        data["noise"]["runs"] = args.runs
    if getattr(args, "out", None) is not None:
        data["output"]["out_dir"] = args.out
    return RunConfig.from_dict(data)


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------

def write_csv(path: Path, columns, data: np.ndarray) -> None:
    data = np.asarray(data, dtype=float).reshape(-1, len(columns))
    np.savetxt(path, data, fmt=CSV_FORMAT, delimiter=",", header=",".join(columns), comments="")


def read_csv(path: Path, required=()) -> tuple[list[str], np.ndarray]:
    if not path.exists():
        raise SchemaError(f"{path.name}: file not found")
    lines = path.read_text().splitlines()
    if not lines:
        raise SchemaError(f"{path.name}: empty file")
    header = lines[0].split(",")
    for col in required:
        if col not in header:
            raise SchemaError(f"{path.name}: missing column {col!r}")
    if len(lines) < 2:
        raise SchemaError(f"{path.name}: no data rows")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def _switch_table(log: TrajectoryLog) -> list[dict]:
    return [{"mode": tag.name.lower(), "t": t} for tag, t in log.switches]


def write_run_bundle(out: Path, cfg: RunConfig, log: TrajectoryLog, command: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "trajectory.csv", TRAJECTORY_COLUMNS, log.data)
    write_csv(out / "errors.csv", ERROR_COLUMNS, log.errors)
    manifest = _manifest(cfg, command)
    manifest["switch_times"] = _switch_table(log)
    manifest["records"] = len(log)
    manifest["aborted"] = None if log.aborted is None else {"t": log.aborted.t, "error": str(log.aborted)}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


BATCH_COLUMNS = ("t", "l2_mean", "l2_std", "l2_min", "l2_max", "mean_err_norm")
RUN_COLUMNS = ("run", "seed", "completed", "t_pull", "t_raise", "t_track", "final_l2")


def write_batch_bundle(out: Path, cfg: RunConfig, batch: BatchResult, command: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "mean_errors.csv", ERROR_COLUMNS, batch.mean_errors)
    l2 = batch.l2_norms
    stats = np.column_stack(
        [batch.time, l2.mean(axis=0), l2.std(axis=0), l2.min(axis=0), l2.max(axis=0), np.linalg.norm(batch.mean_error, axis=1)]
    )
    write_csv(out / "batch_stats.csv", BATCH_COLUMNS, stats)
    write_csv(out / "l2_runs.csv", ("t",) + tuple(f"run_{i:03d}" for i in range(l2.shape[0])), np.column_stack([batch.time, l2.T]))
    failed = {i for i, _ in batch.failures}
    rows, k = [], 0
    for i, seed in enumerate(batch.seeds):
        if i in failed:
            rows.append([i, seed, 0, np.nan, np.nan, np.nan, np.nan])
        else:
            rows.append([i, seed, 1, *batch.switch_times[k], l2[k, -1]])
            k += 1
    write_csv(out / "runs.csv", RUN_COLUMNS, np.array(rows, dtype=float))
    manifest = _manifest(cfg, command)
    manifest["runs"] = batch.n_runs
    manifest["completed"] = batch.completed
    manifest["failures"] = [{"run": i, "error": msg} for i, msg in batch.failures]
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _manifest(cfg: RunConfig, command: str) -> dict:
    return {"version": __version__, "command": command, "seed": cfg.sim.seed, "config": cfg.to_dict()}


# ---------------------------------------------------------------------------
# Plot data
# ---------------------------------------------------------------------------

FIGURES = {
    "fig_uav_states": (
        "uav_x", "uav_y", "uav_z", "uav_vx", "uav_vy", "uav_vz",
        "q_w", "q_x", "q_y", "q_z", "omega_x", "omega_y", "omega_z",
    ),
    "fig_load_states": (
        "load_x", "load_y", "load_z", "load_vx", "load_vy", "load_vz",
        "qc_x", "qc_y", "qc_z", "qcdot_x", "qcdot_y", "qcdot_z",
    ),
}

PLOT_SCRIPT = '''"""Render the figures of a dqcargo bundle. Usage: python plot_figures.py [BUNDLE_DIR]"""
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent


def load(name):
    path = root / name
    if not path.exists():
        return None
    header = path.read_text().splitlines()[0].split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {h: data[:, i] for i, h in enumerate(header)}


switches = load("switch_times.csv")
marks = [] if switches is None else list(switches["t"])


def panels(table, groups, title, out):
    fig, axes = plt.subplots(2, 2, figsize=(10, 6), sharex=True)
    for ax, (label, cols) in zip(axes.flat, groups):
        for c in cols:
            ax.plot(table["t"], table[c], label=c)
        for t in marks:
            ax.axvline(t, color="k", ls="--", lw=0.8)
        ax.set_ylabel(label)
        ax.legend(fontsize=7)
    for ax in axes[-1]:
        ax.set_xlabel("t [s]")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(root / out, dpi=150)


uav = load("fig_uav_states.csv")
if uav is not None:
    panels(uav, [
        ("position [m]", ["uav_x", "uav_y", "uav_z"]),
        ("velocity [m/s]", ["uav_vx", "uav_vy", "uav_vz"]),
        ("attitude", ["q_w", "q_x", "q_y", "q_z"]),
        ("angular velocity [rad/s]", ["omega_x", "omega_y", "omega_z"]),
    ], "UAV states", "fig_uav_states.png")

load_states = load("fig_load_states.csv")
if load_states is not None:
    panels(load_states, [
        ("position [m]", ["load_x", "load_y", "load_z"]),
        ("velocity [m/s]", ["load_vx", "load_vy", "load_vz"]),
        ("q_c", ["qc_x", "qc_y", "qc_z"]),
        ("dq_c/dt", ["qcdot_x", "qcdot_y", "qcdot_z"]),
    ], "Load states", "fig_load_states.png")

err = load("fig_errors.csv")
if err is not None:
    panels(err, [
        ("T_le [m]", ["Tle_x", "Tle_y", "Tle_z"]),
        ("dT_le/dt [m/s]", ["Tdotle_x", "Tdotle_y", "Tdotle_z"]),
        ("q_ce", ["qce_x", "qce_y", "qce_z"]),
        ("dq_ce/dt", ["qcedot_x", "qcedot_y", "qcedot_z"]),
    ], "Load tracking errors", "fig_errors.png")

l2 = load("fig_l2.csv")
if l2 is not None:
    fig, ax = plt.subplots(figsize=(7, 4))
    for c in l2:
        if c.startswith("run_"):
            ax.plot(l2["t"], l2[c], color="0.7", lw=0.5)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("L2 norm of load position error")
    fig.tight_layout()
    fig.savefig(root / "fig_l2.png", dpi=150)

plt.show()
'''


def emit_plot_data(bundle: Path) -> list[str]:
    """Write per-figure CSVs and the plotting script; returns the files written."""
    if not bundle.is_dir():
        raise FileNotFoundError(f"bundle directory {bundle} not found")
    written = []
    traj_path = bundle / "trajectory.csv"
    l2_path = bundle / "l2_runs.csv"
    if not traj_path.exists() and not l2_path.exists():
        raise SchemaError("bundle holds neither trajectory.csv nor l2_runs.csv")
    if traj_path.exists():
        header, data = read_csv(traj_path, ("t", "mode") + FIGURES["fig_uav_states"] + FIGURES["fig_load_states"])
        idx = {h: i for i, h in enumerate(header)}
        for name, cols in FIGURES.items():
            write_csv(bundle / f"{name}.csv", ("t",) + cols, data[:, [idx["t"]] + [idx[c] for c in cols]])
            written.append(f"{name}.csv")
        # a switch shows up as the first record in a new mode
        modes = data[:, idx["mode"]]
        change = np.nonzero(np.diff(modes))[0] + 1
        sw = np.column_stack([data[change, idx["t"]], modes[change]])
        write_csv(bundle / "switch_times.csv", ("t", "mode"), sw)
        written.append("switch_times.csv")
        eheader, edata = read_csv(bundle / "errors.csv", ERROR_COLUMNS)
        if edata.shape[0] != data.shape[0]:
            raise SchemaError("errors.csv: row count differs from trajectory.csv")
        eidx = [eheader.index(c) for c in ERROR_COLUMNS]
        write_csv(bundle / "fig_errors.csv", ERROR_COLUMNS, edata[:, eidx])
        written.append("fig_errors.csv")
    if l2_path.exists():
        header, data = read_csv(l2_path, ("t",))
        write_csv(bundle / "fig_l2.csv", header, data)
        written.append("fig_l2.csv")
        mheader, mdata = read_csv(bundle / "mean_errors.csv", ERROR_COLUMNS)
        write_csv(bundle / "fig_mean_errors.csv", mheader, mdata)
        written.append("fig_mean_errors.csv")
    (bundle / "plot_figures.py").write_text(PLOT_SCRIPT)
    written.append("plot_figures.py")
    return written


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _out_dir(cfg: RunConfig, default_name: str) -> Path:
    if cfg.output.out_dir:
        return Path(cfg.output.out_dir)
    return Path(os.environ.get(OUT_ENV, "out")) / default_name


def _load_config(args) -> RunConfig:
    cfg = RunConfig() if args.config is None else RunConfig.load(args.config)
    return apply_overrides(cfg, args)


def cmd_run(args) -> int:
    cfg = _load_config(args)
    # a single mission is noise-free unless --snr asks for it
    noise = cfg.noise_config() if args.snr is not None else None
    log = run(cfg.sim_config(), cfg.params(), cfg.controller_gains(), cfg.mission_config(), noise, cfg.guard_config())
    out = _out_dir(cfg, "run")
    write_run_bundle(out, cfg, log, "run")
    for tag, t in log.switches:
        print(f"switch to {tag.name.lower():<5s} at t = {t:.2f} s")
    modes = log.modes
    if np.any(modes == ModeTag.TRACK):
        err = np.linalg.norm(log.errors[modes == ModeTag.TRACK, 1:4], axis=1)
        print(f"max load tracking error during track: {err.max():.4f} m")
    print(f"wrote {out}")
    if log.aborted is not None:
        print(f"error: {log.aborted}", file=sys.stderr)
        return EXIT_SIM
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    cfg = _load_config(args)
    batch = monte_carlo(
        cfg.sim_config(),
        cfg.params(),
        cfg.controller_gains(),
        cfg.mission_config(),
        cfg.noise_config(),
        cfg.noise.runs,
        cfg.guard_config(),
        workers=cfg.sim.workers,
    )
    out = _out_dir(cfg, "montecarlo")
    write_batch_bundle(out, cfg, batch, "montecarlo")
    print(f"{batch.completed}/{batch.n_runs} runs completed")
    print(f"final mean L2 norm of load position error: {batch.mean_l2[-1]:.4f}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_plots(args) -> int:
    files = emit_plot_data(Path(args.bundle))
    for name in files:
        print(f"wrote {Path(args.bundle) / name}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dqcargo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML run configuration or bundle manifest.json")
        p.add_argument("--seed", type=int)
        p.add_argument("--dt", type=float, help="integration step [s]")
        p.add_argument("--horizon", type=float, help="simulated time [s]")
        p.add_argument("--snr", type=float, help="noise SNR in dB (inf disables noise)")
        p.add_argument("--integrator", choices=INTEGRATORS)
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<command> or ./out/<command>)")

    p_run = sub.add_parser("run", help="simulate one lifting and tracking mission")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_mc = sub.add_parser("montecarlo", help="batch of noisy missions")
    common(p_mc)
    p_mc.add_argument("--runs", type=int)
    p_mc.set_defaults(func=cmd_montecarlo)

    p_plot = sub.add_parser("plots", help="emit figure data and a plotting script for a bundle")
    p_plot.add_argument("bundle", help="bundle directory written by run or montecarlo")
    p_plot.set_defaults(func=cmd_plots)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RuntimeError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIM
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
