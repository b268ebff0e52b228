"""Scenario runner: parse a config, run the exact and SR engines, emit CSV
time series, golden tables, and comparison reports.

Subcommands: ``run <config>``, ``tables --preset A|B --alphas ...``, and
``compare <a.csv> <b.csv> --gate <pct>``.  Exit codes: 0 success, 1 error,
2 gate failure.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import eom, exact, ground, model, sr, units
from .errors import ConfigParse, GridMismatch, ScenarioFailure, SrccError

# Default comparison gates: relative-RMS for continuous observables,
# absolute deviation for probabilities and coherences.
REL_RMS_GATE = 0.01
ABS_DEV_GATE = 0.02

_MODEL_KEYS = {
    "delta_eps": float, "b": float, "w0": float, "u0": float, "d0": float,
    "f0": float, "t_pulse": float, "t_final": float, "n_steps": int,
    "alpha": float,
}


@dataclass(frozen=True)
class ScenarioConfig:
    params: model.ModelParams
    superposition: eom.Superposition
    observables: tuple[str, ...]
    engines: tuple[str, ...]
    projector_mode: str
    output_dir: Path


@dataclass
class ComparisonReport:
    observable: str
    max_abs: float
    rms: float
    rel_rms: float | None     # normalized by exact peak-to-peak; None if flat
    gate: float
    gate_kind: str            # "rel_rms" or "abs_dev"
    passed: bool

    def line(self) -> str:
        rel = "undefined" if self.rel_rms is None else f"{self.rel_rms:.6e}"
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.observable}: max_abs={self.max_abs:.6e} "
                f"rms={self.rms:.6e} rel_rms={rel} "
                f"gate[{self.gate_kind}]={self.gate:g} {status}")


def _parse_complex(text: str, key: str) -> complex:
    parts = [p.strip() for p in text.split(",")]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ConfigParse(f"key {key!r}: expected 're' or 're,im', got {text!r}")


def load_config(path: str | Path) -> ScenarioConfig:
    """Parse an INI-style scenario config (energies in eV, times in fs)."""
    path = Path(path)
    if not path.is_file():
        raise ConfigParse(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path)
    except configparser.Error as err:
        raise ConfigParse(f"cannot parse {path}: {err}") from err

    kwargs = {}
    preset = "A"
    if parser.has_section("model"):
        for key, raw in parser.items("model"):
            if key == "preset":
                preset = raw.strip().upper()
                if preset not in ("A", "B"):
                    raise ConfigParse(f"key 'preset': must be A or B, got {raw!r}")
                continue
            if key not in _MODEL_KEYS:
                raise ConfigParse(f"unknown [model] key {key!r}")
            try:
                kwargs[key] = _MODEL_KEYS[key](raw)
            except ValueError as err:
                raise ConfigParse(f"key {key!r}: {err}") from err
    try:
        maker = model.ModelParams.preset_a if preset == "A" else model.ModelParams.preset_b
        params = maker(**kwargs)
    except ValueError as err:
        raise ConfigParse(f"invalid [model] values: {err}") from err

    s = 0.0
    c: dict[int, complex] = {}
    if parser.has_section("superposition"):
        for key, raw in parser.items("superposition"):
            if key == "s":
                s = _parse_complex(raw, key)
            elif key.startswith("c") and key[1:].isdigit():
                n = int(key[1:])
                if not 1 <= n <= 8:
                    raise ConfigParse(f"key {key!r}: state index must be 1..8")
                c[n] = _parse_complex(raw, key)
            else:
                raise ConfigParse(f"unknown [superposition] key {key!r}")
    try:
        sup = eom.Superposition(s=s, c=c)
    except SrccError as err:
        raise ConfigParse(f"invalid [superposition]: {err}") from err

    engines = ("exact", "sr")
    observables: tuple[str, ...] = ("dipole",)
    projector_mode = "exact"
    out_dir = Path(".")
    if parser.has_section("run"):
        for key, raw in parser.items("run"):
            if key == "engines":
                engines = tuple(t.strip() for t in raw.replace(",", " ").split())
                bad = [e for e in engines if e not in ("exact", "sr")]
                if bad or not engines:
                    raise ConfigParse(f"key 'engines': unknown engine(s) {bad!r}")
            elif key == "observables":
                observables = tuple(t.strip() for t in raw.replace(",", " ").split())
            elif key == "projector_mode":
                projector_mode = raw.strip()
                if projector_mode not in ("exact", "paper"):
                    raise ConfigParse(
                        f"key 'projector_mode': must be exact or paper, got {raw!r}")
            elif key == "output_dir":
                out_dir = Path(raw.strip())
            else:
                raise ConfigParse(f"unknown [run] key {key!r}")
    if not observables:
        raise ConfigParse("key 'observables': at least one observable required")
    for obs in observables:
        _classify_observable(obs)

    env_dir = os.environ.get("SRCC_OUTPUT_DIR")
    if env_dir:
        out_dir = Path(env_dir)
    return ScenarioConfig(params=params, superposition=sup,
                          observables=observables, engines=engines,
                          projector_mode=projector_mode, output_dir=out_dir)


def _classify_observable(name: str):
    """Return (kind, args) for an observable token; raise ConfigParse if bad."""
    if name in ("dipole", "energy"):
        return name, ()
    if name.startswith("population_") and name[len("population_"):] in ("j", "i", "a"):
        return "population", (name[len("population_"):],)
    parts = name.split("_")
    if parts[0] == "probability" and len(parts) == 2 and parts[1].isdigit():
        i = int(parts[1])
        if 0 <= i <= 8:
            return "probability", (i,)
    if parts[0] == "coherence" and len(parts) == 3 and parts[1].isdigit() and parts[2].isdigit():
        i, j = int(parts[1]), int(parts[2])
        if 0 <= i <= 8 and 0 <= j <= 8:
            return "coherence", (i, j)
    raise ConfigParse(f"key 'observables': unknown observable {name!r}")


def write_csv(path: Path, times_au: np.ndarray, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=complex)
    with open(path, "w") as fh:
        fh.write("t_fs,value_re,value_im\n")
        for t, v in zip(times_au / units.FS_TO_AU, values):
            fh.write(f"{t:.16e},{v.real:.16e},{v.imag:.16e}\n")


def read_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    data = np.atleast_2d(data)
    return data[:, 0], data[:, 1] + 1j * data[:, 2]


def _compare_series(name: str, kind: str, exact_vals: np.ndarray,
                    sr_vals: np.ndarray) -> ComparisonReport:
    diff = np.abs(sr_vals - exact_vals)
    max_abs = float(diff.max())
    rms = float(np.sqrt(np.mean(diff ** 2)))
    ptp = float(exact_vals.real.max() - exact_vals.real.min())
    rel_rms = rms / ptp if ptp > 0 else None
    if kind in ("probability", "coherence"):
        gate_kind, gate = "abs_dev", ABS_DEV_GATE
        passed = max_abs <= gate
    else:
        gate_kind, gate = "rel_rms", REL_RMS_GATE
        passed = rel_rms is None or rel_rms <= gate
    return ComparisonReport(observable=name, max_abs=max_abs, rms=rms,
                            rel_rms=rel_rms, gate=gate, gate_kind=gate_kind,
                            passed=passed)


class _Workspace:
    """Everything derived from the model parameters, built once per scenario."""

    def __init__(self, params: model.ModelParams):
        self.params = params
        self.basis = model.build_basis()
        self.exc = model.build_excitations(self.basis, params)
        self.h0 = model.build_h0(params, self.exc, self.basis)
        self.d = model.build_dipole(params, self.exc)
        self.spectrum = exact.diagonalize(self.h0)
        self.ground = ground.solve_ground(params, self.h0, self.exc)
        self.eom = eom.solve_eom(eom.jacobian(self.ground, self.h0, self.exc),
                                 self.ground, self.exc)

    def operator(self, kind: str, args) -> np.ndarray:
        if kind == "dipole":
            return self.d
        if kind == "energy":
            return self.h0
        if kind == "population":
            return model.build_level_population(args[0], self.basis)
        raise ValueError(kind)


def _exact_series(ws: _Workspace, traj: exact.WaveTrajectory, name: str) -> np.ndarray:
    kind, args = _classify_observable(name)
    if kind in ("dipole", "energy", "population"):
        return exact.observable(traj, ws.operator(kind, args)).values
    if kind == "probability":
        return exact.coherence_exact(traj, ws.spectrum, args[0], args[0]).values.real
    return exact.coherence_exact(traj, ws.spectrum, args[0], args[1]).values


def _sr_series(ws: _Workspace, traj: sr.SrTrajectory, name: str,
               projector_mode: str) -> np.ndarray:
    kind, args = _classify_observable(name)
    if kind in ("dipole", "energy", "population"):
        return sr.observable_series(traj, ws.operator(kind, args), ws.exc).values
    mode = projector_mode
    if kind == "probability":
        return sr.coherence_sr(traj, args[0], args[0], ws.eom, ws.ground,
                               ws.exc, mode=mode).values.real
    return sr.coherence_sr(traj, args[0], args[1], ws.eom, ws.ground,
                           ws.exc, mode=mode).values


def run(config_path: str | Path) -> int:
    """Execute one scenario config; write CSVs and report.txt."""
    cfg = load_config(config_path)
    try:
        ws = _Workspace(cfg.params)
        sup = cfg.superposition
        cfg.output_dir.mkdir(parents=True, exist_ok=True)

        series: dict[tuple[str, str], np.ndarray] = {}
        times_au = None
        if "exact" in cfg.engines:
            psi0 = exact.initial_state(ws.spectrum, s=sup.s, c=sup.c)
            traj = exact.propagate(psi0, cfg.params, ws.h0, ws.d)
            times_au = traj.times
            for name in cfg.observables:
                series[("exact", name)] = _exact_series(ws, traj, name)
        if "sr" in cfg.engines:
            state0 = sr.init_sr(sup, ws.eom, ws.ground, ws.h0, ws.exc)
            traj = sr.propagate_sr(state0, cfg.params, ws.h0, ws.d, ws.exc)
            times_au = traj.times
            for name in cfg.observables:
                series[("sr", name)] = _sr_series(ws, traj, name, cfg.projector_mode)
    except SrccError as err:
        raise ScenarioFailure(f"scenario {config_path} failed: {err}") from err

    for (engine, name), values in series.items():
        write_csv(cfg.output_dir / f"{engine}_{name}.csv", times_au, values)

    reports = []
    if "exact" in cfg.engines and "sr" in cfg.engines:
        for name in cfg.observables:
            kind, _ = _classify_observable(name)
            reports.append(_compare_series(
                name, kind, series[("exact", name)], series[("sr", name)]))

    lines = [f"scenario: {config_path}",
             f"engines: {', '.join(cfg.engines)}",
             f"steps: {cfg.params.n_steps}  t_final: {cfg.params.t_final} fs"]
    all_pass = True
    for rep in reports:
        lines.append(rep.line())
        all_pass = all_pass and rep.passed
    if reports:
        lines.append("status: " + ("PASS" if all_pass else "FAIL"))
    report_path = cfg.output_dir / "report.txt"
    report_path.write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0 if all_pass else 2


def tables(preset: str, alphas_ev: list[float],
           output_dir: str | Path | None = None) -> int:
    """Emit the golden energy and amplitude tables for one preset."""
    preset = preset.upper()
    if preset not in ("A", "B"):
        raise ConfigParse(f"preset must be A or B, got {preset!r}")
    out = Path(os.environ.get("SRCC_OUTPUT_DIR") or output_dir or ".")
    out.mkdir(parents=True, exist_ok=True)

    maker = model.ModelParams.preset_a if preset == "A" else model.ModelParams.preset_b
    basis = model.build_basis()

    columns = []       # one entry per alpha: (alpha_ev, energies (9,), amps (8,))
    for alpha in [0.0] + list(alphas_ev):
        params = maker(alpha=alpha)
        exc = model.build_excitations(basis, params)
        h0 = model.build_h0(params, exc, basis)
        gs = ground.solve_ground(params, h0, exc)
        es = eom.solve_eom(eom.jacobian(gs, h0, exc), gs, exc)
        energies = np.concatenate([[gs.energy], gs.energy + es.omegas])
        columns.append((alpha, energies, gs.t_amp))

    header = "state" + "".join(f"  alpha={c[0]:g}eV".rjust(14) for c in columns)
    lines = [header]
    for n in range(9):
        lines.append(f"E_{n}  " + "".join(f"  {c[1][n]:12.8f}" for c in columns))
    (out / f"energies_{preset}.txt").write_text("\n".join(lines) + "\n")

    header = "amplitude" + "".join(f"  alpha={c[0]:g}eV".rjust(14) for c in columns)
    lines = [header]
    for m in range(8):
        lines.append(f"t_{m + 1}  " + "".join(f"  {c[2][m]:12.8f}" for c in columns))
    (out / f"amplitudes_{preset}.txt").write_text("\n".join(lines) + "\n")
    print(f"wrote energies_{preset}.txt and amplitudes_{preset}.txt to {out}")
    return 0


def compare(path_a: str | Path, path_b: str | Path, gate: float) -> int:
    """Compare two CSV series; pass iff relative-RMS <= gate."""
    t_a, v_a = read_csv(path_a)
    t_b, v_b = read_csv(path_b)
    if t_a.shape != t_b.shape or not np.allclose(t_a, t_b, atol=1e-12, rtol=0):
        raise GridMismatch(
            f"time grids differ between {path_a} and {path_b}; resampling refused")
    rep = _compare_series(f"{Path(path_a).name} vs {Path(path_b).name}",
                          "generic", v_a, v_b)
    rep.gate = gate
    rep.passed = rep.rel_rms is None or rep.rel_rms <= gate
    print(rep.line())
    return 0 if rep.passed else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="srcc",
        description="Second-response CC propagation of quantum superpositions "
                    "on a three-level model.")
    subs = parser.add_subparsers(dest="command", required=True)

    p_run = subs.add_parser("run", help="run a scenario config")
    p_run.add_argument("config", help="path to INI-style scenario config")

    p_tab = subs.add_parser("tables", help="emit golden energy/amplitude tables")
    p_tab.add_argument("--preset", required=True, choices=["A", "B", "a", "b"])
    p_tab.add_argument("--alphas", nargs="*", type=float, default=[0.5, 4.0, 8.0],
                       help="regularization strengths in eV")
    p_tab.add_argument("--output-dir", default=None)

    p_cmp = subs.add_parser("compare", help="compare two CSV time series")
    p_cmp.add_argument("csv_a")
    p_cmp.add_argument("csv_b")
    p_cmp.add_argument("--gate", type=float, default=REL_RMS_GATE,
                       help="relative-RMS threshold (fraction, default 0.01)")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return run(args.config)
        if args.command == "tables":
            return tables(args.preset, args.alphas, args.output_dir)
        return compare(args.csv_a, args.csv_b, args.gate)
    except SrccError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
