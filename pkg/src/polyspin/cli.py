"""Command-line interface: TOML configuration in, CSV artifacts out.

Subcommands: gamma, spectrum, effective, evolve, scan, pathology, selftest.
Every run is deterministic: identical configurations produce byte-identical
output files.  Exit codes: 0 success, 1 configuration error, 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import output
from .bases import SPIN_DOWN, FockSpinState, fock_basis_cutoff, shell_basis, shell_window_basis
from .dynamics import evolve, fock_caps, initial_state, l2_discrepancy, region_scan
from .effective import (
    RabiAmplitudes,
    dressed_energies,
    effective_hamiltonian,
)
from .hamiltonian import SpinFieldParams, assemble_rabi
from .shell import gamma_table, mode_set
from .spectra import avoided_crossing, degenerate_basis_pathology, detuning_scan

SUBCOMMANDS = ("gamma", "spectrum", "effective", "evolve", "scan", "pathology", "selftest")


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


_SCHEMA = {
    "field": {
        "harmonics": list,
        "alphas": list,
        "rabi": list,
        "couplings": list,
        "omega_f": (int, float),
    },
    "spin": {
        "omega0": (int, float),
        "detuning0": (int, float),
        "resonant_harmonic": int,
    },
    "basis": {
        "kind": str,
        "depth": int,
        "support_c": (int, float),
        "caps": list,
        "transitions": str,
    },
    "task": {
        "epsilon": (int, float),
        "q": int,
        "order": int,
        "exact_ratios": bool,
        "delta_min": (int, float),
        "delta_max": (int, float),
        "samples": int,
        "time_samples": int,
        "horizon_factor": (int, float),
        "g0": (int, float),
        "g_ratio": (int, float),
        "x_axis": str,
        "y_axis": str,
        "alpha_sq_values": list,
        "omega_low_values": list,
        "g_ratio_values": list,
        "contour_level": (int, float),
        "crossings": list,
        "seed": int,
    },
    "output": {
        "svg": bool,
    },
}


@dataclass
class RunConfig:
    """Validated run configuration; every quantity in units of omega_f."""

    field: dict = dc_field(default_factory=dict)
    spin: dict = dc_field(default_factory=dict)
    basis: dict = dc_field(default_factory=dict)
    task: dict = dc_field(default_factory=dict)
    output: dict = dc_field(default_factory=dict)

    def modes(self):
        f = self.field
        ks = f["harmonics"]
        alphas = f.get("alphas", [0.0] * len(ks))
        if "couplings" in f:
            gs = f["couplings"]
        elif "rabi" in f:
            gs = [om / (2.0 * a) if a != 0 else 0.0 for om, a in zip(f["rabi"], alphas)]
        else:
            gs = [0.0] * len(ks)
        return mode_set(ks, alphas, gs, omega_f=f.get("omega_f", 1.0))

    def resonant_harmonic(self) -> int:
        if "resonant_harmonic" in self.spin:
            return self.spin["resonant_harmonic"]
        ks = self.field["harmonics"]
        return ks[len(ks) // 2]

    def omega0(self) -> float:
        if "omega0" in self.spin:
            return float(self.spin["omega0"])
        j = self.resonant_harmonic()
        return (j + float(self.spin.get("detuning0", 0.0))) * self.field.get("omega_f", 1.0)

    def omega0_rabi(self) -> float:
        """Rabi-model spin splitting: resonant with the lowest mode unless set."""
        if "omega0" in self.spin:
            return float(self.spin["omega0"])
        j = self.spin.get("resonant_harmonic", self.field["harmonics"][0])
        return (j + float(self.spin.get("detuning0", 0.0))) * self.field.get("omega_f", 1.0)

    def amplitudes(self) -> RabiAmplitudes:
        f = self.field
        j = self.resonant_harmonic()
        if "rabi" in f:
            return RabiAmplitudes(
                dict(zip(f["harmonics"], f["rabi"])), j=j, omega_f=f.get("omega_f", 1.0)
            )
        modes = self.modes()
        return RabiAmplitudes(
            {m.k: 2.0 * m.g * m.alpha for m in modes.modes}, j=j, omega_f=modes.omega_f
        )


def parse_config(text: str) -> RunConfig:
    """Parse and validate; reports every problem found, not only the first."""
    errors = []
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"TOML syntax: {exc}"]) from exc
    for section in raw:
        if section not in _SCHEMA:
            errors.append(f"unknown section [{section}]")
    for section, keys in _SCHEMA.items():
        body = raw.get(section, {})
        if not isinstance(body, dict):
            errors.append(f"[{section}] must be a table")
            continue
        for key, value in body.items():
            if key not in keys:
                errors.append(f"unknown key {section}.{key}")
                continue
            expected = keys[key]
            if not isinstance(value, expected) or isinstance(value, bool) != (expected is bool):
                errors.append(f"{section}.{key}: expected {getattr(expected, '__name__', expected)}")
    field = raw.get("field", {})
    if "harmonics" in field:
        ks = field["harmonics"]
        if not all(isinstance(k, int) and k >= 1 for k in ks):
            errors.append("field.harmonics: positive integers required")
        elif sorted(ks) != list(ks) or len(set(ks)) != len(ks):
            errors.append("field.harmonics: must be distinct and sorted ascending")
        for name in ("alphas", "rabi", "couplings"):
            if name in field and len(field[name]) != len(ks):
                errors.append(f"field.{name}: length must match field.harmonics")
        if "rabi" in field and "couplings" in field:
            errors.append("field.rabi and field.couplings are mutually exclusive")
        if "rabi" in field and any(v < 0 for v in field["rabi"]):
            errors.append("field.rabi: values must be >= 0")
        if "couplings" in field and any(v < 0 for v in field["couplings"]):
            errors.append("field.couplings: values must be >= 0")
    task = raw.get("task", {})
    if "epsilon" in task and not (0.0 < task["epsilon"] < 1.0):
        errors.append("task.epsilon: must lie in (0, 1)")
    if "samples" in task and task["samples"] < 2:
        errors.append("task.samples: must be >= 2")
    if {"g0", "g_ratio"} <= task.keys():
        errors.append("task.g0 and task.g_ratio are mutually exclusive")
    basis = raw.get("basis", {})
    if "kind" in basis and basis["kind"] not in ("fock", "shell", "both"):
        errors.append("basis.kind: one of fock, shell, both")
    if "transitions" in basis and basis["transitions"] not in ("rwa", "both"):
        errors.append("basis.transitions: one of rwa, both")
    spin = raw.get("spin", {})
    if {"omega0", "detuning0"} <= spin.keys():
        errors.append("spin.omega0 and spin.detuning0 are mutually exclusive")
    if errors:
        raise ConfigError(errors)
    return RunConfig(**{s: raw.get(s, {}) for s in _SCHEMA})


def _require(cfg: RunConfig, pairs):
    missing = [f"{sec}.{key}" for sec, key in pairs if key not in getattr(cfg, sec)]
    if missing:
        raise ConfigError([f"missing required key {m}" for m in missing])


def _maybe_svg(cfg, out_dir, stem, curves):
    if cfg.output.get("svg", False):
        output.write_svg_polylines(out_dir / f"{stem}.svg", curves)


def _cmd_gamma(cfg: RunConfig, out_dir: Path, fmt: str, threads: int):
    _require(cfg, [("field", "harmonics"), ("field", "alphas")])
    modes = cfg.modes()
    table = gamma_table(
        modes, cfg.task.get("epsilon", 1e-12), support_c=cfg.basis.get("support_c", 8.0)
    )
    rows = table.csv_rows()
    output.write_table(out_dir / "gamma.csv", ("N", "gamma_sq"), rows, fmt)
    _maybe_svg(cfg, out_dir, "gamma", [([r[0] for r in rows], [r[1] for r in rows])])
    return 0


def _scan_from_config(cfg: RunConfig):
    modes = cfg.modes()
    j = cfg.resonant_harmonic()
    table = gamma_table(
        modes, cfg.task.get("epsilon", 1e-12), support_c=cfg.basis.get("support_c", 8.0)
    )
    seed_n = int(round(table.mean / table.k0)) * table.k0
    basis = shell_basis(
        table,
        seed_n,
        cfg.basis.get("depth", 6),
        resonant_k=j,
        transitions=cfg.basis.get("transitions", "rwa"),
    )
    deltas = np.linspace(
        cfg.task.get("delta_min", -2.5),
        cfg.task.get("delta_max", 2.5),
        cfg.task.get("samples", 401),
    )
    return detuning_scan(basis, table, modes, deltas, cfg.task.get("exact_ratios", False))


def _cmd_spectrum(cfg: RunConfig, out_dir: Path, fmt: str, threads: int, dump_basis=False):
    _require(cfg, [("field", "harmonics"), ("field", "alphas")])
    scan = _scan_from_config(cfg)
    output.write_table(
        out_dir / "spectrum.csv", ("delta0", "level", "energy", "branch"), scan.csv_rows(), fmt
    )
    if dump_basis:
        output.write_table(
            out_dir / "basis.csv", ("index", "shell", "spin"), scan.basis.csv_rows(), fmt
        )
    if cfg.task.get("crossings"):
        rows = []
        for q in cfg.task["crossings"]:
            rows.extend(avoided_crossing(scan, int(q)).csv_rows())
        output.write_table(
            out_dir / "crossings.csv", ("q", "gap", "position", "shift"), rows, fmt
        )
    curves = [
        (scan.delta_values.tolist(), scan.levels[:, b].tolist())
        for b in range(scan.levels.shape[1])
    ]
    _maybe_svg(cfg, out_dir, "spectrum", curves)
    return 0


def _cmd_effective(cfg: RunConfig, out_dir: Path, fmt: str, threads: int):
    _require(cfg, [("field", "harmonics")])
    amps = cfg.amplitudes()
    q = cfg.task.get("q", 0)
    order = cfg.task.get("order", 3)
    deltas = np.linspace(
        cfg.task.get("delta_min", -0.5),
        cfg.task.get("delta_max", 0.5),
        cfg.task.get("samples", 401),
    )
    rows = []
    for d in deltas:
        eff = effective_hamiltonian(q, amps, float(d), order=order)
        e = dressed_energies(eff)
        om_eff = 2.0 * abs(eff.r_ab)
        om_tilde = math.hypot(eff.delta - (eff.r_bb - eff.r_aa), om_eff)
        p_peak = 0.0 if om_tilde == 0.0 else (om_eff / om_tilde) ** 2
        rows.append(
            (
                q,
                float(d),
                eff.r_aa,
                eff.r_bb,
                float(np.real(eff.r_ab)),
                float(np.imag(eff.r_ab)),
                e.e_plus,
                e.e_minus,
                p_peak,
            )
        )
    output.write_table(
        out_dir / "effective.csv",
        ("q", "delta", "r_aa", "r_bb", "re_r_ab", "im_r_ab", "e_plus", "e_minus", "p_peak"),
        rows,
        fmt,
    )
    _maybe_svg(cfg, out_dir, "effective", [(list(deltas), [r[8] for r in rows])])
    return 0


def _rabi_setup(cfg: RunConfig, kind: str):
    modes = cfg.modes()
    params = SpinFieldParams(omega0=cfg.omega0_rabi(), rwa=False)
    if "g0" in cfg.task:
        g0 = float(cfg.task["g0"])
    else:
        ks = modes.harmonics
        omega_bar = 0.5 * (ks[0] + ks[-1]) * modes.omega_f
        g0 = float(cfg.task.get("g_ratio", 0.1)) * omega_bar
    if kind == "fock":
        caps = cfg.basis.get("caps") or [fock_caps(m.nbar) for m in modes.modes]
        basis = fock_basis_cutoff(modes, caps)
        op = assemble_rabi(basis, modes, params, g0)
        psi = initial_state(basis, modes)
    else:
        table = gamma_table(
            modes, cfg.task.get("epsilon", 1e-12), support_c=cfg.basis.get("support_c", 8.0)
        )
        basis = shell_window_basis(table)
        op = assemble_rabi(basis, modes, params, g0, table=table)
        psi = initial_state(basis, modes, table=table)
    return op, psi, g0


def _cmd_evolve(cfg: RunConfig, out_dir: Path, fmt: str, threads: int):
    _require(cfg, [("field", "harmonics"), ("field", "alphas")])
    kind = cfg.basis.get("kind", "shell")
    kinds = ("fock", "shell") if kind == "both" else (kind,)
    traces = {}
    g0 = None
    for k in kinds:
        op, psi, g0 = _rabi_setup(cfg, k)
        t_grid = np.linspace(
            0.0,
            cfg.task.get("horizon_factor", 1.0) / g0,
            cfg.task.get("time_samples", 2048),
        )
        tr = evolve(op, psi.vector, t_grid)
        traces[k] = tr
        name = "trace.csv" if kind != "both" else f"trace_{k}.csv"
        rows = list(zip(tr.times.tolist(), tr.inversion.tolist(), tr.norm.tolist()))
        output.write_table(out_dir / name, ("t", "inversion", "norm"), rows, fmt)
        _maybe_svg(cfg, out_dir, name[:-4], [(tr.times.tolist(), tr.inversion.tolist())])
    if kind == "both":
        l2 = l2_discrepancy(traces["fock"], traces["shell"], g0)
        output.write_table(out_dir / "l2.csv", ("g0", "l2"), [(g0, l2)], fmt)
    return 0


def _cmd_scan(cfg: RunConfig, out_dir: Path, fmt: str, threads: int):
    task = cfg.task
    x_name = task.get("x_axis", "omega_low")
    y_name = task.get("y_axis", "alpha_sq")
    values = {
        "alpha_sq": task.get("alpha_sq_values"),
        "omega_low": task.get("omega_low_values"),
        "g_ratio": task.get("g_ratio_values"),
    }
    for axis in (x_name, y_name):
        if values.get(axis) is None:
            raise ConfigError([f"task.{axis}_values required for axis {axis}"])
    fixed = {}
    for name, vals in values.items():
        if name not in (x_name, y_name):
            if vals is not None and len(vals) == 1:
                fixed[name] = vals[0]
            elif name == "g_ratio" and "g_ratio" in task:
                fixed[name] = task["g_ratio"]
            elif vals is None and name in task:
                fixed[name] = task[name]
            else:
                raise ConfigError([f"fixed axis {name} needs a single value"])
    scan = region_scan(
        x_name,
        values[x_name],
        y_name,
        values[y_name],
        fixed,
        contour_level=task.get("contour_level", 1e-3),
        threads=threads,
        t_samples=task.get("time_samples", 2048),
        epsilon=task.get("epsilon", 1e-12),
    )
    output.write_table(out_dir / "scan.csv", (x_name, y_name, "l2", "valid"), scan.csv_rows(), fmt)
    seg_rows = [
        (x1, y1, x2, y2) for (x1, y1), (x2, y2) in scan.contour_segments()
    ]
    output.write_table(out_dir / "contour.csv", ("x1", "y1", "x2", "y2"), seg_rows, fmt)
    return 0


def _cmd_pathology(cfg: RunConfig, out_dir: Path, fmt: str, threads: int):
    _require(cfg, [("field", "harmonics"), ("field", "alphas")])
    modes = cfg.modes()
    occ = tuple(int(round(m.nbar)) for m in modes.modes)
    report = degenerate_basis_pathology(
        modes,
        FockSpinState(occ, SPIN_DOWN),
        cfg.basis.get("depth", 3),
        epsilon=cfg.task.get("epsilon", 1e-12),
        support_c=cfg.basis.get("support_c", 8.0),
    )
    output.write_table(
        out_dir / "pathology.csv",
        ("record", "a", "b", "c", "d", "e"),
        report.csv_rows(),
        fmt,
    )
    return 0


def _cmd_selftest(cfg: RunConfig, out_dir: Path, fmt: str, threads: int):
    from . import acceptance

    results = acceptance.run_all(progress=lambda line: print(line, flush=True))
    rows = [(r.cid, r.name, r.passed, r.detail) for r in results]
    output.write_table(out_dir / "selftest.csv", ("id", "criterion", "passed", "detail"), rows, fmt)
    return 0 if all(r.passed for r in results) else 2


_HANDLERS = {
    "gamma": _cmd_gamma,
    "spectrum": _cmd_spectrum,
    "effective": _cmd_effective,
    "evolve": _cmd_evolve,
    "scan": _cmd_scan,
    "pathology": _cmd_pathology,
    "selftest": _cmd_selftest,
}

_HELP = {
    "gamma": "tabulate the shell weights gamma_N^2 of the configured field",
    "spectrum": "dressed-level detuning scan on the shell ladder, with optional crossing reports",
    "effective": "analytic effective two-level quantities over a detuning grid",
    "evolve": "Rabi-model inversion trace in the chosen basis (or both, with their L2 gap)",
    "scan": "map the shell-versus-Fock L2 discrepancy over a field-parameter grid",
    "pathology": "dressed-energy table exposing broken degeneracies of the connected Fock basis",
    "selftest": "run the acceptance suite and print one pass/fail line per criterion",
}


def dispatch(subcommand: str, cfg: RunConfig, out_dir, fmt: str = "csv", threads: int = 1) -> int:
    """Run one subcommand; returns the process exit status."""
    if subcommand not in _HANDLERS:
        raise ConfigError([f"unknown subcommand {subcommand!r}"])
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return _HANDLERS[subcommand](cfg, out, fmt, threads)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="polyspin",
        description="Spin-half in a multi-frequency coherent field: spectra, "
        "effective Hamiltonians, collapse/revival dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", type=Path, default=None, help="TOML configuration file")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker threads for scans")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        if name == "spectrum":
            p.add_argument("--dump-basis", action="store_true", help="also write basis.csv")
    args = parser.parse_args(argv)
    try:
        if args.config is not None:
            cfg = parse_config(args.config.read_text())
        elif args.command == "selftest":
            cfg = RunConfig()
        else:
            raise ConfigError(["--config is required for this subcommand"])
        kwargs = {}
        if args.command == "spectrum":
            kwargs["dump_basis"] = args.dump_basis
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _HANDLERS[args.command](cfg, out, args.format, args.threads, **kwargs)
    except ConfigError as exc:
        for e in exc.errors:
            print(json.dumps({"error": "config", "message": e}), file=sys.stderr)
        return 1
    except Exception as exc:  # numerical or environment failure
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
