"""Command-line interface: sweeps, rail reports, and the mesh compiler.

Commands
--------
fringe-sweep   simulate the two-photon sweep; writes fringes.csv, fit.csv
singles-sweep  simulate heralded one-photon sweeps; writes singles.csv, rse.csv
rails          print the rail unitaries and geometric-phase reports
decompose      factor a unitary matrix file into a beamsplitter mesh

Every command writes a run manifest next to its outputs; re-running with the
same config and seed reproduces all CSV files byte for byte.  Exit codes:
0 success, 2 configuration/input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .circuits import (
    MeshPlan,
    Beamsplitter,
    PhaseShift,
    Swap,
    circuit_from_json,
    circuit_unitary,
    physical_unitary,
    reck_decompose,
    recompose,
    theta_prime_of,
)
from .experiment import (
    LIVE_PAIRS,
    PAIRS,
    SINGLES_INPUTS,
    CountRecord,
    FitError,
    SweepConfig,
    fit_pair_fringes,
    relative_standard_error,
    simulate_sweep,
    subtract_accidentals,
    theta_prime,
)
from .linalg import is_unitary
from .polarization import (
    RAIL_INPUTS,
    RAIL_PRESETS,
    geometric_phase_report,
    rail_composite,
    wrap_angle,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_CONFIG_SCHEMA = 1


class ConfigError(ValueError):
    """Bad config file or bad command input; maps to exit code 2."""


def _fmt(x) -> str:
    """Floats with 12 significant digits; integers verbatim."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def format_complex(z: complex) -> str:
    """Matrix-entry text form re+imi, e.g. -0.5+0.866025403784i."""
    return f"{_fmt(z.real)}{'+' if z.imag >= 0 else '-'}{_fmt(abs(z.imag))}i"


def format_matrix(m) -> str:
    """Row-major, comma-separated re+imi pairs, one row per line."""
    a = np.asarray(m, dtype=np.complex128)
    return "\n".join(", ".join(format_complex(z) for z in row) for row in a)


def save_matrix(path, m) -> None:
    """Write a matrix in the decompose input format (n, then re,im pairs)."""
    a = np.asarray(m, dtype=np.complex128)
    lines = [str(a.shape[0])]
    for row in a:
        lines.append(" ".join(f"{_fmt(z.real)},{_fmt(z.imag)}" for z in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_matrix(path) -> np.ndarray:
    """Read the decompose input format: first line n, then n rows of n
    whitespace-separated re,im pairs."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ConfigError(f"{path}: empty matrix file")
    try:
        n = int(lines[0])
    except ValueError:
        raise ConfigError(f"{path}: first line must be the dimension, got {lines[0]!r}")
    if len(lines) != n + 1:
        raise ConfigError(f"{path}: expected {n} matrix rows, found {len(lines) - 1}")
    out = np.zeros((n, n), dtype=np.complex128)
    for r, line in enumerate(lines[1:]):
        parts = line.split()
        if len(parts) != n:
            raise ConfigError(f"{path}: row {r} has {len(parts)} entries, expected {n}")
        for c, token in enumerate(parts):
            try:
                re_s, im_s = token.split(",")
                out[r, c] = complex(float(re_s), float(im_s))
            except ValueError:
                raise ConfigError(f"{path}: row {r} entry {c}: bad re,im pair {token!r}")
    return out


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------


def _field(doc: dict, name: str, kind, default):
    if name not in doc:
        if default is None:
            raise ConfigError(f"field '{name}': required")
        return default
    value = doc[name]
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"field '{name}': cannot interpret {value!r}")


def load_sweep_config(path, seed_override=None) -> tuple[SweepConfig, dict]:
    """Parse and validate a sweep config; returns (config, resolved dict)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}")
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    schema = _field(doc, "schema", int, None)
    if schema != _CONFIG_SCHEMA:
        raise ConfigError(f"field 'schema': expected {_CONFIG_SCHEMA}, got {schema}")
    if "alpha_grid" in doc:
        grid = [float(a) for a in doc["alpha_grid"]]
    else:
        points = _field(doc, "alpha_points", int, 64)
        start = _field(doc, "alpha_start", float, 0.0)
        stop = _field(doc, "alpha_stop", float, 2.0 * math.pi)
        if points < 1:
            raise ConfigError("field 'alpha_points': must be >= 1")
        grid = list(np.linspace(start, stop, points, endpoint=False))
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("field 'alpha_grid': must be strictly ascending")
    drift = None
    if "efficiency_drift" in doc and doc["efficiency_drift"]:
        drift = {}
        for key, val in doc["efficiency_drift"].items():
            try:
                drift[int(key)] = (float(val[0]), float(val[1]))
            except (TypeError, ValueError, IndexError):
                raise ConfigError(f"field 'efficiency_drift': bad entry {key!r}: {val!r}")
    seed = _field(doc, "seed", int, 0)
    if seed_override is not None:
        seed = int(seed_override)
    try:
        config = SweepConfig(
            alpha_grid=tuple(grid),
            pair_rate=_field(doc, "pair_rate", float, 0.0),
            singles_rate=_field(doc, "singles_rate", float, 0.0),
            efficiencies=tuple(_field(doc, "efficiencies", list, [1.0, 1.0, 1.0, 1.0])),
            accidental_rate=_field(doc, "accidental_rate", float, 0.0),
            x=_field(doc, "x", float, 1.0),
            seed=seed,
            efficiency_drift=drift,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    resolved = {
        "schema": _CONFIG_SCHEMA,
        "alpha_grid": [float(a) for a in config.alpha_grid],
        "pair_rate": config.pair_rate,
        "singles_rate": config.singles_rate,
        "efficiencies": list(config.efficiencies),
        "accidental_rate": config.accidental_rate,
        "x": config.x,
        "seed": config.seed,
        "efficiency_drift": {str(k): list(v) for k, v in (drift or {}).items()},
    }
    return config, resolved


def _write_manifest(out_dir: Path, command: str, resolved: dict, seed, outputs, extra=None):
    manifest = {
        "command": command,
        "config": resolved,
        "seed": seed,
        "version": __version__,
        "outputs": sorted(str(Path(p).name) for p in outputs),
    }
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_fringe_sweep(args) -> int:
    config, resolved = load_sweep_config(args.config, args.seed)
    records = simulate_sweep(config)
    corrected = subtract_accidentals(records, config.accidental_rate)
    fits = fit_pair_fringes(corrected)

    fringe_lines = ["alpha_rad,theta_prime_rad,pair,counts,accidentals"]
    for rec in records:
        for pair in PAIRS:
            fringe_lines.append(
                ",".join(
                    [
                        _fmt(rec.alpha),
                        _fmt(theta_prime(rec.alpha)),
                        f"{pair[0]}{pair[1]}",
                        _fmt(rec.pair_counts[pair]),
                        _fmt(rec.accidentals_estimate[pair]),
                    ]
                )
            )
    fit_lines = ["pair,offset,amplitude,phase0_rad,visibility"]
    visibilities = []
    for pair in PAIRS:
        fit = fits[pair]
        if fit is None:
            fit_lines.append(f"{pair[0]}{pair[1]},0,0,0,0")
            continue
        fit_lines.append(
            ",".join(
                [
                    f"{pair[0]}{pair[1]}",
                    _fmt(fit.offset),
                    _fmt(fit.amplitude),
                    _fmt(fit.phase0),
                    _fmt(fit.visibility),
                ]
            )
        )
        if pair in LIVE_PAIRS:
            visibilities.append(fit.visibility)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    fringe_path = out_dir / "fringes.csv"
    fringe_path.write_text("\n".join(fringe_lines) + "\n")
    fit_path = out_dir / "fit.csv"
    fit_path.write_text("\n".join(fit_lines) + "\n")
    outputs = [fringe_path, fit_path]
    if args.plot:
        from .plots import plot_fringes

        outputs.append(plot_fringes(records, fits, out_dir / "fringes.png"))
    extra = {
        "theta_prime_offset_rad": theta_prime_of(physical_unitary(0.0)),
        "mean_visibility": float(np.mean(visibilities)) if visibilities else 0.0,
    }
    _write_manifest(out_dir, "fringe-sweep", resolved, config.seed, outputs, extra)
    print(f"fringe-sweep: {len(records)} settings -> {out_dir}")
    if visibilities:
        print(f"mean fitted visibility (live pairs): {np.mean(visibilities):.6f}")
    return EXIT_OK


def _cmd_singles_sweep(args) -> int:
    config, resolved = load_sweep_config(args.config, args.seed)
    records = simulate_sweep(config)

    singles_lines = ["alpha_rad,input,detector,counts"]
    for rec in records:
        for inp in SINGLES_INPUTS:
            for det in range(4):
                singles_lines.append(
                    ",".join(
                        [
                            _fmt(rec.alpha),
                            str(inp),
                            str(det),
                            _fmt(rec.singles_counts[inp][det]),
                        ]
                    )
                )
    rse_lines = ["input,detector,mean_counts,rse"]
    rses = []
    for inp in SINGLES_INPUTS:
        for det in range(4):
            trace = [rec.singles_counts[inp][det] for rec in records]
            try:
                rse = relative_standard_error(trace)
            except ValueError as exc:
                print(f"singles-sweep: input {inp} detector {det}: {exc}", file=sys.stderr)
                return EXIT_NUMERIC
            rses.append(rse)
            rse_lines.append(f"{inp},{det},{_fmt(float(np.mean(trace)))},{_fmt(rse)}")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    singles_path = out_dir / "singles.csv"
    singles_path.write_text("\n".join(singles_lines) + "\n")
    rse_path = out_dir / "rse.csv"
    rse_path.write_text("\n".join(rse_lines) + "\n")
    outputs = [singles_path, rse_path]
    if args.plot:
        from .plots import plot_singles

        outputs.append(plot_singles(records, out_dir / "singles.png"))
    mean_rse = float(np.mean(rses))
    _write_manifest(
        out_dir, "singles-sweep", resolved, config.seed, outputs, {"mean_rse": mean_rse}
    )
    print(f"singles-sweep: {len(records)} settings -> {out_dir}")
    print(f"mean RSE over 8 traces: {mean_rse:.6f}")
    return EXIT_OK


def _phase_increment(u: np.ndarray, base: np.ndarray, i: int, j: int) -> float:
    """Phase change of one matrix entry vs its alpha=0 value; 0 if the entry
    carries no amplitude."""
    if abs(u[i, j]) < 1e-9 or abs(base[i, j]) < 1e-9:
        return 0.0
    return wrap_angle(float(np.angle(u[i, j]) - np.angle(base[i, j])))


def _rails_text(alpha: float, steps: int, table: int) -> str:
    lines = [f"alpha = {_fmt(alpha)} rad   (theta' = 4*alpha + c, c = "
             f"{_fmt(theta_prime_of(physical_unitary(0.0)))})", ""]
    base = {name: rail_composite(RAIL_PRESETS[name], 0.0) for name in RAIL_PRESETS}
    for name in ("rail-top", "rail-middle", "rail-bottom"):
        u = rail_composite(RAIL_PRESETS[name], alpha)
        report = geometric_phase_report(RAIL_PRESETS[name], RAIL_INPUTS[name], alpha, steps)
        lines.append(f"{name} composite:")
        lines.extend("  " + row for row in format_matrix(u).splitlines())
        d01 = _phase_increment(u, base[name], 0, 1)
        d10 = _phase_increment(u, base[name], 1, 0)
        lines.append(
            f"  off-diagonal phase increments vs alpha=0: d01 = {_fmt(d01)}, d10 = {_fmt(d10)}"
        )
        lines.append(
            "  report: pancharatnam = {}, solid_angle = {}, transport_residual = {}".format(
                _fmt(report.pancharatnam), _fmt(report.solid_angle), _fmt(report.dynamical_residual)
            )
        )
        lines.append("")
    if table:
        lines.append("alpha_rad,d_phase01_rad,d_phase10_rad,pancharatnam_rad,solid_angle_sr")
        base_b = base["rail-bottom"]
        a_max = alpha if alpha > 0 else math.pi / 4.0
        for k in range(table):
            a = a_max * k / table
            u = rail_composite(RAIL_PRESETS["rail-bottom"], a)
            rep = geometric_phase_report(RAIL_PRESETS["rail-bottom"], RAIL_INPUTS["rail-bottom"], a, steps)
            lines.append(
                ",".join(
                    _fmt(v)
                    for v in (
                        a,
                        _phase_increment(u, base_b, 0, 1),
                        _phase_increment(u, base_b, 1, 0),
                        rep.pancharatnam,
                        rep.solid_angle,
                    )
                )
            )
        lines.append("")
    return "\n".join(lines)


def _cmd_rails(args) -> int:
    if args.steps < 1:
        print("rails: --steps must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    text = _rails_text(args.alpha, args.steps, args.table)
    print(text)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rails_path = out_dir / "rails.txt"
    rails_path.write_text(text + "\n")
    outputs = [rails_path]
    if args.plot:
        from .plots import plot_rail_paths

        outputs.append(plot_rail_paths(args.alpha, out_dir / "rails.png"))
    _write_manifest(
        out_dir,
        "rails",
        {"alpha": args.alpha, "steps": args.steps, "table": args.table},
        None,
        outputs,
    )
    return EXIT_OK


def _plan_to_json(plan: MeshPlan, error: float) -> str:
    elements = []
    for elem in plan.elements:
        if isinstance(elem, Beamsplitter):
            elements.append({"type": "bs", "a": elem.mode_a, "b": elem.mode_b, "r": elem.reflectivity})
        elif isinstance(elem, PhaseShift):
            elements.append({"type": "phase", "mode": elem.mode, "phi": elem.phi})
        else:
            elements.append({"type": "swap", "a": elem.mode_a, "b": elem.mode_b})
    doc = {
        "modes": plan.modes,
        "elements": elements,
        "residual_phases": list(plan.residual_phases),
        "roundtrip_error": error,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def _cmd_decompose(args) -> int:
    if args.circuit:
        try:
            circuit = circuit_from_json(Path(args.matrix).read_text())
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{args.matrix}: {exc}")
        matrix = circuit_unitary(circuit)
    else:
        matrix = load_matrix(args.matrix)
    if not is_unitary(matrix, args.eps):
        gram_dev = float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0]))))
        print(
            f"decompose: input is not unitary within {args.eps} "
            f"(max |U^H U - I| = {gram_dev:.3e})",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    plan = reck_decompose(matrix, args.eps)
    error = float(np.max(np.abs(recompose(plan) - matrix)))
    print(f"mesh plan: {plan.beamsplitter_count()} beamsplitters over {plan.modes} modes")
    for elem in plan.elements:
        if isinstance(elem, Beamsplitter):
            print(f"  bs    modes ({elem.mode_a}, {elem.mode_b})  r = {_fmt(elem.reflectivity)}")
        elif isinstance(elem, PhaseShift):
            print(f"  phase mode {elem.mode}  phi = {_fmt(elem.phi)}")
    print("residual phases:", " ".join(_fmt(p) for p in plan.residual_phases))
    print(f"recomposition max error: {error:.3e}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    plan_path = out_dir / "plan.json"
    plan_path.write_text(_plan_to_json(plan, error) + "\n")
    _write_manifest(
        out_dir,
        "decompose",
        {"matrix": str(args.matrix), "circuit": bool(args.circuit), "eps": args.eps},
        None,
        [plan_path],
        {"roundtrip_error": error},
    )
    if error > 1e-9:
        print(f"decompose: roundtrip error {error:.3e} exceeds 1e-9", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="berrynet",
        description="Two-photon interference in a complex Hadamard network "
        "with a waveplate geometric phase",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config: bool):
        if needs_config:
            p.add_argument("--config", required=True, help="JSON sweep config")
            p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument(
            "--no-plot", dest="plot", action="store_false", help="skip figure rendering"
        )
        p.set_defaults(plot=True)

    p = sub.add_parser("fringe-sweep", help="two-photon coincidence sweep")
    add_common(p, True)
    p.set_defaults(func=_cmd_fringe_sweep)

    p = sub.add_parser("singles-sweep", help="heralded one-photon sweep")
    add_common(p, True)
    p.set_defaults(func=_cmd_singles_sweep)

    p = sub.add_parser("rails", help="rail unitaries and geometric-phase reports")
    p.add_argument("--alpha", type=float, default=0.0, help="shared waveplate angle (rad)")
    p.add_argument("--steps", type=int, default=256, help="path samples per plate")
    p.add_argument("--table", type=int, default=0, help="also print an N-point sweep table")
    add_common(p, False)
    p.set_defaults(func=_cmd_rails)

    p = sub.add_parser("decompose", help="triangular mesh decomposition of a unitary")
    p.add_argument("matrix", help="matrix file: first line n, then n rows of re,im pairs")
    p.add_argument(
        "--circuit",
        action="store_true",
        help="treat the input as a JSON circuit description and compile it first",
    )
    p.add_argument("--eps", type=float, default=1e-9, help="unitarity tolerance")
    add_common(p, False)
    p.set_defaults(func=_cmd_decompose)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"{args.command}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FitError as exc:
        print(f"{args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
