"""Command line driver: config ingestion, subcommands, deterministic emission.

Every subcommand reads one structured config file (YAML) with sections

    material:  {preset} or {gap_frequency, limit_regime, impedance_prefactor, name}
    geometry:  {f0, z0, length, g_geom, qubits: [{position, c_series}, ...]}
               or {ell_m, c_per_len, length, g_geom, qubits: [...]}
    qubit:     {omega_q, x_q, dipole_prefactor}
    solver:    {tol, max_iter, relaxation, N_max, epsilon_gap}
    output:    {format: csv|json, path, precision}

Frequencies at this boundary are ordinary frequencies in GHz; reduced units
appear only in conductivity tables (labelled nu/kappa).  Unknown keys are
rejected.  Exit codes: 0 success, 2 config error (nothing written), 3
numerical failure (partial table written, with a status column appended).

Output is deterministic: identical config and flags produce byte-identical
files (fixed float formatting, LF line endings, no timestamps).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError, DispersiveCqedError, DomainError
from .impedance import (
    LimitRegime,
    Material,
    aluminum,
    epsilon,
    kk_parts,
    niobium,
    surface_impedance,
)
from .lightmatter import (
    QubitParams,
    cc_comparator_term,
    coupling_strength,
    lamb_shift_report,
    normalized_convergence,
    spectral_density,
)
from .mattis_bardeen import ComplexFreq, sigma_oracle, sigma_real_axis, sigma_tilde
from .modes import (
    FixedPointOptions,
    QubitLoad,
    ResonatorGeometry,
    derive_line_constants,
    dispersive_modes,
    resonator_modes,
)

_EXIT_OK, _EXIT_CONFIG, _EXIT_NUMERICAL = 0, 2, 3
_DEFAULT_PRECISION = 12
_DEFAULT_N_MAX = 30

_PRESETS = {"aluminum": aluminum, "niobium": niobium}
_REGIMES = {
    "extreme_anomalous": LimitRegime.EXTREME_ANOMALOUS,
    "dirty": LimitRegime.DIRTY,
}


# ---------------------------------------------------------------------------
# config ingestion


def _check_keys(section: dict, allowed: set[str], context: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {context}: {', '.join(unknown)}")


def _as_mapping(obj, context: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{context} must be a mapping, got {type(obj).__name__}")
    return obj


def _build_material(section: dict) -> Material:
    _check_keys(
        section,
        {"preset", "gap_frequency", "limit_regime", "impedance_prefactor", "name"},
        "material",
    )
    if "preset" in section:
        preset = section["preset"]
        if preset not in _PRESETS:
            raise ConfigError(
                f"unknown material preset {preset!r}; choose from {sorted(_PRESETS)}"
            )
        material = _PRESETS[preset]()
        if "impedance_prefactor" in section:
            material = replace(
                material, impedance_prefactor=float(section["impedance_prefactor"])
            )
        for key in ("gap_frequency", "limit_regime", "name"):
            if key in section:
                raise ConfigError(f"material.{key} cannot be combined with a preset")
        return material
    for key in ("gap_frequency", "limit_regime", "impedance_prefactor"):
        if key not in section:
            raise ConfigError(f"material.{key} is required without a preset")
    regime = section["limit_regime"]
    if regime not in _REGIMES:
        raise ConfigError(
            f"material.limit_regime must be one of {sorted(_REGIMES)}, got {regime!r}"
        )
    return Material(
        gap_frequency=float(section["gap_frequency"]),
        limit_regime=_REGIMES[regime],
        impedance_prefactor=float(section["impedance_prefactor"]),
        name=str(section.get("name", "custom")),
    )


def _build_geometry(section: dict) -> ResonatorGeometry:
    _check_keys(
        section,
        {"f0", "z0", "length", "g_geom", "ell_m", "c_per_len", "qubits"},
        "geometry",
    )
    if "length" not in section or "g_geom" not in section:
        raise ConfigError("geometry.length and geometry.g_geom are required")
    length = float(section["length"])
    if "f0" in section:
        if "ell_m" in section or "c_per_len" in section:
            raise ConfigError("geometry: give either f0/z0 or ell_m/c_per_len, not both")
        ell_m, c_per_len = derive_line_constants(
            float(section["f0"]), float(section.get("z0", 50.0)), length
        )
    elif "ell_m" in section and "c_per_len" in section:
        ell_m, c_per_len = float(section["ell_m"]), float(section["c_per_len"])
    else:
        raise ConfigError("geometry needs f0 (with optional z0) or ell_m and c_per_len")
    qubits = []
    for i, entry in enumerate(section.get("qubits") or []):
        entry = _as_mapping(entry, f"geometry.qubits[{i}]")
        _check_keys(entry, {"position", "c_series"}, f"geometry.qubits[{i}]")
        if "position" not in entry or "c_series" not in entry:
            raise ConfigError(f"geometry.qubits[{i}] needs position and c_series")
        qubits.append(
            QubitLoad(position=float(entry["position"]), c_series=float(entry["c_series"]))
        )
    return ResonatorGeometry(
        length=length,
        ell_m=ell_m,
        c_per_len=c_per_len,
        g_geom=float(section["g_geom"]),
        qubits=tuple(qubits),
    )


def _build_qubit(section: dict) -> QubitParams:
    _check_keys(section, {"omega_q", "x_q", "dipole_prefactor"}, "qubit")
    if "omega_q" not in section or "x_q" not in section:
        raise ConfigError("qubit.omega_q and qubit.x_q are required")
    return QubitParams(
        omega_q=float(section["omega_q"]),
        x_q=float(section["x_q"]),
        dipole_prefactor=float(section.get("dipole_prefactor", 1.0)),
    )


def _build_solver(section: dict) -> tuple[FixedPointOptions, int]:
    _check_keys(section, {"tol", "max_iter", "relaxation", "N_max", "epsilon_gap"}, "solver")
    defaults = FixedPointOptions()
    options = FixedPointOptions(
        tol=float(section.get("tol", defaults.tol)),
        max_iter=int(section.get("max_iter", defaults.max_iter)),
        relaxation=float(section.get("relaxation", defaults.relaxation)),
        epsilon_gap=float(section.get("epsilon_gap", defaults.epsilon_gap)),
    )
    n_max = int(section.get("N_max", _DEFAULT_N_MAX))
    if n_max < 1:
        raise ConfigError(f"solver.N_max must be >= 1, got {n_max}")
    return options, n_max


@dataclass
class RunConfig:
    material: Material | None
    geometry: ResonatorGeometry | None
    qubit: QubitParams | None
    solver: FixedPointOptions
    n_max: int
    out_format: str
    out_path: str | None
    precision: int


def load_run_config(
    path: str | Path,
    *,
    out_override: str | None = None,
    format_override: str | None = None,
) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    raw = _as_mapping(raw if raw is not None else {}, "config")
    _check_keys(raw, {"material", "geometry", "qubit", "solver", "output"}, "config")

    material = geometry = qubit = None
    if "material" in raw:
        material = _build_material(_as_mapping(raw["material"], "material"))
    if "geometry" in raw:
        geometry = _build_geometry(_as_mapping(raw["geometry"], "geometry"))
    if "qubit" in raw:
        qubit = _build_qubit(_as_mapping(raw["qubit"], "qubit"))
        if geometry is not None and qubit.x_q > geometry.length:
            raise ConfigError(
                f"qubit.x_q = {qubit.x_q} lies beyond geometry.length = {geometry.length}"
            )
    solver, n_max = _build_solver(_as_mapping(raw.get("solver", {}), "solver"))

    out = _as_mapping(raw.get("output", {}), "output")
    _check_keys(out, {"format", "path", "precision"}, "output")
    out_format = format_override or out.get("format", "csv")
    if out_format not in ("csv", "json"):
        raise ConfigError(f"output format must be csv or json, got {out_format!r}")
    out_path = out_override or out.get("path")
    precision = int(out.get("precision", _DEFAULT_PRECISION))
    if not 1 <= precision <= 17:
        raise ConfigError(f"output.precision must be in [1, 17], got {precision}")
    return RunConfig(
        material=material,
        geometry=geometry,
        qubit=qubit,
        solver=solver,
        n_max=n_max,
        out_format=out_format,
        out_path=out_path,
        precision=precision,
    )


def bundled_geometry_configs() -> list[Path]:
    """Bundled coplanar-waveguide device-family configs, by increasing gap width."""
    return sorted((Path(__file__).parent / "configs").glob("gap_*um.yaml"))


def _require(run: RunConfig, command: str, *sections: str) -> None:
    for name in sections:
        if getattr(run, name) is None:
            raise ConfigError(f"the {command} command requires a {name} section")


def _parse_range(spec: str, what: str, minimum: float | None = None) -> np.ndarray:
    """'start:stop:count' inclusive range, or a single value."""
    parts = spec.split(":")
    if len(parts) not in (1, 3):
        raise ConfigError(f"{what} must be VALUE or START:STOP:COUNT, got {spec!r}")
    try:
        numbers = [float(p) for p in parts[:2]]
        count = int(parts[2]) if len(parts) == 3 else 1
    except ValueError as exc:
        raise ConfigError(f"cannot parse {what} range {spec!r}: {exc}") from exc
    if count < 1:
        raise ConfigError(f"{what} range is empty: {spec!r}")
    values = np.array(numbers[:1]) if len(parts) == 1 else np.linspace(*numbers, count)
    if minimum is not None and values.min() <= minimum:
        raise ConfigError(f"{what} values must exceed {minimum}, got minimum {values.min()}")
    return values


# ---------------------------------------------------------------------------
# table container and formatting


@dataclass
class Table:
    name: str
    columns: list
    rows: list
    metadata: list  # ordered (key, value) pairs
    status: list | None = None  # per-row status, present only after a failure

    def failed(self) -> bool:
        return self.status is not None and any(s != "ok" for s in self.status)


def _fmt(value, precision: int) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value != value:  # nan from an aborted computation
        return "nan"
    return f"{value:.{precision}e}"


def _render_csv(table: Table, precision: int) -> str:
    lines = [f"# {key}: {value}" for key, value in table.metadata]
    columns = list(table.columns) + (["status"] if table.status is not None else [])
    lines.append(",".join(columns))
    for i, row in enumerate(table.rows):
        cells = [_fmt(v, precision) for v in row]
        if table.status is not None:
            cells.append(table.status[i])
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _json_cell(value, precision: int):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if value != value:
        return None
    return float(f"{value:.{precision}e}")


def _table_payload(table: Table, precision: int) -> dict:
    columns = list(table.columns) + (["status"] if table.status is not None else [])
    rows = []
    for i, row in enumerate(table.rows):
        cells = [_json_cell(v, precision) for v in row]
        if table.status is not None:
            cells.append(table.status[i])
        rows.append(cells)
    return {"metadata": dict(table.metadata), "columns": columns, "rows": rows}


def _render_json(tables: list[Table], precision: int) -> str:
    if len(tables) == 1:
        payload = _table_payload(tables[0], precision)
    else:
        payload = {t.name: _table_payload(t, precision) for t in tables}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _sibling_path(path: str, tag: str) -> str:
    p = Path(path)
    return str(p.with_name(p.stem + "." + tag + (p.suffix or "")))


def _write_tables(tables: list[Table], run: RunConfig) -> None:
    if run.out_format == "json":
        text = _render_json(tables, run.precision)
        if run.out_path:
            Path(run.out_path).write_text(text, newline="\n")
        else:
            sys.stdout.write(text)
        return
    if run.out_path:
        for i, table in enumerate(tables):
            path = run.out_path if i == 0 else _sibling_path(run.out_path, table.name)
            Path(path).write_text(_render_csv(table, run.precision), newline="\n")
    else:
        chunks = [_render_csv(t, run.precision) for t in tables]
        sys.stdout.write("\n".join(chunks))


def _material_metadata(material: Material) -> list:
    desc = (
        f"{material.name} (gap_frequency={material.gap_frequency} GHz, "
        f"regime={material.limit_regime.name.lower()}, "
        f"impedance_prefactor={material.impedance_prefactor!r} Ohm)"
    )
    meta = [("material", desc)]
    if material.from_defaults:
        meta.append(("material_note", "built from library default parameters"))
    return meta


# ---------------------------------------------------------------------------
# subcommand handlers (each returns a list of Tables)


def _cmd_conductivity(run: RunConfig, args: argparse.Namespace) -> list[Table]:
    nu_values = _parse_range(args.nu, "nu", minimum=2.0)
    kappa_values = _parse_range(args.kappa, "kappa")
    if kappa_values.min() < 0.0:
        raise ConfigError("kappa values must be non-negative")
    if args.oracle and kappa_values.min() <= 0.0:
        raise ConfigError("--oracle requires strictly positive kappa values")

    columns = ["nu", "kappa", "sigma1", "sigma2"]
    if args.oracle:
        columns += ["oracle_sigma1", "oracle_sigma2", "rel_err"]
    table = Table(
        name="conductivity",
        columns=columns,
        rows=[],
        metadata=[("command", "conductivity"), ("units", "reduced (nu = 2 f / f_gap)")],
    )
    for nu in nu_values:
        for kap in kappa_values:
            try:
                if kap == 0.0:
                    sigma = sigma_real_axis(float(nu))
                else:
                    sigma = sigma_tilde(ComplexFreq(float(nu), float(kap)))
                row = [nu, kap, sigma.real, -sigma.imag]
                if args.oracle:
                    ref = sigma_oracle(ComplexFreq(float(nu), float(kap)))
                    row += [ref.real, -ref.imag, abs(sigma - ref) / abs(ref)]
            except DispersiveCqedError as exc:
                table.rows.append([nu, kap] + [math.nan] * (len(columns) - 2))
                table.status = ["ok"] * (len(table.rows) - 1) + [type(exc).__name__]
                return [table]
            table.rows.append(row)
    return [table]


def _cmd_impedance(run: RunConfig, args: argparse.Namespace) -> list[Table]:
    _require(run, "impedance", "material")
    material = run.material
    freqs = _parse_range(args.freq, "freq", minimum=0.0)
    table = Table(
        name="impedance",
        columns=["freq_GHz", "nu", "R_s_ohm", "X_s_ohm"],
        rows=[],
        metadata=[("command", "impedance")] + _material_metadata(material),
    )
    for f in freqs:
        try:
            z = surface_impedance(material, float(f))
        except DispersiveCqedError as exc:
            table.rows.append([f, material.reduced(f), math.nan, math.nan])
            table.status = ["ok"] * (len(table.rows) - 1) + [type(exc).__name__]
            return [table]
        table.rows.append([f, material.reduced(f), z.real, z.imag])
    return [table]


def _cmd_modes(run: RunConfig, args: argparse.Namespace) -> list[Table]:
    _require(run, "modes", "material", "geometry", "qubit")
    material, geometry, qubit = run.material, run.geometry, run.qubit
    table = Table(
        name="modes",
        columns=["n", "k_n", "nu_n_GHz", "kappa_n_GHz", "g_n_or_NA", "below_gap_flag"],
        rows=[],
        metadata=[("command", "modes"), ("N_max", str(run.n_max))]
        + _material_metadata(material),
    )
    try:
        modes = dispersive_modes(geometry, material, run.n_max, run.solver)
    except DispersiveCqedError as exc:
        table.rows.append([0, math.nan, math.nan, math.nan, "NA", 0])
        table.status = [type(exc).__name__]
        return [table]
    for mode in modes:
        below = material.reduced(mode.omega_n.nu) < 2.0
        if below:
            g_n = coupling_strength(mode, qubit, material, geometry)
            g_cell: float | str = float(np.real(g_n))
        else:
            g_cell = "NA"
        table.rows.append(
            [mode.n, mode.k_n, mode.omega_n.nu, mode.omega_n.kappa, g_cell, int(below)]
        )
    return [table]


def _cmd_spectral_density(run: RunConfig, args: argparse.Namespace) -> list[Table]:
    _require(run, "spectral-density", "material", "geometry", "qubit")
    material, geometry, qubit = run.material, run.geometry, run.qubit
    freqs = _parse_range(args.freq, "freq", minimum=material.gap_frequency)
    table = Table(
        name="spectral_density",
        columns=["omega_GHz", "J"],
        rows=[],
        metadata=[("command", "spectral-density"), ("N_max", str(run.n_max))]
        + _material_metadata(material),
    )
    try:
        modes = dispersive_modes(geometry, material, run.n_max, run.solver)
    except DispersiveCqedError as exc:
        table.rows.append([math.nan, math.nan])
        table.status = [type(exc).__name__]
        return [table]
    for f in freqs:
        try:
            value = spectral_density(float(f), qubit, modes, material, geometry)
        except DispersiveCqedError as exc:
            table.rows.append([f, math.nan])
            table.status = ["ok"] * (len(table.rows) - 1) + [type(exc).__name__]
            return [table]
        table.rows.append([f, value])
    return [table]


def _cmd_lamb_shift(run: RunConfig, args: argparse.Namespace) -> list[Table]:
    _require(run, "lamb-shift", "material", "geometry", "qubit")
    material, geometry, qubit = run.material, run.geometry, run.qubit
    meta = [("command", "lamb-shift"), ("N_max", str(run.n_max))] + _material_metadata(
        material
    )
    per_mode = Table(name="per_mode", columns=["n", "re_term_MHz", "im_term_MHz"],
                     rows=[], metadata=meta + [("table", "per_mode")])
    try:
        report = lamb_shift_report(qubit, material, geometry, run.n_max, run.solver)
    except DispersiveCqedError as exc:
        per_mode.rows.append([0, math.nan, math.nan])
        per_mode.status = [type(exc).__name__]
        return [per_mode]
    for n, term in enumerate(report.per_mode_terms, start=1):
        per_mode.rows.append([n, term.real, term.imag])

    lossless = resonator_modes(geometry, run.n_max)
    cc_terms = np.array([cc_comparator_term(m, qubit, geometry) for m in lossless])
    below = np.array([material.reduced(m.omega_n.nu) < 2.0 for m in lossless])
    curves = {
        "dispersion": report.normalized_curve,
        "below_bandgap": normalized_convergence(np.where(below, cc_terms, 0.0)),
        "no_dispersion": normalized_convergence(cc_terms),
    }
    models = list(curves) if args.model == "all" else [args.model]
    convergence = Table(
        name="convergence",
        columns=["M"] + (["value"] if len(models) == 1 else models),
        rows=[[m + 1] + [curves[k][m] for k in models] for m in range(run.n_max)],
        metadata=meta + [("table", "convergence"), ("models", ",".join(models))],
    )
    totals = Table(
        name="totals",
        columns=["model", "total_MHz"],
        rows=[
            ["dispersion", report.totals.dispersion],
            ["below_bandgap", report.totals.below_bandgap],
            ["no_dispersion", report.totals.no_dispersion],
        ],
        metadata=meta
        + [
            ("table", "totals"),
            ("convergence_index_70pct", str(report.convergence_index_70pct)),
        ],
    )
    return [per_mode, convergence, totals]


def _cmd_kk_check(run: RunConfig, args: argparse.Namespace) -> list[Table]:
    _require(run, "kk-check", "material")
    material = run.material
    try:
        probes = [float(p) for p in args.probes.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse --probes {args.probes!r}: {exc}") from exc
    if not probes:
        raise ConfigError("--probes list is empty")
    table = Table(
        name="kk_check",
        columns=["probe_freq", "lhs", "rhs", "residual"],
        rows=[],
        metadata=[("command", "kk-check"), ("f_max_GHz", _fmt(args.f_max, 6) if args.f_max else "default")]
        + _material_metadata(material),
    )
    status = []
    for probe in probes:
        try:
            lhs, rhs = kk_parts(material, probe, f_max_ghz=args.f_max)
            if rhs == 0.0:
                residual = 0.0 if lhs == 0.0 else math.inf
            else:
                residual = abs(lhs - rhs) / abs(rhs)
            table.rows.append([probe, lhs, rhs, residual])
            status.append("ok")
        except DispersiveCqedError as exc:
            table.rows.append([probe, math.nan, math.nan, math.nan])
            status.append(type(exc).__name__)
    if any(s != "ok" for s in status):
        table.status = status
    return [table]


_HANDLERS = {
    "conductivity": _cmd_conductivity,
    "impedance": _cmd_impedance,
    "modes": _cmd_modes,
    "spectral-density": _cmd_spectral_density,
    "lamb-shift": _cmd_lamb_shift,
    "kk-check": _cmd_kk_check,
}


def _parse_args(argv) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="dispersive-cqed",
        description="Lossy-superconductor resonator models: conductivity, impedance, "
        "modes, spectral density, Lamb shift, causality checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=None)

    p = sub.add_parser("conductivity", help="complex pair-breaking conductivity table")
    common(p)
    p.add_argument("--nu", required=True, help="reduced frequency VALUE or START:STOP:COUNT (> 2)")
    p.add_argument("--kappa", default="0", help="reduced decay VALUE or START:STOP:COUNT")
    p.add_argument("--oracle", action="store_true", help="add quadrature-oracle columns")

    p = sub.add_parser("impedance", help="surface impedance sweep")
    common(p)
    p.add_argument("--freq", required=True, help="frequency in GHz, VALUE or START:STOP:COUNT")

    p = sub.add_parser("modes", help="dispersive mode table")
    common(p)

    p = sub.add_parser("spectral-density", help="effective spectral density above the gap")
    common(p)
    p.add_argument("--freq", required=True, help="frequency in GHz, VALUE or START:STOP:COUNT")

    p = sub.add_parser("lamb-shift", help="per-mode shift terms, convergence, totals")
    common(p)
    p.add_argument(
        "--model",
        choices=("dispersion", "below_bandgap", "no_dispersion", "all"),
        default="all",
        help="which normalized convergence curve(s) to emit",
    )

    p = sub.add_parser("kk-check", help="Kramers-Kronig residuals of the surface impedance")
    common(p)
    p.add_argument("--probes", required=True, help="comma-separated probe frequencies in GHz")
    p.add_argument("--f-max", type=float, default=None, help="grid upper edge in GHz")

    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(argv)
    try:
        run = load_run_config(
            args.config, out_override=args.out, format_override=args.format
        )
        tables = _HANDLERS[args.command](run, args)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except DispersiveCqedError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL
    _write_tables(tables, run)
    if any(t.failed() for t in tables):
        print("numerical failure: see status column", file=sys.stderr)
        return _EXIT_NUMERICAL
    return _EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
