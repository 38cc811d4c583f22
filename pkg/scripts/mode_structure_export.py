#!/usr/bin/env python3
"""Per-mode structure export for one device config.

Writes two tables into the results directory:

  <stem>.modes.csv        bare and dispersive frequency, linewidth, coupling
                          (dispersive and dispersionless, below the gap) and
                          the per-mode shift terms of both models
  <stem>.convergence.csv  normalized partial-sum curves of the three shift
                          models against mode count

This is the data behind mode-resolved coupling and shift plots and the
convergence comparison.
"""

import argparse
import math
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from dispersive_cqed.cli import bundled_geometry_configs, load_run_config
from dispersive_cqed.lightmatter import (
    cc_comparator_term,
    coupling_strength,
    lamb_shift_report,
    normalized_convergence,
)
from dispersive_cqed.modes import dispersive_modes, resonator_modes


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    parser.add_argument(
        "--config",
        default=None,
        help="run config path (default: strongest-coupling bundled config)",
    )
    parser.add_argument("--n-max", type=int, default=60, help="mode-count cutoff")
    parser.add_argument("--out-dir", default="results")
    args = parser.parse_args(argv)

    path = Path(args.config) if args.config else bundled_geometry_configs()[0]
    run = load_run_config(path)
    material, geometry, qubit = run.material, run.geometry, run.qubit
    lossless = replace(material, impedance_prefactor=0.0)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = lamb_shift_report(qubit, material, geometry, args.n_max, run.solver)
        shifted = dispersive_modes(geometry, material, args.n_max, run.solver)
    bare = resonator_modes(geometry, args.n_max)

    mode_lines = [
        "# command: mode_structure_export",
        f"# config: {path.stem}",
        f"# N_max: {args.n_max}",
        "n,nu_bare_GHz,nu_disp_GHz,kappa_GHz,g_disp,g_cc,term_disp_MHz,term_cc_MHz",
    ]
    cc_terms = []
    for mode_bare, mode_disp, term in zip(bare, shifted, report.per_mode_terms):
        below = material.reduced(mode_disp.omega_n.nu) < 2.0
        g_disp = coupling_strength(mode_disp, qubit, material, geometry) if below else math.nan
        g_cc = (
            coupling_strength(mode_bare, qubit, lossless, geometry)
            if material.reduced(mode_bare.omega_n.nu) < 2.0
            else math.nan
        )
        cc = cc_comparator_term(mode_bare, qubit, geometry)
        cc_terms.append(cc)
        mode_lines.append(
            f"{mode_bare.n},{mode_bare.omega_n.nu:.12e},{mode_disp.omega_n.nu:.12e},"
            f"{mode_disp.omega_n.kappa:.12e},{g_disp:.12e},{g_cc:.12e},"
            f"{term.real:.12e},{cc:.12e}"
        )

    cc_terms = np.asarray(cc_terms)
    below_mask = np.array([material.reduced(m.omega_n.nu) < 2.0 for m in bare])
    curves = {
        "dispersion": report.normalized_curve,
        "below_bandgap": normalized_convergence(np.where(below_mask, cc_terms, 0.0)),
        "no_dispersion": normalized_convergence(cc_terms),
    }
    conv_lines = [
        "# command: mode_structure_export",
        f"# config: {path.stem}",
        f"# index_70pct: {report.convergence_index_70pct}",
        "M,dispersion,below_bandgap,no_dispersion",
    ]
    for m in range(args.n_max):
        conv_lines.append(
            f"{m + 1},{curves['dispersion'][m]:.12e},"
            f"{curves['below_bandgap'][m]:.12e},{curves['no_dispersion'][m]:.12e}"
        )

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    modes_path = out_dir / f"{path.stem}.modes.csv"
    conv_path = out_dir / f"{path.stem}.convergence.csv"
    modes_path.write_text("\n".join(mode_lines) + "\n", newline="\n")
    conv_path.write_text("\n".join(conv_lines) + "\n", newline="\n")
    print(f"wrote {modes_path} and {conv_path}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
