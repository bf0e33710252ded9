#!/usr/bin/env python3
"""Dressed levels of a spin in a three-frequency field versus detuning.

Scans Delta_0 over [-2.5, 2.5] for drive strengths Omega = 0.2, 0.5, 0.8
(units of the fundamental) and writes one spectrum CSV per strength plus a
table of avoided-crossing gaps and positions for q = -2..2.
"""

import argparse
from pathlib import Path

import numpy as np

from polyspin import gamma_table, mode_set, shell_basis
from polyspin.output import write_table
from polyspin.spectra import avoided_crossing, detuning_scan

ALPHA = 10.0
J = 5


def run(out_dir: Path, samples: int = 401, depth: int = 6):
    crossing_rows = []
    for omega in (0.2, 0.5, 0.8):
        g = omega / (2 * ALPHA)
        modes = mode_set([J - 1, J, J + 1], [ALPHA] * 3, [g] * 3)
        table = gamma_table(modes, 1e-12)
        basis = shell_basis(table, 1500, depth, resonant_k=J)
        scan = detuning_scan(basis, table, modes, np.linspace(-2.5, 2.5, samples))
        write_table(
            out_dir / f"spectrum_omega{omega}.csv",
            ("delta0", "level", "energy", "branch"),
            scan.csv_rows(),
        )
        for q in (-2, -1, 0, 1, 2):
            try:
                rep = avoided_crossing(scan, q)
                crossing_rows.append((omega, q, rep.gap, rep.position, rep.shift))
            except Exception as exc:
                print(f"omega={omega} q={q}: {exc}")
        print(f"omega={omega}: wrote spectrum ({len(basis)} levels x {samples} detunings)")
    write_table(
        out_dir / "crossings.csv",
        ("omega", "q", "gap", "position", "shift"),
        crossing_rows,
    )


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("data/detuning_spectrum"))
    ap.add_argument("--samples", type=int, default=401)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    run(args.out, args.samples)
