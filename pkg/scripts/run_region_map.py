#!/usr/bin/env python3
"""Map the two dynamical regions of the two-frequency Rabi model.

Grid (a): mean photon number |alpha|^2 versus mean field frequency at fixed
g0/mean-frequency = 0.1.  Grid (b): coupling ratio versus mean field
frequency at fixed |alpha|^2 = 5.  Each cell is the L2 discrepancy between
shell- and Fock-basis inversions on [0, 1/g0]; the 1e-3 contour separates
the entangled-mode region from the separable one.

The default grids keep the runtime to minutes; raise --nx/--ny for denser
maps.
"""

import argparse
from pathlib import Path

import numpy as np

from polyspin.dynamics import region_scan
from polyspin.output import write_table


def run(out_dir: Path, nx: int, ny: int, t_samples: int, threads: int):
    omega_vals = np.unique(np.round(np.linspace(2, 11, ny)).astype(int)).tolist()

    alpha_vals = np.linspace(0.5, 8.0, nx).tolist()
    scan_a = region_scan(
        "alpha_sq",
        alpha_vals,
        "omega_low",
        omega_vals,
        {"g_ratio": 0.1},
        t_samples=t_samples,
        threads=threads,
    )
    write_table(
        out_dir / "region_alpha_vs_omega.csv",
        ("alpha_sq", "omega_low", "l2", "valid"),
        scan_a.csv_rows(),
    )
    write_table(
        out_dir / "contour_alpha_vs_omega.csv",
        ("x1", "y1", "x2", "y2"),
        [(x1, y1, x2, y2) for (x1, y1), (x2, y2) in scan_a.contour_segments()],
    )
    print(f"grid (a): {scan_a.valid.sum()}/{scan_a.valid.size} points valid")

    g_vals = np.logspace(-2, 0.5, nx).tolist()
    scan_b = region_scan(
        "g_ratio",
        g_vals,
        "omega_low",
        omega_vals,
        {"alpha_sq": 5.0},
        t_samples=t_samples,
        threads=threads,
    )
    write_table(
        out_dir / "region_g_vs_omega.csv",
        ("g_ratio", "omega_low", "l2", "valid"),
        scan_b.csv_rows(),
    )
    write_table(
        out_dir / "contour_g_vs_omega.csv",
        ("x1", "y1", "x2", "y2"),
        [(x1, y1, x2, y2) for (x1, y1), (x2, y2) in scan_b.contour_segments()],
    )
    print(f"grid (b): {scan_b.valid.sum()}/{scan_b.valid.size} points valid")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("data/region_map"))
    ap.add_argument("--nx", type=int, default=7)
    ap.add_argument("--ny", type=int, default=6)
    ap.add_argument("--t-samples", type=int, default=1024)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    run(args.out, args.nx, args.ny, args.t_samples, args.threads)
