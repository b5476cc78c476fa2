"""Write the curve data behind figures 1-10 as CSV files.

    python scripts/reproduce_figures.py --out-dir figures

Each file has the same columns as ``vise curve --fig N``.  A short summary of
the features the figures illustrate (the pit of losses, ladder steps, the
Pareto extremes) is printed at the end.
"""

import argparse
import pathlib
import sys

import numpy as np

from vise.cli import FIGURES, CommandConfig, figure_table, render_csv


def summarize(fig, header, rows):
    cols = {h: np.array([r[i] for r in rows], dtype=float) for i, h in enumerate(header) if h != "family"}
    if fig == 1:
        rho, e = cols["rho"], cols["e_eta"]
        neg = rho[e < 0]
        return f"E(eta) < 0 for rho in [{neg.min():.2f}, {neg.max():.2f}] on the grid; min {e.min():.5f}"
    if 2 <= fig <= 6:
        jumps = np.abs(np.diff(cols["ladder_center"]))
        return f"{np.count_nonzero(jumps)} ladder steps of height {jumps[jumps > 0].min():.4f}"
    if fig == 7:
        return f"max derivative {cols['dalpha0_drho'].max():.3g} (should be 0 at rho = 0)"
    if fig in (8, 9):
        return f"min E(eta) over all families {cols['e_eta'].min():.5f}"
    return "alpha0 at mu = 0: " + ", ".join(f"{h}={cols[h][np.argmin(np.abs(cols['mu']))]:.3f}" for h in header[1:])


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="figures")
    parser.add_argument("--figs", type=int, nargs="*", default=sorted(FIGURES))
    args = parser.parse_args(argv)

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for fig in args.figs:
        header, rows = figure_table(fig, CommandConfig("curve", fig=fig))
        path = out / f"fig{fig:02d}.csv"
        path.write_text(render_csv(header, rows))
        print(f"fig {fig:2d}: {len(rows):5d} rows -> {path}  ({summarize(fig, header, rows)})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
