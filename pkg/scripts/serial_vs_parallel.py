"""Write the serial vs parallel diffusion dataset as CSV.

    python scripts/serial_vs_parallel.py --U 2 --t-max 50 --out diffusion.csv

Columns: t, serial_k{U}, serial_k{2U}, serial_kinf, parallel_k{U}. The
serial columns are exact bounds; the parallel column is simulated up to
--sim-t-max and extended with the level-count closed form beyond it.

Plotting recipe (any tool with a log y axis works), e.g. gnuplot:

    set datafile separator ","
    set logscale y
    set key left top
    plot for [c=2:5] "diffusion.csv" using 1:c with linespoints title columnheader
"""

import argparse
import sys

from streamdiff.cli import main


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--U", type=int, default=2)
    ap.add_argument("--t-max", type=int, default=50)
    ap.add_argument("--sim-t-max", type=int, default=20)
    ap.add_argument("--out", default=None)
    a = ap.parse_args(argv)
    args = ["compare", "--U", str(a.U), "--t-max", str(a.t_max), "--sim-t-max", str(a.sim_t_max)]
    if a.out:
        args += ["--out", a.out]
    return main(args)


if __name__ == "__main__":
    sys.exit(run())
