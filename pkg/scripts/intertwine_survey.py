"""Survey the intertwining search over a range of network sizes.

    python scripts/intertwine_survey.py --pairs 2:4 2:6 3:6 --P-max 200 --cap 200000

One CSV row per (U, k, P): status (solved / infeasible / aborted),
expanded nodes, backtracks, seconds.
"""

import argparse
import csv
import sys
import time

from streamdiff.topology import IntertwineAborted, IntertwineInfeasible, solve_intertwining


def pair(text):
    U, k = text.split(":")
    return int(U), int(k)


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=pair, nargs="+", default=[(2, 4), (2, 6), (3, 6), (1, 2)])
    ap.add_argument("--P-min", dest="P_min", type=int, default=1)
    ap.add_argument("--P-max", dest="P_max", type=int, default=100)
    ap.add_argument("--cap", type=int, default=200_000)
    a = ap.parse_args(argv)

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["U", "k", "P", "status", "expanded", "backtracks", "seconds"])
    for U, k in a.pairs:
        for P in range(a.P_min, a.P_max + 1):
            t0 = time.perf_counter()
            try:
                stats = solve_intertwining(U, k, P, cap=a.cap).stats
                status = "solved"
            except IntertwineInfeasible as e:
                stats, status = e.stats, "infeasible"
            except IntertwineAborted as e:
                stats, status = e.stats, "aborted"
            w.writerow([U, k, P, status, stats.expanded, stats.backtracks, f"{time.perf_counter() - t0:.3f}"])
    return 0


if __name__ == "__main__":
    sys.exit(run())
