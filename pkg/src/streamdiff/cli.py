"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 bound violation, 4 intertwining
infeasible, 5 intertwining search aborted at its cap, 6 integer overflow.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

from .bound import (
    UNBOUNDED,
    FanOut,
    Scenario,
    asymptotic_bound,
    bound,
    exact_bound,
    infinite_k_bound,
    parse_fanout,
)
from .fib import FibOverflowError, fib_constant
from .sim import (
    chunk_curve,
    compute_metrics,
    parallel_balanced_count,
    simulate,
    strategy_parallel_balanced,
    strategy_random,
    strategy_serial_forest,
    strategy_serial_tree,
    strategy_snowball,
    validate_capacity,
)
from .sim.engine import AdmissionError
from .topology import (
    DEFAULT_CAP,
    IntertwineAborted,
    IntertwineInfeasible,
    build_single_tree,
    check_fanout,
    check_slot_conflicts,
    forest_shape,
    single_tree_forest,
    solve_intertwining,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VIOLATION = 3
EXIT_INFEASIBLE = 4
EXIT_ABORTED = 5
EXIT_OVERFLOW = 6

STRATEGIES = ("serial-tree", "serial-forest", "parallel", "snowball", "random")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    U: int = 2
    k: FanOut = 2
    P: int | None = None
    t_max: int = 10
    chunks: int | None = None
    seed: int = 0
    format: str = "csv"
    out: str | None = None
    k_max: int = 6
    strategy: str | None = None
    max_bits: int | None = None
    cap: int = DEFAULT_CAP
    sim_t_max: int = 20
    force_place: list[tuple[int, int, int]] = field(default_factory=list)
    trace_out: str | None = None

    def scenario(self) -> Scenario:
        try:
            return Scenario(self.U, self.k)
        except ValueError as e:
            raise UsageError(str(e)) from None

    def need_P(self) -> int:
        if self.P is None:
            raise UsageError(f"{self.command} needs --P")
        if self.P < 1:
            raise UsageError(f"--P must be >= 1, got {self.P}")
        return self.P

    def validate(self) -> None:
        if self.U < 1:
            raise UsageError(f"--U must be >= 1, got {self.U}")
        if self.t_max < 0:
            raise UsageError(f"--t-max must be >= 0, got {self.t_max}")
        if self.max_bits is not None and self.max_bits < 2:
            raise UsageError("--max-bits must be >= 2")
        if self.format not in ("csv", "json"):
            raise UsageError(f"--format must be csv or json, got {self.format}")


def _emit(cfg: RunConfig, header: list[str] | None, rows: list[list], payload: dict | None) -> str:
    if cfg.format == "json":
        text = json.dumps(payload, separators=(",", ":"), sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(header)
        w.writerows(rows)
        text = buf.getvalue()
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


# -- bound / constants -------------------------------------------------------


def bound_rows(cfg: RunConfig) -> tuple[list[list], str | None]:
    """Rows (t, exact, asymptotic, infinite_k) and an overflow notice if truncated."""
    s = cfg.scenario()
    rows = []
    for t in range(1, cfg.t_max + 1):
        try:
            inf = infinite_k_bound(s.U, t, max_bits=cfg.max_bits)
            if s.finite:
                exact = exact_bound(s, t, max_bits=cfg.max_bits)
                asym = asymptotic_bound(s, t)
            else:
                exact = inf
                asym = 2.0**t * (1.0 - 2.0 ** (-s.U))
        except FibOverflowError as e:
            return rows, f"table truncated before t={t}: {e}"
        rows.append([t, exact, f"{asym:.4f}", inf])
    return rows, None


def cmd_bound(cfg: RunConfig) -> int:
    rows, notice = bound_rows(cfg)
    payload = {
        "U": cfg.U,
        "k": str(cfg.k),
        "rows": [{"t": r[0], "exact": r[1], "asymptotic": float(r[2]), "infinite_k": r[3]} for r in rows],
        "truncated": notice,
    }
    _emit(cfg, ["t", "exact", "asymptotic", "infinite_k"], rows, payload)
    if notice:
        print(f"# {notice}", file=sys.stderr)
        return EXIT_OVERFLOW
    return EXIT_OK


def cmd_constants(cfg: RunConfig) -> int:
    if cfg.k_max < 2:
        raise UsageError(f"--k-max must be >= 2, got {cfg.k_max}")
    consts = [fib_constant(k) for k in range(2, cfg.k_max + 1)]
    rows = [[c.k, f"{c.phi:.5f}", f"{c.q_at_phi:.5f}"] for c in consts]
    payload = {"rows": [{"k": c.k, "phi": round(c.phi, 5), "q_at_phi": round(c.q_at_phi, 5)} for c in consts]}
    _emit(cfg, ["k", "phi", "q_at_phi"], rows, payload)
    return EXIT_OK


# -- topology ----------------------------------------------------------------


def histogram_rows(hist: dict[int, int], s: Scenario) -> tuple[list[list], bool]:
    """(offset, count, cumulative, bound, status) up to the last used offset.

    The final offset may be a partial frontier, where cumulative < bound is
    expected; every full offset must match the bound exactly.
    """
    rows, cum, ok = [], 0, True
    last = max(hist, default=0)
    for t in range(1, last + 1):
        cum += hist.get(t, 0)
        b = bound(s, t)
        match = cum == b if t < last else cum <= b
        ok &= match
        rows.append([t, hist.get(t, 0), cum, b, "PASS" if match else "FAIL"])
    return rows, ok


def cmd_tree(cfg: RunConfig) -> int:
    P = cfg.need_P()
    if cfg.k is not UNBOUNDED and cfg.k != cfg.U:
        raise UsageError(f"tree needs k = U; got k={cfg.k}, U={cfg.U} (use forest)")
    if cfg.U < 2:
        raise UsageError("tree needs k = U >= 2")
    s = Scenario(cfg.U, cfg.U)
    tree = build_single_tree(cfg.U, P)
    rows, ok = histogram_rows(tree.histogram(), s)
    payload = {
        "topology": single_tree_forest(tree).to_json(),
        "histogram": [{"offset": r[0], "count": r[1], "cumulative": r[2], "bound": r[3]} for r in rows],
        "check": "PASS" if ok else "FAIL",
    }
    _emit(cfg, ["offset", "count", "cumulative", "bound", "status"], rows, payload)
    return EXIT_OK if ok else EXIT_VIOLATION


def _forest_or_exit(cfg: RunConfig):
    P = cfg.need_P()
    s = cfg.scenario()
    if not s.finite:
        raise UsageError("forest needs a finite k")
    if s.k == s.U:
        raise UsageError(f"forest needs k > U; got k=U={s.U} (use tree)")
    if s.k % s.U:
        raise UsageError(f"k={s.k} is not a multiple of U={s.U}")
    forced = {(tau, pos): node for tau, pos, node in cfg.force_place}
    try:
        shape = forest_shape(s.U, s.k, P)
        return solve_intertwining(s.U, s.k, P, cap=cfg.cap, forced=forced, shape=shape), None
    except (IntertwineInfeasible, IntertwineAborted) as e:
        return None, e
    except ValueError as e:
        raise UsageError(str(e)) from None


def _search_report(err) -> dict:
    return {
        "status": "aborted" if isinstance(err, IntertwineAborted) else "infeasible",
        "message": str(err),
        "expanded": err.stats.expanded,
        "backtracks": err.stats.backtracks,
        "violations": err.violations,
    }


def cmd_forest(cfg: RunConfig) -> int:
    assignment, err = _forest_or_exit(cfg)
    if err is not None:
        report = _search_report(err)
        _emit(cfg, ["status", "expanded", "backtracks", "message"],
              [[report["status"], report["expanded"], report["backtracks"], report["message"]]], report)
        return EXIT_ABORTED if isinstance(err, IntertwineAborted) else EXIT_INFEASIBLE
    forest = assignment.forest
    s = cfg.scenario()
    rows, ok = histogram_rows(forest.trees[0].histogram(), s)
    same = all(t.histogram() == forest.trees[0].histogram() for t in forest.trees)
    conflicts = check_slot_conflicts(forest)
    ok = ok and same and not conflicts and not check_fanout(forest)
    payload = {
        "topology": forest.to_json(),
        "histogram": [{"offset": r[0], "count": r[1], "cumulative": r[2], "bound": r[3]} for r in rows],
        "conflicts": [c.__dict__ for c in conflicts],
        "search": {"expanded": assignment.stats.expanded, "backtracks": assignment.stats.backtracks},
        "check": "PASS" if ok else "FAIL",
    }
    _emit(cfg, ["offset", "count", "cumulative", "bound", "status"], rows, payload)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_intertwine(cfg: RunConfig) -> int:
    assignment, err = _forest_or_exit(cfg)
    if err is not None:
        report = _search_report(err)
        report.update(U=cfg.U, k=cfg.k, P=cfg.P)
        rows = [[v] for v in report["violations"]] or [[report["message"]]]
        _emit(cfg, ["violation"], rows, report)
        return EXIT_ABORTED if isinstance(err, IntertwineAborted) else EXIT_INFEASIBLE
    forest = assignment.forest
    conflicts = check_slot_conflicts(forest)
    fan = check_fanout(forest)
    payload = {
        "U": cfg.U,
        "k": cfg.k,
        "P": cfg.P,
        "status": "solved",
        "expanded": assignment.stats.expanded,
        "backtracks": assignment.stats.backtracks,
        "placements": [[[pos, node] for pos, node in sorted(p.items())] for p in assignment.placements],
        "conflicts": [c.__dict__ for c in conflicts],
        "fanout_violations": [f.__dict__ for f in fan],
    }
    rows = [
        [tau, pos, node]
        for tau, p in enumerate(assignment.placements, start=1)
        for pos, node in sorted(p.items())
    ]
    _emit(cfg, ["tree", "position", "node"], rows, payload)
    return EXIT_OK if not conflicts and not fan else EXIT_VIOLATION


# -- simulation --------------------------------------------------------------


def build_strategy(cfg: RunConfig):
    P = cfg.need_P()
    s = cfg.scenario()
    name = cfg.strategy
    if name == "serial-tree":
        if s.k != s.U or s.U < 2:
            raise UsageError("serial-tree needs k = U >= 2")
        return strategy_serial_tree(build_single_tree(s.U, P))
    if name == "serial-forest":
        assignment, err = _forest_or_exit(cfg)
        if err is not None:
            raise err
        return strategy_serial_forest(assignment.forest)
    if name == "parallel":
        if s.k != s.U:
            raise UsageError("parallel needs k = U")
        return strategy_parallel_balanced(s.U, s.k, P)
    if name == "snowball":
        if s.finite:
            raise UsageError("snowball needs --k inf")
        return strategy_snowball(s.U, P)
    if name == "random":
        return strategy_random(s.U, s.k, P, cfg.seed)
    raise UsageError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGIES)}")


def verdicts(curve: list[int], s: Scenario) -> list[tuple[int, int, int, str]]:
    out = []
    for t, n in enumerate(curve):
        b = bound(s, t)
        out.append((t, n, b, "EQUAL" if n == b else "BELOW" if n < b else "VIOLATION"))
    return out


def cmd_simulate(cfg: RunConfig) -> int:
    s = cfg.scenario()
    try:
        strat = build_strategy(cfg)
    except (IntertwineInfeasible, IntertwineAborted) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ABORTED if isinstance(e, IntertwineAborted) else EXIT_INFEASIBLE
    horizon = max(cfg.t_max, 1)
    chunks = cfg.chunks or max(1, math.ceil(horizon / s.U))
    try:
        trace = simulate(strat, s.U, s.k, cfg.P, horizon, chunks)
    except AdmissionError as e:
        print(f"error: strategy broke an engine invariant: {e}", file=sys.stderr)
        return EXIT_VIOLATION
    if cfg.trace_out:
        with open(cfg.trace_out, "w", encoding="utf-8") as fh:
            trace.write_jsonl(fh)
    m = compute_metrics(trace)
    v = verdicts(m.N_of_t, s)
    cap = validate_capacity(trace)
    payload = {
        "strategy": strat.name,
        "U": s.U,
        "k": str(s.k),
        "P": cfg.P,
        "horizon": horizon,
        "chunks": chunks,
        "metrics": m.to_json(),
        "chunk1_curve": chunk_curve(trace, 1, horizon),
        "verdicts": [list(x) for x in v],
        "capacity_violations": len(cap),
    }
    _emit(cfg, ["t", "n_sim", "bound", "verdict"], [list(x) for x in v], payload)
    if any(x[3] == "VIOLATION" for x in v) or cap:
        return EXIT_VIOLATION
    return EXIT_OK


def parallel_column(U: int, t_max: int, sim_t_max: int) -> list[int]:
    """Balanced parallel-tree N(t) for t = 1..t_max.

    Cells up to ``sim_t_max`` come from simulating a tree with exactly the
    full levels reachable by then; later cells use the level-count closed
    form, which is cross-checked against the simulated cells.
    """
    t_sim = min(t_max, sim_t_max)
    P = parallel_balanced_count(U, t_sim)
    simulated: list[int] = []
    if P > 0:
        trace = simulate(strategy_parallel_balanced(U, U, P), U, U, P, t_sim, 1)
        simulated = chunk_curve(trace, 1, t_sim)[1:]
    else:
        simulated = [0] * t_sim
    for t, n in enumerate(simulated, start=1):
        if n != parallel_balanced_count(U, t):
            raise AssertionError(f"parallel oracle mismatch at t={t}: sim {n}")
    return simulated + [parallel_balanced_count(U, t) for t in range(t_sim + 1, t_max + 1)]


def cmd_compare(cfg: RunConfig) -> int:
    U = cfg.U
    if U < 2:
        raise UsageError("compare needs U >= 2 (its columns use k = U and k = 2U)")
    header = ["t", f"serial_k{U}", f"serial_k{2 * U}", "serial_kinf", f"parallel_k{U}"]
    rows = []
    notice = None
    par = parallel_column(U, cfg.t_max, cfg.sim_t_max)
    for t in range(1, cfg.t_max + 1):
        try:
            rows.append(
                [
                    t,
                    exact_bound((U, U), t, max_bits=cfg.max_bits),
                    exact_bound((U, 2 * U), t, max_bits=cfg.max_bits),
                    infinite_k_bound(U, t, max_bits=cfg.max_bits),
                    par[t - 1],
                ]
            )
        except FibOverflowError as e:
            notice = f"table truncated before t={t}: {e}"
            break
    payload = {"U": U, "columns": header, "rows": rows, "truncated": notice}
    _emit(cfg, header, rows, payload)
    if notice:
        print(f"# {notice}", file=sys.stderr)
        return EXIT_OVERFLOW
    return EXIT_OK


COMMANDS = {
    "bound": cmd_bound,
    "constants": cmd_constants,
    "tree": cmd_tree,
    "forest": cmd_forest,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "intertwine": cmd_intertwine,
}


def _force(text: str) -> tuple[int, int, int]:
    try:
        where, node = text.split("=")
        tau, pos = where.split(":")
        return int(tau), int(pos), int(node)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected TREE:POSITION=NODE, got {text!r}") from None


def _fanout(text: str) -> FanOut:
    try:
        return parse_fanout(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be an integer or 'inf', got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--U", type=int, default=2, help="normalized upload capacity")
    common.add_argument("--k", type=_fanout, default=None, help="neighbour fan-out, integer or 'inf'")
    common.add_argument("--P", type=int, default=None, help="number of peers")
    common.add_argument("--t-max", dest="t_max", type=int, default=10, help="last time unit / horizon")
    common.add_argument("--chunks", type=int, default=None, help="chunks to stream")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="write here instead of stdout")
    common.add_argument("--max-bits", dest="max_bits", type=int, default=None,
                        help="emulate a signed integer width; overflow truncates tables")

    p = _Parser(prog="streamdiff", description="Stream diffusion bound toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("bound", parents=[common], help="bound table N(t)")
    c = sub.add_parser("constants", parents=[common], help="Fibonacci constants")
    c.add_argument("--k-max", dest="k_max", type=int, default=6)
    sub.add_parser("tree", parents=[common], help="single unbalanced tree (k = U)")
    for name in ("forest", "intertwine"):
        f = sub.add_parser(name, parents=[common], help="multi-tree forest (k > U)")
        f.add_argument("--cap", type=int, default=DEFAULT_CAP, help="node-expansion cap")
        f.add_argument("--force-place", dest="force_place", type=_force, action="append",
                       default=[], metavar="TREE:POSITION=NODE")
    sm = sub.add_parser("simulate", parents=[common], help="run a strategy")
    sm.add_argument("--strategy", choices=STRATEGIES, required=True)
    sm.add_argument("--cap", type=int, default=DEFAULT_CAP)
    sm.add_argument("--trace-out", dest="trace_out", default=None, help="JSON lines trace")
    cp = sub.add_parser("compare", parents=[common], help="serial vs parallel dataset")
    cp.add_argument("--sim-t-max", dest="sim_t_max", type=int, default=20,
                    help="simulate the parallel column up to here")
    return p


def parse_config(argv: list[str] | None = None) -> RunConfig:
    ns = make_parser().parse_args(argv)
    opts = {k: v for k, v in vars(ns).items() if v is not None}
    if "k" not in opts:
        opts["k"] = ns.U
    cfg = RunConfig(**opts)
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
        return COMMANDS[cfg.command](cfg)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
