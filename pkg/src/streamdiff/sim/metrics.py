"""Delay metrics computed from a trace.

d(c, p) is the time from chunk c's generation to its complete reception at
peer p, D(p) the worst d over chunks, N(t) the number of peers with
D(p) <= t, and the absolute network delay the first t with N(t) = P.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .engine import Trace


@dataclass(frozen=True)
class Metrics:
    d: dict[tuple[int, int], int]
    Dp: dict[int, int] | None
    N_of_t: list[int]  # index t = 0..len-1
    D_network: int | None
    chunks_used: tuple[int, ...]  # chunks fully delivered inside the horizon

    def to_json(self) -> dict:
        return {
            "d": [[c, p, v] for (c, p), v in sorted(self.d.items())],
            "Dp": None if self.Dp is None else [[p, v] for p, v in sorted(self.Dp.items())],
            "N_of_t": list(self.N_of_t),
            "D_network": self.D_network,
            "chunks_used": list(self.chunks_used),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"), sort_keys=True)


def delays(trace: Trace) -> dict[tuple[int, int], int]:
    return {
        (c, p): done - trace.generation(c)
        for (c, p), done in trace.completion.items()
        if done <= trace.horizon
    }


def diffusion_curve(trace: Trace, t_max: int | None = None) -> list[int]:
    """N(0..t_max), counting at each t every chunk whose window of length t
    fits inside the horizon.

    A peer counts at t only if it received every such chunk within t of the
    chunk's generation. Chunks that were never delivered therefore count as
    misses instead of being dropped, so a run cannot look better by leaving
    chunks undelivered.
    """
    if t_max is None:
        t_max = trace.horizon
    out = []
    comp = trace.completion
    for t in range(t_max + 1):
        chunks = [
            c for c in range(1, trace.chunk_count + 1) if trace.generation(c) + t <= trace.horizon
        ]
        if not chunks:
            break
        n = 0
        for p in range(1, trace.P + 1):
            for c in chunks:
                done = comp.get((c, p))
                if done is None or done > trace.generation(c) + t:
                    break
            else:
                n += 1
        out.append(n)
    return out


def compute_metrics(trace: Trace, t_max: int | None = None) -> Metrics:
    d = delays(trace)
    full = tuple(
        c
        for c in range(1, trace.chunk_count + 1)
        if trace.P > 0 and all((c, p) in d for p in range(1, trace.P + 1))
    )
    Dp = None
    if full:
        Dp = {p: max(d[(c, p)] for c in full) for p in range(1, trace.P + 1)}
    curve = diffusion_curve(trace, t_max)
    D_net = next((t for t, n in enumerate(curve) if trace.P > 0 and n == trace.P), None)
    return Metrics(d=d, Dp=Dp, N_of_t=curve, D_network=D_net, chunks_used=full)


def chunk_curve(trace: Trace, chunk: int, t_max: int) -> list[int]:
    """Peers holding ``chunk`` within t of its generation, t = 0..t_max."""
    g = trace.generation(chunk)
    got = sorted(
        done - g for (c, _), done in trace.completion.items() if c == chunk
    )
    out, i = [], 0
    for t in range(t_max + 1):
        while i < len(got) and got[i] <= t:
            i += 1
        out.append(i)
    return out
