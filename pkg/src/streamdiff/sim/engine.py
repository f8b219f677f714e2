"""Slot-accurate chunk dissemination engine.

One slot is T*, the time to push a whole chunk with the full upload
capacity. Chunk c appears at the source at slot (c - 1) * U. A transmission
of duration m consumes 1/m of the sender's capacity in each of its m slots,
so m simultaneous transmissions of duration m saturate the uplink exactly.
Downlinks are unconstrained and there is no propagation delay.

The engine, not the strategy, decides admissibility: any inadmissible
transmission aborts the run with :class:`AdmissionError`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Iterable, Protocol

from ..bound import UNBOUNDED, FanOut

SOURCE = 0


@dataclass(frozen=True, order=True)
class Transmission:
    start: int
    sender: int
    receiver: int
    chunk: int
    duration: int = 1

    @property
    def end(self) -> int:
        return self.start + self.duration

    def to_json(self) -> dict:
        return {
            "sender": self.sender,
            "receiver": self.receiver,
            "chunk": self.chunk,
            "start": self.start,
            "duration": self.duration,
        }


class AdmissionError(RuntimeError):
    """A strategy asked for a transmission that breaks an engine invariant."""

    def __init__(self, invariant: str, tx: Transmission, detail: str):
        self.invariant = invariant
        self.tx = tx
        super().__init__(f"{invariant}: {detail} ({tx})")


@dataclass(frozen=True)
class Trace:
    U: int
    k: FanOut
    P: int
    horizon: int
    chunk_count: int
    transmissions: tuple[Transmission, ...]
    completion: dict[tuple[int, int], int]  # (chunk, node) -> slot

    def generation(self, chunk: int) -> int:
        return (chunk - 1) * self.U

    def write_jsonl(self, fh: IO[str]) -> None:
        for tx in self.transmissions:
            fh.write(json.dumps(tx.to_json(), separators=(",", ":")) + "\n")

    def dumps_jsonl(self) -> str:
        return "".join(
            json.dumps(tx.to_json(), separators=(",", ":")) + "\n" for tx in self.transmissions
        )

    @staticmethod
    def read_transmissions(lines: Iterable[str]) -> list[Transmission]:
        out = []
        for line in lines:
            line = line.strip()
            if line:
                out.append(Transmission(**json.loads(line)))
        return out


class SimView:
    """Read-only window onto the engine state handed to strategies."""

    def __init__(self, engine: "_Engine"):
        self._e = engine

    @property
    def U(self) -> int:
        return self._e.U

    @property
    def k(self) -> FanOut:
        return self._e.k

    @property
    def P(self) -> int:
        return self._e.P

    @property
    def chunk_count(self) -> int:
        return self._e.chunk_count

    @property
    def slot(self) -> int:
        return self._e.slot

    def has(self, node: int, chunk: int) -> bool:
        """True if ``node`` holds ``chunk`` at the current slot."""
        return self._e.holds(node, chunk, self._e.slot)

    def held(self, node: int) -> list[int]:
        e = self._e
        if node == SOURCE:
            last = min(e.chunk_count, e.slot // e.U + 1)
            return list(range(1, last + 1))
        return sorted(c for c in e.have[node] if e.completion[(c, node)] <= e.slot)

    def pending(self, chunk: int, node: int) -> bool:
        """Chunk already held by, or on its way to, ``node``."""
        return (chunk, node) in self._e.claimed

    def load(self, node: int, slot: int | None = None) -> Fraction:
        return self._e.usage[node].get(self._e.slot if slot is None else slot, Fraction(0))

    def neighbors(self, node: int) -> frozenset[int]:
        return frozenset(self._e.fanout[node])

    def missing(self, chunk: int) -> int:
        """Peers that neither hold nor are receiving ``chunk``."""
        return self._e.P - self._e.claimed_count.get(chunk, 0)


class Strategy(Protocol):
    name: str

    def decide(self, view: SimView) -> Iterable[Transmission]: ...


class _Engine:
    def __init__(self, U: int, k: FanOut, P: int, horizon: int, chunk_count: int):
        self.U, self.k, self.P = U, k, P
        self.horizon, self.chunk_count = horizon, chunk_count
        self.slot = 0
        self.usage: list[dict[int, Fraction]] = [dict() for _ in range(P + 1)]
        self.fanout: list[set[int]] = [set() for _ in range(P + 1)]
        self.have: list[set[int]] = [set() for _ in range(P + 1)]
        self.completion: dict[tuple[int, int], int] = {}
        self.claimed: set[tuple[int, int]] = set()
        self.claimed_count: dict[int, int] = {}
        self.log: list[Transmission] = []

    def holds(self, node: int, chunk: int, slot: int) -> bool:
        if node == SOURCE:
            return 1 <= chunk <= self.chunk_count and (chunk - 1) * self.U <= slot
        done = self.completion.get((chunk, node))
        return done is not None and done <= slot

    def admit(self, tx: Transmission) -> None:
        def fail(inv, detail):
            raise AdmissionError(inv, tx, detail)

        if tx.start != self.slot:
            fail("causality", f"start {tx.start} is not the current slot {self.slot}")
        if tx.duration < 1:
            fail("duration", "duration must be >= 1")
        if not 0 <= tx.sender <= self.P:
            fail("node-range", f"sender {tx.sender} outside 0..{self.P}")
        if not 1 <= tx.receiver <= self.P:
            fail("node-range", f"receiver {tx.receiver} outside 1..{self.P}")
        if tx.sender == tx.receiver:
            fail("self-loop", "sender and receiver coincide")
        if not 1 <= tx.chunk <= self.chunk_count:
            fail("chunk-range", f"chunk {tx.chunk} outside 1..{self.chunk_count}")
        if not self.holds(tx.sender, tx.chunk, tx.start):
            fail("store-and-forward", f"node {tx.sender} does not hold chunk {tx.chunk} at slot {tx.start}")
        if (tx.chunk, tx.receiver) in self.claimed:
            fail("single-delivery", f"chunk {tx.chunk} already sent to node {tx.receiver}")
        nbrs = self.fanout[tx.sender]
        if self.k is not UNBOUNDED and tx.receiver not in nbrs and len(nbrs) >= self.k:
            fail("fan-out", f"node {tx.sender} already serves {len(nbrs)} = k neighbours")
        share = Fraction(1, tx.duration)
        use = self.usage[tx.sender]
        for s in range(tx.start, tx.end):
            if use.get(s, 0) + share > 1:
                fail("capacity", f"node {tx.sender} over capacity at slot {s}")
        for s in range(tx.start, tx.end):
            use[s] = use.get(s, 0) + share
        nbrs.add(tx.receiver)
        self.claimed.add((tx.chunk, tx.receiver))
        self.claimed_count[tx.chunk] = self.claimed_count.get(tx.chunk, 0) + 1
        self.completion[(tx.chunk, tx.receiver)] = tx.end
        self.have[tx.receiver].add(tx.chunk)
        self.log.append(tx)


def simulate(
    strategy: Strategy,
    U: int,
    k: FanOut,
    P: int,
    horizon: int,
    chunk_count: int,
) -> Trace:
    """Run ``strategy`` for slots 0..horizon-1 and return the full trace.

    Transmissions may end after the horizon; they stay in the trace and
    metric code decides what to count.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if chunk_count < 1:
        raise ValueError(f"chunk_count must be >= 1, got {chunk_count}")
    if U < 1:
        raise ValueError(f"U must be >= 1, got {U}")
    if P < 0:
        raise ValueError(f"P must be >= 0, got {P}")
    eng = _Engine(U, k, P, horizon, chunk_count)
    if P > 0:
        view = SimView(eng)
        for slot in range(horizon):
            eng.slot = slot
            for tx in strategy.decide(view):
                eng.admit(tx)
    return Trace(
        U=U,
        k=k,
        P=P,
        horizon=horizon,
        chunk_count=chunk_count,
        transmissions=tuple(eng.log),
        completion=dict(eng.completion),
    )


@dataclass
class CapacityViolation:
    node: int
    slot: int
    usage: Fraction
    reason: str = "capacity"


def validate_capacity(trace: Trace, U: int | None = None, *, balanced: bool = False) -> list[CapacityViolation]:
    """Recompute per-node, per-slot uplink usage from the transmissions alone.

    With ``balanced`` the source must also finish every chunk before the next
    one arrives, i.e. serve at most U receivers per chunk period.
    """
    U = trace.U if U is None else U
    usage: dict[tuple[int, int], Fraction] = {}
    for tx in trace.transmissions:
        share = Fraction(1, tx.duration)
        for s in range(tx.start, tx.end):
            usage[(tx.sender, s)] = usage.get((tx.sender, s), 0) + share
    out = [
        CapacityViolation(node=v, slot=s, usage=u)
        for (v, s), u in sorted(usage.items())
        if u > 1
    ]
    if balanced:
        per_chunk: dict[int, list[Transmission]] = {}
        for tx in trace.transmissions:
            if tx.sender == SOURCE:
                per_chunk.setdefault(tx.chunk, []).append(tx)
        for c, txs in sorted(per_chunk.items()):
            late = [tx for tx in txs if tx.end > c * U]
            if len(txs) > U or late:
                slot = max(tx.end for tx in txs)
                out.append(
                    CapacityViolation(
                        node=SOURCE,
                        slot=slot,
                        usage=Fraction(len(txs)),
                        reason=f"source period: chunk {c} sent to {len(txs)} receivers, "
                        f"{len(late)} finishing after slot {c * U}",
                    )
                )
    return out


@dataclass
class Replay:
    """Strategy that emits a precomputed schedule, keyed by start slot."""

    name: str
    schedule: dict[int, list[Transmission]] = field(default_factory=dict)

    def decide(self, view: SimView) -> list[Transmission]:
        return self.schedule.get(view.slot, [])
