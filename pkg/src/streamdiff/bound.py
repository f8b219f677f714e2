"""Upper bound on the stream diffusion metric N(t).

Time is measured in units of the minimum chunk transmission time
T* = C / U_bps. The source sees a new chunk every T = U * T*.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

from .fib import check_width, fib_sum, phi, q_at_phi

__all__ = [
    "Unbounded",
    "UNBOUNDED",
    "FanOut",
    "parse_fanout",
    "Scenario",
    "BoundCurve",
    "exact_bound",
    "asymptotic_bound",
    "infinite_k_bound",
    "bound",
    "min_time_to_reach",
    "bound_curve",
    "recurrence_counts",
]


class Unbounded(enum.Enum):
    """Marker for an unconstrained neighbour count."""

    INF = "inf"

    def __repr__(self) -> str:
        return "UNBOUNDED"

    def __str__(self) -> str:
        return "inf"


UNBOUNDED = Unbounded.INF
FanOut = Union[int, Unbounded]


def parse_fanout(text: str | int | Unbounded) -> FanOut:
    if isinstance(text, Unbounded):
        return text
    if isinstance(text, int):
        return text
    if text.strip().lower() in ("inf", "infinity", "unbounded"):
        return UNBOUNDED
    return int(text)


@dataclass(frozen=True)
class Scenario:
    """Homogeneous network: normalized upload capacity ``U`` and fan-out ``k``."""

    U: int
    k: FanOut

    def __post_init__(self):
        if isinstance(self.U, bool) or not isinstance(self.U, int) or self.U < 1:
            raise ValueError(f"U must be an integer >= 1, got {self.U!r}")
        if self.k is UNBOUNDED:
            return
        if isinstance(self.k, bool) or not isinstance(self.k, int):
            raise ValueError(f"k must be an integer or UNBOUNDED, got {self.k!r}")
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if self.k < self.U:
            raise ValueError(f"k={self.k} < U={self.U} is not supported")

    @property
    def finite(self) -> bool:
        return self.k is not UNBOUNDED

    @property
    def trees(self) -> int:
        """Number of distribution trees needed to attain the bound."""
        if not self.finite:
            raise ValueError("unbounded fan-out has no finite forest")
        if self.k % self.U:
            raise ValueError(f"k={self.k} is not a multiple of U={self.U}")
        return self.k // self.U


def _as_scenario(s: Scenario | tuple[int, FanOut]) -> Scenario:
    return s if isinstance(s, Scenario) else Scenario(*s)


def exact_bound(s: Scenario | tuple[int, FanOut], t: float, *, max_bits: int | None = None) -> int:
    """Sum over j = 1..U of S_k(floor(t) - j + 1).

    Real ``t`` is floored, so the bound is a right-continuous staircase.
    """
    s = _as_scenario(s)
    if not s.finite:
        raise ValueError("exact_bound needs a finite k; use infinite_k_bound")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    ti = math.floor(t)
    total = sum(fib_sum(s.k, ti - j + 1) for j in range(1, s.U + 1))
    return check_width(total, max_bits, f"N({ti})")


def asymptotic_bound(s: Scenario | tuple[int, FanOut], t: float) -> float:
    s = _as_scenario(s)
    if not s.finite:
        raise ValueError("asymptotic_bound needs a finite k")
    p, q = phi(s.k), q_at_phi(s.k)
    coeff = p * p * (1.0 - p ** (-s.U)) / (q * (p - 1.0) ** 2)
    return coeff * p**t - s.U / (s.k - 1)


def infinite_k_bound(U: int, t: float, *, max_bits: int | None = None) -> int:
    """Bound with no neighbour limit: sum of 2**(t-j) over j = 1..min(U, t).

    Equal to 2**t * (1 - 2**-U) once t >= U. For t < U only the terms with
    a non-negative exponent survive, because S_inf(n) is 0 for n <= 0.
    """
    Scenario(U, UNBOUNDED)
    ti = math.floor(t)
    if ti < 1:
        return 0
    lo = max(ti - U, 0)
    total = (1 << ti) - (1 << lo)
    return check_width(total, max_bits, f"N({ti})")


def bound(s: Scenario | tuple[int, FanOut], t: float, *, max_bits: int | None = None) -> int:
    """Exact bound for either a finite or an unbounded fan-out."""
    s = _as_scenario(s)
    if s.finite:
        return exact_bound(s, t, max_bits=max_bits)
    return infinite_k_bound(s.U, t, max_bits=max_bits)


def min_time_to_reach(s: Scenario | tuple[int, FanOut], P: int) -> int:
    """Smallest integer t with bound(t) >= P: the minimum absolute network delay."""
    s = _as_scenario(s)
    if P < 1:
        raise ValueError(f"P must be >= 1, got {P}")
    t = 1
    while bound(s, t) < P:
        t += 1
    return t


def recurrence_counts(U: int, k: int, t_max: int) -> list[int]:
    """New receptions n(1..t_max) from the tree-growth recurrences.

    n(0) = 1 stands for the source. Level i <= U still has the source
    transmitting, so every earlier level contributes; from then on only the
    last k levels (excluding level 0 once i > k) still have idle child
    slots. This is an independent route to the bound, not built on S_k.
    """
    Scenario(U, k)
    n = [1]
    for i in range(1, t_max + 1):
        if i <= U:
            lo = 0
        else:
            lo = max(i - k, 1)
        n.append(sum(n[lo:i]))
    return n[1:]


@dataclass(frozen=True)
class BoundCurve:
    scenario: Scenario
    flavor: str
    samples: dict[int, Union[int, float]] = field(default_factory=dict)


def bound_curve(s: Scenario | tuple[int, FanOut], t_max: int, flavor: str = "exact") -> BoundCurve:
    s = _as_scenario(s)
    if flavor == "exact":
        samples = {t: exact_bound(s, t) for t in range(0, t_max + 1)}
    elif flavor == "asymptotic":
        samples = {t: asymptotic_bound(s, t) for t in range(0, t_max + 1)}
    elif flavor == "unbounded-k":
        samples = {t: infinite_k_bound(s.U, t) for t in range(0, t_max + 1)}
    else:
        raise ValueError(f"unknown flavor {flavor!r}")
    return BoundCurve(scenario=s, flavor=flavor, samples=samples)
