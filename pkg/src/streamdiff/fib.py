"""k-step Fibonacci numbers, their partial sums, and the Fibonacci constants.

All sequence values are exact Python integers. An optional signed integer
width (``max_bits``) turns silent growth into a :class:`FibOverflowError`,
which lets callers emulate fixed-width arithmetic and truncate tables.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "FibOverflowError",
    "FibTable",
    "FibConstant",
    "fib_table",
    "fib_k",
    "fib_sum",
    "char_poly",
    "phi",
    "q_at_phi",
    "fib_constant",
    "check_width",
]


class FibOverflowError(OverflowError):
    """An exact value does not fit in the configured signed integer width."""

    def __init__(self, value_bits: int, max_bits: int, what: str = "value"):
        self.value_bits = value_bits
        self.max_bits = max_bits
        super().__init__(
            f"{what} needs {value_bits} bits, exceeds signed {max_bits}-bit width"
        )


def check_width(value: int, max_bits: int | None, what: str = "value") -> int:
    """Return ``value`` unchanged, or raise if it does not fit in ``max_bits``."""
    if max_bits is not None and value.bit_length() > max_bits - 1:
        raise FibOverflowError(value.bit_length() + 1, max_bits, what)
    return value


def _check_k(k: int) -> None:
    if isinstance(k, bool) or not isinstance(k, int):
        raise TypeError(f"step order must be an int, got {k!r}")
    if k < 2:
        raise ValueError(f"step order k must be >= 2, got {k}")


class FibTable:
    """Lazily extended table of F_k(i) and S_k(n) for one step order.

    Index 0 of both internal lists is the value at i = 0 (always 0); queries
    at negative indices return 0 without touching the table. Extension is
    guarded by a lock so a shared table can be read from several threads.
    """

    def __init__(self, k: int):
        _check_k(k)
        self.k = k
        self._values = [0, 1]
        self._sums = [0, 1]
        # running window sum of the last k values, kept for O(1) extension
        self._window = 1
        self._lock = threading.Lock()

    def _extend(self, n: int) -> None:
        with self._lock:
            values, sums, k = self._values, self._sums, self.k
            while len(values) <= n:
                i = len(values)
                nxt = self._window
                values.append(nxt)
                sums.append(sums[-1] + nxt)
                self._window += nxt
                if i - k >= 1:
                    self._window -= values[i - k]

    def value(self, i: int) -> int:
        if i <= 0:
            return 0
        if i >= len(self._values):
            self._extend(i)
        return self._values[i]

    def sum(self, n: int) -> int:
        if n <= 0:
            return 0
        if n >= len(self._sums):
            self._extend(n)
        return self._sums[n]

    def values(self, n: int) -> list[int]:
        """F_k(1..n) as a fresh list."""
        self.value(n)
        return self._values[1 : n + 1]

    def sums(self, n: int) -> list[int]:
        """S_k(1..n) as a fresh list."""
        self.sum(n)
        return self._sums[1 : n + 1]


@lru_cache(maxsize=None)
def fib_table(k: int) -> FibTable:
    """Shared table for step order ``k``."""
    return FibTable(k)


def fib_k(k: int, i: int, *, max_bits: int | None = None) -> int:
    """F_k(i): 0 for i <= 0, 1 for i = 1, sum of the previous k terms after."""
    _check_k(k)
    return check_width(fib_table(k).value(i), max_bits, f"F_{k}({i})")


def fib_sum(k: int, n: int, *, max_bits: int | None = None) -> int:
    """S_k(n) = F_k(1) + ... + F_k(n), and 0 for n <= 0."""
    _check_k(k)
    return check_width(fib_table(k).sum(n), max_bits, f"S_{k}({n})")


def char_poly(k: int, x: float) -> float:
    """x^k - x^(k-1) - ... - x - 1, evaluated by Horner's rule."""
    acc = 1.0
    for _ in range(k):
        acc = acc * x - 1.0
    return acc


@lru_cache(maxsize=None)
def phi(k: int) -> float:
    """The k-step Fibonacci constant: the real root of the characteristic
    polynomial in (1, 2), by bisection.

    The bracket is always valid since the polynomial is 1 - k < 0 at x = 1
    and exactly 1 at x = 2. Bisection runs until the bracket stops shrinking
    in floating point, well past 1e-12.
    """
    _check_k(k)
    lo, hi = 1.0, 2.0
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if char_poly(k, mid) < 0.0:
            lo = mid
        else:
            hi = mid
    # return whichever endpoint has the smaller residual
    return lo if abs(char_poly(k, lo)) <= abs(char_poly(k, hi)) else hi


def q_at_phi(k: int) -> float:
    """Normalizer with F_k(n) ~ phi_k**n / q_at_phi(k) for large n.

    Closed form phi*((k+1)*phi - 2k)/(phi - 1); it reproduces the published
    values 2.23607, 2.97417, 3.40352, 3.65468, 3.80162 for k = 2..6.
    """
    p = phi(k)
    return p * ((k + 1) * p - 2 * k) / (p - 1)


@dataclass(frozen=True)
class FibConstant:
    k: int
    phi: float
    q_at_phi: float


def fib_constant(k: int) -> FibConstant:
    return FibConstant(k=k, phi=phi(k), q_at_phi=q_at_phi(k))
