"""Limit extrapolation, sequence reports and deterministic fan-out."""
from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

__all__ = ["VolumeReport", "richardson", "parallel_map", "thread_count", "fmt"]


def fmt(x: float) -> str:
    """Float rendering used in every delimited output (12 significant digits)."""
    return f"{x:.12g}"


def thread_count() -> int:
    raw = os.environ.get("ADELIC_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"ADELIC_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("ADELIC_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def parallel_map(fn: Callable, items: Iterable) -> list:
    """``[fn(x) for x in items]``, possibly threaded; results keep input order."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def richardson(values: Sequence[float], orders: Sequence[int] = (1, 1)) -> list[list[float]]:
    """Richardson table for values at ``n, 2n, 4n, ...``.

    Level ``k`` removes an ``n^{-orders[k-1]}`` error term:
    ``R_k(n) = (2^p R_{k-1}(2n) - R_{k-1}(n)) / (2^p - 1)``.  Using ``p = 1``
    twice cancels corrections of the form ``(alpha ln n + beta) / n``.
    Returns the list of levels; the last entry of the last level is the
    extrapolant.
    """
    table = [list(map(float, values))]
    for p in orders:
        prev = table[-1]
        if len(prev) < 2:
            break
        f = 2.0**p
        table.append([(f * b - a) / (f - 1) for a, b in zip(prev, prev[1:])])
    return table


@dataclass
class VolumeReport:
    """A limit estimate: the computed sequence, its Richardson iterates and the extrapolant."""

    sequence: list[tuple[int, float]]
    method: str
    extrapolant: float
    iterates: list[list[float]] = field(default_factory=list)
    exact: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def tail(self) -> float:
        return self.sequence[-1][1]

    @classmethod
    def from_doubling(
        cls, points: Sequence[tuple[int, float]], method: str, orders=(1, 1), **kw
    ) -> VolumeReport:
        """Extrapolate from the last three (or two) points, assumed at ``n, 2n, 4n``."""
        pts = list(points)
        tail = pts[-3:] if len(pts) >= 3 else pts[-2:]
        ns = [n for n, _ in tail]
        if any(b != 2 * a for a, b in zip(ns, ns[1:])):
            raise ValueError(f"extrapolation points must double: {ns}")
        table = richardson([v for _, v in tail], orders[: len(tail) - 1])
        return cls(pts, method, table[-1][-1], table, **kw)

    def extrapolant_column(self) -> list[float | None]:
        """Per-row extrapolant: filled on the rows used by the final Richardson step."""
        col: list[float | None] = [None] * len(self.sequence)
        if self.iterates:
            col[-1] = self.extrapolant
        return col

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "value", "extrapolant"])
        for (n, v), e in zip(self.sequence, self.extrapolant_column()):
            w.writerow([n, fmt(v), "" if e is None else fmt(e)])
        return buf.getvalue()

    def to_json(self) -> dict:
        out = {
            "method": self.method,
            "sequence": [[n, v] for n, v in self.sequence],
            "extrapolant": self.extrapolant,
            "iterates": self.iterates,
        }
        if self.exact is not None:
            out["exact"] = self.exact
        out.update(self.meta)
        return out
