"""Finite windows of the positive integers.

A :class:`WindowSet` is a sorted subset of [1, horizon] together with the
horizon itself: membership of k is fully determined iff k <= horizon.
Horizon 0 is the degenerate "nothing is decided" window that arises from
aggressive negative translations and self-differences.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import SetFileError


@dataclass(frozen=True)
class WindowSet:
    elements: tuple[int, ...]
    horizon: int

    def __post_init__(self):
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")
        prev = 0
        for e in self.elements:
            if e <= prev:
                raise ValueError("elements must be strictly increasing positive integers")
            prev = e
        if self.elements and self.elements[-1] > self.horizon:
            raise ValueError(f"element {self.elements[-1]} beyond horizon {self.horizon}")

    # -- construction ------------------------------------------------------

    @classmethod
    def of(cls, items: Iterable[int], horizon: int | None = None) -> "WindowSet":
        elems = tuple(sorted(set(items)))
        if elems and elems[0] < 1:
            raise ValueError("window elements must be positive")
        if horizon is None:
            horizon = elems[-1] if elems else 0
        return cls(tuple(e for e in elems if e <= horizon), horizon)

    @classmethod
    def full(cls, horizon: int) -> "WindowSet":
        return cls(tuple(range(1, horizon + 1)), horizon)

    @classmethod
    def empty(cls, horizon: int = 0) -> "WindowSet":
        return cls((), horizon)

    # -- queries -------------------------------------------------------------

    def __contains__(self, k: int) -> bool:
        i = bisect_right(self.elements, k)
        return i > 0 and self.elements[i - 1] == k

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __bool__(self) -> bool:
        return bool(self.elements)

    def count_upto(self, n: int) -> int:
        return bisect_right(self.elements, n)

    def min(self) -> int:
        if not self.elements:
            raise ValueError("empty window has no minimum")
        return self.elements[0]

    def max(self) -> int:
        if not self.elements:
            raise ValueError("empty window has no maximum")
        return self.elements[-1]

    def density_at_horizon(self) -> Fraction:
        if self.horizon == 0:
            return Fraction(0)
        return Fraction(len(self.elements), self.horizon)

    def bitmask(self) -> int:
        """Bit k set iff k in the window (bit 0 unused)."""
        m = 0
        for e in self.elements:
            m |= 1 << e
        return m

    # -- algebra ------------------------------------------------------------

    def restrict(self, horizon: int) -> "WindowSet":
        horizon = max(0, horizon)
        if horizon >= self.horizon:
            return self
        return WindowSet(self.elements[:bisect_right(self.elements, horizon)], horizon)

    def intersect(self, other: "WindowSet") -> "WindowSet":
        h = min(self.horizon, other.horizon)
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        elems = tuple(e for e in small.elements if e <= h and e in big)
        return WindowSet(elems, h)

    def union(self, other: "WindowSet") -> "WindowSet":
        h = min(self.horizon, other.horizon)
        elems = sorted(set(self.elements) | set(other.elements))
        return WindowSet(tuple(e for e in elems if e <= h), h)

    def issubset_within(self, other: "WindowSet", horizon: int | None = None) -> bool:
        """Containment of elements, compared only on [1, horizon]."""
        h = horizon if horizon is not None else min(self.horizon, other.horizon)
        return all(e in other for e in self.elements if e <= h)


# -- set files ----------------------------------------------------------------
#
# One token per line: an integer or an inclusive range "a-b".  An optional
# first line "#horizon H" fixes the horizon (default: the max element).

def parse_window_text(text: str) -> WindowSet:
    horizon = None
    items: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.lower().startswith("horizon"):
                try:
                    horizon = int(body.split()[1])
                except (IndexError, ValueError):
                    raise SetFileError(f"line {lineno}: bad horizon directive {line!r}")
            continue
        if "-" in line[1:]:
            sep = line.index("-", 1)
            try:
                a, b = int(line[:sep]), int(line[sep + 1:])
            except ValueError:
                raise SetFileError(f"line {lineno}: bad range token {line!r}")
            if a < 1 or b < a:
                raise SetFileError(f"line {lineno}: empty or negative range {line!r}")
            items.extend(range(a, b + 1))
        else:
            try:
                k = int(line)
            except ValueError:
                raise SetFileError(f"line {lineno}: bad token {line!r}")
            if k < 1:
                raise SetFileError(f"line {lineno}: elements must be positive")
            items.append(k)
    try:
        return WindowSet.of(items, horizon)
    except ValueError as exc:
        raise SetFileError(str(exc))


def window_to_text(ws: WindowSet) -> str:
    lines = [f"#horizon {ws.horizon}"]
    i, n = 0, len(ws.elements)
    while i < n:
        j = i
        while j + 1 < n and ws.elements[j + 1] == ws.elements[j] + 1:
            j += 1
        if j - i >= 2:
            lines.append(f"{ws.elements[i]}-{ws.elements[j]}")
        else:
            lines.extend(str(e) for e in ws.elements[i:j + 1])
        i = j + 1
    return "\n".join(lines) + "\n"


def load_window(path: str) -> WindowSet:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_window_text(fh.read())


def save_window(ws: WindowSet, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(window_to_text(ws))
