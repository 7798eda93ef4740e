"""Symbol tables: which names exist and what role each one plays."""

from __future__ import annotations

from typing import Iterator

KINDS = ("coordinate", "velocity", "momentum", "parameter", "constant", "action")
VELOCITY_SUFFIX = "_d"


def velocity_name(coordinate: str) -> str:
    return coordinate + VELOCITY_SUFFIX


class SymbolTable:
    """Ordered mapping ``name -> kind``; membership tests work with ``in``."""

    def __init__(self):
        self._kinds = {}

    def declare(self, name: str, kind: str) -> None:
        if kind not in KINDS:
            raise ValueError(f"unknown symbol kind {kind!r}")
        if name in self._kinds:
            raise ValueError(f"symbol {name!r} is already declared as {self._kinds[name]}")
        self._kinds[name] = kind

    def kind(self, name: str) -> str:
        return self._kinds[name]

    def names(self, kind: str = None) -> list:
        return [n for n, k in self._kinds.items() if kind is None or k == kind]

    def __contains__(self, name) -> bool:
        return name in self._kinds

    def __iter__(self) -> Iterator[str]:
        return iter(self._kinds)

    def __len__(self) -> int:
        return len(self._kinds)

    def copy(self) -> "SymbolTable":
        out = SymbolTable()
        out._kinds = dict(self._kinds)
        return out
