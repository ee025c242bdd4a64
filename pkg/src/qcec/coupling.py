"""Device coupling maps: undirected CNOT connectivity graphs.

Presets live as JSON under qcec/data and mirror public IBM device layouts.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from importlib import resources

PRESETS = ("london", "boeblingen", "rochester")


@dataclass(frozen=True)
class CouplingMap:
    name: str
    num_qubits: int
    edges: tuple[tuple[int, int], ...]
    _adj: dict[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        seen = set()
        for a, b in self.edges:
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise ValueError(f"edge ({a},{b}) outside 0..{self.num_qubits - 1}")
            if a == b:
                raise ValueError(f"self-loop on qubit {a}")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        adj: dict[int, list[int]] = {q: [] for q in range(self.num_qubits)}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        object.__setattr__(self, "_adj",
                           {q: tuple(sorted(ns)) for q, ns in adj.items()})

    def neighbors(self, q: int) -> tuple[int, ...]:
        return self._adj[q]

    def connected(self, a: int, b: int) -> bool:
        return b in self._adj[a]

    def shortest_path(self, a: int, b: int) -> list[int]:
        """BFS path from a to b inclusive; neighbor expansion in ascending
        qubit order so the chosen path is reproducible."""
        if a == b:
            return [a]
        parent = {a: a}
        queue = deque([a])
        while queue:
            cur = queue.popleft()
            for nxt in self._adj[cur]:
                if nxt in parent:
                    continue
                parent[nxt] = cur
                if nxt == b:
                    path = [b]
                    while path[-1] != a:
                        path.append(parent[path[-1]])
                    path.reverse()
                    return path
                queue.append(nxt)
        raise ValueError(f"qubits {a} and {b} are not connected on {self.name}")

    @staticmethod
    def from_json(text: str) -> "CouplingMap":
        data = json.loads(text)
        edges = tuple((int(a), int(b)) for a, b in data["edges"])
        return CouplingMap(str(data["name"]), int(data["num_qubits"]), edges)

    def to_json(self) -> str:
        return json.dumps({
            "name": self.name,
            "num_qubits": self.num_qubits,
            "edges": [list(e) for e in self.edges],
        }, indent=2)

    @staticmethod
    def preset(name: str) -> "CouplingMap":
        if name not in PRESETS:
            raise ValueError(f"unknown coupling map {name!r}; have {PRESETS}")
        text = resources.files("qcec.data").joinpath(f"{name}.json").read_text()
        return CouplingMap.from_json(text)


def line_map(n: int) -> CouplingMap:
    """Linear nearest-neighbour chain, handy for tests."""
    return CouplingMap(f"line{n}", n, tuple((i, i + 1) for i in range(n - 1)))
