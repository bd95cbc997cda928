"""Finite groups as multiplication tables, with designated generating sets.

Elements are indices 0..n-1 with 0 the identity.  Tables are validated on
construction (identity, associativity, inverses); generating sets must be
symmetric, identity-free, and actually generate.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field


class GroupError(ValueError):
    """The supplied table or generating set is not a group presentation."""


@dataclass(frozen=True)
class FiniteGroup:
    name: str
    table: tuple[tuple[int, ...], ...]
    generators: tuple[int, ...]

    def __post_init__(self):
        n = len(self.table)
        if n == 0:
            raise GroupError("empty table")
        for row in self.table:
            if len(row) != n or any(not (0 <= x < n) for x in row):
                raise GroupError("table is not n x n over 0..n-1")
        for g in range(n):
            if self.table[0][g] != g or self.table[g][0] != g:
                raise GroupError("0 is not an identity")
        for g in range(n):
            if 0 not in self.table[g]:
                raise GroupError(f"element {g} has no inverse")
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                        raise GroupError("table is not associative")
        if not self.generators:
            raise GroupError("empty generating set")
        gens = set(self.generators)
        if 0 in gens:
            raise GroupError("generating set contains the identity")
        if any(self.inverse(g) not in gens for g in gens):
            raise GroupError("generating set is not symmetric")
        # closure under the generators must reach the whole group
        seen = {0}
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for g in gens:
                y = self.table[x][g]
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        if len(seen) != n:
            raise GroupError("generators do not generate the group")

    @property
    def order(self) -> int:
        return len(self.table)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inverse(self, a: int) -> int:
        return self.table[a].index(0)

    def nontrivial(self) -> tuple[int, ...]:
        return tuple(range(1, self.order))

    def word_lengths(self) -> tuple[int, ...]:
        """Word length of every element over the designated generators."""
        dist = {0: 0}
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for g in self.generators:
                y = self.table[x][g]
                if y not in dist:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        return tuple(dist[i] for i in range(self.order))


def cyclic_group(n: int) -> FiniteGroup:
    """Z/n with generators {+1, -1} (just {1} when n = 2)."""
    if n < 2:
        raise GroupError("cyclic group needs n >= 2")
    table = tuple(tuple((i + j) % n for j in range(n)) for i in range(n))
    gens = (1,) if n == 2 else (1, n - 1)
    return FiniteGroup(f"Z/{n}", table, gens)


def klein_four_group() -> FiniteGroup:
    table = (
        (0, 1, 2, 3),
        (1, 0, 3, 2),
        (2, 3, 0, 1),
        (3, 2, 1, 0),
    )
    return FiniteGroup("Z/2xZ/2", table, (1, 2, 3))


def symmetric_group_3() -> FiniteGroup:
    """S3 with the two transpositions (01) and (12) as generators."""
    perms = [(0, 1, 2), (1, 0, 2), (0, 2, 1), (2, 1, 0), (1, 2, 0), (2, 0, 1)]
    index = {p: i for i, p in enumerate(perms)}

    def compose(p, q):  # apply q then p
        return tuple(p[q[i]] for i in range(3))

    table = tuple(tuple(index[compose(perms[i], perms[j])] for j in range(6))
                  for i in range(6))
    return FiniteGroup("S3", table, (index[(1, 0, 2)], index[(0, 2, 1)]))


def group_from_descriptor(desc: str) -> FiniteGroup:
    """Parse descriptors like 'cyclic:3', 'klein4', 's3'."""
    desc = desc.strip().lower()
    if desc.startswith("cyclic:"):
        return cyclic_group(int(desc.split(":")[1]))
    if desc in ("klein4", "z2xz2"):
        return klein_four_group()
    if desc == "s3":
        return symmetric_group_3()
    raise GroupError(f"unknown group descriptor {desc!r}")
