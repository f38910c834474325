"""Array-backed disjoint sets over the integers 0..n-1."""


class DisjointSet:
    """Union by rank with path compression.

    Tracks the number of components so cluster counts come for free.
    """

    __slots__ = ("parent", "rank", "components")

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.rank = [0] * size
        self.components = size

    def copy(self) -> "DisjointSet":
        other = DisjointSet(0)
        other.parent = self.parent.copy()
        other.rank = self.rank.copy()
        other.components = self.components
        return other

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        # path compression
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        """Merge the sets of x and y; return True if they were distinct."""
        px = self.find(x)
        py = self.find(y)
        if px == py:
            return False
        if self.rank[px] < self.rank[py]:
            px, py = py, px
        self.parent[py] = px
        if self.rank[px] == self.rank[py]:
            self.rank[px] += 1
        self.components -= 1
        return True

    def connected(self, x: int, y: int) -> bool:
        return self.find(x) == self.find(y)

    def labels(self) -> list[int]:
        """Canonical component label per element, numbered by first occurrence."""
        seen: dict[int, int] = {}
        out = []
        for x in range(len(self.parent)):
            root = self.find(x)
            if root not in seen:
                seen[root] = len(seen)
            out.append(seen[root])
        return out
