"""Boundary conditions as equivalence relations on rays.

Depth-k stems of T_m' are indexed in lexicographic order of their child
indices: the root has children 0..m, every other vertex 0..m-1. The same
order is the breadth-first position of a vertex within its depth level, so
the depth-j ancestor of depth-n position ``i`` is ``i // m**(n - j)``.
"""

import itertools
import json
import logging
from collections.abc import Iterable
from typing import Any

from pydantic import TypeAdapter, ValidationError

from arbor_rcm.errors import InvalidInputError
from arbor_rcm.models.relation import RayRelation, RelationSpec, Stem, stem_count
from arbor_rcm.services.unionfind import DisjointSet

logger = logging.getLogger(__name__)

_relation_spec_adapter: TypeAdapter = TypeAdapter(RelationSpec)


def stems(m: int, k: int) -> list[Stem]:
    """All depth-k stems in index order."""
    if k < 1:
        return [()]
    return [(first, *rest) for first in range(m + 1) for rest in itertools.product(range(m), repeat=k - 1)]


def stem_index(stem: Stem, m: int) -> int:
    """Position of ``stem`` among the stems of its depth."""
    if not stem:
        raise InvalidInputError("the root is not a stem")
    first, *rest = stem
    if not 0 <= first <= m or any(not 0 <= c < m for c in rest):
        raise InvalidInputError(f"{list(stem)} is not a vertex of T_{m}'")
    index = first
    for c in rest:
        index = index * m + c
    return index


def _make(kind: str, m: int, k: int = 0, stem_class: Iterable[int] = ()) -> RayRelation:
    try:
        return RayRelation(kind=kind, m=m, k=k, stem_class=tuple(stem_class))
    except ValidationError as e:
        raise InvalidInputError(f"Invalid relation: {e.errors()[0]['msg']}") from e


def wired(m: int = 2) -> RayRelation:
    """The maximal relation: every ray equivalent to every other."""
    return _make("open", m, 1, [0] * (m + 1))


def free(m: int = 2) -> RayRelation:
    """The minimal relation: singleton classes."""
    return _make("free", m)


def open_relation(m: int, k: int, classes: list[list[Stem]]) -> RayRelation:
    """Open relation from an explicit partition of the depth-k stems."""
    labels: list[int | None] = [None] * stem_count(m, k)
    for cid, members in enumerate(classes):
        for stem in members:
            stem = tuple(stem)
            if len(stem) != k:
                raise InvalidInputError(f"stem {list(stem)} does not have depth {k}")
            i = stem_index(stem, m)
            if labels[i] is not None:
                raise InvalidInputError(f"stem {list(stem)} appears in more than one class")
            labels[i] = cid
    missing = [list(s) for s, c in zip(stems(m, k), labels) if c is None]
    if missing:
        raise InvalidInputError(f"stems {missing[:4]} are not assigned to any class")
    return _make("open", m, k, labels)


def cutset_relation(W: Iterable[Stem], m: int = 2) -> RayRelation:
    """Relation S^W: two rays are equivalent iff they pass the same member of W.

    ``W`` holds vertices as child-index paths from the root, ``()`` being the
    root itself. It must be incomparable and meet every ray.
    """
    vertices = sorted({tuple(w) for w in W})
    if not vertices:
        raise InvalidInputError("a cutset cannot be empty")
    for w in vertices:
        if w:
            stem_index(w, m)
    for a, b in itertools.combinations(vertices, 2):
        short, long = (a, b) if len(a) <= len(b) else (b, a)
        if long[: len(short)] == short:
            raise InvalidInputError(f"{list(short)} is an ancestor of {list(long)}; W is not incomparable")

    k = max(1, max(len(w) for w in vertices))
    owner = {w: i for i, w in enumerate(vertices)}
    labels = []
    for stem in stems(m, k):
        hits = [owner[stem[:d]] for d in range(k + 1) if stem[:d] in owner]
        if not hits:
            raise InvalidInputError(f"the ray through {list(stem)} avoids W; W is not a cutset")
        labels.append(hits[0])
    return _make("open", m, k, labels)


def class_count(rel: RayRelation) -> int | None:
    """Number of classes of an open relation; None for free (uncountably many)."""
    return None if rel.is_free else rel.classes


def refine(rel: RayRelation, depth: int) -> RayRelation:
    """Same relation expressed through stems of a deeper level."""
    if rel.is_free:
        raise InvalidInputError("the free relation has no stem partition to refine")
    if depth < rel.k:
        raise InvalidInputError(f"cannot refine a depth-{rel.k} relation to depth {depth}")
    factor = rel.m ** (depth - rel.k)
    labels = [rel.stem_class[i // factor] for i in range(stem_count(rel.m, depth))]
    return _make("open", rel.m, depth, labels)


def relation_leq(a: RayRelation, b: RayRelation) -> bool:
    """Partial order: every a-class lies inside some b-class."""
    if a.is_free:
        return True
    if b.is_free:
        return False
    if a.m != b.m:
        raise InvalidInputError(f"relations on different trees (m={a.m} vs m={b.m})")
    depth = max(a.k, b.k)
    ra, rb = refine(a, depth), refine(b, depth)
    image: dict[int, int] = {}
    for ca, cb in zip(ra.stem_class, rb.stem_class):
        if image.setdefault(ca, cb) != cb:
            return False
    return True


def boundary_identification(rel: RayRelation, n: int, m: int | None = None) -> tuple[int, ...]:
    """Class id of every vertex of the depth-n boundary, by level position."""
    m = rel.m if m is None else m
    size = stem_count(m, n)
    if rel.is_free:
        return tuple(range(size))
    if m != rel.m:
        raise InvalidInputError(f"relation lives on T_{rel.m}', box on T_{m}'")
    if n < rel.k:
        raise InvalidInputError(f"box depth {n} is below the relation depth {rel.k}")
    factor = m ** (n - rel.k)
    return tuple(rel.stem_class[i // factor] for i in range(size))


def coarsen_to_box(rel: RayRelation, n: int) -> RayRelation:
    """The relation seen from the depth-n boundary: cones holding equivalent rays merge."""
    if rel.is_free:
        raise InvalidInputError("coarsening is undefined for the free relation")
    if n < 1:
        raise InvalidInputError(f"box depth must be at least 1, got {n}")
    if n >= rel.k:
        return rel

    factor = rel.m ** (rel.k - n)
    cones = DisjointSet(stem_count(rel.m, n))
    first_cone: dict[int, int] = {}
    for i, cls in enumerate(rel.stem_class):
        cone = i // factor
        if cls in first_cone:
            cones.union(first_cone[cls], cone)
        else:
            first_cone[cls] = cone
    logger.debug(f"Coarsened depth-{rel.k} relation to depth {n}: {cones.components} class(es)")
    return _make("open", rel.m, n, cones.labels())


def parse_relation(data: dict[str, Any] | str, m: int | None = None) -> RayRelation:
    """Relation from its JSON form, or the shorthands ``wired`` / ``free``."""
    if isinstance(data, str):
        text = data.strip()
        if text in ("wired", "free"):
            data = {"kind": text}
        else:
            try:
                data = json.loads(text)
            except json.JSONDecodeError as e:
                raise InvalidInputError(f"Relation is neither wired, free nor JSON: {e}") from e
    try:
        spec = _relation_spec_adapter.validate_python(data)
    except ValidationError as e:
        raise InvalidInputError(f"Malformed relation: {e.errors()[0]['msg']}") from e

    if spec.kind == "open":
        if m is not None and spec.m != m:
            raise InvalidInputError(f"relation declares m={spec.m}, expected m={m}")
        return open_relation(spec.m, spec.k, [[tuple(s) for s in c] for c in spec.classes])

    tree_m = spec.m or m or 2
    if m is not None and tree_m != m:
        raise InvalidInputError(f"relation declares m={tree_m}, expected m={m}")
    if spec.kind == "wired":
        return wired(tree_m)
    if spec.kind == "free":
        return free(tree_m)
    return cutset_relation([tuple(v) for v in spec.vertices], tree_m)


def relation_to_json(rel: RayRelation) -> dict[str, Any]:
    if rel.is_free:
        return {"kind": "free", "m": rel.m}
    groups: list[list[list[int]]] = [[] for _ in range(rel.classes)]
    for stem, cls in zip(stems(rel.m, rel.k), rel.stem_class):
        groups[cls].append(list(stem))
    return {"kind": "open", "m": rel.m, "k": rel.k, "classes": groups}
