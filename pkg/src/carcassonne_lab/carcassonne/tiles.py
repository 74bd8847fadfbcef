"""Tile-set loading and per-rotation lookup tables.

Ports
-----
Each tile side is split into three ports numbered clockwise, so a tile has
12 ports ``side * 3 + sub`` with sides ``N=0, E=1, S=2, W=3``.  A city or
field side uses all three ports; a road side uses the middle port for the
road and the outer two for the fields on either side of it.  Port
``(side, sub)`` touches port ``(side + 2, 2 - sub)`` of the neighbouring
tile.  Rotating a tile by ``r`` quarter turns clockwise moves side ``d`` to
``(d + r) % 4`` and keeps ``sub``.

Data file schema (``tiles.json``)::

    {"version": 1, "start_tile": "D", "edge_order": "NESW",
     "tiles": [{"id": str, "edges": "CRFR", "pennant": bool, "count": int,
                "features": [{"kind": "city|road|field|monastery",
                              "ports": ["N0", ...],
                              "adjacent_cities": [feature index, ...]}]}]}

``edges`` lists the edge kind of the N, E, S, W sides (``C``ity, ``R``oad,
``F``ield).  A feature's position in ``features`` is its stable slot index,
used to address meeples.  ``adjacent_cities`` (fields only) lists the city
slots on the same tile that the field borders.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Dict, List, Tuple

CITY, ROAD, FIELD, MONASTERY = 1, 2, 3, 4
KIND_NAMES = {CITY: "city", ROAD: "road", FIELD: "field", MONASTERY: "monastery"}
_KIND_BY_NAME = {v: k for k, v in KIND_NAMES.items()}
_EDGE_BY_LETTER = {"C": CITY, "R": ROAD, "F": FIELD}
SIDES = "NESW"
# (dx, dy) per side, y grows northwards
DIRS = ((0, 1), (1, 0), (0, -1), (-1, 0))

# Standard base-game scoring constants, shared by the engine and the fixtures.
SCORING = {
    "city_tile": 2,
    "city_pennant": 2,
    "road_tile": 1,
    "monastery_complete": 9,
    "farm_city": 3,
    "end_city_tile": 1,
    "end_city_pennant": 1,
    "end_road_tile": 1,
}

MAX_FEATURES = 8  # stride of global feature ids: tile serial * 8 + slot


def port_index(name: str) -> int:
    return SIDES.index(name[0]) * 3 + int(name[1])


def rotate_port(p: int, r: int) -> int:
    return ((p // 3 + r) % 4) * 3 + p % 3


def opposite_port(p: int) -> int:
    return ((p // 3 + 2) % 4) * 3 + (2 - p % 3)


@dataclass(frozen=True)
class Feature:
    kind: int
    ports: Tuple[int, ...]
    adjacent_cities: Tuple[int, ...] = ()


@dataclass(frozen=True)
class TileKind:
    index: int
    id: str
    edges: Tuple[int, int, int, int]
    features: Tuple[Feature, ...]
    pennant: bool
    count: int

    def rotated_edges(self, r: int) -> Tuple[int, ...]:
        return tuple(self.edges[(d - r) % 4] for d in range(4))


@dataclass(frozen=True)
class Orientation:
    """Lookup tables for one tile kind at one rotation."""

    edges: Tuple[int, int, int, int]
    code: int
    port_feature: Tuple[int, ...]  # 12 entries: local slot at each rotated port
    # per side: ((slot, port), ...) one entry per distinct neighbour feature touched
    side_links: Tuple[Tuple[Tuple[int, int], ...], ...]
    # per slot: ((side, port), ...)
    feature_links: Tuple[Tuple[Tuple[int, int], ...], ...]


class TileSetError(ValueError):
    pass


@dataclass(frozen=True)
class TileSet:
    version: int
    kinds: Tuple[TileKind, ...]
    start: int
    orientations: Tuple[Tuple[Orientation, ...], ...]  # [kind][rotation]
    # per kind: ((edge code, rotations sharing it), ...)
    rotation_groups: Tuple[Tuple[Tuple[int, Tuple[int, ...]], ...], ...]

    @property
    def total(self) -> int:
        return sum(k.count for k in self.kinds)

    def by_id(self, tid: str) -> TileKind:
        for k in self.kinds:
            if k.id == tid:
                return k
        raise KeyError(tid)


def edge_code(edges) -> int:
    return sum(e << (2 * d) for d, e in enumerate(edges))


def _orientation(kind: TileKind, r: int) -> Orientation:
    edges = kind.rotated_edges(r)
    port_feature = [-1] * 12
    for slot, f in enumerate(kind.features):
        for p in f.ports:
            port_feature[rotate_port(p, r)] = slot
    side_links = []
    for d in range(4):
        base = d * 3
        if edges[d] == ROAD:
            reps = (base, base + 1, base + 2)
        else:
            reps = (base + 1,)
        side_links.append(tuple((port_feature[p], p) for p in reps))
    feature_links = [[] for _ in kind.features]
    for d, links in enumerate(side_links):
        for slot, p in links:
            feature_links[slot].append((d, p))
    return Orientation(
        edges=edges,
        code=edge_code(edges),
        port_feature=tuple(port_feature),
        side_links=tuple(side_links),
        feature_links=tuple(tuple(x) for x in feature_links),
    )


def _validate(kind: TileKind) -> None:
    seen: Dict[int, int] = {}
    for slot, f in enumerate(kind.features):
        if f.kind == MONASTERY:
            if f.ports:
                raise TileSetError(f"{kind.id}: monastery must not touch edges")
            continue
        if not f.ports:
            raise TileSetError(f"{kind.id}: feature {slot} touches no edge")
        for p in f.ports:
            if p in seen:
                raise TileSetError(f"{kind.id}: port {p} used twice")
            seen[p] = slot
        for c in f.adjacent_cities:
            if f.kind != FIELD or kind.features[c].kind != CITY:
                raise TileSetError(f"{kind.id}: bad city adjacency on slot {slot}")
    if len(seen) != 12:
        raise TileSetError(f"{kind.id}: ports do not cover all 12 positions")
    for d, e in enumerate(kind.edges):
        slots = [seen[d * 3 + i] for i in range(3)]
        kinds = [kind.features[s].kind for s in slots]
        if e == ROAD:
            ok = kinds == [FIELD, ROAD, FIELD]
        else:
            ok = kinds == [e] * 3 and len(set(slots)) == 1
        if not ok:
            raise TileSetError(f"{kind.id}: side {SIDES[d]} inconsistent with edge kind")
    if kind.pennant and not any(f.kind == CITY for f in kind.features):
        raise TileSetError(f"{kind.id}: pennant without a city")
    if len(kind.features) > MAX_FEATURES:
        raise TileSetError(f"{kind.id}: too many features")


def parse_tileset(data: dict) -> TileSet:
    kinds = []
    for i, t in enumerate(data["tiles"]):
        feats = tuple(
            Feature(
                kind=_KIND_BY_NAME[f["kind"]],
                ports=tuple(port_index(p) for p in f["ports"]),
                adjacent_cities=tuple(f.get("adjacent_cities", ())),
            )
            for f in t["features"]
        )
        kind = TileKind(
            index=i,
            id=t["id"],
            edges=tuple(_EDGE_BY_LETTER[c] for c in t["edges"]),
            features=feats,
            pennant=bool(t["pennant"]),
            count=int(t["count"]),
        )
        _validate(kind)
        kinds.append(kind)
    ids = [k.id for k in kinds]
    if len(set(ids)) != len(ids):
        raise TileSetError("duplicate tile ids")
    orientations = tuple(tuple(_orientation(k, r) for r in range(4)) for k in kinds)
    groups = []
    for ors in orientations:
        by_code: Dict[int, List[int]] = {}
        for r, o in enumerate(ors):
            by_code.setdefault(o.code, []).append(r)
        groups.append(tuple((c, tuple(rs)) for c, rs in by_code.items()))
    start = ids.index(data["start_tile"])
    return TileSet(
        version=int(data["version"]),
        kinds=tuple(kinds),
        start=start,
        orientations=orientations,
        rotation_groups=tuple(groups),
    )


@lru_cache(maxsize=None)
def standard_tileset() -> TileSet:
    text = resources.files(__package__).joinpath("tiles.json").read_text()
    return parse_tileset(json.loads(text))
