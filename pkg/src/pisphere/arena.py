"""Arena geometry: surface zones, hill and pit terrain, walls and the open edge.

The default arena mirrors the experimental table: a 1.80 m x 1.20 m
rectangle tiled by a wooden band, a paper band and a foam band.  The foam
band carries a smooth hill bump in its upper part and a pit (the negative
bump) in its lower part.  Three sides are walled; the bottom edge is open.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

SURFACE_KINDS = ("wood", "paper", "foam")
OPEN_EDGES = ("bottom", "top", "left", "right")

DEFAULT_FRICTION = {"wood": 1.0, "paper": 0.75, "foam": 0.7}


class ArenaError(ValueError):
    pass


@dataclass(frozen=True)
class Zone:
    polygon: tuple[tuple[float, float], ...]
    kind: str

    def __post_init__(self):
        if self.kind not in SURFACE_KINDS:
            raise ArenaError(f"unknown surface kind {self.kind!r}")
        if len(self.polygon) < 3:
            raise ArenaError("zone polygon needs at least 3 vertices")

    def area(self) -> float:
        pts = self.polygon
        s = 0.0
        for (x1, y1), (x2, y2) in zip(pts, pts[1:] + pts[:1]):
            s += x1 * y2 - x2 * y1
        return abs(s) / 2.0

    def contains(self, x: float, y: float) -> bool:
        # ray casting, boundary-inclusive enough for tiled rectangles
        pts = self.polygon
        inside = False
        for (x1, y1), (x2, y2) in zip(pts, pts[1:] + pts[:1]):
            if min(x1, x2) - 1e-12 <= x <= max(x1, x2) + 1e-12 and min(y1, y2) - 1e-12 <= y <= max(y1, y2) + 1e-12:
                # on an axis-aligned or general edge?
                cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
                if abs(cross) < 1e-12:
                    return True
            if (y1 > y) != (y2 > y):
                xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
                if x < xi:
                    inside = not inside
        return inside


@dataclass(frozen=True)
class Bump:
    """Radially symmetric smooth bump h(r) = height * cos^2(pi r / 2R), r < R."""

    center: tuple[float, float]
    radius: float
    height: float  # negative for a pit

    def height_at(self, x: float, y: float) -> float:
        dx, dy = x - self.center[0], y - self.center[1]
        r = math.hypot(dx, dy)
        if r >= self.radius:
            return 0.0
        c = math.cos(math.pi * r / (2.0 * self.radius))
        return self.height * c * c

    def gradient_at(self, x: float, y: float) -> tuple[float, float]:
        dx, dy = x - self.center[0], y - self.center[1]
        r = math.hypot(dx, dy)
        if r >= self.radius or r == 0.0:
            return (0.0, 0.0)
        dh_dr = -self.height * (math.pi / (2.0 * self.radius)) * math.sin(math.pi * r / self.radius)
        return (dh_dr * dx / r, dh_dr * dy / r)


@dataclass(frozen=True)
class ArenaSpec:
    width: float
    depth: float
    zones: tuple[Zone, ...]
    hill: Bump
    pit: Bump
    open_edge: str = "bottom"
    friction: tuple[tuple[str, float], ...] = tuple(sorted(DEFAULT_FRICTION.items()))

    def __post_init__(self):
        if self.open_edge not in OPEN_EDGES:
            raise ArenaError(f"open_edge must be one of {OPEN_EDGES}")
        if self.width <= 0 or self.depth <= 0:
            raise ArenaError("arena must have positive extent")
        fr = dict(self.friction)
        for kind, f in fr.items():
            if not (0.0 < f <= 1.0):
                raise ArenaError(f"friction for {kind} must lie in (0, 1]")
        if self.hill.height <= 0:
            raise ArenaError("hill height must be positive")
        if self.pit.height >= 0:
            raise ArenaError("pit height must be negative (a depression)")
        area = sum(z.area() for z in self.zones)
        if abs(area - self.width * self.depth) > 1e-6 * self.width * self.depth:
            raise ArenaError("zones must tile the arena rectangle exactly")

    @property
    def friction_map(self) -> dict[str, float]:
        return dict(self.friction)

    def inside(self, x: float, y: float, tol: float = 1e-9) -> bool:
        return -tol <= x <= self.width + tol and -tol <= y <= self.depth + tol

    def surface_at(self, x: float, y: float) -> str:
        for z in self.zones:
            if z.contains(x, y):
                return z.kind
        raise ArenaError(f"position ({x:.3f}, {y:.3f}) not covered by any zone")

    def friction_at(self, x: float, y: float) -> float:
        return self.friction_map[self.surface_at(x, y)]


def terrain_height(arena: ArenaSpec, position: tuple[float, float]) -> float:
    x, y = position
    if not arena.inside(x, y):
        raise ArenaError(f"position ({x:.3f}, {y:.3f}) outside arena")
    return arena.hill.height_at(x, y) + arena.pit.height_at(x, y)


def terrain_gradient(arena: ArenaSpec, position: tuple[float, float]) -> tuple[float, float]:
    x, y = position
    if not arena.inside(x, y):
        raise ArenaError(f"position ({x:.3f}, {y:.3f}) outside arena")
    gx1, gy1 = arena.hill.gradient_at(x, y)
    gx2, gy2 = arena.pit.gradient_at(x, y)
    return (gx1 + gx2, gy1 + gy2)


def default_arena() -> ArenaSpec:
    """Three vertical surface bands; hill top-right, pit bottom-right."""
    w, d = 1.80, 1.20
    x1, x2 = 0.60, 1.20

    def rect(xa, xb) -> tuple[tuple[float, float], ...]:
        return ((xa, 0.0), (xb, 0.0), (xb, d), (xa, d))

    return ArenaSpec(
        width=w,
        depth=d,
        zones=(
            Zone(rect(0.0, x1), "wood"),
            Zone(rect(x1, x2), "paper"),
            Zone(rect(x2, w), "foam"),
        ),
        hill=Bump(center=(1.50, 0.90), radius=0.15, height=0.03),
        pit=Bump(center=(1.50, 0.30), radius=0.15, height=-0.03),
        open_edge="bottom",
    )


def arena_to_dict(arena: ArenaSpec) -> dict:
    return {
        "width": arena.width,
        "depth": arena.depth,
        "zones": [{"polygon": [list(p) for p in z.polygon], "kind": z.kind} for z in arena.zones],
        "hill": {"center": list(arena.hill.center), "radius": arena.hill.radius, "height": arena.hill.height},
        "pit": {"center": list(arena.pit.center), "radius": arena.pit.radius, "depth": -arena.pit.height},
        "open_edge": arena.open_edge,
        "friction": arena.friction_map,
    }


def arena_from_dict(d: dict) -> ArenaSpec:
    try:
        return ArenaSpec(
            width=float(d["width"]),
            depth=float(d["depth"]),
            zones=tuple(
                Zone(tuple(tuple(float(c) for c in p) for p in z["polygon"]), z["kind"])
                for z in d["zones"]
            ),
            hill=Bump(tuple(d["hill"]["center"]), float(d["hill"]["radius"]), float(d["hill"]["height"])),
            pit=Bump(tuple(d["pit"]["center"]), float(d["pit"]["radius"]), -abs(float(d["pit"]["depth"]))),
            open_edge=d.get("open_edge", "bottom"),
            friction=tuple(sorted({**DEFAULT_FRICTION, **d.get("friction", {})}.items())),
        )
    except KeyError as e:
        raise ArenaError(f"arena file missing field {e}") from e


def save_arena(arena: ArenaSpec, path: str) -> None:
    with open(path, "w") as f:
        json.dump(arena_to_dict(arena), f, indent=2, sort_keys=True)
        f.write("\n")


def load_arena(path: str) -> ArenaSpec:
    with open(path) as f:
        return arena_from_dict(json.load(f))


def arena_hash(arena: ArenaSpec) -> str:
    payload = json.dumps(arena_to_dict(arena), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()
