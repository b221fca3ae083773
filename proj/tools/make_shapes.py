#!/usr/bin/env python3
"""Regenerates data/shapes.json.

Simple parametric shapes (discs, boxes, n-gons, arcs) are stored as generator
entries resolved by the C++ loader. The letter-like grains are authored here
as explicit simple polygons; shapes with holes (O, hashtag) get a hairline
slit so the outline stays a single simple loop.
"""

import json
import math
import pathlib

from shapely.geometry import Polygon, box
from shapely.geometry.polygon import orient
from shapely.ops import unary_union


def polygon_vertices(poly: Polygon, scale: float, tol: float = 1e-9) -> list:
    poly = orient(poly, sign=1.0)
    assert not list(poly.interiors), "expected a simple polygon without holes"
    pts = list(poly.exterior.coords)[:-1]
    # merge near-duplicate consecutive points before the collinearity test;
    # a duplicate neighbor makes any corner look collinear
    dedup = []
    for p in pts:
        if not dedup or math.dist(dedup[-1], p) > 1e-7:
            dedup.append(p)
    if len(dedup) > 1 and math.dist(dedup[0], dedup[-1]) <= 1e-7:
        dedup.pop()
    # drop collinear runs left over from box unions
    out = []
    n = len(dedup)
    for i in range(n):
        a, b, c = dedup[i - 1], dedup[i], dedup[(i + 1) % n]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(cross) > tol:
            out.append(b)
    cx = sum(p[0] for p in out) / len(out)
    cy = sum(p[1] for p in out) / len(out)
    return [[round((x - cx) * scale, 9), round((y - cy) * scale, 9)] for x, y in out]


def hashtag() -> list:
    bars = [
        box(1, 0, 2, 5), box(3, 0, 4, 5),  # verticals
        box(0, 1, 5, 2), box(0, 3, 5, 4),  # horizontals
    ]
    solid = unary_union(bars)
    # cut a hairline slit from the center hole out through the top bar
    solid = solid.difference(box(2.49, 2.9, 2.51, 4.1))
    # bounding radius ~0.5: farthest point is a bar end corner, r=sqrt(1.5^2+2.5^2)
    return polygon_vertices(solid, 0.5 / math.hypot(1.5, 2.5))


def letter_o() -> list:
    n = 48
    outer = Polygon([(0.4 * math.cos(2 * math.pi * i / n), 0.4 * math.sin(2 * math.pi * i / n))
                     for i in range(n)])
    inner = Polygon([(0.24 * math.cos(2 * math.pi * i / n), 0.24 * math.sin(2 * math.pi * i / n))
                     for i in range(n)])
    ring = outer.difference(inner).difference(box(0.0, -0.005, 0.45, 0.005))
    return polygon_vertices(ring, 1.0)


def letter_u() -> list:
    outer = box(0, 0, 1, 1)
    slot = box(0.3, 0.35, 0.7, 1.01)
    return polygon_vertices(outer.difference(slot), 0.42 / math.hypot(0.5, 0.5))


def letter_n() -> list:
    left = box(0, 0, 0.3, 1)
    right = box(0.7, 0, 1, 1)
    diag = Polygon([(0.0, 1.0), (0.3, 1.0), (1.0, 0.3), (1.0, 0.0), (0.7, 0.0), (0.0, 0.7)])
    return polygon_vertices(unary_union([left, right, diag]), 0.7 / math.hypot(0.5, 0.5))


def letter_d() -> list:
    bar = box(0, -0.5, 0.25, 0.5)
    n = 24
    bowl = Polygon([(0.5 * math.cos(math.pi * (i / n - 0.5)), 0.5 * math.sin(math.pi * (i / n - 0.5)))
                    for i in range(n + 1)])
    return polygon_vertices(unary_union([bar, bowl]), 0.7)


def main() -> None:
    shapes = [
        {"name": "disc", "density": 1.0, "ngon": {"sides": 64, "radius": 0.4}},
        {"name": "box", "density": 1.0, "box": {"width": 0.8, "height": 0.8}},
        {"name": "block_tall", "density": 1.0, "box": {"width": 0.5, "height": 1.5}},
        # slim enough that a 15-degree lean demands floor friction ~0.12,
        # between the collapsing and stable friction coefficients
        {"name": "plank", "density": 1.0, "box": {"width": 0.05, "height": 1.5}},
        # corner-wedge statics: a rectangle leaning at 0.6 rad in a friction
        # corner has a critical coefficient that approaches tan(0.3) = 0.309
        # only in the thin limit; 0.02 wide keeps it at 0.303 so mu = 0.3
        # still slides
        {"name": "slat", "density": 1.0, "box": {"width": 0.02, "height": 1.5}},
        {"name": "triangle", "density": 1.0, "ngon": {"sides": 3, "radius": 0.6}},
        {"name": "octagon", "density": 1.0, "ngon": {"sides": 8, "radius": 0.27}},
        {"name": "wall_disc", "density": 1.0, "ngon": {"sides": 32, "radius": 0.3}},
        {"name": "hashtag", "density": 1.0, "vertices": hashtag()},
        {"name": "letter_o", "density": 1.0, "vertices": letter_o()},
        {"name": "letter_u", "density": 1.0, "vertices": letter_u()},
        {"name": "letter_n", "density": 1.0, "vertices": letter_n()},
        {"name": "letter_d", "density": 1.0, "vertices": letter_d()},
    ]
    for pct in (25, 50, 75, 100):
        shapes.append({
            "name": f"arc_{pct}",
            "density": 1.0,
            "arc": {"radius": 0.35, "thickness": 0.06, "fraction": pct / 100.0},
        })
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "shapes.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps({"shapes": shapes}, indent=1) + "\n")
    print(f"wrote {out} ({len(shapes)} shapes)")


if __name__ == "__main__":
    main()
