#!/usr/bin/env python3
"""Generate the synthetic-city fixture in data/synthetic_city.

A 3000 m x 2400 m town cut by a river with an island, a southern
tributary and a pond. Five flood snapshots grow monotonically: buffers widen
and the island shrinks from step to step. Output is deterministic for a
given seed.
"""

import argparse
import json
from pathlib import Path

import numpy as np
from shapely import affinity
from shapely.geometry import LineString, MultiPolygon, Point, Polygon
from shapely.ops import unary_union

CRS = "EPSG:25832"
WIDTH, HEIGHT = 3000.0, 2400.0
GRID_STEP = 120.0
DIGITS = 3

RIVER = LineString([(-50, 980), (500, 1080), (1000, 960), (1500, 1120), (2000, 1060),
                    (2350, 1150)])
TRIBUTARY = LineString([(2650, -50), (2500, 400), (2300, 800), (2200, 1080)])
POND_CENTRE = Point(700, 1900)
ISLAND_CENTRE = Point(1000, 965)

# Per step: river half width, tributary half width, pond radius, island radius.
STEPS = [
    (90.0, 30.0, 70.0, 60.0),
    (110.0, 40.0, 85.0, 54.0),
    (135.0, 55.0, 100.0, 48.0),
    (160.0, 75.0, 120.0, 42.0),
    (190.0, 100.0, 145.0, 36.0),
]


def feature_collection(features, extra=None):
    doc = {"type": "FeatureCollection",
           "crs": {"type": "name", "properties": {"name": CRS}}}
    if extra:
        doc.update(extra)
    doc["features"] = features
    return doc


def rnd(v):
    return round(float(v), DIGITS)


def ring_coords(ring):
    return [[rnd(x), rnd(y)] for x, y in ring.coords]


def polygon_coords(poly):
    return [ring_coords(poly.exterior)] + [ring_coords(h) for h in poly.interiors]


def rounded_polygon(poly):
    return Polygon([(rnd(x), rnd(y)) for x, y in poly.exterior.coords],
                   [[(rnd(x), rnd(y)) for x, y in h.coords] for h in poly.interiors])


def flood_steps():
    # Widths grow by well over the arc approximation error between steps, so
    # each snapshot contains the previous one with metres to spare and the
    # millimetre rounding cannot break the nesting.
    steps = []
    previous = None
    for river_w, trib_w, pond_r, island_r in STEPS:
        water = unary_union([
            RIVER.buffer(river_w, quad_segs=6),
            TRIBUTARY.buffer(trib_w, quad_segs=6),
            POND_CENTRE.buffer(pond_r, quad_segs=8),
        ])
        island = affinity.scale(ISLAND_CENTRE.buffer(island_r, quad_segs=8), 1.6, 1.0)
        flood = water.difference(island)
        polys = list(flood.geoms) if isinstance(flood, MultiPolygon) else [flood]
        polys = [rounded_polygon(p) for p in polys]
        for p in polys:
            assert p.is_valid, "rounded flood polygon became invalid"
        merged = unary_union(polys)
        if previous is not None:
            assert merged.covers(previous), "flood sequence is not growing"
            assert merged.buffer(-0.5).covers(previous.buffer(-1.0)), "nesting margin too thin"
        previous = merged
        steps.append(sorted(polys, key=lambda p: (p.bounds[0], p.bounds[1])))
    return steps


def buildings(rng):
    centres = [(400, 600, 140), (900, 1300, 220), (1600, 900, 200), (2300, 1700, 260),
               (1200, 2000, 180), (2600, 500, 150)]
    pts = []
    for cx, cy, sd in centres:
        n = 260
        pts.extend(zip(rng.normal(cx, sd, n), rng.normal(cy, sd, n)))
    pts.extend(zip(rng.uniform(0, WIDTH, 500), rng.uniform(0, HEIGHT, 500)))
    feats = []
    for i, (x, y) in enumerate(pts):
        if not (-100 <= x <= WIDTH + 100 and -100 <= y <= HEIGHT + 100):
            continue
        if i % 7 == 0:
            # Some buildings as footprints so centroid handling is exercised.
            s = 6.0 + (i % 5)
            ring = [[rnd(x - s), rnd(y - s)], [rnd(x + s), rnd(y - s)], [rnd(x + s), rnd(y + s)],
                    [rnd(x - s), rnd(y + s)], [rnd(x - s), rnd(y - s)]]
            geom = {"type": "Polygon", "coordinates": [ring]}
        else:
            geom = {"type": "Point", "coordinates": [rnd(x), rnd(y)]}
        feats.append({"type": "Feature", "id": f"b{i:05d}", "geometry": geom, "properties": {}})
    return feats


FACILITIES = [
    ("care-riverside", 1480, 1105),   # in the river from the first step
    ("care-island", 1000, 965),       # on the island, reached as it shrinks
    ("care-north", 900, 2100),
    ("care-pond", 790, 1900),         # reached as the pond grows
    ("care-east", 2500, 1900),
    ("care-south", 600, 300),
    ("care-tributary", 2440, 560),    # reached as the tributary widens
]


def facilities():
    return [{"type": "Feature", "id": fid, "properties": {"kind": "care"},
             "geometry": {"type": "Point", "coordinates": [rnd(x), rnd(y)]}}
            for fid, x, y in FACILITIES]


def roads(rng):
    nx = int(WIDTH // GRID_STEP) + 1
    ny = int(HEIGHT // GRID_STEP) + 1
    node_id = {}
    feats = []
    for j in range(ny):
        for i in range(nx):
            nid = 1 + j * nx + i
            x = i * GRID_STEP + (rng.uniform(-15, 15) if 0 < i < nx - 1 else 0.0)
            y = j * GRID_STEP + (rng.uniform(-15, 15) if 0 < j < ny - 1 else 0.0)
            node_id[(i, j)] = (nid, rnd(x), rnd(y))
            feats.append({"type": "Feature", "id": f"n{nid}",
                          "properties": {"node_id": nid},
                          "geometry": {"type": "Point", "coordinates": [rnd(x), rnd(y)]}})
    seg = 0
    for j in range(ny):
        for i in range(nx):
            for di, dj in ((1, 0), (0, 1)):
                if (i + di, j + dj) not in node_id:
                    continue
                if rng.uniform() < 0.12:
                    continue
                a = node_id[(i, j)]
                b = node_id[(i + di, j + dj)]
                coords = [[a[1], a[2]]]
                if rng.uniform() < 0.3:
                    mx = (a[1] + b[1]) / 2 + rng.uniform(-12, 12)
                    my = (a[2] + b[2]) / 2 + rng.uniform(-12, 12)
                    coords.append([rnd(mx), rnd(my)])
                coords.append([b[1], b[2]])
                seg += 1
                feats.append({"type": "Feature", "id": f"s{seg:04d}",
                              "properties": {"node_from": a[0], "node_to": b[0]},
                              "geometry": {"type": "LineString", "coordinates": coords}})
    return feats


def flood_doc(polys, step):
    feats = [{"type": "Feature", "id": f"flood-{step}-{k}", "properties": {},
              "geometry": {"type": "Polygon", "coordinates": polygon_coords(p)}}
             for k, p in enumerate(polys)]
    return feature_collection(feats, {"version_tag": f"synthetic-flood-step-{step}"})


CONFIG = """# Synthetic city: river with island, southern tributary, pond.
name = synthetic-city
crs = {crs}
bbox = 0 0 3000 2400
hex_max_width = 420
flood = flood.geojson
buildings = buildings.geojson
facilities = facilities.geojson
roads = roads.geojson
destination = west-hub 130 2270
destination = east-hub 2880 2150
max_snap = 100
weights = 0, 0.33, 0.66, 1
clusters = 3
density_percentiles = 0.75 0.90
"""


def write_json(path, doc):
    path.write_text(json.dumps(doc, indent=None, separators=(",", ":")) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "data" /
                                         "synthetic_city"))
    ap.add_argument("--seed", type=int, default=20240611)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    write_json(out / "buildings.geojson", feature_collection(buildings(rng)))
    write_json(out / "facilities.geojson", feature_collection(facilities()))
    write_json(out / "roads.geojson", feature_collection(roads(rng)))
    steps = flood_steps()
    for k, polys in enumerate(steps, start=1):
        write_json(out / f"flood_step{k}.geojson", flood_doc(polys, k))
    write_json(out / "flood.geojson", flood_doc(steps[0], 1))
    write_json(out / "flood_empty.geojson",
               feature_collection([], {"version_tag": "synthetic-flood-empty"}))
    (out / "scenario.txt").write_text(CONFIG.format(crs=CRS))
    print(f"wrote fixture to {out}")


if __name__ == "__main__":
    main()
