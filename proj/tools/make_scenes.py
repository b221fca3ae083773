#!/usr/bin/env python3
"""Regenerates the shipped scene files in scenes/.

All placement math (pre-settled penetrations, leaning poses, grain grids) is
done here so the scene files stay plain data.
"""

import json
import math
import pathlib
import random

G = 9.8
SCENES = pathlib.Path(__file__).resolve().parent.parent / "scenes"


def contact(k_n, k_t, mu, gamma):
    return {"k_n": k_n, "k_t": k_t, "mu": mu, "gamma_n": gamma, "gamma_t": gamma}


def write(name, scene):
    scene = {"name": name, "shape_library": "../data/shapes.json", **scene}
    (SCENES / f"{name}.json").write_text(json.dumps(scene, indent=1) + "\n")
    print(f"wrote scenes/{name}.json ({len(scene['bodies'])} bodies)")


def rot(theta, x, y):
    c, s = math.cos(theta), math.sin(theta)
    return (c * x - s * y, s * x + c * y)


def inclined_plane():
    # 16-degree slope; tan(16) = 0.287 sits between mu = 0.28 and 0.30.
    # The box starts in the measured static equilibrium pose: it carries a
    # slight tilt so the soft-tie contact centroid sits 0.4*tan(alpha)
    # downslope of the face center, balancing the gravity moment. The two
    # constants come from a heavily damped settle run at high friction
    # (k_n = 1e4, tie width 2e-3); without the pre-tilt the rocking
    # transient slips ~2 cm even at super-critical friction.
    alpha = math.radians(16.0)
    n = (-math.sin(alpha), math.cos(alpha))
    tilt = 0.001485957
    c = 0.400869991
    write("inclined_plane", {
        "params": {
            "dt": 5e-4, "gravity": [0.0, -G], "backend": "oracle",
            "contact": contact(1e4, 2e4, 0.30, 32.0) | {"gamma_t": 45.0},
        },
        "duration": 2.0, "output_stride": 50,
        "halfplanes": [{"normal": list(n), "offset": 0.0}],
        "bodies": [{"shape": "box", "pose": [alpha + tilt, n[0] * c, n[1] * c]}],
    })


def inclined_plane_boxes(tilt=0.001593299, c=0.399059427, dy=0.099150327):
    # neural-backend variant: the incline is built from static boxes so the
    # box-box contact map carries the whole experiment; same 16-degree slope.
    # tilt/c are the settled equilibrium start calibrated against the trained
    # box pair model (see calibrate_neural_incline in run docs).
    alpha = math.radians(16.0)
    n = (-math.sin(alpha), math.cos(alpha))
    t = (math.cos(alpha), math.sin(alpha))
    bodies = []
    for s in (-0.8, 0.0, 0.8):
        bodies.append({"shape": "box",
                       "pose": [alpha, -0.4 * n[0] + s * t[0], -0.4 * n[1] + s * t[1]],
                       "kind": "static"})
    bodies.append({"shape": "box", "pose": [alpha + tilt,
                                            c * n[0] + dy * t[0], c * n[1] + dy * t[1]]})
    write("inclined_plane_boxes", {
        "models_dir": "../models",
        "params": {
            "dt": 5e-4, "gravity": [0.0, -G], "backend": "neural",
            "contact": contact(1e4, 2e4, 0.30, 32.0) | {"gamma_t": 45.0},
        },
        "duration": 2.0, "output_stride": 50,
        "halfplanes": [],
        "bodies": bodies,
    })


def leaning_block():
    # slat leaning in a floor/wall corner at theta = 0.6 rad; the corner-wedge
    # critical friction for this geometry is 0.303, so 0.1 and 0.3 slide
    theta = 0.6
    a, h = 0.01, 0.75
    corners = [rot(theta, sx * a, sy * h) for sx in (-1, 1) for sy in (-1, 1)]
    com_x = -min(p[0] for p in corners)  # leftmost corner touches the wall x=0
    com_y = -min(p[1] for p in corners)  # lowest corner touches the floor y=0
    write("leaning_block", {
        "params": {
            "dt": 2.5e-4, "gravity": [0.0, -G], "backend": "oracle",
            "contact": contact(1e4, 5e3, 0.3, 10.0),
        },
        "duration": 2.0, "output_stride": 50,
        "halfplanes": [
            {"normal": [0.0, 1.0], "offset": 0.0},
            {"normal": [1.0, 0.0], "offset": 0.0},
        ],
        "bodies": [{"shape": "slat", "pose": [theta, com_x, com_y]}],
    })


def triangle():
    # Two planks leaning tip-to-tip at 15 degrees from vertical. With
    # half-extents (0.025, 0.75) the floor-friction demand
    # (h sin b - a cos b) / (2 (h cos b + a sin b)) = 0.116 sits between the
    # collapsing (0.1) and stable (0.3) friction coefficients.
    beta = math.radians(15.0)
    a, h = 0.025, 0.75
    m = 2 * a * 2 * h
    k_n = 2e3
    # right-leaning plank (theta = -beta): support corner (a,-h), apex (a,h)
    sup = rot(-beta, a, -h)
    apex = rot(-beta, a, h)
    com_y = -sup[1] - m * G / k_n  # pre-settled on the floor
    x0 = apex[0]  # apex corners meet at x = 0
    write("triangle", {
        "params": {
            "dt": 5e-4, "gravity": [0.0, -G], "backend": "oracle",
            "contact": contact(k_n, 1e3, 0.3, 5.0),
            # the apex corner-corner contact balances a shear mode that is
            # gravity-unstable at second order and held only by a small
            # friction budget; a stale first-order gradient there acts as a
            # persistent biased force, so keep the narrow-phase cache tight
            "cache_trust_radius": 1e-4,
        },
        "duration": 2.0, "output_stride": 100,
        "halfplanes": [{"normal": [0.0, 1.0], "offset": 0.0}],
        "bodies": [
            {"shape": "plank", "pose": [-beta, -x0, com_y]},
            {"shape": "plank", "pose": [beta, x0, com_y]},
        ],
    })


def column_packing():
    # 100 arc grains per case settling in a 4-wide channel. The initial
    # lattice is identical across the four cases (spaced for the largest
    # arc), so the settled-height differences are emergent from grain shape,
    # not from the initial condition.
    cols = [0.45 + 0.78 * i for i in range(5)]
    for pct in (25, 50, 75, 100):
        rng = random.Random(1000 + pct)
        bodies = []
        k = 0
        while len(bodies) < 100:
            x = cols[k % 5]
            y = 0.45 + 0.78 * (k // 5)
            bodies.append({"shape": f"arc_{pct}",
                           "pose": [round(rng.uniform(-math.pi, math.pi), 6), x, y]})
            k += 1
        write(f"column_packing_{pct}", {
            "params": {
                "dt": 1e-3, "gravity": [0.0, -G], "backend": "oracle",
                "contact": contact(1e3, 5e2, 0.1, 8.0),
                "cache_trust_radius": 2e-2,
            },
            "duration": 4.0, "output_stride": 250,
            "halfplanes": [
                {"normal": [0.0, 1.0], "offset": 0.0},
                {"normal": [1.0, 0.0], "offset": 0.0},
                {"normal": [-1.0, 0.0], "offset": -4.0},
            ],
            "bodies": bodies,
        })


def wall_line(x0, y0, x1, y1, spacing=0.5, kind="static", script=None):
    length = math.hypot(x1 - x0, y1 - y0)
    n = max(2, int(math.ceil(length / spacing)) + 1)
    out = []
    for i in range(n):
        t = i / (n - 1)
        b = {"shape": "wall_disc",
             "pose": [0.0, x0 + t * (x1 - x0), y0 + t * (y1 - y0)], "kind": kind}
        if script:
            b["script"] = script
        out.append(b)
    return out


def silo():
    # funnel silo: vertical halfplane walls, static wall-disc hopper, a
    # kinematic gate that drops out of the domain, identical contact params
    # across grain shapes. Grains start in a dense funnel-following lattice so
    # the bed is settled before the gate opens at t = 1.5.
    for grain, r_g in (("octagon", 0.27), ("hashtag", 0.5)):
        s = 2 * r_g + 0.05
        for label, gap in (("narrow", 3.4), ("wide", 7.2)):
            rng = random.Random(len(grain) * 131 + len(label))
            bodies = []
            bodies += wall_line(-7.0, 6.5, -gap / 2, 0.0)
            bodies += wall_line(7.0, 6.5, gap / 2, 0.0)
            gate = {"type": "slide", "vel": [0.0, -30.0], "t0": 1.5, "t1": 3.0}
            bodies += wall_line(-gap / 2 + 0.4, 0.0, gap / 2 - 0.4, 0.0,
                                kind="kinematic", script=gate)
            slope = (7.0 - gap / 2) / 6.5
            count, j = 0, 0
            while count < 250:
                y = 1.0 + s * j
                j += 1
                x_funnel = gap / 2 + slope * y - (r_g + 0.45) * math.hypot(1.0, slope)
                x_max = min(7.0 - (r_g + 0.35), x_funnel)
                if x_max < 0.2:
                    continue
                n = int(2 * x_max / s) + 1
                for i in range(n):
                    if count == 250:
                        break
                    x = -((n - 1) * s / 2) + i * s
                    bodies.append({"shape": grain,
                                   "pose": [round(rng.uniform(-math.pi, math.pi), 6),
                                            round(x, 6), round(y, 6)]})
                    count += 1
            write(f"silo_small_{grain}_{label}", {
                "params": {
                    "dt": 1e-3, "gravity": [0.0, -G], "backend": "oracle",
                    "contact": contact(8e3, 4e3, 0.4, 24.0),
                    "cache_trust_radius": 2e-2,
                },
                "duration": 6.5, "output_stride": 250,
                "discharge_y": -0.6,
                "halfplanes": [
                    {"normal": [1.0, 0.0], "offset": -7.0},
                    {"normal": [-1.0, 0.0], "offset": -7.0},
                ],
                "bodies": bodies,
            })


def column_collapse():
    # U-shaped grains packed against a kinematic gate that lifts away
    rng = random.Random(77)
    gate = {"type": "slide", "vel": [0.0, 25.0], "t0": 1.2, "t1": 3.0}
    bodies = wall_line(12.4, 0.3, 12.4, 23.0, spacing=0.55,
                       kind="kinematic", script=gate)
    k = 0
    while sum(b["shape"] == "letter_u" for b in bodies) < 300:
        x = 0.55 + 0.95 * (k % 13)
        y = 0.55 + 0.95 * (k // 13)
        bodies.append({"shape": "letter_u",
                       "pose": [round(rng.uniform(-math.pi, math.pi), 6), x, y]})
        k += 1
    write("column_collapse_small", {
        "params": {
            "dt": 1e-3, "gravity": [0.0, -G], "backend": "oracle",
            "contact": contact(2e3, 1e3, 0.4, 12.0),
            "cache_trust_radius": 2e-2,
        },
        "duration": 4.0, "output_stride": 100,
        "halfplanes": [
            {"normal": [0.0, 1.0], "offset": 0.0},
            {"normal": [1.0, 0.0], "offset": 0.0},
        ],
        "bodies": bodies,
    })


def drum():
    # spinning drum: kinematic ring of wall discs, three grain types
    rng = random.Random(33)
    radius, nring = 5.0, 56
    spin = {"type": "spin", "pivot": [0.0, 0.0], "omega": 0.4, "t0": 0.5}
    bodies = []
    for i in range(nring):
        a = 2 * math.pi * i / nring
        bodies.append({"shape": "wall_disc",
                       "pose": [0.0, radius * math.cos(a), radius * math.sin(a)],
                       "kind": "kinematic", "script": spin})
    grains = ["letter_o", "letter_u", "letter_n"] * 16
    # fill a bottom-up lattice, keeping grain centers well inside the ring
    cells = [(x, y) for y in [-4.0 + 1.0 * r for r in range(9)]
             for x in [-4.0 + 1.0 * c for c in range(9)]
             if math.hypot(x, y) < 4.05]
    for (x, y), g in zip(cells, grains):
        bodies.append({"shape": g,
                       "pose": [round(rng.uniform(-math.pi, math.pi), 6), x, y]})
    assert len(cells) >= len(grains)
    write("drum_small", {
        "params": {
            "dt": 5e-4, "gravity": [0.0, -G], "backend": "oracle",
            "contact": contact(1e4, 5e3, 0.4, 20.0),
        },
        "duration": 4.0, "output_stride": 200,
        "bodies": bodies,
    })


def main():
    SCENES.mkdir(exist_ok=True)
    inclined_plane()
    inclined_plane_boxes()
    leaning_block()
    triangle()
    column_packing()
    silo()
    column_collapse()
    drum()


if __name__ == "__main__":
    main()
