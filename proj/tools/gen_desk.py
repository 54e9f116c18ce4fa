#!/usr/bin/env python3
"""Writes the desk-scale scenario and request trace used by the tests.

  python3 tools/gen_desk.py tests/data
"""
import json
import math
import random
import sys
from pathlib import Path

TEMPLATE = "F({d} & F {s}) & (!{c} U {s}) & F {c}"
W, H = 100.0, 30.0


def rect(cx, cy, w, h):
    return [[cx - w / 2, cy - h / 2], [cx + w / 2, cy - h / 2], [cx + w / 2, cy + h / 2], [cx - w / 2, cy + h / 2]]


def place(rng, w, h):
    return round(rng.uniform(w / 2 + 1, W - w / 2 - 1), 1), round(rng.uniform(h / 2 + 1, H - h / 2 - 1), 1)


def inside(rng, cx, cy, w, h, margin=1.0):
    return [round(rng.uniform(cx - w / 2 + margin, cx + w / 2 - margin), 2),
            round(rng.uniform(cy - h / 2 + margin, cy + h / 2 - margin), 2)]


def delivery(rng, tid):
    w, h = 12, 8
    cx, cy = place(rng, w, h)
    subs = []
    for _ in range(4):
        subs.append({"n": rng.choice([1, 1, 2]), "action": rng.choice(["delivery", "grasp"]), "loc": inside(rng, cx, cy, w, h)})
    return {"id": tid, "class": "staticKnown", "region": rect(cx, cy, w, h), "subtasks": subs,
            "eta": {"delivery": 5, "grasp": 5}, "satCap": 1.5}


def surveillance(rng, tid):
    w, h = 14, 10
    cx, cy = place(rng, w, h)
    subs = []
    for k in range(4):
        hidden = k >= 2
        subs.append({"n": 1 if hidden else rng.choice([1, 2]), "action": "perception",
                     "loc": inside(rng, cx, cy, w, h), "hidden": hidden})
    return {"id": tid, "class": "staticUnknown", "region": rect(cx, cy, w, h), "subtasks": subs,
            "eta": {"perception": 4}, "satCap": 1.5}


def capture(rng, tid):
    w, h = 16, 12
    cx, cy = place(rng, w, h)
    subs = []
    for _ in range(4):
        heading = rng.uniform(0, 6.283)
        subs.append({"n": rng.choice([1, 2]), "action": "grasp", "loc": inside(rng, cx, cy, w, h, 2.0),
                     "vel": [round(0.5 * math.cos(heading), 3), round(0.5 * math.sin(heading), 3)]})
    return {"id": tid, "class": "dynamicKnown", "region": rect(cx, cy, w, h), "subtasks": subs,
            "eta": {"grasp": 3}, "satCap": 1.5}


def mission(rng, mid, release):
    d, s, c = f"{mid}_del", f"{mid}_surv", f"{mid}_cap"
    tasks = [delivery(rng, d), surveillance(rng, s), capture(rng, c)]
    return {"id": mid, "formula": TEMPLATE.format(d=d, s=s, c=c), "release": release}, tasks


def robots():
    out = []
    bases = [(8.0, 5.0), (92.0, 25.0)]
    kinds = [("A", ["perception", "delivery"], 5), ("B", ["perception", "grasp"], 5), ("C", ["delivery", "grasp"], 10)]
    i = 0
    for t, caps, n in kinds:
        for k in range(n):
            bx, by = bases[i % 2]
            r = {"id": f"{t.lower()}{k}", "type": t, "capabilities": caps, "maxSpeed": 2.5,
                 "start": [bx + (i // 2) % 5 * 1.5, by + (i // 10) * 1.5]}
            if t == "C" and k >= 6:
                r["curvature"] = 3.0
            out.append(r)
            i += 1
    return out


def main(outdir):
    rng = random.Random(20250)
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    missions, tasks = [], []
    for mid, rel in [("m1", 0), ("m2", 0), ("m3", 30), ("m4", 60), ("m5", 100), ("m6", 130)]:
        m, ts = mission(rng, mid, rel)
        missions.append(m)
        tasks += ts
    scenario = {
        "robots": robots(),
        "tasks": tasks,
        "missions": missions,
        "params": {"H": 6, "P": 4, "seed": 7, "dt": 0.1, "perception": 2.0, "captureRadius": 0.5,
                   "commDelayMs": [10, 100], "eta1": 0.01, "eta2": 1.0},
    }
    (out / "desk_scenario.json").write_text(json.dumps(scenario, indent=1) + "\n")

    m7, t7 = mission(rng, "m7", 45)
    m8, t8 = mission(rng, "m8", 90)
    x1, tx = mission(rng, "x1", 50)
    perception = [r["id"] for r in scenario["robots"] if "perception" in r["capabilities"]]
    trace = [
        {"v": 1, "id": "k1-m7", "issuedAt": 45, "kind": "newMission", "payload": {"mission": m7, "tasks": t7}},
        {"v": 1, "id": "k1-x1", "issuedAt": 50, "kind": "newMission", "payload": {"mission": x1, "tasks": tx}},
        {"v": 1, "id": "k3-m3", "issuedAt": 55, "kind": "reprioritize", "payload": {"mission": "m3", "weight": 3}},
        {"v": 1, "id": "k2-x1", "issuedAt": 58, "kind": "cancel", "payload": {"mission": "x1"}},
        {"v": 1, "id": "k4-m4", "issuedAt": 65, "kind": "reassign", "payload": {"mission": "m4", "robots": ["c0", "c1"]}},
        {"v": 1, "id": "k1-m8", "issuedAt": 90, "kind": "newMission", "payload": {"mission": m8, "tasks": t8}},
        {"v": 1, "id": "k4-m5", "issuedAt": 105, "kind": "reassign", "payload": {"mission": "m5", "robots": perception}},
        {"v": 1, "id": "k3-m6", "issuedAt": 132, "kind": "reprioritize", "payload": {"mission": "m6", "deadline": 300}},
        {"v": 1, "id": "resolve-1", "issuedAt": 140, "kind": "resolve", "payload": {"conflict": "c1", "keep": "k3-m6"}},
    ]
    (out / "desk_trace.jsonl").write_text("".join(json.dumps(e) + "\n" for e in trace))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data")
