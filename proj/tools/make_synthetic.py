#!/usr/bin/env python3
"""Writes the synthetic bench scenarios (synthetic_10.json, synthetic_50.json).

Both scripts iterate on one drafting task so the concept saturates quickly:
an outline first, then a fixed cycle of expand / critique (/ summarize) turns.
Each response is padded to RESPONSE_TOKENS so the replayed transcript grows
by roughly 40 tokens per turn.
"""
import json
import sys
from pathlib import Path

RESPONSE_TOKENS = 30
SECTIONS = ["budget", "volunteer", "schedule", "tools", "outreach", "harvest", "safety", "storage"]
AUDIENCES = ["committee", "neighbors", "city council", "sponsors", "school board", "garden club"]


def turns(n, sentinels, cycle):
    out = [{
        "instruction": "Draft an outline for a community garden proposal.",
        "expected_operator": "OUTLINE",
    }]
    i = 0
    while len(out) < n:
        section = SECTIONS[(i // len(cycle)) % len(SECTIONS)]
        audience = AUDIENCES[(i // len(cycle)) % len(AUDIENCES)]
        kind = cycle[i % len(cycle)]
        if kind == "expand":
            t = {"instruction": f"Expand on the {section} section with more detail.", "expected_operator": "ELABORATE"}
        elif kind == "critique":
            t = {"instruction": f"Critique the {section} section against our limits.", "expected_operator": "EVALUATE"}
        else:
            t = {"instruction": f"Summarize the proposal for the {audience}.", "expected_operator": "SUMMARIZE"}
        out.append(t)
        i += 1
    if sentinels:
        for k, t in enumerate(out, start=1):
            tag = f"ZQX{k:03d}SENTINEL"
            t["sentinel"] = tag
            if k > 1:
                # A plain declarative sentence: nothing in it is extractable.
                t["instruction"] += f" Ticket {tag} attached."
    for t in out:
        t["expected_topic"] = "continue"
    out[0]["expected_topic"] = "switch_new"
    return out


def scenario(name, n, sentinels, cycle):
    return {
        "name": name,
        "user_id": "bench-user",
        "turns": turns(n, sentinels, cycle),
        "response_profile": [RESPONSE_TOKENS] * n,
    }


def main():
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "scenarios"
    runs = [
        ("synthetic_10", 10, False, ["expand", "critique"]),
        ("synthetic_50", 50, True, ["expand", "critique", "summarize"]),
    ]
    for name, n, sentinels, cycle in runs:
        path = out_dir / f"{name}.json"
        path.write_text(json.dumps(scenario(name, n, sentinels, cycle), indent=2) + "\n")
        print(path)


if __name__ == "__main__":
    main()
