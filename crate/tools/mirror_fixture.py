#!/usr/bin/env python3
"""Generates the mirror image of a verification fixture: arrows reverse,
every word reverses, composite labels swap their two factors."""

import json
import re
import sys


def mirror_factor_name(name: str) -> str:
    m = re.match(r"^\[([^.\]]+)\.(w1\.)?([^.\]]+)\](#\d+)?$", name)
    if not m:
        return name
    b, w, a, suff = m.group(1), m.group(2) or "", m.group(3), m.group(4) or ""
    return f"[{a}.{w}{b}]{suff}"


def mirror_term(term: str) -> str:
    term = term.strip()
    factors = [f.strip() for f in term.split("*")]
    coeff = None
    items = []
    for f in factors:
        inner = f[1:-1] if f.startswith("(") and f.endswith(")") else f
        if re.fullmatch(r"-?\d+(/\d+)?", inner):
            assert coeff is None, term
            coeff = f
            continue
        items.append(f)
    # decode to word + slot powers
    word = []
    slots = [0]
    for it in items:
        if it == "v":
            slots[-1] += 1
            continue
        has_v = it.endswith(".v")
        name = it[:-2] if has_v else it
        word.append(name)
        slots.append(1 if has_v else 0)
    # reverse
    word = [mirror_factor_name(w) for w in reversed(word)]
    slots = list(reversed(slots))
    out = []
    if coeff is not None:
        out.append(coeff)
    for _ in range(slots[0]):
        out.append("v")
    for i, w in enumerate(word):
        f = w
        if slots[i + 1] % 2 == 1:
            f += ".v"
        for _ in range(slots[i + 1] // 2):
            pass
        out.append(f)
    if not word:
        # pure idempotent term keeps its form
        return term
    return "*".join(out)


def mirror_element(text: str) -> str:
    # split at top-level +/- keeping signs
    parts = []
    depth = 0
    cur = ""
    sign = "+"
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "+-" and depth == 0:
            if cur.strip():
                parts.append((sign, cur))
            cur = ""
            sign = ch
        else:
            cur += ch
    if cur.strip():
        parts.append((sign, cur))
    out = ""
    for s, t in parts:
        mt = mirror_term(t)
        if not out:
            out = mt if s == "+" else f"- {mt}"
        else:
            out += f" {s} {mt}"
    return out


def mirror_fixture(d: dict, new_name: str) -> dict:
    out = json.loads(json.dumps(d))
    out["name"] = new_name
    for a in out["quiver"]["arrows"]:
        a["tail"], a["head"] = a["head"], a["tail"]
    out["potential"] = mirror_element(d["potential"])
    out["target"] = mirror_element(d["target"])
    for step in out["witness"]:
        step["images"] = {
            mirror_factor_name(k): mirror_element(v) for k, v in step["images"].items()
        }
    return out


if __name__ == "__main__":
    src, dst, name = sys.argv[1], sys.argv[2], sys.argv[3]
    with open(src) as f:
        d = json.load(f)
    with open(dst, "w") as f:
        json.dump(mirror_fixture(d, name), f, indent=2)
    print(f"wrote {dst}")
