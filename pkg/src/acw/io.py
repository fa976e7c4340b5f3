"""Readers and writers for the plain-text and JSON file formats.

* group file: ``{"moduli": [n1, ..., nk]}``
* element: comma-separated residues, ``"r1,r2"``
* distribution file: one atom per line, ``"r1,...,rk : p"``
* set file: one element per line
* Bohr descriptor: ``{"chars": [[...], ...], "radius": delta}``

Blank lines and lines starting with ``#`` are ignored in text files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dist import Dist
from .groups import Group, format_element, make_group, parse_element


def _lines(text: str):
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            yield line


def read_group(path) -> Group:
    return Group.from_json(json.loads(Path(path).read_text()))


def write_group(path, g: Group) -> None:
    Path(path).write_text(json.dumps(g.to_json()) + "\n")


def parse_set(g: Group, text: str) -> np.ndarray:
    idx = [parse_element(g, line) for line in _lines(text)]
    return np.unique(np.array(idx, dtype=np.int64))


def read_set(g: Group, path) -> np.ndarray:
    return parse_set(g, Path(path).read_text())


def format_set(g: Group, idx) -> str:
    return "".join(format_element(g, i) + "\n" for i in np.asarray(idx).tolist())


def write_set(path, g: Group, idx) -> None:
    Path(path).write_text(format_set(g, idx))


def parse_dist(g: Group, text: str) -> Dist:
    idx, mass = [], []
    for line in _lines(text):
        elem, sep, p = line.partition(":")
        if not sep:
            raise ValueError(f"distribution line without ':' -> {line!r}")
        idx.append(parse_element(g, elem))
        mass.append(float(p))
    return Dist.from_arrays(g, idx, mass)


def read_dist(g: Group, path) -> Dist:
    return parse_dist(g, Path(path).read_text())


def format_dist(p: Dist) -> str:
    return "".join(
        f"{format_element(p.group, i)} : {v!r}\n" for i, v in zip(p.idx.tolist(), p.p.tolist())
    )


def dist_to_json(p: Dist) -> dict:
    return {
        "moduli": list(p.group.moduli),
        "atoms": [[format_element(p.group, i), float(v)] for i, v in zip(p.idx.tolist(), p.p.tolist())],
    }


def read_bohr(g: Group, path) -> tuple[np.ndarray, float]:
    """(character flat indices, radius) from a Bohr descriptor file."""
    obj = json.loads(Path(path).read_text())
    chars = np.array([g.index(tuple(c)) for c in obj.get("chars", [])], dtype=np.int64)
    return chars, float(obj["radius"])


def bohr_to_json(g: Group, chars, radius: float) -> dict:
    return {"chars": [list(g.element(c)) for c in np.asarray(chars).tolist()], "radius": float(radius)}


def load_group_arg(value: str) -> Group:
    """A group given either as a path to a group file or inline as ``"7"`` / ``"4,4"``."""
    p = Path(value)
    if p.exists():
        return read_group(p)
    return make_group([int(v) for v in value.split(",") if v.strip()])
