"""CSV and JSON artifact formats.

All writers are deterministic: fixed field order, 17-significant-digit
floats, sorted JSON keys, newline endings.  Identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import json

import numpy as np


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_path_csv(path, curve) -> None:
    """Path schema: header x1,u1,u2, one node per row.

    Curves without abscissae (e.g. implicit zero sets) get a sequential
    index in the x1 column.
    """
    nodes = np.asarray(getattr(curve, "nodes", curve), dtype=float)
    x1 = getattr(curve, "x1", None)
    if x1 is None:
        x1 = np.arange(len(nodes), dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x1,u1,u2\n")
        for a, (b, c) in zip(x1, nodes):
            fh.write(f"{_fmt(a)},{_fmt(b)},{_fmt(c)}\n")


def read_path_csv(path):
    """Returns (x1, nodes) arrays from the path schema."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1:3]


def write_field_csv(path, field) -> None:
    """Field schema: header x1,x2,u1,u2, row-major over the grid."""
    dom = field.domain
    x1 = dom.x1()
    x2 = dom.x2()
    v = field.values
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x1,x2,u1,u2\n")
        for i in range(dom.nx):
            for j in range(dom.ny):
                fh.write(f"{_fmt(x1[i])},{_fmt(x2[j])},"
                         f"{_fmt(v[i, j, 0])},{_fmt(v[i, j, 1])}\n")


def read_field_csv(path, domain, constraint_r: float):
    from .minimizer2d import Field2D

    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if len(data) != domain.nx * domain.ny:
        raise ValueError("field file does not match the domain grid")
    vals = data[:, 2:4].reshape(domain.nx, domain.ny, 2)
    return Field2D(vals, domain, constraint_r)


def write_junction_csv(path, history) -> None:
    """Junction schema: header t,x2."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,x2\n")
        for t, x2 in history:
            fh.write(f"{_fmt(t)},{_fmt(x2)}\n")


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
