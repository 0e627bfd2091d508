"""Deterministic writers for meshes, singular loci, and point clouds.

All numbers are printed with a fixed shortest-ish format so identical inputs
produce byte-identical files regardless of execution order or parallelism.

File conventions:
  * OBJ: ASCII, ``v`` and ``vn`` records followed by ``f i//i j//j k//k``
    faces (1-based, vertex and normal indices coincide).
  * singular-locus CSV columns, in order:
    t, discriminant, count, p1_x, p1_y, p1_z, p2_x, p2_y, p2_z
    with empty cells where fewer than two points exist; an optional trailing
    ``error`` column carries per-sample failure messages.
  * XYZ point clouds: one ``x y z`` row per point.
"""

from __future__ import annotations

import io
from typing import Iterable

import numpy as np

from .envelope import EnvelopeMesh

__all__ = ["format_number", "obj_text", "singular_csv_text", "xyz_text"]


def format_number(x: float) -> str:
    """Fixed decimal rendering: 12 significant digits, no trailing zeros."""
    if x == 0:
        return "0"
    s = f"{float(x):.12g}"
    return "0" if s in ("-0", "-0.0") else s


def _row(prefix: str, values: Iterable[float]) -> str:
    return prefix + " " + " ".join(format_number(v) for v in values)


def obj_text(mesh: EnvelopeMesh) -> str:
    """Render a mesh as ASCII OBJ with vertex normals."""
    buf = io.StringIO()
    if mesh.name:
        buf.write(f"o {mesh.name}\n")
    for v in mesh.vertices:
        buf.write(_row("v", v[:3]) + "\n")
    for vn in mesh.normals:
        buf.write(_row("vn", vn[:3]) + "\n")
    if mesh.faces is not None:
        for f in mesh.faces:
            a, b, c = (int(i) + 1 for i in f)
            buf.write(f"f {a}//{a} {b}//{b} {c}//{c}\n")
    return buf.getvalue()


def singular_csv_text(rows: Iterable[dict]) -> str:
    """CSV for a series of singular-point samples.

    Each row dict carries t, discriminant, count, points (list of length-3
    sequences, at most 2 used), and optional error text.
    """
    buf = io.StringIO()
    buf.write("t,discriminant,count,p1_x,p1_y,p1_z,p2_x,p2_y,p2_z,error\n")
    for row in rows:
        cells = [format_number(row["t"])]
        if row.get("error"):
            cells += [""] * 8 + [str(row["error"]).replace(",", ";")]
        else:
            cells.append(format_number(row["discriminant"]))
            cells.append(str(int(row["count"])))
            pts = list(row.get("points", []))[:2]
            for i in range(2):
                if i < len(pts):
                    cells.extend(format_number(c) for c in pts[i][:3])
                else:
                    cells.extend(["", "", ""])
            cells.append("")
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def xyz_text(points: np.ndarray) -> str:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        return ""
    return "\n".join(" ".join(format_number(c) for c in row) for row in pts) + "\n"
