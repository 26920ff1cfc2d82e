#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Persistence diagram files: CSV (``birth,death,dim``) and SVG plots
"""

from __future__ import annotations

import logging
import math
import warnings
from pathlib import Path
from typing import Optional, Union

import numpy as np
from lxml import etree

from varsample.exceptions import InputError
from varsample.model import InferenceVerdict
from varsample.tda.persistence import Interval, PersistenceDiagram

logger = logging.getLogger(__name__)

StrOrPath = Union[str, Path]

SVG_NS = "http://www.w3.org/2000/svg"
DIM_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
REGION_COLOR = "#f4b6c2"

_META_KEYS = ("ambient_dim", "epsilon", "delta", "threshold", "max_dim", "zero_length", "seed")


def write_diagram_csv(diag: PersistenceDiagram, path: StrOrPath) -> Path:
    path = Path(path)
    meta = [f"{key}: {'' if getattr(diag, key) is None else getattr(diag, key)}" for key in _META_KEYS]
    rows = np.array([[iv.birth, iv.death, iv.dim] for iv in diag.intervals], dtype=float).reshape(-1, 3)
    try:
        np.savetxt(path, rows, fmt=["%.17g", "%.17g", "%d"], delimiter=",",
                   header="\n".join(meta + ["birth,death,dim"]), comments="# ")
    except OSError as e:
        raise InputError(f"cannot write diagram to {path}: {e}")
    return path


def _meta_value(text: str):
    if text == "":
        return None
    number = float(text)
    return int(number) if number.is_integer() and "." not in text and "e" not in text.lower() else number


def read_diagram_csv(path: StrOrPath) -> PersistenceDiagram:
    path = Path(path)
    meta = {}
    with path.open(encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, sep, value = line[1:].partition(":")
            if sep and key.strip() in _META_KEYS:
                meta[key.strip()] = _meta_value(value.strip())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        rows = np.loadtxt(path, delimiter=",", comments="#", ndmin=2).reshape(-1, 3)
    intervals = [Interval(float(b), float(d), int(k)) for b, d, k in rows]
    max_dim = meta.get("max_dim")
    if max_dim is None:
        max_dim = max((iv.dim for iv in intervals), default=0)
    return PersistenceDiagram(intervals=intervals,
                              max_dim=int(max_dim),
                              ambient_dim=meta.get("ambient_dim"),
                              epsilon=meta.get("epsilon"),
                              delta=meta.get("delta"),
                              threshold=meta.get("threshold"),
                              zero_length=int(meta.get("zero_length") or 0),
                              seed=meta.get("seed"))


def _svg(tag: str, parent=None, **attrs):
    attrs = {k.replace("_", "-"): str(v) for k, v in attrs.items()}
    if parent is None:
        return etree.Element(f"{{{SVG_NS}}}{tag}", nsmap={None: SVG_NS}, **attrs)
    return etree.SubElement(parent, f"{{{SVG_NS}}}{tag}", **attrs)


def write_diagram_svg(diag: PersistenceDiagram, path: StrOrPath, verdict: Optional[InferenceVerdict] = None,
                      size: int = 480, margin: int = 40) -> Path:
    """Scatter of (birth, death) per dimension with the diagonal and the shaded inference region.

    Essential classes are drawn on the top edge. The region rectangle carries
    its corner in ``data-a``/``data-b`` attributes.
    """
    finite = [v for iv in diag.intervals for v in (iv.birth, iv.death) if math.isfinite(v)]
    extras = [diag.threshold or 0.0]
    if verdict is not None:
        extras += list(verdict.corner)
    top = max(finite + extras + [1e-12]) * 1.1
    span = size - 2 * margin

    def sx(v: float) -> float:
        return margin + span * v / top

    def sy(v: float) -> float:
        return size - margin - span * min(v, top) / top

    root = _svg("svg", width=size, height=size, viewBox=f"0 0 {size} {size}")
    _svg("rect", root, x=0, y=0, width=size, height=size, fill="white")
    if verdict is not None:
        a, b = verdict.corner
        _svg("rect", root, id="inference-region", x=sx(0), y=sy(top), width=sx(a) - sx(0), height=sy(b) - sy(top),
             fill=REGION_COLOR, fill_opacity=0.6, data_a=repr(a), data_b=repr(b))
    _svg("line", root, id="diagonal", x1=sx(0), y1=sy(0), x2=sx(top), y2=sy(top), stroke="black", stroke_width=1)
    _svg("line", root, x1=sx(0), y1=sy(0), x2=sx(top), y2=sy(0), stroke="gray")
    _svg("line", root, x1=sx(0), y1=sy(0), x2=sx(0), y2=sy(top), stroke="gray")
    label = _svg("text", root, x=size / 2, y=size - margin / 4, text_anchor="middle", font_size=12)
    label.text = "birth"
    label = _svg("text", root, x=margin / 4, y=size / 2, font_size=12)
    label.text = "death"

    for dim in range(diag.max_dim + 1):
        group = _svg("g", root, id=f"dim-{dim}", fill=DIM_COLORS[dim % len(DIM_COLORS)])
        for iv in diag.in_dim(dim):
            death = top if iv.essential else iv.death
            _svg("circle", group, cx=sx(iv.birth), cy=sy(death), r=3 + dim)
        legend = _svg("text", root, x=size - margin, y=margin + 14 * dim, text_anchor="end", font_size=11,
                      fill=DIM_COLORS[dim % len(DIM_COLORS)])
        legend.text = f"H{dim}"

    path = Path(path)
    try:
        path.write_bytes(etree.tostring(root, pretty_print=True, xml_declaration=True, encoding="utf-8"))
    except OSError as e:
        raise InputError(f"cannot write diagram to {path}: {e}")
    return path


def emit_diagram(diag: PersistenceDiagram, verdict: Optional[InferenceVerdict], fmt: str, path: StrOrPath) -> Path:
    if fmt == "csv":
        return write_diagram_csv(diag, path)
    if fmt == "svg":
        return write_diagram_svg(diag, path, verdict)
    raise InputError(f"unknown diagram format {fmt!r}")
