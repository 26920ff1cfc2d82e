#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Boxes, balls, box splitting and the covered-region store

All regions are closed: a ball touching a box counts as intersecting it.
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
import threading
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from varsample.constants import DYNAMIC_SPLIT_CUTS
from varsample.exceptions import DimensionMismatchError, InputError

logger = logging.getLogger(__name__)


class Box:
    """Axis-aligned box ``[lo_1, hi_1] x ... x [lo_N, hi_N]``."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: Sequence[float], hi: Sequence[float]):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise DimensionMismatchError(f"box bounds have shapes {lo.shape} and {hi.shape}")
        if lo.size == 0:
            raise InputError("box must have at least one dimension")
        if np.any(lo > hi) or not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InputError(f"invalid box bounds lo={lo.tolist()} hi={hi.tolist()}")
        self.lo = lo
        self.hi = hi

    @classmethod
    def cube(cls, lo: float, hi: float, dim: int) -> Box:
        return cls([lo] * dim, [hi] * dim)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def sides(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def max_side(self) -> float:
        return float(np.max(self.sides))

    @property
    def center(self) -> np.ndarray:
        return (self.lo + self.hi) / 2

    @property
    def volume(self) -> float:
        return float(np.prod(self.sides))

    def corners(self) -> Iterator[np.ndarray]:
        for choice in itertools.product((0, 1), repeat=self.dim):
            yield np.where(np.array(choice, dtype=bool), self.hi, self.lo)

    def contains_point(self, p: Sequence[float]) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))

    def intersection(self, other: Box) -> Optional[Box]:
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.any(lo > hi):
            return None
        return Box(lo, hi)

    def split_at(self, axis: int, value: float) -> Tuple[Box, Box]:
        if not self.lo[axis] <= value <= self.hi[axis]:
            raise InputError(f"cut {value} outside [{self.lo[axis]}, {self.hi[axis]}]")
        upper_of_lower = self.hi.copy()
        upper_of_lower[axis] = value
        lower_of_upper = self.lo.copy()
        lower_of_upper[axis] = value
        return Box(self.lo, upper_of_lower), Box(lower_of_upper, self.hi)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Box):
            return NotImplemented
        return bool(np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi))

    def __hash__(self) -> int:
        return hash((self.lo.tobytes(), self.hi.tobytes()))

    def __repr__(self) -> str:
        sides = " x ".join(f"[{a:g}, {b:g}]" for a, b in zip(self.lo, self.hi))
        return f"Box({sides})"


class BallKind(str, enum.Enum):
    SAMPLE = "sample"
    EXCLUSION = "exclusion"


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float
    kind: BallKind = BallKind.SAMPLE

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not self.radius >= 0:
            raise InputError(f"ball radius must be non-negative, got {self.radius}")

    def farthest_distance(self, box: Box) -> float:
        # the farthest point of a box from any point is one of its corners
        far = np.maximum(np.abs(box.lo - self.center), np.abs(box.hi - self.center))
        return float(np.linalg.norm(far))

    def nearest_distance(self, box: Box) -> float:
        clamped = np.clip(self.center, box.lo, box.hi)
        return float(np.linalg.norm(clamped - self.center))

    def contains_box(self, box: Box) -> bool:
        return self.farthest_distance(box) <= self.radius

    def intersects_box(self, box: Box) -> bool:
        return self.nearest_distance(box) <= self.radius

    def contains_point(self, p: Sequence[float]) -> bool:
        return float(np.linalg.norm(np.asarray(p, dtype=float) - self.center)) <= self.radius

    def inscribed_box(self) -> Box:
        half = self.radius / math.sqrt(self.center.shape[0])
        return Box(self.center - half, self.center + half)


class _GrowableArray:
    """Row-appendable 2-D float array with amortized doubling."""

    def __init__(self, width: int, capacity: int = 64):
        self._data = np.empty((capacity, width))
        self.size = 0

    def append(self, row) -> None:
        if self.size == self._data.shape[0]:
            grown = np.empty((2 * self._data.shape[0], self._data.shape[1]))
            grown[: self.size] = self._data[: self.size]
            self._data = grown
        self._data[self.size] = row
        self.size += 1

    @property
    def view(self) -> np.ndarray:
        return self._data[: self.size]


class _GridHash:
    """Uniform grid over R^N keyed by integer cell coordinates.

    Only indices are stored; callers keep the geometry and filter candidates
    exactly, so the grid only ever prunes.
    """

    def __init__(self, cell_size: float, dim: int):
        if not cell_size > 0:
            raise InputError(f"cell size must be positive, got {cell_size}")
        self.cell_size = cell_size
        self.dim = dim
        self.cells: Dict[Tuple[int, ...], List[int]] = {}
        self.count = 0

    def key(self, p: np.ndarray) -> Tuple[int, ...]:
        return tuple(int(v) for v in np.floor(p / self.cell_size))

    def insert(self, p: np.ndarray, index: int) -> None:
        self.cells.setdefault(self.key(p), []).append(index)
        self.count += 1

    def span(self, lo: np.ndarray, hi: np.ndarray) -> Optional[List[range]]:
        """Cell ranges covering [lo, hi], or None when scanning would cost more than a linear pass."""
        klo = np.floor(lo / self.cell_size).astype(np.int64)
        khi = np.floor(hi / self.cell_size).astype(np.int64)
        widths = khi - klo + 1
        total = 1
        for w in widths:
            total *= int(w)
            if total > max(self.count, len(self.cells)):
                return None
        return [range(int(a), int(b) + 1) for a, b in zip(klo, khi)]

    def query(self, lo: np.ndarray, hi: np.ndarray) -> Optional[List[int]]:
        ranges = self.span(lo, hi)
        if ranges is None:
            return None
        found = []
        for key in itertools.product(*ranges):
            found.extend(self.cells.get(key, ()))
        return found


class CoveredRegions:
    """Spatial store of sample and exclusion balls.

    Balls with radius up to ``cell_size`` are indexed by the grid cell of their
    center; larger ones (including infinite exclusion balls) are kept in a
    short list that every query scans. Query answers are the same as a linear
    scan over all balls; on ties the earliest inserted ball is returned.
    Writers take the lock; the sampler is the only writer.
    """

    def __init__(self, dim: int, cell_size: float):
        self.dim = dim
        self._grid = _GridHash(cell_size, dim)
        self._large: List[int] = []
        self._centers = _GrowableArray(dim)
        self._radii = _GrowableArray(1)
        self._kinds: List[BallKind] = []
        self._small_reach = 0.0
        self._lock = threading.Lock()

    @property
    def cell_size(self) -> float:
        return self._grid.cell_size

    def __len__(self) -> int:
        return self._radii.size

    def add(self, ball: Ball) -> int:
        if ball.center.shape != (self.dim,):
            raise DimensionMismatchError(f"ball center has shape {ball.center.shape}, expected ({self.dim},)")
        with self._lock:
            index = self._radii.size
            self._centers.append(ball.center)
            self._radii.append(float(ball.radius))
            self._kinds.append(BallKind(ball.kind))
            if ball.radius > self.cell_size:
                self._large.append(index)
            else:
                self._grid.insert(ball.center, index)
                self._small_reach = max(self._small_reach, float(ball.radius))
            return index

    def ball(self, index: int) -> Ball:
        return Ball(self._centers.view[index].copy(), float(self._radii.view[index, 0]), self._kinds[index])

    @property
    def balls(self) -> List[Ball]:
        return [self.ball(i) for i in range(len(self))]

    def count(self, kind: BallKind) -> int:
        return sum(1 for k in self._kinds if k == kind)

    def _candidates(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        reach = self._small_reach
        small = self._grid.query(lo - reach, hi + reach)
        if small is None:
            return np.arange(len(self))
        return np.array(sorted(self._large + small), dtype=np.int64)

    def _containing_indices(self, box: Box) -> np.ndarray:
        idx = self._candidates(box.lo, box.hi)
        if idx.size == 0:
            return idx
        centers = self._centers.view[idx]
        radii = self._radii.view[idx, 0]
        far = np.maximum(np.abs(box.lo - centers), np.abs(box.hi - centers))
        return idx[np.linalg.norm(far, axis=1) <= radii]

    def _intersecting_indices(self, box: Box) -> np.ndarray:
        idx = self._candidates(box.lo, box.hi)
        if idx.size == 0:
            return idx
        centers = self._centers.view[idx]
        radii = self._radii.view[idx, 0]
        near = np.clip(centers, box.lo, box.hi) - centers
        return idx[np.linalg.norm(near, axis=1) <= radii]

    def is_contained(self, box: Box) -> Optional[Ball]:
        """A stored ball containing ``box``, if any."""
        hits = self._containing_indices(box)
        return self.ball(int(hits[0])) if hits.size else None

    def intersects_any(self, box: Box) -> bool:
        return self._intersecting_indices(box).size > 0

    def intersecting(self, box: Box) -> List[Ball]:
        return [self.ball(int(i)) for i in self._intersecting_indices(box)]

    def containing_point(self, p: Sequence[float]) -> List[Ball]:
        p = np.asarray(p, dtype=float)
        return [b for b in self.intersecting(Box(p, p)) if b.contains_point(p)]

    def to_records(self) -> List[dict]:
        return [{"center": self._centers.view[i].tolist(), "radius": float(self._radii.view[i, 0]),
                 "kind": self._kinds[i].value} for i in range(len(self))]

    @classmethod
    def from_records(cls, dim: int, cell_size: float, records: Sequence[dict]) -> CoveredRegions:
        regions = cls(dim, cell_size)
        for r in records:
            regions.add(Ball(np.asarray(r["center"]), float(r["radius"]), BallKind(r["kind"])))
        return regions


def is_contained(b: Box, regions: CoveredRegions) -> Optional[Ball]:
    return regions.is_contained(b)


def intersects_any(b: Box, regions: CoveredRegions) -> bool:
    return regions.intersects_any(b)


class PointIndex:
    """Grid-hashed point set answering "nearest stored point within r"."""

    def __init__(self, dim: int, cell_size: float):
        self.dim = dim
        self._grid = _GridHash(cell_size, dim)
        self._points = _GrowableArray(dim)

    def __len__(self) -> int:
        return self._points.size

    @property
    def points(self) -> np.ndarray:
        return self._points.view

    def add(self, p: Sequence[float]) -> int:
        p = np.asarray(p, dtype=float)
        index = self._points.size
        self._points.append(p)
        self._grid.insert(p, index)
        return index

    def nearest_within(self, p: Sequence[float], r: float) -> Optional[Tuple[int, float]]:
        p = np.asarray(p, dtype=float)
        if len(self) == 0:
            return None
        found = self._grid.query(p - r, p + r)
        idx = np.arange(len(self)) if found is None else np.array(found, dtype=np.int64)
        if idx.size == 0:
            return None
        dists = np.linalg.norm(self._points.view[idx] - p, axis=1)
        best = int(np.argmin(dists))
        if dists[best] > r:
            return None
        return int(idx[best]), float(dists[best])


def split_box(b: Box) -> List[Box]:
    """Bisect the longest side; ties go to the lowest axis index."""
    axis = int(np.argmax(b.sides))
    return list(b.split_at(axis, (b.lo[axis] + b.hi[axis]) / 2))


def dynamic_split_candidates(b: Box, balls: Sequence[Ball]) -> List[Tuple[float, int, float]]:
    """Scored candidate cuts ``(score, axis, value)`` in enumeration order.

    A child C scores ``2|C n I| - |C|`` against the inscribed cube I of a ball,
    which peaks when the child coincides with the part of the box inside I.
    Only axes at least half as long as the longest side are cut so that
    repeated splitting still drives every side to zero.
    """
    sides = b.sides
    finite = [ball for ball in balls if math.isfinite(ball.radius)]
    inscribed = [ball.inscribed_box() for ball in finite]
    candidates = []
    for axis in range(b.dim):
        if sides[axis] < 0.5 * b.max_side or sides[axis] == 0:
            continue
        for k in range(1, DYNAMIC_SPLIT_CUTS + 1):
            value = b.lo[axis] + sides[axis] * k / (DYNAMIC_SPLIT_CUTS + 1)
            best = -math.inf
            for child in b.split_at(axis, value):
                for cube in inscribed:
                    overlap = child.intersection(cube)
                    measure = overlap.volume if overlap is not None else 0.0
                    best = max(best, 2 * measure - child.volume)
            candidates.append((best, axis, value))
    return candidates


def split_box_dynamic(b: Box, regions: CoveredRegions) -> List[Box]:
    balls = [ball for ball in regions.intersecting(b) if math.isfinite(ball.radius)]
    if not balls:
        return split_box(b)
    candidates = dynamic_split_candidates(b, balls)
    if not candidates:
        return split_box(b)
    score, axis, value = max(candidates, key=lambda c: c[0])
    logger.debug(f"dynamic split of {b} along axis {axis} at {value:.6g} (score {score:.3g})")
    return list(b.split_at(axis, value))


@dataclass
class BoxNode:
    box: Box
    depth: int
    index: int
    parent: Optional[int] = None
    children: Optional[List[int]] = None
    done: bool = False


class BoxTree:
    """Search tree with root R; children are produced lazily by a split rule.

    Node indices are creation serials and stay stable across checkpoints.
    """

    def __init__(self, root: Box, splitter: Optional[Callable[[Box], List[Box]]] = None):
        self.splitter = splitter or split_box
        self.root_box = root
        self.nodes: Dict[int, BoxNode] = {0: BoxNode(root, 0, 0)}
        self.next_index = 1

    @property
    def root(self) -> BoxNode:
        return self.nodes[0]

    def add_node(self, box: Box, depth: int, parent: Optional[int], index: Optional[int] = None) -> BoxNode:
        if index is None:
            index = self.next_index
        self.next_index = max(self.next_index, index + 1)
        node = BoxNode(box, depth, index, parent)
        self.nodes[index] = node
        return node

    def expand(self, node: BoxNode, boxes: Optional[List[Box]] = None) -> List[BoxNode]:
        if node.children is None:
            boxes = boxes if boxes is not None else self.splitter(node.box)
            node.children = [self.add_node(b, node.depth + 1, node.index).index for b in boxes]
        return [self.nodes[i] for i in node.children]

    def mark_done(self, node: BoxNode) -> None:
        node.done = True

    def leaves(self) -> List[BoxNode]:
        return [n for n in self.nodes.values() if n.children is None]

    @property
    def max_depth(self) -> int:
        return max(n.depth for n in self.nodes.values())


def depth_bound(root: Box, gamma: float) -> int:
    """Levels of longest-side bisection after which every box has max side <= gamma."""
    if gamma <= 0:
        raise InputError(f"gamma must be positive, got {gamma}")
    levels = 0
    for side in root.sides:
        if side > gamma:
            levels += math.ceil(math.log2(side / gamma))
    return levels
