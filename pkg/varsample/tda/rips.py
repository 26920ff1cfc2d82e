#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Vietoris-Rips filtrations of point clouds

A simplex enters at its diameter (longest edge). Simplices are listed in
filtration order: value, then dimension, then lexicographic vertex order, which
puts every face before its cofaces.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from varsample.constants import DEFAULT_SIMPLEX_CAP
from varsample.exceptions import InputError, SimplexCapExceeded

logger = logging.getLogger(__name__)

Simplex = Tuple[int, ...]


@dataclass
class FiltrationComplex:
    simplices: List[Simplex]
    values: List[float]
    max_dim: int
    threshold: float
    num_points: int
    _positions: Dict[Simplex, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._positions = {s: i for i, s in enumerate(self.simplices)}

    def __len__(self) -> int:
        return len(self.simplices)

    def position(self, simplex: Simplex) -> int:
        return self._positions[simplex]

    def dim(self, i: int) -> int:
        return len(self.simplices[i]) - 1

    def count(self, dim: int) -> int:
        return sum(1 for s in self.simplices if len(s) == dim + 1)

    def boundary(self, i: int) -> List[int]:
        """Positions of the codimension-one faces of simplex ``i``, ascending."""
        s = self.simplices[i]
        if len(s) == 1:
            return []
        return sorted(self._positions[s[:k] + s[k + 1:]] for k in range(len(s)))


def _edges(points: np.ndarray, t_max: float) -> Tuple[np.ndarray, np.ndarray]:
    if len(points) < 2:
        return np.empty((0, 2), dtype=np.int64), np.empty(0)
    pairs = cKDTree(points).query_pairs(t_max, output_type="ndarray")
    if len(pairs) == 0:
        return np.empty((0, 2), dtype=np.int64), np.empty(0)
    pairs = np.sort(pairs, axis=1)
    lengths = np.linalg.norm(points[pairs[:, 0]] - points[pairs[:, 1]], axis=1)
    # the tree may round differently in the last bit; keep filtration values <= t_max
    keep = lengths <= t_max
    return pairs[keep], lengths[keep]


def estimate_simplex_count(cloud: Sequence[Sequence[float]], t_max: float, p_max: int) -> int:
    """Upper bound on the number of simplices up to dimension p_max + 1.

    A k-simplex is counted once from its lowest vertex, which sees the other k
    vertices among its higher-index neighbours.
    """
    points = np.asarray(cloud, dtype=float)
    n = len(points)
    pairs, _ = _edges(points, t_max)
    up_degree = np.bincount(pairs[:, 0], minlength=n) if len(pairs) else np.zeros(n, dtype=np.int64)
    total = n
    for k in range(1, p_max + 2):
        total += int(sum(math.comb(int(d), k) for d in up_degree))
    return total


def rips_filtration(cloud: Sequence[Sequence[float]], t_max: float, p_max: int = 1,
                    simplex_cap: int = DEFAULT_SIMPLEX_CAP) -> FiltrationComplex:
    points = np.asarray(cloud, dtype=float)
    if points.ndim == 1:
        points = points.reshape(len(points), -1)
    if p_max < 0:
        raise InputError(f"p_max must be non-negative, got {p_max}")
    if not t_max >= 0:
        raise InputError(f"t_max must be non-negative, got {t_max}")
    estimate = estimate_simplex_count(points, t_max, p_max)
    if estimate > simplex_cap:
        logger.error(f"Rips complex estimate {estimate} exceeds cap {simplex_cap}")
        raise SimplexCapExceeded(estimate, simplex_cap)

    n = len(points)
    pairs, lengths = _edges(points, t_max)
    length: Dict[Tuple[int, int], float] = {}
    upper: List[set] = [set() for _ in range(n)]
    for (a, b), d in zip(pairs.tolist(), lengths.tolist()):
        length[(a, b)] = d
        upper[a].add(b)

    entries: List[Tuple[float, int, Simplex]] = [(0.0, 0, (v,)) for v in range(n)]
    layer: List[Tuple[Simplex, float, set]] = []
    for (a, b), d in length.items():
        entries.append((d, 1, (a, b)))
        layer.append(((a, b), d, upper[a] & upper[b]))
    for dim in range(2, p_max + 2):
        next_layer = []
        for simplex, value, common in layer:
            for v in common:
                if v <= simplex[-1]:
                    continue
                diameter = max([value] + [length[(u, v)] for u in simplex])
                grown = simplex + (v,)
                entries.append((diameter, dim, grown))
                next_layer.append((grown, diameter, common & upper[v]))
        layer = next_layer

    entries.sort()
    logger.debug(f"Rips filtration: {n} points, {len(entries)} simplices up to dimension {p_max + 1}")
    return FiltrationComplex(simplices=[e[2] for e in entries], values=[e[0] for e in entries],
                             max_dim=p_max, threshold=t_max, num_points=n)
