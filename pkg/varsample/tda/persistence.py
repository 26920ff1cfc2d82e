#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Persistent homology over Z/2 by boundary-matrix column reduction

Columns are sorted position lists; adding two columns is a symmetric
difference. With clearing, dimensions are reduced from the top down and any
column whose simplex already appeared as a pivot is skipped, since it must
reduce to zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional

from varsample.tda.rips import FiltrationComplex

logger = logging.getLogger(__name__)


class Interval(NamedTuple):
    birth: float
    death: float
    dim: int

    @property
    def persistence(self) -> float:
        return self.death - self.birth

    @property
    def essential(self) -> bool:
        return math.isinf(self.death)


@dataclass
class PersistenceDiagram:
    intervals: List[Interval] = field(default_factory=list)
    max_dim: int = 0
    ambient_dim: Optional[int] = None
    epsilon: Optional[float] = None
    delta: Optional[float] = None
    threshold: Optional[float] = None
    zero_length: int = 0
    seed: Optional[int] = None

    def __len__(self) -> int:
        return len(self.intervals)

    def in_dim(self, dim: int) -> List[Interval]:
        return [iv for iv in self.intervals if iv.dim == dim]

    def sorted(self) -> PersistenceDiagram:
        return PersistenceDiagram(sorted(self.intervals), self.max_dim, self.ambient_dim, self.epsilon, self.delta,
                                  self.threshold, self.zero_length, self.seed)


def _add(a: List[int], b: List[int]) -> List[int]:
    return sorted(set(a).symmetric_difference(b))


def reduce_boundary(fc: FiltrationComplex, clearing: bool = True) -> Dict[int, int]:
    """Map from each pivot (lowest one) to the column that killed it."""
    by_dim: Dict[int, List[int]] = {}
    for i, s in enumerate(fc.simplices):
        by_dim.setdefault(len(s) - 1, []).append(i)
    top = max(by_dim, default=0)
    dims = range(top, 0, -1) if clearing else range(1, top + 1)

    pivot_owner: Dict[int, int] = {}
    reduced: Dict[int, List[int]] = {}
    cleared = 0
    for dim in dims:
        for j in by_dim.get(dim, []):
            if clearing and j in pivot_owner:
                cleared += 1
                continue
            col = fc.boundary(j)
            while col and col[-1] in pivot_owner:
                col = _add(col, reduced[pivot_owner[col[-1]]])
            if col:
                pivot_owner[col[-1]] = j
                reduced[j] = col
    logger.debug(f"reduction: {len(reduced)} pairs, {cleared} columns cleared")
    return {low: j for low, j in pivot_owner.items()}


def compute_persistence(fc: FiltrationComplex, clearing: bool = True) -> PersistenceDiagram:
    pairs = reduce_boundary(fc, clearing)
    killers = set(pairs.values())
    intervals: List[Interval] = []
    zero_length = 0
    for low, j in pairs.items():
        dim = fc.dim(low)
        birth, death = fc.values[low], fc.values[j]
        if dim > fc.max_dim:
            continue
        if death == birth:
            zero_length += 1
            continue
        intervals.append(Interval(birth, death, dim))
    for i, s in enumerate(fc.simplices):
        dim = len(s) - 1
        if dim <= fc.max_dim and i not in pairs and i not in killers:
            intervals.append(Interval(fc.values[i], math.inf, dim))
    intervals.sort()
    return PersistenceDiagram(intervals=intervals, max_dim=fc.max_dim, threshold=fc.threshold,
                              zero_length=zero_length)


def betti_at(diag: PersistenceDiagram, t: float, dim: int) -> int:
    """Intervals [b, d) of dimension ``dim`` alive at t."""
    return sum(1 for iv in diag.intervals if iv.dim == dim and iv.birth <= t < iv.death)


def bottleneck_greedy(diag_a: PersistenceDiagram, diag_b: PersistenceDiagram, dim: int) -> float:
    """Greedy upper bound on the bottleneck distance between finite parts of two diagrams.

    Candidate pairs are taken in increasing inf-norm distance; points left over
    are matched to the diagonal at half their persistence.
    """
    a = [iv for iv in diag_a.in_dim(dim) if not iv.essential]
    b = [iv for iv in diag_b.in_dim(dim) if not iv.essential]
    candidates = sorted(
        (max(abs(p.birth - q.birth), abs(p.death - q.death)), i, j)
        for i, p in enumerate(a) for j, q in enumerate(b))
    used_a, used_b = set(), set()
    cost = 0.0
    for dist, i, j in candidates:
        if i in used_a or j in used_b:
            continue
        if dist > max(a[i].persistence, b[j].persistence) / 2:
            continue
        used_a.add(i)
        used_b.add(j)
        cost = max(cost, dist)
    for i, p in enumerate(a):
        if i not in used_a:
            cost = max(cost, p.persistence / 2)
    for j, q in enumerate(b):
        if j not in used_b:
            cost = max(cost, q.persistence / 2)
    return cost
