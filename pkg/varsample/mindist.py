#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""MinDistance: nearest real points of a variety to a test point

A call solves the Fritz John system G_y through a backend, keeps the real
endpoints, certifies each one against the variety, and reports the smallest
distance. An empty witness list means the real variety is empty.
"""

from __future__ import annotations

import collections
import logging
import math
from functools import lru_cache
from typing import List, NamedTuple, Optional, Sequence, Union

import numpy as np
from retry.api import retry_call

from varsample.backend import BaseBackend, get_backend
from varsample.constants import (CERTIFY_FLOOR, DEDUP_TOL, MIN_DISTANCE_RETRIES, PROJECTION_STEPS, REAL_TOL,
                                 Y_PERTURBATION)
from varsample.exceptions import GenericityFailure, MinDistanceFailure
from varsample.fritzjohn import FritzJohnSystem, build_fritz_john
from varsample.homotopy import PathPoint
from varsample.model import MinDistanceResult, TrackerConfig
from varsample.polysys import PolynomialSystem, as_point

logger = logging.getLogger(__name__)

__all__ = ["FritzJohnSystem", "build_fritz_john", "CertifiedWitness", "certify_witness", "harvest_real_endpoints",
           "MinDistanceSolver", "min_distance"]

Seed = Union[int, Sequence[int]]


class CertifiedWitness(NamedTuple):
    point: np.ndarray
    bound: float
    residual: float
    accepted: bool


def certify_witness(sys: PolynomialSystem, w: Sequence[float], delta: float,
                    max_steps: int = PROJECTION_STEPS) -> CertifiedWitness:
    """Accept ``w`` when 2 * ||J_f(w)^+|| * ||f(w)|| <= delta.

    Failing points are pulled toward the variety by Gauss-Newton steps on f;
    a point that still fails after ``max_steps`` is rejected.
    """
    target = max(delta, CERTIFY_FLOOR)
    w = np.asarray(w, dtype=float)
    bound = residual = math.inf
    for step in range(max_steps + 1):
        values = sys.evaluate(w)
        jac = sys.jacobian(w)
        smallest = np.linalg.svd(jac, compute_uv=False)[-1]
        residual = float(np.linalg.norm(values))
        bound = 2 * residual / smallest if smallest > 0 else math.inf
        if bound <= target:
            return CertifiedWitness(w, bound, residual, True)
        if step == max_steps or not math.isfinite(bound):
            break
        w = w - np.linalg.lstsq(jac, values, rcond=None)[0]
    logger.warning(f"rejecting witness {w.tolist()}: distance bound {bound:.3g} exceeds {target:.3g}")
    return CertifiedWitness(w, bound, residual, False)


def harvest_real_endpoints(endpoints: Sequence[PathPoint], sys: PolynomialSystem, y: Sequence[float],
                           delta: float) -> MinDistanceResult:
    n = sys.num_vars
    y = np.asarray(y, dtype=float)
    statuses = collections.Counter(p.status.value for p in endpoints)
    witnesses: List[np.ndarray] = []
    residuals: List[float] = []
    bounds: List[float] = []
    complex_count = rejected = 0
    for p in endpoints:
        if not p.converged:
            continue
        x = np.asarray(p.u[:n])
        if np.max(np.abs(np.imag(x)), initial=0.0) > REAL_TOL:
            complex_count += 1
            continue
        cw = certify_witness(sys, np.real(x), delta)
        if not cw.accepted:
            rejected += 1
            continue
        if any(np.linalg.norm(cw.point - w) <= DEDUP_TOL for w in witnesses):
            continue
        witnesses.append(cw.point)
        residuals.append(float(p.residual))
        bounds.append(cw.bound)
    distance = min((float(np.linalg.norm(w - y)) for w in witnesses), default=math.inf)
    diagnostics = {"endpoints": len(endpoints), "statuses": dict(statuses), "complex": complex_count,
                   "rejected": rejected}
    return MinDistanceResult(witnesses=[w.tolist() for w in witnesses],
                             min_distance=distance,
                             certified_accuracy=max(bounds, default=0.0),
                             residuals=residuals,
                             diagnostics=diagnostics)


def _attempt_rng(seed: Seed, attempt: int) -> np.random.Generator:
    return np.random.default_rng([*np.atleast_1d(seed).tolist(), attempt])


class MinDistanceSolver:
    """Runs MinDistance calls against one system with a fixed backend.

    A call that hits non-generic random data is retried with fresh (beta,
    patch, gamma); the last retry also nudges y by a relative 1e-10.
    """

    def __init__(self,
                 system: PolynomialSystem,
                 delta: float = 0.0,
                 tracker: Optional[TrackerConfig] = None,
                 seed: int = 0,
                 workers: int = 1,
                 backend: Union[str, BaseBackend] = "internal",
                 ab_initio: bool = False,
                 retries: int = MIN_DISTANCE_RETRIES):
        self.system = system
        self.delta = delta
        self.seed = seed
        self.retries = retries
        if isinstance(backend, str):
            backend = get_backend(backend, system, tracker, seed=seed, workers=workers, ab_initio=ab_initio)
        self.backend = backend
        self.calls = 0

    def prepare(self) -> MinDistanceSolver:
        self.backend.prepare()
        return self

    def _attempt(self, y: np.ndarray, seed: Seed, attempts: list) -> MinDistanceResult:
        attempt = len(attempts)
        rng = _attempt_rng(seed, attempt)
        y_used = y
        if attempt > 0 and attempt == self.retries:
            direction = rng.standard_normal(y.shape[0])
            y_used = y + Y_PERTURBATION * max(1.0, float(np.linalg.norm(y))) * direction / np.linalg.norm(direction)
        try:
            endpoints = self.backend.critical_endpoints(y_used, rng)
        except GenericityFailure as e:
            attempts.append(str(e))
            raise
        attempts.append("ok")
        result = harvest_real_endpoints(endpoints, self.system, y, self.delta)
        shift = float(np.linalg.norm(y_used - y))
        if shift:
            # witnesses belong to the nudged point; d stays a lower bound on dist(y, V)
            result.min_distance = max(0.0, result.min_distance - 2 * shift)
            result.diagnostics["perturbation"] = shift
        return result

    def min_distance(self, y: Sequence[float], seed: Optional[Seed] = None) -> MinDistanceResult:
        y = np.asarray(as_point(y, self.system.num_vars), dtype=float)
        seed = self.seed if seed is None else seed
        attempts: List[str] = []
        try:
            result = retry_call(self._attempt, fargs=[y, seed, attempts], exceptions=GenericityFailure,
                                tries=self.retries + 1, logger=logger)
        except GenericityFailure as e:
            diagnostics = {"y": y.tolist(), "attempts": attempts, "backend": self.backend.name}
            logger.error(f"MinDistance failed at y={y.tolist()} after {len(attempts)} attempts")
            raise MinDistanceFailure(f"MinDistance at y={y.tolist()} failed: {e}", diagnostics) from e
        self.calls += 1
        result.diagnostics["attempts"] = len(attempts)
        logger.debug(f"MinDistance y={y.tolist()}: d={result.min_distance:.6g}, {len(result.witnesses)} witnesses")
        return result

    def close(self):
        self.backend.close()


@lru_cache(maxsize=8)
def _cached_solver(system: PolynomialSystem, tracker: TrackerConfig, seed: int, delta: float,
                   backend: str) -> MinDistanceSolver:
    return MinDistanceSolver(system, delta=delta, tracker=tracker, seed=seed, backend=backend).prepare()


def min_distance(sys: PolynomialSystem, y: Sequence[float], cfg: Optional[TrackerConfig] = None, seed: int = 0,
                 delta: float = 0.0, backend: str = "internal") -> MinDistanceResult:
    """One-shot MinDistance; the start solve is cached per (system, config, seed)."""
    solver = _cached_solver(sys, cfg or TrackerConfig(), seed, delta, backend)
    return solver.min_distance(y, seed)
