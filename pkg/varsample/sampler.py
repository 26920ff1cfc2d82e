#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Adaptive (delta, epsilon)-sampling of a real variety inside a box

Breadth-first search over the box tree of the region. A node triggers
MinDistance at its center when it is small enough or touches no covered
region; the returned exclusion ball B_{d-delta}(y) and sample balls
B_eps(s) are stored, and a node inside any stored ball is done.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from varsample.checkpoint import BallRecord, CheckpointState, NodeRecord, load_checkpoint, save_checkpoint
from varsample.constants import CERTIFY_FLOOR, DEDUP_TOL
from varsample.exceptions import InputError, MinDistanceFailure, SamplerAborted
from varsample.geometry import (Ball, BallKind, Box, BoxNode, BoxTree, CoveredRegions, PointIndex, split_box,
                                split_box_dynamic)
from varsample.mindist import MinDistanceSolver
from varsample.model import (Certificate, MinDistanceResult, PointProvenance, SampleCloud, SamplerConfig,
                             VerificationReport)
from varsample.parser import parse
from varsample.polysys import PolynomialSystem

logger = logging.getLogger(__name__)

StrOrPath = Union[str, Path]

# relative slack for the post-call containment check on leaf-size boxes
CONTAINMENT_SLACK = 1e-12
DEFAULT_CHECKPOINT = "varsample-checkpoint.json"

_worker_solver: Optional[MinDistanceSolver] = None


def _init_worker(solver: MinDistanceSolver):
    global _worker_solver
    _worker_solver = solver


def _worker_min_distance(y: np.ndarray, seed: Tuple[int, int]) -> MinDistanceResult:
    return _worker_solver.min_distance(y, seed)


class Sampler:
    def __init__(self,
                 system: PolynomialSystem,
                 cfg: SamplerConfig,
                 solver: Optional[MinDistanceSolver] = None,
                 backend: str = "internal"):
        if system.num_vars != cfg.num_vars:
            raise InputError(f"region has {cfg.num_vars} dimensions, system has {system.num_vars} variables")
        if system.num_polys > system.codim:
            logger.info(f"randomizing {system.num_polys} polynomials down to {system.codim}")
            system = system.randomize(cfg.seed)
        self.system = system
        self.cfg = cfg
        self.backend_name = backend if isinstance(backend, str) else "internal"
        self.solver = solver or MinDistanceSolver(system, delta=cfg.delta, tracker=cfg.tracker, seed=cfg.seed,
                                                  backend=backend)
        n = system.num_vars
        splitter = self._dynamic_split if cfg.heuristics.dynamic_split else split_box
        self.tree = BoxTree(Box(cfg.lo, cfg.hi), splitter)
        self.regions = CoveredRegions(n, cell_size=cfg.epsilon)
        self.index = PointIndex(n, cell_size=cfg.epsilon)
        self.provenance: List[PointProvenance] = []
        self.queue: List[BoxNode] = [self.tree.root]
        self.calls = 0
        self.max_depth = 0
        self._last_checkpoint_calls = 0

    def _dynamic_split(self, box: Box) -> List[Box]:
        return split_box_dynamic(box, self.regions)

    @property
    def checkpoint_path(self) -> Path:
        return Path(self.cfg.checkpoint_path or DEFAULT_CHECKPOINT)

    def needs_call(self, node: BoxNode) -> bool:
        return node.box.max_side <= self.cfg.leaf_side or not self.regions.intersects_any(node.box)

    def _seed(self, node: BoxNode) -> Tuple[int, int]:
        return (self.cfg.seed, node.index)

    def _insert(self, node: BoxNode, result: MinDistanceResult):
        """Store the balls of one MinDistance result and append new sample points."""
        y = node.box.center
        d = result.min_distance
        if d > self.cfg.delta:
            self.regions.add(Ball(y, d - self.cfg.delta, BallKind.EXCLUSION))
        heuristics = self.cfg.heuristics
        for w, residual in zip(result.witness_array, result.residuals or [0.0] * len(result.witnesses)):
            self.regions.add(Ball(w, self.cfg.epsilon, BallKind.SAMPLE))
            refuse = heuristics.rho if heuristics.dynamic_sample else DEDUP_TOL
            if self.index.nearest_within(w, max(refuse, DEDUP_TOL)) is not None:
                continue
            self.index.add(w)
            self.provenance.append(PointProvenance(test_point=y.tolist(), residual=residual,
                                                   certified_delta=result.certified_accuracy))
        if node.box.max_side <= self.cfg.leaf_side:
            self._check_leaf_containment(node, result)

    def _check_leaf_containment(self, node: BoxNode, result: MinDistanceResult):
        # a box this small must now sit in the exclusion ball or in B_eps of the nearest witness
        box, y = node.box, node.box.center
        slack = CONTAINMENT_SLACK * max(1.0, float(np.max(np.abs(box.hi))), float(np.max(np.abs(box.lo))))
        slack += 2 * result.diagnostics.get("perturbation", 0.0)
        d = result.min_distance
        if math.isinf(d) or Ball(y, d - self.cfg.delta + slack if d > self.cfg.delta else 0.0).contains_box(box):
            return
        witnesses = result.witness_array
        nearest = witnesses[int(np.argmin(np.linalg.norm(witnesses - y, axis=1)))]
        if Ball(nearest, self.cfg.epsilon + slack).contains_box(box):
            return
        raise AssertionError(f"leaf box {box} is covered neither by B_eps({nearest.tolist()}) "
                             f"nor by the exclusion ball of radius {d - self.cfg.delta}")

    def _finish(self, node: BoxNode, next_level: List[BoxNode]):
        self.max_depth = max(self.max_depth, node.depth)
        if self.regions.is_contained(node.box) is not None:
            self.tree.mark_done(node)
            return
        next_level.extend(self.tree.expand(node))

    def _order(self, level: List[BoxNode]) -> List[BoxNode]:
        if self.cfg.heuristics.priority_search:
            return sorted(level, key=lambda n: (-n.box.volume, n.index))
        return level

    def _compute(self, nodes: List[BoxNode], pool: Optional[ProcessPoolExecutor]) -> List[MinDistanceResult]:
        if pool is None:
            return [self.solver.min_distance(n.box.center, self._seed(n)) for n in nodes]
        futures = [pool.submit(_worker_min_distance, n.box.center, self._seed(n)) for n in nodes]
        return [f.result() for f in futures]

    def _maybe_checkpoint(self, remaining: List[BoxNode]):
        if self.cfg.checkpoint_path and self.calls - self._last_checkpoint_calls >= self.cfg.checkpoint_every:
            self.save(remaining)
            self._last_checkpoint_calls = self.calls

    def run(self) -> SampleCloud:
        self.solver.prepare()
        workers = self.cfg.workers
        pool = None
        if workers > 1:
            pool = ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(self.solver,))
        try:
            self._search(pool, workers)
        finally:
            if pool is not None:
                pool.shutdown(cancel_futures=True)
        cloud = self.cloud()
        if not cloud.points:
            logger.info("no real points found: the variety does not meet the region (V_R empty)")
        logger.info(f"sampling done: {len(cloud)} points, certificate {cloud.certificate.describe()}, "
                    f"{self.calls} MinDistance calls, depth {self.max_depth}")
        return cloud

    def _search(self, pool: Optional[ProcessPoolExecutor], batch_size: int):
        while self.queue:
            depth = self.queue[0].depth
            level = self._order([n for n in self.queue if n.depth == depth])
            next_level = [n for n in self.queue if n.depth != depth]
            logger.debug(f"depth {depth}: {len(level)} boxes")
            i = 0
            while i < len(level):
                batch = level[i:i + batch_size]
                claimed = [n for n in batch if self.needs_call(n)]
                try:
                    results = self._compute(claimed, pool)
                except (MinDistanceFailure, KeyboardInterrupt) as e:
                    self.queue = level[i:] + next_level
                    path = self.save(self.queue)
                    raise SamplerAborted(f"sampling aborted after {self.calls} MinDistance calls: {e}", str(path)) from e
                for node, result in zip(claimed, results):
                    self.calls += 1
                    self._insert(node, result)
                for node in batch:
                    self._finish(node, next_level)
                i += len(batch)
                self._maybe_checkpoint(level[i:] + next_level)
                if self.calls and self.calls % 100 == 0 and claimed:
                    logger.info(f"{self.calls} MinDistance calls, {len(self.index)} points, depth {depth}")
            self.queue = next_level

    def certificate(self) -> Certificate:
        return Certificate(delta=self.cfg.delta,
                           epsilon=self.cfg.effective_epsilon,
                           base_epsilon=self.cfg.epsilon,
                           min_distance_calls=self.calls,
                           max_depth=self.max_depth,
                           exclusion_balls=self.regions.count(BallKind.EXCLUSION),
                           sample_balls=self.regions.count(BallKind.SAMPLE))

    def cloud(self) -> SampleCloud:
        return SampleCloud(var_names=list(self.system.var_names),
                           points=self.index.points.tolist(),
                           provenance=self.provenance,
                           certificate=self.certificate(),
                           config=self.cfg,
                           seed=self.cfg.seed)

    def state(self, queue: Sequence[BoxNode]) -> CheckpointState:
        return CheckpointState(system=self.system.format(),
                               backend=self.backend_name,
                               config=self.cfg,
                               queue=[NodeRecord(lo=n.box.lo.tolist(), hi=n.box.hi.tolist(), depth=n.depth,
                                                 index=n.index) for n in queue],
                               next_index=self.tree.next_index,
                               balls=[BallRecord(**r) for r in self.regions.to_records()],
                               points=self.index.points.tolist(),
                               provenance=self.provenance,
                               calls=self.calls,
                               max_depth=self.max_depth)

    def save(self, queue: Optional[Sequence[BoxNode]] = None) -> Path:
        return save_checkpoint(self.state(self.queue if queue is None else queue), self.checkpoint_path)

    @classmethod
    def from_checkpoint(cls, state: CheckpointState, system: Optional[PolynomialSystem] = None,
                        solver: Optional[MinDistanceSolver] = None) -> Sampler:
        system = system or parse(state.system)
        sampler = cls(system, state.config, solver=solver, backend=state.backend)
        n = sampler.system.num_vars
        for record in state.balls:
            sampler.regions.add(Ball(np.asarray(record.center), record.radius, BallKind(record.kind)))
        for p in state.points:
            sampler.index.add(p)
        sampler.provenance = list(state.provenance)
        sampler.queue = [sampler.tree.add_node(Box(r.lo, r.hi), r.depth, None, r.index) for r in state.queue]
        sampler.tree.next_index = max(sampler.tree.next_index, state.next_index)
        sampler.calls = state.calls
        sampler._last_checkpoint_calls = state.calls
        sampler.max_depth = state.max_depth
        if sampler.index.points.shape[1] != n:
            raise InputError("checkpoint points do not match the system dimension")
        return sampler


def sample(sys: PolynomialSystem, cfg: SamplerConfig, backend: str = "internal",
           solver: Optional[MinDistanceSolver] = None) -> SampleCloud:
    return Sampler(sys, cfg, solver=solver, backend=backend).run()


def resume(checkpoint_path: StrOrPath, sys: Optional[PolynomialSystem] = None) -> SampleCloud:
    state = load_checkpoint(checkpoint_path)
    logger.info(f"resuming from {checkpoint_path}: {state.calls} calls done, {len(state.queue)} boxes queued")
    return Sampler.from_checkpoint(state, sys).run()


def subsample(cloud: SampleCloud, r: float, seed: int = 0) -> SampleCloud:
    """Greedy thinning: keep a point, drop every other point within r, repeat.

    The result is a (delta, epsilon + r)-sample when the input was a
    (delta, epsilon)-sample.
    """
    if not r > 0:
        raise InputError(f"subsample radius must be positive, got {r}")
    points = cloud.array
    keep = np.zeros(len(points), dtype=bool)
    if len(points):
        removed = np.zeros(len(points), dtype=bool)
        tree = cKDTree(points)
        for i in np.random.default_rng(seed).permutation(len(points)):
            if removed[i]:
                continue
            keep[i] = True
            removed[tree.query_ball_point(points[i], r)] = True
    kept = np.flatnonzero(keep)
    certificate = cloud.certificate.model_copy(update={"epsilon": cloud.certificate.epsilon + r})
    logger.info(f"subsampled {len(points)} points to {len(kept)} at radius {r}")
    provenance = [cloud.provenance[i] for i in kept] if len(cloud.provenance) == len(points) else []
    return cloud.model_copy(update={"points": points[kept].tolist(), "provenance": provenance,
                                    "certificate": certificate})


def residual_distance_bound(sys: PolynomialSystem, p: np.ndarray) -> float:
    values = sys.evaluate(p)
    smallest = np.linalg.svd(sys.jacobian(p), compute_uv=False)[-1]
    if smallest == 0:
        return math.inf
    return 2 * float(np.linalg.norm(values)) / smallest


def verify_sample(cloud: SampleCloud,
                  sys: PolynomialSystem,
                  oracle: Union[np.ndarray, Callable[[], np.ndarray]]) -> VerificationReport:
    """Check A within delta of the variety (residual bound) and the oracle within epsilon of A."""
    reference = np.asarray(oracle() if callable(oracle) else oracle, dtype=float)
    points = cloud.array
    epsilon, delta = cloud.certificate.epsilon, cloud.certificate.delta
    report = dict(epsilon=epsilon, delta=delta, oracle_points=len(reference), cloud_points=len(points))
    if sys.num_polys > sys.codim:
        sys = sys.randomize(cloud.seed)

    worst = 0.0
    for p in points:
        bound = residual_distance_bound(sys, p)
        worst = max(worst, bound)
        if bound > max(delta, CERTIFY_FLOOR) * (1 + 1e-9):
            return VerificationReport(passed=False, coverage_gap=math.nan, max_residual_distance=bound,
                                      witness=p.tolist(), reason="sample point not within delta of the variety",
                                      **report)
    if len(reference) == 0:
        return VerificationReport(passed=True, coverage_gap=0.0, max_residual_distance=worst, **report)
    if len(points) == 0:
        return VerificationReport(passed=False, coverage_gap=math.inf, max_residual_distance=worst,
                                  witness=reference[0].tolist(), reason="empty sample against a non-empty oracle",
                                  **report)
    gaps, _ = cKDTree(points).query(reference)
    far = int(np.argmax(gaps))
    gap = float(gaps[far])
    if gap > epsilon:
        return VerificationReport(passed=False, coverage_gap=gap, max_residual_distance=worst,
                                  witness=reference[far].tolist(), reason="oracle point farther than epsilon",
                                  **report)
    return VerificationReport(passed=True, coverage_gap=gap, max_residual_distance=worst, **report)


def write_sample_csv(cloud: SampleCloud, path: StrOrPath) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cert = cloud.certificate
    header = "\n".join([
        f"vars: {' '.join(cloud.var_names)}",
        f"epsilon: {cert.epsilon:.17g}",
        f"delta: {cert.delta:.17g}",
        f"certificate: {cert.describe()}",
        f"seed: {cloud.seed if cloud.seed is not None else ''}",
        f"calls: {cert.min_distance_calls}",
    ])
    np.savetxt(path, cloud.array.reshape(len(cloud), cloud.num_vars), fmt="%.17g", delimiter=",",
               header=header, comments="# ")
    return path


def read_sample_csv(path: StrOrPath) -> SampleCloud:
    path = Path(path)
    meta = {}
    with path.open(encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, sep, value = line[1:].partition(":")
            if sep:
                meta[key.strip()] = value.strip()
    if "vars" not in meta:
        raise InputError(f"{path}: missing '# vars:' header")
    names = meta["vars"].split()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    data = data.reshape(-1, len(names))
    epsilon = float(meta.get("epsilon", "nan"))
    delta = float(meta.get("delta", "nan"))
    seed = int(meta["seed"]) if meta.get("seed") else None
    cert = Certificate(delta=delta, epsilon=epsilon, base_epsilon=epsilon,
                       min_distance_calls=int(meta.get("calls", 0) or 0))
    return SampleCloud(var_names=names, points=data.tolist(), certificate=cert, seed=seed)
