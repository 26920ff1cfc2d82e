#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Predictor-corrector path tracking for square polynomial systems

Paths run from t = 1 (start system, solutions known) to t = 0 (target).
Path-level outcomes (diverged, singular endpoint, step underflow) are reported
through ``PathPoint.status``, never raised.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Iterable, List, NamedTuple, Optional, Protocol, Sequence, Tuple

import numpy as np

from varsample.constants import DEDUP_TOL, SINGULAR_CONDITION, STEP_EXPANSION_STREAK
from varsample.exceptions import InputError, TrackingError
from varsample.model import PathStatus, TrackerConfig
from varsample.polysys import PolynomialSystem

logger = logging.getLogger(__name__)


class SquareMap(Protocol):
    """Anything with ``evaluate``/``jacobian`` and as many equations as unknowns."""

    def evaluate(self, u: np.ndarray) -> np.ndarray: ...
    def jacobian(self, u: np.ndarray) -> np.ndarray: ...


class Homotopy(Protocol):
    size: int

    def evaluate(self, u: np.ndarray, t: float) -> np.ndarray: ...
    def jacobian(self, u: np.ndarray, t: float) -> np.ndarray: ...
    def dt(self, u: np.ndarray, t: float) -> np.ndarray: ...


@dataclass
class PathPoint:
    u: np.ndarray
    t: float
    step_size: float
    status: PathStatus = PathStatus.TRACKING
    steps: int = 0
    rejections: int = 0
    residual: float = float("inf")
    condition: float = float("nan")
    start_index: int = -1

    @property
    def converged(self) -> bool:
        return self.status == PathStatus.CONVERGED


class NewtonResult(NamedTuple):
    u: np.ndarray
    residual: float
    status: PathStatus
    iterations: int
    condition: float


def _norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


def _condition(jac: np.ndarray) -> float:
    try:
        cond = float(np.linalg.cond(jac))
    except np.linalg.LinAlgError:
        return float("inf")
    # a zero matrix gives 0 / 0
    return float("inf") if np.isnan(cond) else cond


class TotalDegreeStart:
    """Start system ``g_i(u) = gamma_i (u_i^d_i - 1)``."""

    def __init__(self, degrees: Sequence[int], gammas: Sequence[complex]):
        self.degrees = np.asarray(degrees, dtype=np.int64)
        self.gammas = np.asarray(gammas, dtype=complex)
        self.size = len(self.degrees)

    def evaluate(self, u: np.ndarray) -> np.ndarray:
        return self.gammas * (u ** self.degrees - 1)

    def jacobian(self, u: np.ndarray) -> np.ndarray:
        return np.diag(self.gammas * self.degrees * u ** (self.degrees - 1))

    @property
    def path_count(self) -> int:
        return int(np.prod(self.degrees))

    def solutions(self) -> Iterable[np.ndarray]:
        roots = [np.exp(2j * np.pi * np.arange(d) / d) for d in self.degrees]
        for combo in itertools.product(*roots):
            yield np.array(combo, dtype=complex)


def random_gamma(rng: np.random.Generator, size: Optional[int] = None):
    return np.exp(2j * np.pi * rng.random(size))


def total_degree_start(square, seed: Optional[int] = None) -> Tuple[TotalDegreeStart, List[np.ndarray]]:
    """Bezout start system for ``square`` and all of its prod(d_i) solutions.

    ``square`` is a square ``PolynomialSystem`` or any square map exposing
    per-equation ``degrees``.
    """
    if isinstance(square, PolynomialSystem) and not square.is_square():
        raise InputError(f"start system needs a square system, got {square.num_polys}x{square.num_vars}")
    degrees = square.degrees
    if any(d < 1 for d in degrees):
        raise InputError(f"equation of degree 0 in square system (degrees {degrees})")
    rng = np.random.default_rng(seed)
    start = TotalDegreeStart(degrees, random_gamma(rng, len(degrees)))
    return start, list(start.solutions())


def _values_and_jacobian(square: SquareMap, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    combined = getattr(square, "evaluate_and_jacobian", None)
    if combined is not None:
        return combined(u)
    return square.evaluate(u), square.jacobian(u)


def _homotopy_values_and_jacobian(H: Homotopy, u: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
    combined = getattr(H, "evaluate_and_jacobian", None)
    if combined is not None:
        return combined(u, t)
    return H.evaluate(u, t), H.jacobian(u, t)


class StraightLineHomotopy:
    """H(u, t) = (1 - t) F(u) + gamma t G(u)."""

    def __init__(self, target: SquareMap, start: SquareMap, gamma: complex = 1.0):
        self.target = target
        self.start = start
        self.gamma = complex(gamma)
        self.size = start.size if hasattr(start, "size") else target.num_vars

    def evaluate(self, u: np.ndarray, t: float) -> np.ndarray:
        return (1 - t) * self.target.evaluate(u) + self.gamma * t * self.start.evaluate(u)

    def jacobian(self, u: np.ndarray, t: float) -> np.ndarray:
        return (1 - t) * self.target.jacobian(u) + self.gamma * t * self.start.jacobian(u)

    def evaluate_and_jacobian(self, u: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
        f, df = _values_and_jacobian(self.target, u)
        g, dg = self.start.evaluate(u), self.start.jacobian(u)
        return (1 - t) * f + self.gamma * t * g, (1 - t) * df + self.gamma * t * dg

    def dt(self, u: np.ndarray, t: float) -> np.ndarray:
        return self.gamma * self.start.evaluate(u) - self.target.evaluate(u)


def _tangent(H: Homotopy, u: np.ndarray, t: float, jac: Optional[np.ndarray] = None) -> np.ndarray:
    # Davidenko: H_u du/dt = -H_t
    return -np.linalg.solve(H.jacobian(u, t) if jac is None else jac, H.dt(u, t))


def _rk4(H: Homotopy, u: np.ndarray, t: float, dt: float, jac: Optional[np.ndarray] = None) -> np.ndarray:
    k1 = _tangent(H, u, t, jac)
    k2 = _tangent(H, u + dt / 2 * k1, t + dt / 2)
    k3 = _tangent(H, u + dt / 2 * k2, t + dt / 2)
    k4 = _tangent(H, u + dt * k3, t + dt)
    return u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _correct(H: Homotopy, u: np.ndarray, t: float,
             cfg: TrackerConfig) -> Tuple[bool, np.ndarray, Optional[np.ndarray]]:
    """Newton at fixed t; also returns the last Jacobian, which the next predictor reuses."""
    jac = None
    for _ in range(cfg.max_newton_iterations):
        values, jac = _homotopy_values_and_jacobian(H, u, t)
        step = np.linalg.solve(jac, values)
        u = u - step
        if _norm(step) <= cfg.tracking_tol * (1 + _norm(u)):
            return True, u, jac
    return False, u, None


def newton_refine(square: SquareMap, u0: np.ndarray, tol: float, max_iter: int = 10) -> NewtonResult:
    """Newton iteration on ``square`` until the residual or the update falls below ``tol``.

    Real input stays real. A Jacobian with condition number above 1e14 ends the
    iteration with singular status.
    """
    u = np.array(u0, dtype=complex if np.iscomplexobj(u0) else float)
    residual, cond = float("inf"), float("nan")
    stalled = False
    for it in range(max_iter + 1):
        values, jac = _values_and_jacobian(square, u)
        residual = _norm(values)
        cond = _condition(jac)
        if cond > SINGULAR_CONDITION:
            return NewtonResult(u, residual, PathStatus.SINGULAR, it, cond)
        if residual <= tol or it == max_iter or stalled:
            break
        step = np.linalg.solve(jac, values)
        u = u - step
        stalled = _norm(step) <= 4 * np.finfo(float).eps * (1 + _norm(u))
    status = PathStatus.CONVERGED if residual <= tol else PathStatus.TRACKING
    return NewtonResult(u, residual, status, it, cond)


class _AtTime:
    """Freezes t so a homotopy can be fed to ``newton_refine``."""

    def __init__(self, H: Homotopy, t: float):
        self.H = H
        self.t = t

    def evaluate(self, u):
        return self.H.evaluate(u, self.t)

    def jacobian(self, u):
        return self.H.jacobian(u, self.t)

    def evaluate_and_jacobian(self, u):
        return _homotopy_values_and_jacobian(self.H, u, self.t)


def track_path(H: Homotopy, start: np.ndarray, cfg: Optional[TrackerConfig] = None, start_index: int = -1) -> PathPoint:
    """Track one path from t = 1 to t = 0 with an RK4 predictor and Newton corrector.

    The first step is ``max_step``; it halves on every corrector failure and
    doubles after a streak of successes.
    """
    cfg = cfg or TrackerConfig()
    u = np.asarray(start, dtype=complex)
    if _norm(H.evaluate(u, 1.0)) > cfg.tracking_tol * (1 + _norm(u)):
        polished = newton_refine(_AtTime(H, 1.0), u, cfg.tracking_tol, cfg.max_newton_iterations)
        if polished.status != PathStatus.CONVERGED:
            raise TrackingError(f"start point is not a solution at t=1 (residual {polished.residual:.3g})")
        u = polished.u

    point = PathPoint(u=u, t=1.0, step_size=cfg.max_step, start_index=start_index)
    streak = 0
    jac = None
    while point.t > 0:
        h = min(point.step_size, point.t)
        if h < cfg.min_step:
            point.status = PathStatus.SINGULAR
            logger.debug(f"path {start_index}: step underflow at t={point.t:.3g}")
            return point
        t_next = point.t - h if h < point.t else 0.0
        try:
            predicted = _rk4(H, point.u, point.t, t_next - point.t, jac)
            ok, corrected, corrected_jac = _correct(H, predicted, t_next, cfg)
        except np.linalg.LinAlgError:
            ok = False
        if ok and np.all(np.isfinite(corrected)):
            point.u, point.t = corrected, t_next
            jac = corrected_jac
            point.steps += 1
            streak += 1
            if streak >= STEP_EXPANSION_STREAK:
                point.step_size = min(2 * point.step_size, cfg.max_step)
                streak = 0
            if _norm(point.u) > cfg.divergence_bound:
                point.status = PathStatus.DIVERGED
                logger.debug(f"path {start_index}: diverged at t={point.t:.3g}")
                return point
            if 0 < point.t < cfg.endgame_start:
                point.condition = _condition(jac)
                if point.condition > SINGULAR_CONDITION:
                    point.status = PathStatus.SINGULAR
                    return point
        else:
            point.step_size = h / 2
            point.rejections += 1
            streak = 0

    final = newton_refine(_AtTime(H, 0.0), point.u, cfg.endpoint_tol)
    point.u, point.residual, point.condition = final.u, final.residual, final.condition
    if _norm(point.u) > cfg.divergence_bound:
        point.status = PathStatus.DIVERGED
    elif final.status == PathStatus.SINGULAR:
        point.status = PathStatus.SINGULAR
    elif final.status == PathStatus.CONVERGED:
        point.status = PathStatus.CONVERGED
    else:
        point.status = PathStatus.SINGULAR
    logger.debug(f"path {start_index}: {point.status.value} after {point.steps} steps, residual {point.residual:.2e}")
    return point


def _track_indexed(H: Homotopy, cfg: TrackerConfig, item: Tuple[int, np.ndarray]) -> PathPoint:
    index, start = item
    return track_path(H, start, cfg, start_index=index)


def track_paths(H: Homotopy,
                starts: Sequence[np.ndarray],
                cfg: Optional[TrackerConfig] = None,
                workers: int = 1) -> List[PathPoint]:
    """Track every start; results are in start order whatever the worker count."""
    cfg = cfg or TrackerConfig()
    items = list(enumerate(starts))
    worker = partial(_track_indexed, H, cfg)
    if workers <= 1 or len(items) < 2:
        return [worker(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, items, chunksize=max(1, len(items) // (4 * workers))))


def dedup_endpoints(points: Iterable[PathPoint], tol: float = DEDUP_TOL) -> List[PathPoint]:
    kept: List[PathPoint] = []
    for p in points:
        if all(_norm(p.u - q.u) > tol * (1 + _norm(q.u)) for q in kept):
            kept.append(p)
    return kept


def solve_total_degree(square: PolynomialSystem,
                       seed: Optional[int] = None,
                       cfg: Optional[TrackerConfig] = None,
                       workers: int = 1) -> List[PathPoint]:
    """Finite nonsingular solutions of a square system by total-degree homotopy."""
    start, starts = total_degree_start(square, seed)
    H = StraightLineHomotopy(square, start)
    paths = track_paths(H, starts, cfg, workers)
    converged = [p for p in paths if p.converged]
    solutions = dedup_endpoints(converged)
    logger.debug(f"total-degree solve: {len(paths)} paths, {len(converged)} converged, {len(solutions)} distinct")
    return solutions
