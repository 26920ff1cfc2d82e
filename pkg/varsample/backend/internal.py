#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""In-repo backend: coefficient-parameter continuation over the Fritz John family

The t = 1 system is solved once, ab initio, at random complex parameters
(y*, beta*, c*). Each test point then costs two short homotopies: the t = 1
solutions are moved from (y*, beta*, c*) to the call's (y, beta, c), and then
tracked along H_{y,beta} from t = 1 to t = 0.
"""
from __future__ import annotations

import logging
from typing import List, Optional

import numpy as np

from varsample.backend.base_backend import BaseBackend
from varsample.exceptions import GenericityFailure, SolverException
from varsample.fritzjohn import (FritzJohnFamily, FritzJohnParams, FritzJohnSystem, ParameterHomotopy, at_t,
                                 random_unit_complex)
from varsample.homotopy import (PathPoint, StraightLineHomotopy, dedup_endpoints, solve_total_degree,
                                total_degree_start, track_paths)
from varsample.model import TrackerConfig
from varsample.polysys import PolynomialSystem

logger = logging.getLogger(__name__)

# total-degree runs used to confirm the generic start count
START_SOLVE_RUNS = 3


class InternalBackend(BaseBackend):
    name = "internal"

    def __init__(self, system: PolynomialSystem, tracker: Optional[TrackerConfig] = None, seed: int = 0,
                 workers: int = 1, ab_initio: bool = False):
        super().__init__(system, tracker, seed, workers)
        self.family = FritzJohnFamily(system)
        self.ab_initio = ab_initio
        self.start_params: Optional[FritzJohnParams] = None
        self.start_solutions: List[np.ndarray] = []

    def prepare(self):
        if self.ab_initio or self.start_params is not None:
            return
        rng = np.random.default_rng([self.seed, 1])
        n, k = self.system.num_vars, self.system.codim
        y_star = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        start = FritzJohnSystem(self.system, y_star, random_unit_complex(rng, k + 1), random_unit_complex(rng, k),
                                self.family)
        square = at_t(start, 1.0)
        solutions: List[PathPoint] = []
        for run in range(START_SOLVE_RUNS):
            found = solve_total_degree(square, seed=int(rng.integers(2**32)), cfg=self.tracker, workers=self.workers)
            before = len(solutions)
            solutions = dedup_endpoints(solutions + found)
            logger.debug(f"start solve run {run}: {len(found)} solutions, {len(solutions)} in union")
            if run > 0 and len(solutions) == before:
                break
        else:
            logger.warning(f"start solution count still growing after {START_SOLVE_RUNS} runs ({len(solutions)})")
        if not solutions:
            raise SolverException("t=1 start system has no finite nonsingular solutions")
        self.start_params = start.params
        self.start_solutions = [p.u for p in solutions]
        bezout = int(np.prod(self.family.degrees))
        logger.info(f"start system solved: {len(solutions)} solutions out of {bezout} paths")

    def _stage_one(self, target: FritzJohnSystem, rng: np.random.Generator) -> List[PathPoint]:
        if self.ab_initio:
            square = at_t(target, 1.0)
            start, starts = total_degree_start(square, seed=int(rng.integers(2**32)))
            paths = track_paths(StraightLineHomotopy(square, start), starts, self.tracker, self.workers)
            good = dedup_endpoints(p for p in paths if p.converged)
            if not good:
                raise GenericityFailure("no finite t=1 solution")
            return good

        self.prepare()
        homotopy = ParameterHomotopy(self.family, self.start_params, target.params, t=1.0)
        paths = track_paths(homotopy, self.start_solutions, self.tracker, self.workers)
        good = [p for p in paths if p.converged]
        if len(good) < len(paths):
            raise GenericityFailure(f"{len(paths) - len(good)} of {len(paths)} parameter paths lost")
        if len(dedup_endpoints(good)) < len(good):
            raise GenericityFailure("parameter paths collided")
        return good

    def critical_endpoints(self, y: np.ndarray, rng: np.random.Generator) -> List[PathPoint]:
        k = self.system.codim
        target = FritzJohnSystem(self.system, y, random_unit_complex(rng, k + 1), random_unit_complex(rng, k),
                                 self.family)
        stage_one = self._stage_one(target, rng)
        endpoints = track_paths(target, [p.u for p in stage_one], self.tracker, self.workers)
        if endpoints and not any(p.converged for p in endpoints):
            raise GenericityFailure(f"all {len(endpoints)} critical paths ended singular or diverged")
        return endpoints
