#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Interface of the critical-point solvers behind MinDistance
"""
from __future__ import annotations

import abc
from typing import List, Optional

import numpy as np

from varsample.homotopy import PathPoint
from varsample.model import TrackerConfig
from varsample.polysys import PolynomialSystem


class BaseBackend(abc.ABC):
    name = "base"

    def __init__(self, system: PolynomialSystem, tracker: Optional[TrackerConfig] = None, seed: int = 0, workers: int = 1):
        self.system = system
        self.tracker = tracker or TrackerConfig()
        self.seed = seed
        self.workers = workers

    def prepare(self):
        """ one-time setup before the first test point """
        pass

    @abc.abstractmethod
    def critical_endpoints(self, y: np.ndarray, rng: np.random.Generator) -> List[PathPoint]:
        """Solve G_y and return its endpoints in (x, lambda) coordinates
        :param y: real test point
        :param rng: source of this attempt's random data (beta, patch, gamma)
        :raises GenericityFailure: the random data of this attempt were not generic
        """
        raise NotImplementedError()

    def close(self):
        pass

    def __enter__(self):
        self.prepare()
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.close()
