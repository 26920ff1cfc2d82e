#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Configuration and result models
"""
from __future__ import annotations

import enum
import math
import typing
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from varsample import constants
from varsample.constants import HFS_ASSUMPTION


class PathStatus(str, enum.Enum):
    TRACKING = "tracking"
    CONVERGED = "converged"
    DIVERGED = "diverged"
    SINGULAR = "singular-endpoint"


class TrackerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    tracking_tol: float = Field(constants.TRACKING_TOL, gt=0)
    endpoint_tol: float = Field(constants.ENDPOINT_TOL, gt=0)
    min_step: float = Field(constants.MIN_STEP, gt=0)
    max_step: float = Field(constants.MAX_STEP, gt=0)
    max_newton_iterations: int = Field(constants.MAX_NEWTON_ITERATIONS, ge=1)
    divergence_bound: float = Field(constants.DIVERGENCE_BOUND, gt=0)
    endgame_start: float = Field(constants.ENDGAME_START, ge=0, le=1)

    @model_validator(mode="after")
    def _check_steps(self) -> TrackerConfig:
        if not self.min_step < self.max_step <= 1:
            raise ValueError(f"need 0 < min_step < max_step <= 1, got {self.min_step}, {self.max_step}")
        return self


class HeuristicsConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    dynamic_split: bool = False
    dynamic_sample: bool = False
    rho: float = Field(0.0, ge=0)
    priority_search: bool = False

    @property
    def label(self) -> str:
        flags = [name for name in ("dynamic_split", "dynamic_sample", "priority_search") if getattr(self, name)]
        return "+".join(flags) or "none"


class SamplerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(gt=0)
    delta: float = Field(ge=0)
    lo: List[float]
    hi: List[float]
    heuristics: HeuristicsConfig = HeuristicsConfig()
    seed: int = 0
    workers: int = Field(1, ge=1)
    tracker: TrackerConfig = TrackerConfig()
    checkpoint_path: Optional[str] = None
    checkpoint_every: int = Field(constants.CHECKPOINT_EVERY, ge=1)

    @model_validator(mode="after")
    def _check_invariants(self) -> SamplerConfig:
        if self.delta > self.epsilon:
            raise ValueError(f"delta must satisfy 0 <= delta <= epsilon, got delta={self.delta}, epsilon={self.epsilon}")
        if len(self.lo) != len(self.hi) or not self.lo:
            raise ValueError("region bounds must be non-empty and of equal length")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError(f"region has lo > hi: {self.lo} / {self.hi}")
        if not all(math.isfinite(v) for v in self.lo + self.hi):
            raise ValueError("region must be compact")
        if self.heuristics.dynamic_sample and not self.heuristics.rho < self.epsilon:
            raise ValueError(f"dynamic sampling threshold rho={self.heuristics.rho} must be below epsilon={self.epsilon}")
        return self

    @property
    def num_vars(self) -> int:
        return len(self.lo)

    @property
    def leaf_side(self) -> float:
        """Max side below which a node always triggers MinDistance."""
        return (self.epsilon - self.delta) / math.sqrt(self.num_vars)

    @property
    def effective_epsilon(self) -> float:
        if self.heuristics.dynamic_sample:
            return self.epsilon + self.heuristics.rho
        return self.epsilon


class Certificate(BaseModel):
    delta: float
    epsilon: float
    base_epsilon: float
    min_distance_calls: int = 0
    max_depth: int = 0
    exclusion_balls: int = 0
    sample_balls: int = 0

    def describe(self) -> str:
        return f"({self.delta:.17g},{self.epsilon:.17g})"


class PointProvenance(BaseModel):
    test_point: List[float]
    residual: float
    certified_delta: float


class SampleCloud(BaseModel):
    var_names: List[str]
    points: List[List[float]] = []
    provenance: List[PointProvenance] = []
    certificate: Certificate
    config: Optional[SamplerConfig] = None
    seed: Optional[int] = None

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float).reshape(len(self.points), self.num_vars)

    def __len__(self) -> int:
        return len(self.points)


class MinDistanceResult(BaseModel):
    witnesses: List[List[float]] = []
    min_distance: float = math.inf
    certified_accuracy: float = 0.0
    residuals: List[float] = []
    diagnostics: Dict[str, typing.Any] = {}

    @property
    def is_empty(self) -> bool:
        return not self.witnesses

    @property
    def witness_array(self) -> np.ndarray:
        if not self.witnesses:
            return np.empty((0, 0))
        return np.asarray(self.witnesses, dtype=float)


class VerificationReport(BaseModel):
    passed: bool
    coverage_gap: float
    epsilon: float
    delta: float
    max_residual_distance: float = 0.0
    oracle_points: int = 0
    cloud_points: int = 0
    witness: Optional[List[float]] = None
    reason: str = ""


class PersistenceConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    t_max: float = Field(gt=0)
    p_max: int = Field(1, ge=0)
    simplex_cap: int = Field(constants.DEFAULT_SIMPLEX_CAP, ge=1)
    clearing: bool = True


class Corner(typing.NamedTuple):
    a: float
    b: float


class InferenceVerdict(BaseModel):
    corner: Tuple[float, float]
    counts: Dict[int, int]
    ambient_dim: int
    epsilon: float
    delta: float
    threshold: Optional[float] = None
    censored: bool = False
    warnings: List[str] = []
    assumption: str = HFS_ASSUMPTION

    def betti_lower_bound(self, dim: int) -> int:
        return self.counts.get(dim, 0)


class PipelineConfig(BaseModel):
    """Everything a CLI run can be configured with, flag for flag."""

    system: Optional[str] = None
    example: Optional[str] = None
    box: Optional[List[float]] = None
    epsilon: Optional[float] = Field(None, gt=0)
    delta: float = Field(0.0, ge=0)
    dynamic_split: bool = False
    dynamic_sample: Optional[float] = Field(None, ge=0)
    priority_search: bool = False
    tmax: Optional[float] = Field(None, gt=0)
    pmax: int = Field(1, ge=0)
    seed: int = 0
    workers: int = Field(1, ge=1)
    backend: str = "internal"
    out: str = "."
    # tracker overrides; None keeps the TrackerConfig default
    tracking_tol: Optional[float] = Field(None, gt=0)
    endpoint_tol: Optional[float] = Field(None, gt=0)
    min_step: Optional[float] = Field(None, gt=0)
    max_step: Optional[float] = Field(None, gt=0)
    max_newton: Optional[int] = Field(None, ge=1)
    divergence_bound: Optional[float] = Field(None, gt=0)
    endgame_start: Optional[float] = Field(None, ge=0, le=1)

    @model_validator(mode="after")
    def _check_invariants(self) -> PipelineConfig:
        if self.epsilon is not None and self.delta > self.epsilon:
            raise ValueError(f"delta must satisfy 0 <= delta <= epsilon, got delta={self.delta}, epsilon={self.epsilon}")
        if self.box is not None and len(self.box) % 2:
            raise ValueError("box needs lo,hi pairs")
        if self.epsilon is not None and self.dynamic_sample is not None and not self.dynamic_sample < self.epsilon:
            raise ValueError("dynamic sampling threshold must be below epsilon")
        return self

    def bounds(self, num_vars: int) -> Tuple[List[float], List[float]]:
        if self.box is None:
            raise ValueError("no box given")
        box = list(self.box)
        if len(box) == 2 and num_vars > 1:
            box = box * num_vars
        if len(box) != 2 * num_vars:
            raise ValueError(f"box has {len(box) // 2} intervals, system has {num_vars} variables")
        return box[0::2], box[1::2]

    def sampler_config(self, num_vars: int, checkpoint_path: Optional[str] = None) -> SamplerConfig:
        lo, hi = self.bounds(num_vars)
        heuristics = HeuristicsConfig(dynamic_split=self.dynamic_split,
                                      dynamic_sample=self.dynamic_sample is not None,
                                      rho=self.dynamic_sample or 0.0,
                                      priority_search=self.priority_search)
        return SamplerConfig(epsilon=self.epsilon, delta=self.delta, lo=lo, hi=hi, heuristics=heuristics,
                             seed=self.seed, workers=self.workers, tracker=self.tracker_config(),
                             checkpoint_path=checkpoint_path)

    def tracker_config(self) -> TrackerConfig:
        overrides = {"tracking_tol": self.tracking_tol, "endpoint_tol": self.endpoint_tol,
                     "min_step": self.min_step, "max_step": self.max_step,
                     "max_newton_iterations": self.max_newton, "divergence_bound": self.divergence_bound,
                     "endgame_start": self.endgame_start}
        return TrackerConfig(**{k: v for k, v in overrides.items() if v is not None})
