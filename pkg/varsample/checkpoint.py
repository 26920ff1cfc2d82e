#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Sampler checkpoints: a versioned JSON dump of the BFS state

See docs/checkpoint-format.md for the field list.
"""
from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import List, Union

from pydantic import BaseModel, ConfigDict, ValidationError

from varsample.constants import CHECKPOINT_VERSION
from varsample.exceptions import CheckpointError
from varsample.model import PointProvenance, SamplerConfig

logger = logging.getLogger(__name__)

StrOrPath = Union[str, Path]


class NodeRecord(BaseModel):
    lo: List[float]
    hi: List[float]
    depth: int
    index: int


class BallRecord(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    center: List[float]
    radius: float
    kind: str


class CheckpointState(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    format_version: int = CHECKPOINT_VERSION
    system: str
    backend: str = "internal"
    config: SamplerConfig
    queue: List[NodeRecord] = []
    next_index: int = 1
    balls: List[BallRecord] = []
    points: List[List[float]] = []
    provenance: List[PointProvenance] = []
    calls: int = 0
    max_depth: int = 0


def save_checkpoint(state: CheckpointState, path: StrOrPath) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(state.model_dump_json(), encoding="utf-8")
    os.replace(tmp, path)
    logger.info(f"checkpoint written to {path} ({state.calls} MinDistance calls, {len(state.queue)} queued boxes)")
    return path


def load_checkpoint(path: StrOrPath) -> CheckpointState:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}")
    try:
        state = CheckpointState.model_validate_json(text)
    except ValidationError as e:
        raise CheckpointError(f"invalid checkpoint {path}: {e}")
    if state.format_version != CHECKPOINT_VERSION:
        raise CheckpointError(f"checkpoint format {state.format_version} is not supported (expected {CHECKPOINT_VERSION})")
    return state
