#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Backend selection: ``internal`` or the path/name of an external solver executable
"""
from __future__ import annotations

from typing import Optional

from varsample.backend.base_backend import BaseBackend
from varsample.backend.external import ExternalBackend
from varsample.backend.internal import InternalBackend
from varsample.model import TrackerConfig
from varsample.polysys import PolynomialSystem

__all__ = ["BaseBackend", "InternalBackend", "ExternalBackend", "get_backend"]


def get_backend(name: str,
                system: PolynomialSystem,
                tracker: Optional[TrackerConfig] = None,
                seed: int = 0,
                workers: int = 1,
                ab_initio: bool = False) -> BaseBackend:
    if name in ("", "internal"):
        return InternalBackend(system, tracker, seed=seed, workers=workers, ab_initio=ab_initio)
    return ExternalBackend(system, name, tracker, seed=seed, workers=workers)
