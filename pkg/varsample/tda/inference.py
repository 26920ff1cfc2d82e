#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Homology inference from the persistence diagram of a (delta, epsilon)-sample

Points born no later than a and dying after b, with
(a, b) = (2 eps sqrt((n + 1) / (2n)), 4 eps + 2 delta), are lower bounds on
the Betti numbers of the sampled space, provided its homological feature size
is at least 2 (eps + delta). That hypothesis is not checked here; every
verdict carries it as an explicit assumption.
"""

from __future__ import annotations

import logging
import math

from varsample.exceptions import InputError
from varsample.model import Corner, InferenceVerdict
from varsample.tda.persistence import PersistenceDiagram

logger = logging.getLogger(__name__)


def inference_corner(n: int, epsilon: float, delta: float) -> Corner:
    if not isinstance(n, int) or n < 1:
        raise InputError(f"ambient dimension must be a positive integer, got {n!r}")
    if not 0 <= delta <= epsilon:
        raise InputError(f"need 0 <= delta <= epsilon, got delta={delta}, epsilon={epsilon}")
    return Corner(2 * epsilon * math.sqrt((n + 1) / (2 * n)), 4 * epsilon + 2 * delta)


def infer_betti(diag: PersistenceDiagram, n: int, epsilon: float, delta: float) -> InferenceVerdict:
    a, b = inference_corner(n, epsilon, delta)
    warnings = []
    censored = diag.threshold is not None and diag.threshold < b
    if censored:
        message = (f"diagram threshold {diag.threshold:g} is below the corner death value {b:g}; "
                   f"classes alive at the threshold are not counted")
        logger.warning(message)
        warnings.append(message)

    counts = {dim: 0 for dim in range(diag.max_dim + 1)}
    for iv in diag.intervals:
        if iv.birth > a:
            continue
        if math.isinf(iv.death) and censored:
            continue
        if iv.death > b:
            counts[iv.dim] = counts.get(iv.dim, 0) + 1
    return InferenceVerdict(corner=(a, b), counts=counts, ambient_dim=n, epsilon=epsilon, delta=delta,
                            threshold=diag.threshold, censored=censored, warnings=warnings)
