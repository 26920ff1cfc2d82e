#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Numerical defaults"""

# path tracking
TRACKING_TOL = 1e-8
ENDPOINT_TOL = 1e-11
MIN_STEP = 1e-14
MAX_STEP = 1e-1
MAX_NEWTON_ITERATIONS = 3
DIVERGENCE_BOUND = 1e8
ENDGAME_START = 0.1
# successful steps before the step size is doubled
STEP_EXPANSION_STREAK = 5
SINGULAR_CONDITION = 1e14

# endpoint harvesting
REAL_TOL = 1e-6
DEDUP_TOL = 1e-8

# MinDistance retries after the first attempt; y is perturbed on the last one
MIN_DISTANCE_RETRIES = 3
Y_PERTURBATION = 1e-10

# randomization coefficients are drawn from [-1, 1] minus (-gap, gap)
RANDOMIZE_GAP = 0.1

# dynamic box splitting: candidate cuts per axis
DYNAMIC_SPLIT_CUTS = 8

CHECKPOINT_EVERY = 100
CHECKPOINT_VERSION = 1

# Rips memory guard
DEFAULT_SIMPLEX_CAP = 5_000_000

HFS_ASSUMPTION = (
    "assuming the diagram was produced from a (delta, epsilon)-sample of a space "
    "with homological feature size at least 2(epsilon + delta)"
)

# smallest distance bound the residual certificate can assert in double precision
CERTIFY_FLOOR = 1e-12
# Gauss-Newton projection steps tried before a witness is rejected
PROJECTION_STEPS = 5
