#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Certified sampling of real algebraic varieties and persistent homology of the samples
"""

# version is managed in pyproject.toml
__version__ = "0.1.0"
