#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Backend that shells out to an external Bertini-compatible solver

The critical-point system of G_y is written with x as an affine variable group
and the multipliers as a projective (homogeneous) group, so no patch is needed.
Real endpoints are read back from ``real_finite_solutions``.
"""
from __future__ import annotations

import logging
import shutil
import subprocess
import tempfile
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from retry import retry

from varsample.backend.base_backend import BaseBackend
from varsample.exceptions import ConfigError, ExternalSolverError
from varsample.fritzjohn import FritzJohnSystem
from varsample.homotopy import PathPoint
from varsample.model import PathStatus, TrackerConfig
from varsample.polysys import PolynomialSystem

logger = logging.getLogger(__name__)

StrOrPath = Union[str, Path]

SOLUTIONS_FILE = "real_finite_solutions"


def run_solver(executable: str, workdir: StrOrPath, timeout: int = 600) -> subprocess.CompletedProcess:
    try:
        result = subprocess.run(
            [executable, "input"],
            cwd=str(workdir),
            capture_output=True,
            timeout=timeout,
            text=True,
            errors="ignore",
            input="",
        )
    except subprocess.TimeoutExpired as e:
        raise ExternalSolverError(f"{executable} timeout {e}")
    except OSError as e:
        raise ExternalSolverError(f"failed to start {executable}: {e}")
    if result.stderr.strip():
        logger.warning(f"{executable} stderr: {result.stderr.strip()}")
    if result.returncode != 0:
        raise ExternalSolverError(f"{executable} exited with code {result.returncode}")
    return result


def write_input(system: FritzJohnSystem, tracker: TrackerConfig) -> str:
    names = system.var_names()
    n = system.base.num_vars
    polys = system.critical_polynomials()
    functions = [f"g{i + 1}" for i in range(len(polys))]
    lines = [
        "CONFIG",
        "TrackType: 0;",
        f"FinalTol: {tracker.endpoint_tol:g};",
        f"TrackTolBeforeEG: {tracker.tracking_tol:g};",
        "END;",
        "INPUT",
        f"variable_group {','.join(names[:n])};",
        f"hom_variable_group {','.join(names[n:])};",
        f"function {','.join(functions)};",
    ]
    for name, poly in zip(functions, polys):
        lines.append(f"{name} = {poly.format(names)};")
    lines.append("END;")
    return "\n".join(lines) + "\n"


def parse_solutions(text: str, size: int) -> List[np.ndarray]:
    """Parse the solutions file: a count, then ``size`` lines of ``re im`` per solution."""
    tokens = text.split()
    if not tokens:
        raise ExternalSolverError("empty solutions file")
    try:
        count = int(tokens[0])
        values = [float(v) for v in tokens[1:]]
    except ValueError as e:
        raise ExternalSolverError(f"unparsable solutions file: {e}")
    if len(values) != 2 * size * count:
        raise ExternalSolverError(f"expected {count} solutions of {size} coordinates, got {len(values)} numbers")
    pairs = np.asarray(values).reshape(count, size, 2)
    return [row[:, 0] + 1j * row[:, 1] for row in pairs]


class ExternalBackend(BaseBackend):
    name = "external"

    def __init__(self, system: PolynomialSystem, executable: str, tracker: Optional[TrackerConfig] = None,
                 seed: int = 0, workers: int = 1, timeout: int = 600):
        super().__init__(system, tracker, seed, workers)
        resolved = shutil.which(executable)
        if resolved is None:
            raise ConfigError(f"external solver not found: {executable}")
        self.executable = resolved
        self.timeout = timeout

    @retry(exceptions=ExternalSolverError, tries=2, delay=1, logger=logger)
    def _solve(self, system: FritzJohnSystem) -> List[np.ndarray]:
        with tempfile.TemporaryDirectory(prefix="varsample-") as tmpdir:
            workdir = Path(tmpdir)
            workdir.joinpath("input").write_text(write_input(system, self.tracker), encoding="utf-8")
            run_solver(self.executable, workdir, self.timeout)
            solutions = workdir / SOLUTIONS_FILE
            if not solutions.exists():
                raise ExternalSolverError(f"{self.executable} wrote no {SOLUTIONS_FILE}")
            return parse_solutions(solutions.read_text(encoding="utf-8"), system.size)

    def critical_endpoints(self, y: np.ndarray, rng: np.random.Generator) -> List[PathPoint]:
        k = self.system.codim
        # beta and the patch only matter to the in-repo tracker
        system = FritzJohnSystem(self.system, y, np.ones(k + 1), np.zeros(k))
        found = self._solve(system)
        logger.debug(f"external solver returned {len(found)} real finite solutions")
        return [PathPoint(u=u, t=0.0, step_size=0.0, status=PathStatus.CONVERGED, residual=0.0, start_index=i)
                for i, u in enumerate(found)]
