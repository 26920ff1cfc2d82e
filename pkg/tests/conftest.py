import math

import numpy as np
import pytest

from varsample.exceptions import MinDistanceFailure
from varsample.model import MinDistanceResult


class ExactCircleSolver:
    """MinDistance for the circle of radius r, computed in closed form."""

    def __init__(self, radius=1.0, empty=False, fail_after=None):
        self.radius = radius
        self.empty = empty
        self.fail_after = fail_after
        self.calls = 0

    def prepare(self):
        return self

    def close(self):
        pass

    def min_distance(self, y, seed=None):
        if self.fail_after is not None and self.calls >= self.fail_after:
            raise MinDistanceFailure("simulated solver breakdown", {"y": list(y)})
        self.calls += 1
        if self.empty:
            return MinDistanceResult()
        y = np.asarray(y, dtype=float)
        norm = float(np.linalg.norm(y))
        u = y / norm if norm else np.array([1.0, 0.0])
        near, far = self.radius * u, -self.radius * u
        return MinDistanceResult(witnesses=[near.tolist(), far.tolist()],
                                 min_distance=abs(norm - self.radius),
                                 residuals=[0.0, 0.0])


class ExactTorusSolver:
    """Nearest point of the product of two circles of radius sqrt(1/2) in R^4."""

    radius = math.sqrt(0.5)

    def __init__(self):
        self.calls = 0

    def prepare(self):
        return self

    def close(self):
        pass

    def min_distance(self, y, seed=None):
        self.calls += 1
        y = np.asarray(y, dtype=float)
        parts = []
        for pair in (y[:2], y[2:]):
            norm = float(np.linalg.norm(pair))
            parts.append(self.radius * (pair / norm if norm else np.array([1.0, 0.0])))
        w = np.concatenate(parts)
        return MinDistanceResult(witnesses=[w.tolist()], min_distance=float(np.linalg.norm(w - y)), residuals=[0.0])


def circle_oracle(count=10_000, radius=1.0):
    theta = np.linspace(0, 2 * np.pi, count, endpoint=False)
    return radius * np.column_stack([np.cos(theta), np.sin(theta)])


def torus_oracle(count=200):
    theta = np.linspace(0, 2 * np.pi, count, endpoint=False)
    a, b = np.meshgrid(theta, theta)
    r = math.sqrt(0.5)
    return r * np.column_stack([np.cos(a.ravel()), np.sin(a.ravel()), np.cos(b.ravel()), np.sin(b.ravel())])


@pytest.fixture
def circle_solver():
    return ExactCircleSolver()
