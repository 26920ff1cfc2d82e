#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Fritz John critical-point systems for the squared distance to a variety

For f = (f_1..f_k), k = N - d, a test point y, a complex vector beta and an
affine patch c on the multipliers, the unknowns are u = (x, lambda) with
x in C^N and lambda in C^(k+1):

    f(x) - t * beta                                   (k equations)
    lambda_0 (x - y) + sum_i lambda_i grad f_i(x)     (N equations)
    c . lambda - 1                                    (1 equation)

Everything is evaluated from the symbolic derivatives compiled in
``PolynomialSystem``; nothing is differentiated numerically.
"""

from __future__ import annotations

from functools import cached_property
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from varsample.exceptions import DimensionMismatchError
from varsample.polysys import Polynomial, PolynomialSystem, as_point


def random_unit_complex(rng: np.random.Generator, size: int) -> np.ndarray:
    v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return v / np.linalg.norm(v)


class FritzJohnParams(NamedTuple):
    y: np.ndarray
    beta: np.ndarray
    patch: np.ndarray


class FritzJohnFamily:
    """The family F(u; y, beta, c, t), shared by all test points of one system."""

    def __init__(self, base: PolynomialSystem):
        if base.num_polys != base.codim:
            raise DimensionMismatchError(
                f"Fritz John system needs N - d = {base.codim} polynomials, got {base.num_polys}; randomize first")
        self.base = base
        self.num_vars = base.num_vars
        self.codim = base.codim
        self.size = 2 * base.num_vars - base.dim + 1
        self._diagonal = (np.arange(self.codim, self.codim + self.num_vars), np.arange(self.num_vars))

    def split(self, u: np.ndarray):
        return u[: self.num_vars], u[self.num_vars:]

    @cached_property
    def degrees(self) -> List[int]:
        lagrange = []
        for j in range(self.num_vars):
            d = 2
            for p in self.base.polys:
                dp = p.differentiate(j)
                if not dp.is_zero():
                    d = max(d, dp.degree + 1)
            lagrange.append(d)
        return self.base.degrees + lagrange + [1]

    def _residual(self, x, lam, values, jac, params: FritzJohnParams, t: float) -> np.ndarray:
        k, n = self.codim, self.num_vars
        out = np.empty(self.size, dtype=complex)
        out[:k] = values - t * params.beta
        out[k:k + n] = lam[0] * (x - params.y) + jac.T @ lam[1:]
        out[k + n] = params.patch @ lam - 1
        return out

    def _jacobian(self, x, lam, jac, hess, params: FritzJohnParams) -> np.ndarray:
        k, n = self.codim, self.num_vars
        out = np.zeros((self.size, self.size), dtype=complex)
        out[:k, :n] = jac
        out[k:k + n, :n] = np.tensordot(lam[1:], hess, axes=1)
        out[self._diagonal] += lam[0]
        out[k:k + n, n] = x - params.y
        out[k:k + n, n + 1:] = jac.T
        out[k + n, n:] = params.patch
        return out

    def evaluate(self, u: np.ndarray, params: FritzJohnParams, t: float) -> np.ndarray:
        x, lam = self.split(u)
        return self._residual(x, lam, self.base.evaluate(x), self.base.jacobian(x), params, t)

    def jacobian(self, u: np.ndarray, params: FritzJohnParams, t: float) -> np.ndarray:
        x, lam = self.split(u)
        _, jac, hess = self.base.derivatives(x)
        return self._jacobian(x, lam, jac, hess, params)

    def evaluate_and_jacobian(self, u: np.ndarray, params: FritzJohnParams, t: float):
        x, lam = self.split(u)
        values, jac, hess = self.base.derivatives(x)
        return self._residual(x, lam, values, jac, params, t), self._jacobian(x, lam, jac, hess, params)

    def parameter_derivative(self, u: np.ndarray, direction: FritzJohnParams, t: float) -> np.ndarray:
        """Derivative of F along a change ``direction`` of (y, beta, c) at fixed t."""
        x, lam = self.split(u)
        return np.concatenate([-t * direction.beta, -lam[0] * direction.y, [np.dot(direction.patch, lam)]])

    def t_derivative(self, params: FritzJohnParams) -> np.ndarray:
        return np.concatenate([-params.beta, np.zeros(self.num_vars + 1, dtype=complex)])


class FritzJohnSystem:
    """H_{y,beta}(x, lambda, t) for one test point; usable directly as a homotopy in t."""

    def __init__(self, base: PolynomialSystem, y: Sequence[float], patch: np.ndarray, beta: np.ndarray,
                 family: Optional[FritzJohnFamily] = None):
        self.family = family or FritzJohnFamily(base)
        self.base = base
        self.y = as_point(y, base.num_vars)
        self.patch = np.asarray(patch, dtype=complex)
        self.beta = np.asarray(beta, dtype=complex)
        if self.patch.shape != (base.codim + 1,) or self.beta.shape != (base.codim,):
            raise DimensionMismatchError("patch needs N - d + 1 entries and beta N - d entries")
        self.size = self.family.size
        self.params = FritzJohnParams(self.y, self.beta, self.patch)
        self._dt = self.family.t_derivative(self.params)

    @property
    def degrees(self) -> List[int]:
        return self.family.degrees

    def evaluate(self, u: np.ndarray, t: float) -> np.ndarray:
        return self.family.evaluate(u, self.params, t)

    def jacobian(self, u: np.ndarray, t: float) -> np.ndarray:
        return self.family.jacobian(u, self.params, t)

    def evaluate_and_jacobian(self, u: np.ndarray, t: float):
        return self.family.evaluate_and_jacobian(u, self.params, t)

    def dt(self, u: np.ndarray, t: float) -> np.ndarray:
        return self._dt

    def var_names(self) -> List[str]:
        return list(self.base.var_names) + [f"lambda{i}" for i in range(self.base.codim + 1)]

    def critical_polynomials(self) -> List[Polynomial]:
        """The t = 0 system without the patch, as real polynomials in (x, lambda).

        The multipliers appear homogeneously, so a solver that treats lambda as
        a projective variable group needs no patch equation.
        """
        if np.iscomplexobj(self.y) and np.any(self.y.imag != 0):
            raise DimensionMismatchError("critical polynomials need a real test point")
        n, k = self.base.num_vars, self.base.codim
        total = n + k + 1

        def lift(p: Polynomial) -> Polynomial:
            return Polynomial([(c, tuple(e) + (0,) * (k + 1)) for c, e in p.terms], total)

        xs = [Polynomial.variable(j, total) for j in range(n)]
        lams = [Polynomial.variable(n + i, total) for i in range(k + 1)]
        polys = [lift(p) for p in self.base.polys]
        for j in range(n):
            row = lams[0] * (xs[j] - float(np.real(self.y[j])))
            for i, p in enumerate(self.base.polys):
                row = row + lams[i + 1] * lift(p.differentiate(j))
            polys.append(row)
        return polys


class ParameterHomotopy:
    """Moves solutions of F(.; p, t_fixed) from ``start`` parameters (s = 1) to ``target`` (s = 0)."""

    def __init__(self, family: FritzJohnFamily, start: FritzJohnParams, target: FritzJohnParams, t: float = 1.0):
        self.family = family
        self.start = start
        self.target = target
        self.t = t
        self.size = family.size
        self._base = FritzJohnParams(*(np.asarray(b, dtype=complex) for b in target))
        self._direction = FritzJohnParams(*(np.asarray(a, dtype=complex) - b for a, b in zip(start, self._base)))

    def params_at(self, s: float) -> FritzJohnParams:
        return FritzJohnParams(*(b + s * d for b, d in zip(self._base, self._direction)))

    def evaluate(self, u: np.ndarray, s: float) -> np.ndarray:
        return self.family.evaluate(u, self.params_at(s), self.t)

    def jacobian(self, u: np.ndarray, s: float) -> np.ndarray:
        return self.family.jacobian(u, self.params_at(s), self.t)

    def evaluate_and_jacobian(self, u: np.ndarray, s: float):
        return self.family.evaluate_and_jacobian(u, self.params_at(s), self.t)

    def dt(self, u: np.ndarray, s: float) -> np.ndarray:
        return self.family.parameter_derivative(u, self._direction, self.t)


class _FixedT:
    def __init__(self, system: FritzJohnSystem, t: float):
        self.system = system
        self.t = t
        self.size = system.size
        self.degrees = system.degrees

    def evaluate(self, u):
        return self.system.evaluate(u, self.t)

    def jacobian(self, u):
        return self.system.jacobian(u, self.t)

    def evaluate_and_jacobian(self, u):
        return self.system.evaluate_and_jacobian(u, self.t)


def at_t(system: FritzJohnSystem, t: float) -> _FixedT:
    return _FixedT(system, t)


def build_fritz_john(sys: PolynomialSystem, y: Sequence[float], seed: Optional[int] = None) -> FritzJohnSystem:
    """Fritz John system G_y with seeded beta on the complex unit sphere and a unit-norm patch."""
    rng = np.random.default_rng(seed)
    beta = random_unit_complex(rng, sys.codim)
    patch = random_unit_complex(rng, sys.codim + 1)
    return FritzJohnSystem(sys, y, patch, beta)
