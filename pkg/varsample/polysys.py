#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Real multivariate polynomials and polynomial systems

Terms are kept in a dense exponent-vector form (one row per monomial). A
``PolynomialSystem`` compiles its polynomials, their first derivatives and their
second derivatives into stacked term tables, so that evaluating the whole
system, its Jacobian or its Hessians costs one vectorized monomial pass each.
"""

from __future__ import annotations

import logging
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from varsample.constants import RANDOMIZE_GAP
from varsample.exceptions import DimensionMismatchError, InputError

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]
Term = Tuple[float, Exponent]
# coordinates in C^N; the real part is the point of R^N
EvaluationPoint = Union[np.ndarray, Sequence[complex]]


def default_var_names(num_vars: int) -> List[str]:
    return [f"x{i + 1}" for i in range(num_vars)]


def _format_number(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def as_point(x: EvaluationPoint, num_vars: int) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.shape[0] != num_vars:
        raise DimensionMismatchError(f"point has shape {arr.shape}, expected ({num_vars},)")
    if not np.iscomplexobj(arr):
        arr = arr.astype(float)
    return arr


class Polynomial:
    """Polynomial with real coefficients in ``num_vars`` variables.

    The term list is canonical: exponent vectors are unique, no coefficient is
    exactly zero, and terms are sorted by descending graded-lex order.
    """

    __slots__ = ("num_vars", "_terms")

    def __init__(self, terms: Iterable[Tuple[float, Sequence[int]]], num_vars: int):
        if num_vars < 0:
            raise InputError(f"num_vars must be non-negative, got {num_vars}")
        merged: Dict[Exponent, float] = {}
        for coeff, exps in terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != num_vars:
                raise DimensionMismatchError(f"exponent vector {exps} does not have {num_vars} entries")
            if any(e < 0 for e in exps):
                raise InputError(f"negative exponent in {exps}")
            merged[exps] = merged.get(exps, 0.0) + float(coeff)
        items = [(c, e) for e, c in merged.items() if c != 0.0]
        items.sort(key=lambda item: (sum(item[1]), item[1]), reverse=True)
        self.num_vars = num_vars
        self._terms: Tuple[Term, ...] = tuple(items)

    @classmethod
    def constant(cls, value: float, num_vars: int) -> Polynomial:
        return cls([(value, (0,) * num_vars)], num_vars)

    @classmethod
    def variable(cls, index: int, num_vars: int) -> Polynomial:
        if not 0 <= index < num_vars:
            raise InputError(f"variable index {index} out of range for {num_vars} variables")
        exps = [0] * num_vars
        exps[index] = 1
        return cls([(1.0, exps)], num_vars)

    @property
    def terms(self) -> Tuple[Term, ...]:
        return self._terms

    @property
    def degree(self) -> int:
        return max((sum(e) for _, e in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, exps: Sequence[int]) -> float:
        key = tuple(exps)
        for c, e in self._terms:
            if e == key:
                return c
        return 0.0

    def _coerce(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            if other.num_vars != self.num_vars:
                raise DimensionMismatchError(f"cannot combine polynomials in {self.num_vars} and {other.num_vars} variables")
            return other
        if isinstance(other, (int, float, np.integer, np.floating)):
            return Polynomial.constant(float(other), self.num_vars)
        return NotImplemented

    def __add__(self, other) -> Polynomial:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Polynomial(self._terms + other._terms, self.num_vars)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial([(-c, e) for c, e in self._terms], self.num_vars)

    def __sub__(self, other) -> Polynomial:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> Polynomial:
        return (-self) + other

    def __mul__(self, other) -> Polynomial:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms = []
        for c1, e1 in self._terms:
            for c2, e2 in other._terms:
                terms.append((c1 * c2, tuple(a + b for a, b in zip(e1, e2))))
        return Polynomial(terms, self.num_vars)

    __rmul__ = __mul__

    def __pow__(self, power: int) -> Polynomial:
        if not isinstance(power, (int, np.integer)) or power < 0:
            raise InputError(f"polynomial powers must be non-negative integers, got {power!r}")
        result = Polynomial.constant(1.0, self.num_vars)
        base = self
        while power:
            if power & 1:
                result = result * base
            base = base * base
            power >>= 1
        return result

    def differentiate(self, var: int) -> Polynomial:
        if not 0 <= var < self.num_vars:
            raise InputError(f"variable index {var} out of range")
        terms = []
        for c, e in self._terms:
            if e[var] == 0:
                continue
            lowered = list(e)
            lowered[var] -= 1
            terms.append((c * e[var], lowered))
        return Polynomial(terms, self.num_vars)

    def evaluate(self, x: EvaluationPoint):
        x = as_point(x, self.num_vars)
        total = 0.0
        for c, e in self._terms:
            total = total + c * np.prod(np.power(x, e))
        return total

    def format(self, var_names: Optional[Sequence[str]] = None) -> str:
        names = list(var_names) if var_names is not None else default_var_names(self.num_vars)
        if not self._terms:
            return "0"
        pieces = []
        for index, (c, e) in enumerate(self._terms):
            factors = []
            for name, k in zip(names, e):
                if k == 1:
                    factors.append(name)
                elif k > 1:
                    factors.append(f"{name}^{k}")
            magnitude = abs(c)
            if not factors:
                body = _format_number(magnitude)
            elif magnitude == 1.0:
                body = "*".join(factors)
            else:
                body = "*".join([_format_number(magnitude)] + factors)
            if index == 0:
                pieces.append(f"-{body}" if c < 0 else body)
            else:
                pieces.append(f" - {body}" if c < 0 else f" + {body}")
        return "".join(pieces)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.num_vars == other.num_vars and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.num_vars, self._terms))

    def __repr__(self) -> str:
        return f"Polynomial({self.format()!r}, num_vars={self.num_vars})"


class _TermTable:
    """Stacked monomials of many polynomials, evaluated in a single pass."""

    def __init__(self, polys: Sequence[Polynomial], num_vars: int):
        exponents, columns, rows, coeffs = [], [], [], []
        for row, poly in enumerate(polys):
            for c, e in poly.terms:
                rows.append(row)
                columns.append(len(exponents))
                coeffs.append(c)
                exponents.append(e)
        self.size = len(polys)
        self.exponents = np.array(exponents, dtype=np.int64).reshape(len(exponents), num_vars)
        self.max_degree = int(self.exponents.max()) if self.exponents.size else 0
        self.scatter = np.zeros((self.size, len(exponents)))
        self.scatter[rows, columns] = coeffs
        self._vars = np.arange(num_vars)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        # powers[j, e] = x_j ** e by repeated multiplication
        powers = np.ones((x.shape[0], self.max_degree + 1), dtype=np.result_type(x, float))
        if self.max_degree:
            powers[:, 1:] = x[:, None]
            np.cumprod(powers, axis=1, out=powers)
        monomials = np.prod(powers[self._vars, self.exponents], axis=1)
        return self.scatter @ monomials


class PolynomialSystem:
    """Polynomials ``f_1 .. f_k`` in ``num_vars`` variables cutting out a variety of pure dimension ``dim``.

    The system is immutable; it is safe to share between concurrent trackers.
    """

    def __init__(self,
                 polys: Sequence[Polynomial],
                 num_vars: Optional[int] = None,
                 dim: Optional[int] = None,
                 var_names: Optional[Sequence[str]] = None):
        polys = list(polys)
        if num_vars is None:
            if not polys:
                raise InputError("num_vars is required for an empty system")
            num_vars = polys[0].num_vars
        for p in polys:
            if p.num_vars != num_vars:
                raise DimensionMismatchError(f"polynomial in {p.num_vars} variables inside a system in {num_vars}")
        if dim is None:
            dim = num_vars - len(polys)
        if not 0 <= dim < num_vars:
            raise InputError(f"dimension must satisfy 0 <= d < N, got d={dim}, N={num_vars}")
        if len(polys) < num_vars - dim:
            raise InputError(f"{len(polys)} polynomials cannot cut out a {dim}-dimensional variety in {num_vars} variables")
        names = list(var_names) if var_names is not None else default_var_names(num_vars)
        if len(names) != num_vars:
            raise DimensionMismatchError(f"{len(names)} variable names for {num_vars} variables")
        self.polys: Tuple[Polynomial, ...] = tuple(polys)
        self.num_vars = num_vars
        self.dim = dim
        self.var_names: Tuple[str, ...] = tuple(names)

    @property
    def codim(self) -> int:
        return self.num_vars - self.dim

    @property
    def num_polys(self) -> int:
        return len(self.polys)

    @property
    def degrees(self) -> List[int]:
        return [p.degree for p in self.polys]

    def is_square(self) -> bool:
        return self.num_polys == self.num_vars

    @cached_property
    def _values(self) -> _TermTable:
        return _TermTable(self.polys, self.num_vars)

    @cached_property
    def _gradients(self) -> _TermTable:
        n = self.num_vars
        return _TermTable([p.differentiate(j) for p in self.polys for j in range(n)], n)

    @cached_property
    def _second_derivatives(self) -> _TermTable:
        n = self.num_vars
        derivs = []
        for p in self.polys:
            for j in range(n):
                pj = p.differentiate(j)
                derivs.extend(pj.differentiate(k) for k in range(n))
        return _TermTable(derivs, n)

    def evaluate(self, x: EvaluationPoint) -> np.ndarray:
        return self._values(as_point(x, self.num_vars))

    def jacobian(self, x: EvaluationPoint) -> np.ndarray:
        """Row i is the gradient of f_i at x."""
        values = self._gradients(as_point(x, self.num_vars))
        return values.reshape(self.num_polys, self.num_vars)

    def hessians(self, x: EvaluationPoint) -> np.ndarray:
        values = self._second_derivatives(as_point(x, self.num_vars))
        return values.reshape(self.num_polys, self.num_vars, self.num_vars)

    @cached_property
    def _all_orders(self) -> _TermTable:
        n = self.num_vars
        firsts = [p.differentiate(j) for p in self.polys for j in range(n)]
        seconds = [pj.differentiate(k) for pj in firsts for k in range(n)]
        return _TermTable(list(self.polys) + firsts + seconds, n)

    def derivatives(self, x: EvaluationPoint) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Values, Jacobian and Hessians at x from a single monomial pass."""
        k, n = self.num_polys, self.num_vars
        values = self._all_orders(as_point(x, n))
        return values[:k], values[k:k + k * n].reshape(k, n), values[k + k * n:].reshape(k, n, n)

    def randomize(self, seed: Optional[int] = None) -> PolynomialSystem:
        """Replace the polynomials by ``N - d`` random real combinations of them.

        Coefficients are uniform on [-1, 1] with a small gap around zero. Every
        point where the original system vanishes is a zero of the result.
        """
        target = self.codim
        if self.num_polys < target:
            raise InputError(f"cannot randomize {self.num_polys} polynomials up to {target}")
        if self.num_polys == target:
            return self
        rng = np.random.default_rng(seed)
        magnitude = rng.uniform(RANDOMIZE_GAP, 1.0, size=(target, self.num_polys))
        signs = rng.choice([-1.0, 1.0], size=(target, self.num_polys))
        weights = magnitude * signs
        combined = []
        for row in weights:
            poly = Polynomial([], self.num_vars)
            for w, p in zip(row, self.polys):
                poly = poly + float(w) * p
            combined.append(poly)
        logger.debug(f"randomized {self.num_polys} polynomials down to {target}")
        return PolynomialSystem(combined, self.num_vars, self.dim, self.var_names)

    def format(self) -> str:
        lines = [f"vars: {' '.join(self.var_names)}"]
        if self.dim != self.num_vars - self.num_polys:
            lines.append(f"dim: {self.dim}")
        lines.extend(p.format(self.var_names) for p in self.polys)
        return "\n".join(lines) + "\n"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolynomialSystem):
            return NotImplemented
        return (self.num_vars, self.dim, self.polys) == (other.num_vars, other.dim, other.polys)

    def __hash__(self) -> int:
        return hash((self.num_vars, self.dim, self.polys))

    def __repr__(self) -> str:
        return f"PolynomialSystem(num_polys={self.num_polys}, num_vars={self.num_vars}, dim={self.dim})"

    def __getstate__(self):
        # cached term tables are rebuilt lazily after unpickling
        return {"polys": self.polys, "num_vars": self.num_vars, "dim": self.dim, "var_names": self.var_names}

    def __setstate__(self, state):
        self.__dict__.update(state)


def evaluate(sys: PolynomialSystem, x: EvaluationPoint) -> np.ndarray:
    return sys.evaluate(x)


def jacobian(sys: PolynomialSystem, x: EvaluationPoint) -> np.ndarray:
    return sys.jacobian(x)


def randomize(sys: PolynomialSystem, seed: Optional[int] = None) -> PolynomialSystem:
    return sys.randomize(seed)
