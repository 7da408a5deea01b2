"""Problem data: function class, gradient-descent plant, step-size intervals.

The plant is stored with scalar blocks (state dimension 1).  Every block of
the gradient-descent system is a multiple of the identity, so the rate
certificates decouple coordinate-wise and are independent of the ambient
dimension; the test suite cross-checks this against explicit simulations in
higher dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class InvalidC(ValueError):
    """Step-size interval constant produces an empty or inverted interval."""


@dataclass(frozen=True)
class FunctionClass:
    """Strongly convex functions with Lipschitz gradients: modulus ``m``,
    gradient Lipschitz constant ``L``, condition number ``kappa = L/m``."""

    m: float
    L: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and math.isfinite(self.L)):
            raise ValueError("m and L must be finite")
        if not (0.0 < self.m <= self.L):
            raise ValueError(f"need 0 < m <= L, got m={self.m}, L={self.L}")

    def kappa(self) -> float:
        return self.L / self.m


@dataclass(frozen=True)
class StepSizeInterval:
    """Closed interval [lo, hi] of admissible step sizes, 0 < lo <= hi.

    The degenerate case lo == hi models a constant step size.
    """

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("interval endpoints must be finite")
        if not (0.0 < self.lo <= self.hi):
            raise ValueError(f"need 0 < lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def degenerate(self) -> bool:
        return self.lo == self.hi


@dataclass(frozen=True)
class Plant:
    """Scalar-block LPV form of the iteration: state matrix ``a``, affine
    input matrix ``b(alpha) = b0 + alpha*b1``, output ``c``, feedthrough
    ``d`` (always zero here)."""

    a: float
    b0: float
    b1: float
    c: float
    d: float

    def __post_init__(self):
        if self.d != 0.0:
            raise ValueError("plants with feedthrough are not supported")

    def b(self, alpha: float) -> float:
        return self.b0 + alpha * self.b1


@dataclass(frozen=True)
class StepGrid:
    """Finite, strictly ascending sample of a step-size interval, always
    containing both endpoints when it has two or more points."""

    points: tuple[float, ...]
    source: StepSizeInterval

    def __post_init__(self):
        if len(self.points) < 1:
            raise ValueError("grid needs at least one point")
        for a in self.points:
            if not (self.source.lo <= a <= self.source.hi):
                raise ValueError(f"grid point {a} outside source interval")
        for a, b in zip(self.points, self.points[1:]):
            if not a < b:
                raise ValueError("grid points must be strictly increasing")

    def __len__(self) -> int:
        return len(self.points)


def interval_from_c(fc: FunctionClass, c: float) -> StepSizeInterval:
    """The interval [1/(c*L), c/L] around the step size 1/L; requires c >= 1.

    Values c in (0, 1) would invert the endpoints and are rejected rather
    than silently swapped.
    """
    if not (math.isfinite(c) and c >= 1.0):
        raise InvalidC(f"need c >= 1, got {c}")
    return StepSizeInterval(1.0 / (c * fc.L), c / fc.L)


def interval_asymmetric(fc: FunctionClass, c1: float, c2: float) -> StepSizeInterval:
    """Asymmetric variant [1/(c1*L), c2/L]; rejected when empty."""
    if not (math.isfinite(c1) and math.isfinite(c2) and c1 > 0.0 and c2 > 0.0):
        raise InvalidC(f"need positive finite c1, c2, got c1={c1}, c2={c2}")
    lo = 1.0 / (c1 * fc.L)
    hi = c2 / fc.L
    if lo > hi:
        raise InvalidC(f"empty interval: 1/(c1*L)={lo} > c2/L={hi}")
    return StepSizeInterval(lo, hi)


def make_grid(iv: StepSizeInterval, n: int) -> StepGrid:
    """Uniform inclusive grid with ``n`` points.

    A degenerate interval collapses to a single point regardless of ``n``;
    a request for a single point on a proper interval returns the midpoint
    so that sweeps over ``n`` are total.
    """
    if n < 1:
        raise ValueError(f"grid size must be >= 1, got {n}")
    if iv.degenerate:
        pts = (iv.lo,)
    elif n == 1:
        pts = (0.5 * (iv.lo + iv.hi),)
    else:
        pts = tuple(float(a) for a in np.linspace(iv.lo, iv.hi, n))
    return StepGrid(points=pts, source=iv)


def gradient_descent_plant() -> Plant:
    """Gradient descent as a parameter-varying linear system: the state is
    the iterate, the input is the gradient, and the step size enters only
    through the input matrix -alpha."""
    return Plant(a=1.0, b0=0.0, b1=-1.0, c=1.0, d=0.0)
