"""Random trigonometric series with power-law coefficient decay.

A coordinate function is the trigonometric polynomial

    f(theta) = sum_{k=1}^{N} a_k cos(k theta) + b_k sin(k theta)

with independent centered Gaussian coefficients whose standard deviation
follows a decay law sigma(k).  Two laws are supported: ``power_decay``
(sigma(k) = k**-alpha) and ``no_decay`` (sigma(k) = 1).  There is no
constant term.

Sampling is counter-based: coefficients are drawn from a Philox generator
keyed by (seed, stream), so a given (law, seed, stream) triple yields
bit-identical coefficients regardless of process or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import zeta

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class CoefficientLaw:
    """Variance profile and truncation degree for random series coefficients.

    kind : "power_decay" or "no_decay"
    alpha : decay exponent, sigma(k) = k**-alpha (power_decay only)
    degree : truncation order N >= 1
    """

    kind: str
    degree: int
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in ("power_decay", "no_decay"):
            raise ValueError(f"unknown law kind {self.kind!r}")
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        if self.kind == "power_decay":
            if self.alpha is None or not self.alpha > 0:
                raise ValueError("power_decay requires alpha > 0")
        elif self.alpha is not None:
            raise ValueError("no_decay law takes no alpha")

    def variance_at(self, k: int) -> float:
        """Variance of a_k (and b_k); zero beyond the truncation degree."""
        if k < 1 or k > self.degree:
            return 0.0
        if self.kind == "no_decay":
            return 1.0
        return float(k) ** (-2.0 * self.alpha)

    def sigmas(self) -> np.ndarray:
        """Standard deviations for k = 1..degree as an array."""
        k = np.arange(1, self.degree + 1, dtype=float)
        if self.kind == "no_decay":
            return np.ones(self.degree)
        return k ** (-self.alpha)

    def truncation_tail_bound(self) -> float:
        """Bound on the positional truncation error sum_{k>N} 2 sigma(k).

        Uses the Hurwitz zeta function for the exact tail sum.  Infinite
        when the tail does not converge (alpha <= 1 or no_decay).
        """
        if self.kind == "no_decay" or self.alpha <= 1.0:
            return float("inf")
        return float(2.0 * zeta(self.alpha, self.degree + 1))


def _coefficient_generator(seed: int, stream: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                    np.uint64(stream & 0xFFFFFFFFFFFFFFFF)])
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class TrigSeries:
    """One periodic coordinate function as cosine/sine coefficient arrays.

    a[i] and b[i] hold the coefficients of cos((i+1) theta) and
    sin((i+1) theta); the function has no constant term.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != b.shape or a.ndim != 1 or len(a) < 1:
            raise ValueError("a and b must be equal-length 1-d arrays")
        a = a.copy()
        b = b.copy()
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def degree(self) -> int:
        return len(self.a)

    def _k(self) -> np.ndarray:
        return np.arange(1, self.degree + 1, dtype=float)

    def evaluate(self, theta):
        """Partial sum at theta (scalar or array), theta reduced mod 2*pi."""
        th = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        kt = np.multiply.outer(th, self._k())
        out = np.cos(kt) @ self.a + np.sin(kt) @ self.b
        return float(out) if np.isscalar(theta) else out

    def evaluate_derivative(self, theta, order: int = 1):
        """Termwise derivative of the partial sum, order 1 or 2."""
        if order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        th = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        k = self._k()
        kt = np.multiply.outer(th, k)
        if order == 1:
            out = np.cos(kt) @ (k * self.b) - np.sin(kt) @ (k * self.a)
        else:
            out = -np.cos(kt) @ (k * k * self.a) - np.sin(kt) @ (k * k * self.b)
        return float(out) if np.isscalar(theta) else out

    def to_json_dict(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "TrigSeries":
        return cls(np.asarray(d["a"], dtype=float), np.asarray(d["b"], dtype=float))


def sample_series(law: CoefficientLaw, seed: int, stream: int) -> TrigSeries:
    """Draw one random series under the law, determined by (seed, stream).

    Coefficients are a_k = sigma(k) z_{2k-2}, b_k = sigma(k) z_{2k-1} for a
    fixed-order standard normal vector z from the (seed, stream) Philox
    counter stream, so distinct streams give independent-quality draws and
    the result never depends on how work is distributed.
    """
    if stream < 0:
        raise ValueError("stream must be non-negative")
    g = _coefficient_generator(seed, stream)
    z = g.standard_normal(2 * law.degree)
    sig = law.sigmas()
    return TrigSeries(z[0::2] * sig, z[1::2] * sig)


@dataclass(frozen=True)
class PlaneCurve:
    """Closed plane curve (x(theta), y(theta)) built from two series."""

    x: TrigSeries
    y: TrigSeries

    def __post_init__(self):
        if self.x.degree != self.y.degree:
            raise ValueError("coordinate series must share one degree")

    @property
    def degree(self) -> int:
        return self.x.degree

    def point(self, theta):
        return np.stack([self.x.evaluate(theta), self.y.evaluate(theta)], axis=-1)

    def tangent(self, theta):
        return np.stack([self.x.evaluate_derivative(theta),
                         self.y.evaluate_derivative(theta)], axis=-1)


@dataclass(frozen=True)
class SpaceCurve:
    """Closed space curve (x, y, z)(theta) built from three series."""

    x: TrigSeries
    y: TrigSeries
    z: TrigSeries

    def __post_init__(self):
        if not (self.x.degree == self.y.degree == self.z.degree):
            raise ValueError("coordinate series must share one degree")

    @property
    def degree(self) -> int:
        return self.x.degree

    def point(self, theta):
        return np.stack([self.x.evaluate(theta), self.y.evaluate(theta),
                         self.z.evaluate(theta)], axis=-1)


def sample_plane_curve(law: CoefficientLaw, seed: int, stream: int) -> PlaneCurve:
    """Plane curve from consecutive streams (2*stream, 2*stream + 1)."""
    return PlaneCurve(sample_series(law, seed, 2 * stream),
                      sample_series(law, seed, 2 * stream + 1))


def sample_space_curve(law: CoefficientLaw, seed: int, stream: int) -> SpaceCurve:
    """Space curve from consecutive streams (3*stream .. 3*stream + 2)."""
    return SpaceCurve(sample_series(law, seed, 3 * stream),
                      sample_series(law, seed, 3 * stream + 1),
                      sample_series(law, seed, 3 * stream + 2))


class GridPolyline(NamedTuple):
    """Closed polyline sample of a curve tagged with its parameters."""

    thetas: np.ndarray
    points: np.ndarray


def sample_grid(curve, m: int) -> GridPolyline:
    """Evaluate the curve at theta_i = 2*pi*i/m, i = 0..m-1."""
    if m < 3:
        raise ValueError("need at least 3 grid points")
    thetas = TWO_PI * np.arange(m) / m
    return GridPolyline(thetas, curve.point(thetas))
