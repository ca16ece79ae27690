"""Finite-dimensional weighted inner-product spaces and metric projections.

Points are plain 1-d ``numpy.float64`` arrays.  A :class:`SpaceDescriptor`
fixes the dimension and a positive weight vector; every inner product, norm
and projection in the package is taken with respect to those weights.  The
two constructors cover the cases used elsewhere: :func:`euclidean` (unit
weights) and :func:`trapezoid` (quadrature weights on a uniform grid of
``[0, 1]``, so the norm discretizes the L2 norm).

The normalized duality pairing on a Hilbert space is realized by the
identity, so no separate duality machinery exists here; ``inner`` is the
pairing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ConfigurationError, InputError

__all__ = [
    "SpaceDescriptor",
    "euclidean",
    "trapezoid",
    "trapezoid_nodes",
    "inner",
    "norm",
    "WholeSpace",
    "Box",
    "Ball",
    "Halfspace",
    "AffineSpan",
    "ConvexSet",
    "project",
]


def _as_point(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (dim,):
        raise InputError(f"expected a point of dimension {dim}, got shape {x.shape}")
    return x


@dataclass(frozen=True, eq=False)
class SpaceDescriptor:
    """A real inner-product space with coordinate weights.

    Attributes
    ----------
    dim : int
        Number of coordinates, at least 1.
    weights : numpy.ndarray
        Strictly positive weight per coordinate;
        ``<x, y> = sum_i weights[i] * x[i] * y[i]``.
    """

    dim: int
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigurationError(f"dimension must be >= 1, got {self.dim}")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (self.dim,):
            raise ConfigurationError(
                f"weights must have shape ({self.dim},), got {w.shape}"
            )
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise ConfigurationError("weights must be finite and strictly positive")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def point(self, coords) -> np.ndarray:
        """Coerce ``coords`` to a point of this space (dimension checked)."""
        return _as_point(coords, self.dim)


def euclidean(dim: int) -> SpaceDescriptor:
    """Space with unit weights (the usual Euclidean inner product)."""
    return SpaceDescriptor(dim=dim, weights=np.ones(dim))


def trapezoid(intervals: int) -> SpaceDescriptor:
    """Space of grid functions on ``[0, 1]`` under trapezoid quadrature.

    Parameters
    ----------
    intervals : int
        Number of grid intervals ``m``; the space has ``m + 1`` nodes at
        ``t_i = i / m``.  Weights are ``h/2, h, ..., h, h/2`` with
        ``h = 1/m``, so they sum to 1 and the norm approximates the
        L2([0, 1]) norm.
    """
    if intervals < 1:
        raise ConfigurationError(f"intervals must be >= 1, got {intervals}")
    h = 1.0 / intervals
    w = np.full(intervals + 1, h)
    w[0] = h / 2.0
    w[-1] = h / 2.0
    return SpaceDescriptor(dim=intervals + 1, weights=w)


def trapezoid_nodes(intervals: int) -> np.ndarray:
    """Grid nodes ``t_i = i / m`` matching :func:`trapezoid`."""
    if intervals < 1:
        raise ConfigurationError(f"intervals must be >= 1, got {intervals}")
    return np.linspace(0.0, 1.0, intervals + 1)


def same_space(a: SpaceDescriptor, b: SpaceDescriptor) -> bool:
    """True when two descriptors define the same inner product."""
    return a.dim == b.dim and np.array_equal(a.weights, b.weights)


def inner(space: SpaceDescriptor, x, y) -> float:
    """Weighted inner product ``sum_i w_i x_i y_i``."""
    x = _as_point(x, space.dim)
    y = _as_point(y, space.dim)
    return float(np.dot(space.weights * x, y))


def norm(space: SpaceDescriptor, x) -> float:
    """Norm induced by :func:`inner`."""
    x = _as_point(x, space.dim)
    return float(np.sqrt(np.dot(space.weights * x, x)))


class ConvexSetBase:
    """Closed convex subset supporting metric projection.

    Subclasses implement ``project(space, x)`` returning the unique nearest
    point in the weighted norm.  Projections are nonexpansive and
    idempotent; for any member ``z`` of the set the angle property
    ``<x - Px, z - Px> <= 0`` holds.
    """

    def project(self, space: SpaceDescriptor, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class WholeSpace(ConvexSetBase):
    """The entire space; projection is the identity."""

    def project(self, space, x):
        return _as_point(x, space.dim)

    def __repr__(self):
        return "WholeSpace()"


class Box(ConvexSetBase):
    """Axis-aligned box ``{z : lower <= z <= upper}`` (coordinatewise).

    Projection clamps each coordinate; with diagonal weights the nearest
    point in the weighted norm is still the coordinatewise clamp.
    """

    def __init__(self, lower, upper):
        lower = np.asarray(lower, dtype=np.float64)
        upper = np.asarray(upper, dtype=np.float64)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ConfigurationError("box bounds must be 1-d arrays of equal shape")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ConfigurationError("box bounds must be finite")
        if np.any(lower > upper):
            raise ConfigurationError("box requires lower <= upper in every coordinate")
        self.lower = lower
        self.upper = upper

    def project(self, space, x):
        x = _as_point(x, space.dim)
        if self.lower.shape != (space.dim,):
            raise InputError("box bounds do not match the space dimension")
        return np.clip(x, self.lower, self.upper)

    def __repr__(self):
        return f"Box(lower={self.lower!r}, upper={self.upper!r})"


class Ball(ConvexSetBase):
    """Closed ball ``{z : ||z - center|| <= radius}`` in the weighted norm."""

    def __init__(self, center, radius: float):
        center = np.asarray(center, dtype=np.float64)
        if center.ndim != 1 or not np.all(np.isfinite(center)):
            raise ConfigurationError("ball center must be a finite 1-d array")
        if not (radius > 0.0 and np.isfinite(radius)):
            raise ConfigurationError(f"ball radius must be positive, got {radius}")
        self.center = center
        self.radius = float(radius)

    def project(self, space, x):
        x = _as_point(x, space.dim)
        if self.center.shape != (space.dim,):
            raise InputError("ball center does not match the space dimension")
        d = x - self.center
        dist = float(np.sqrt(np.dot(space.weights * d, d)))
        if dist <= self.radius:
            return x
        return self.center + (self.radius / dist) * d

    def __repr__(self):
        return f"Ball(center={self.center!r}, radius={self.radius!r})"


class Halfspace(ConvexSetBase):
    """Halfspace ``{z : <normal, z> <= offset}`` in the weighted pairing."""

    def __init__(self, normal, offset: float):
        normal = np.asarray(normal, dtype=np.float64)
        if normal.ndim != 1 or not np.all(np.isfinite(normal)):
            raise ConfigurationError("halfspace normal must be a finite 1-d array")
        if not np.any(normal != 0.0):
            raise ConfigurationError("halfspace normal must be nonzero")
        if not np.isfinite(offset):
            raise ConfigurationError("halfspace offset must be finite")
        self.normal = normal
        self.offset = float(offset)

    def project(self, space, x):
        x = _as_point(x, space.dim)
        if self.normal.shape != (space.dim,):
            raise InputError("halfspace normal does not match the space dimension")
        wn = space.weights * self.normal
        nn = float(np.dot(wn, self.normal))
        excess = float(np.dot(wn, x)) - self.offset
        if excess <= 0.0:
            return x
        return x - (excess / nn) * self.normal

    def __repr__(self):
        return f"Halfspace(normal={self.normal!r}, offset={self.offset!r})"


class AffineSpan(ConvexSetBase):
    """Affine set ``base + span(directions)`` with orthonormal directions.

    Parameters
    ----------
    space : SpaceDescriptor
        Space whose inner product orthonormality is checked against.  The
        same space must be used for later projections.
    base : array_like
        A point of the set.
    directions : array_like
        Shape ``(k, dim)``; rows must be orthonormal in the weighted inner
        product (Gram matrix within 1e-10 of the identity), which is
        checked at construction.

    Notes
    -----
    With orthonormal rows ``d_j`` the projection is
    ``base + sum_j <x - base, d_j> d_j``; it is precomputed here as a single
    affine map ``x -> shift + M x``.
    """

    GRAM_TOL = 1e-10

    def __init__(self, space: SpaceDescriptor, base, directions):
        base = _as_point(base, space.dim)
        directions = np.asarray(directions, dtype=np.float64)
        if directions.ndim != 2 or directions.shape[1] != space.dim:
            raise ConfigurationError(
                f"directions must have shape (k, {space.dim}), got {directions.shape}"
            )
        if directions.shape[0] < 1:
            raise ConfigurationError("affine span needs at least one direction")
        gram = directions @ (space.weights[None, :] * directions).T
        if not np.allclose(gram, np.eye(directions.shape[0]), atol=self.GRAM_TOL, rtol=0.0):
            raise ConfigurationError(
                "directions are not orthonormal in the space inner product "
                f"(Gram deviation {np.max(np.abs(gram - np.eye(directions.shape[0]))):.3e}, "
                f"tolerance {self.GRAM_TOL:g})"
            )
        self._space = space
        self.base = base
        self.directions = directions
        matrix = directions.T @ (directions * space.weights[None, :])
        self._matrix = matrix
        self._shift = base - matrix @ base

    def project(self, space, x):
        if space is not self._space and not same_space(space, self._space):
            raise InputError("affine span was validated against a different space")
        x = _as_point(x, space.dim)
        return self._shift + self._matrix @ x

    def __repr__(self):
        return f"AffineSpan(base={self.base!r}, k={self.directions.shape[0]})"


ConvexSet = Union[WholeSpace, Box, Ball, Halfspace, AffineSpan]


def project(space: SpaceDescriptor, cset: ConvexSetBase, x) -> np.ndarray:
    """Metric projection of ``x`` onto ``cset`` in the weighted norm.

    Parameters
    ----------
    space : SpaceDescriptor
    cset : ConvexSet
        One of :class:`WholeSpace`, :class:`Box`, :class:`Ball`,
        :class:`Halfspace`, :class:`AffineSpan`.
    x : array_like
        Point of the space.

    Returns
    -------
    numpy.ndarray
        The unique nearest point of ``cset``.
    """
    if not isinstance(cset, ConvexSetBase):
        raise ConfigurationError(f"unsupported set kind: {type(cset).__name__}")
    return cset.project(space, x)
