"""Operator abstractions and constructors for the shipped problem operators.

Two operator families drive the iterations: nonexpansive maps ``T`` (the
solve target, fixed points of ``T``) and generalized contractions ``f``
(the viscosity term, contractive with respect to a modulus function).
Because neither property can be proven at runtime, both come with seeded
statistical audits (:func:`check_nonexpansive`, :func:`check_contraction`).

Three constructors build the nonexpansive operators used by the
applications: averaging a strictly pseudocontractive map, the projected
forward step of a monotone variational inequality, and the quadrature
discretization of a Fredholm integral operator of the second kind.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import space as spc
from .errors import ConfigurationError, InputError

__all__ = [
    "ContractionModulus",
    "linear_modulus",
    "rational_modulus",
    "NonexpansiveMap",
    "GeneralizedContraction",
    "MonotoneOperatorSpec",
    "FredholmProblem",
    "NonexpansivenessReport",
    "ContractionReport",
    "MonotonicityReport",
    "check_nonexpansive",
    "check_contraction",
    "check_inverse_strongly_monotone",
    "average_pseudocontraction",
    "forward_projected",
    "fredholm_operator",
    "fredholm_grid",
]


@dataclass(frozen=True)
class ContractionModulus:
    """Modulus function bounding how much a contraction shrinks distances.

    The modulus ``m`` satisfies ``m(0) = 0``, ``0 < m(t) < t`` for ``t > 0``,
    and is strictly increasing; its gauge ``t - m(t)`` is strictly
    increasing and unbounded.  Two parameterizations are supported:

    * ``linear``: ``m(t) = c * t`` with ``c`` in ``[0, 1)``.
    * ``rational``: ``m(t) = t / (1 + beta * t)`` with ``beta > 0``.
    """

    kind: str
    coefficient: float

    def __post_init__(self):
        if self.kind == "linear":
            if not (0.0 <= self.coefficient < 1.0):
                raise ConfigurationError(
                    f"linear modulus coefficient must lie in [0, 1), got {self.coefficient}"
                )
        elif self.kind == "rational":
            if not (self.coefficient > 0.0):
                raise ConfigurationError(
                    f"rational modulus coefficient must be positive, got {self.coefficient}"
                )
        else:
            raise ConfigurationError(f"unknown modulus kind: {self.kind!r}")

    def value(self, t: float) -> float:
        """Modulus value ``m(t)`` for ``t >= 0``."""
        if t < 0.0:
            raise InputError(f"modulus argument must be nonnegative, got {t}")
        if self.kind == "linear":
            return self.coefficient * t
        return t / (1.0 + self.coefficient * t)

    def gauge(self, t: float) -> float:
        """Gauge ``t - m(t)``, strictly increasing and unbounded."""
        return t - self.value(t)

    def gauge_inverse(self, s: float, tol: float = 1e-12) -> float:
        """Solve ``gauge(t) = s`` for ``t >= 0`` by bisection.

        The bracket is grown geometrically inside ``[0, 1e12]`` and then
        bisected to absolute tolerance ``tol``.
        """
        if s < 0.0:
            raise InputError(f"gauge values are nonnegative, got {s}")
        if s == 0.0:
            return 0.0
        hi = 1.0
        cap = 1e12
        while self.gauge(hi) < s:
            hi *= 2.0
            if hi > cap:
                raise InputError(f"gauge inverse bracket exceeded [0, {cap:g}] for s={s}")
        lo = 0.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.gauge(mid) < s:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def linear_modulus(c: float) -> ContractionModulus:
    return ContractionModulus(kind="linear", coefficient=float(c))


def rational_modulus(beta: float) -> ContractionModulus:
    return ContractionModulus(kind="rational", coefficient=float(beta))


@dataclass(frozen=True, eq=False)
class NonexpansiveMap:
    """Operator ``T`` with ``||Tx - Ty|| <= ||x - y||`` on its domain.

    The property itself is a declaration; :func:`check_nonexpansive` audits
    it on seeded random pairs.  ``known_fixed_set`` optionally describes
    the fixed-point set for tests and diagnostics.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    domain: spc.ConvexSetBase = field(default_factory=spc.WholeSpace)
    known_fixed_set: Optional[spc.ConvexSetBase] = None
    label: str = ""

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.evaluator(x)


@dataclass(frozen=True, eq=False)
class GeneralizedContraction:
    """Map ``f`` with ``||fx - fy|| <= m(||x - y||)`` for a modulus ``m``."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    modulus: ContractionModulus
    label: str = ""

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.evaluator(x)


@dataclass(frozen=True, eq=False)
class MonotoneOperatorSpec:
    """Operator ``A`` declared inverse-strongly monotone with constant alpha.

    The declaration means ``<Au - Av, u - v> >= ism_alpha * ||Au - Av||^2``;
    it is spot-checked on sampled pairs by
    :func:`check_inverse_strongly_monotone`, never proven.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    ism_alpha: float
    label: str = ""

    def __post_init__(self):
        if not (self.ism_alpha > 0.0):
            raise ConfigurationError(
                f"inverse-strong-monotonicity constant must be positive, got {self.ism_alpha}"
            )

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.evaluator(x)


@dataclass(frozen=True, eq=False)
class FredholmProblem:
    """Second-kind integral equation ``x(t) = g(t) + integral Phi(t,s,x(s)) ds``.

    Attributes
    ----------
    g : callable
        Source term on ``[0, 1]``; must accept numpy arrays.
    kernel : callable
        ``Phi(t, s, x)``, numpy-broadcastable in all three arguments.
    lipschitz_bound : float
        Declared bound with ``|Phi(t,s,x) - Phi(t,s,y)| <= bound * |x - y|``;
        must be <= 1 so the discretized operator is nonexpansive.  The bound
        is spot-checked by sampling when the operator is built; a violation
        warns but does not fail.
    grid_size : int
        Number of trapezoid intervals ``m`` (the grid has ``m + 1`` nodes
        ``t_i = i/m``), at least 2.
    """

    g: Callable
    kernel: Callable
    lipschitz_bound: float
    grid_size: int

    def __post_init__(self):
        if not (self.lipschitz_bound <= 1.0):
            raise ConfigurationError(
                f"kernel Lipschitz bound must be <= 1, got {self.lipschitz_bound}"
            )
        if self.grid_size < 2:
            raise ConfigurationError(f"grid_size must be >= 2, got {self.grid_size}")


@dataclass(frozen=True)
class NonexpansivenessReport:
    max_ratio: float
    passed: bool
    witness: Optional[tuple]
    n_samples: int
    seed: int


@dataclass(frozen=True)
class ContractionReport:
    passed: bool
    worst_slack: float
    witness: Optional[tuple]
    n_samples: int
    seed: int


@dataclass(frozen=True)
class MonotonicityReport:
    passed: bool
    worst_slack: float
    witness: Optional[tuple]


def _sample_points(rng, space, count, scale=3.0):
    return rng.standard_normal((count, space.dim)) * scale


def check_nonexpansive(
    space: spc.SpaceDescriptor,
    T: NonexpansiveMap,
    n_samples: int = 1000,
    seed: int = 0,
) -> NonexpansivenessReport:
    """Audit ``||Tx - Ty|| <= ||x - y||`` on seeded random pairs.

    Pairs are drawn from a scaled normal distribution and projected into
    the map's domain.  The report passes when the largest observed ratio
    ``||Tx - Ty|| / ||x - y||`` is at most ``1 + 1e-10``; the witness is
    the maximizing pair.
    """
    if n_samples < 1:
        raise InputError(f"n_samples must be >= 1, got {n_samples}")
    rng = np.random.default_rng(seed)
    xs = _sample_points(rng, space, n_samples)
    ys = _sample_points(rng, space, n_samples)
    max_ratio = 0.0
    witness = None
    for raw_x, raw_y in zip(xs, ys):
        x = spc.project(space, T.domain, raw_x)
        y = spc.project(space, T.domain, raw_y)
        dist = spc.norm(space, x - y)
        if dist == 0.0:
            continue
        ratio = spc.norm(space, T(x) - T(y)) / dist
        if ratio > max_ratio:
            max_ratio = ratio
            witness = (x, y)
    return NonexpansivenessReport(
        max_ratio=max_ratio,
        passed=max_ratio <= 1.0 + 1e-10,
        witness=witness,
        n_samples=n_samples,
        seed=seed,
    )


def check_contraction(
    space: spc.SpaceDescriptor,
    f: GeneralizedContraction,
    n_samples: int = 1000,
    seed: int = 0,
) -> ContractionReport:
    """Audit ``||fx - fy|| <= m(||x - y||)`` on seeded random pairs.

    The slack of a pair is ``m(||x - y||) - ||fx - fy||``; the check passes
    when the worst slack is at least ``-1e-10``.
    """
    if n_samples < 1:
        raise InputError(f"n_samples must be >= 1, got {n_samples}")
    rng = np.random.default_rng(seed)
    xs = _sample_points(rng, space, n_samples)
    ys = _sample_points(rng, space, n_samples)
    worst_slack = np.inf
    witness = None
    for x, y in zip(xs, ys):
        dist = spc.norm(space, x - y)
        if dist == 0.0:
            continue
        slack = f.modulus.value(dist) - spc.norm(space, f(x) - f(y))
        if slack < worst_slack:
            worst_slack = slack
            witness = (x, y)
    return ContractionReport(
        passed=bool(worst_slack >= -1e-10),
        worst_slack=float(worst_slack),
        witness=witness,
        n_samples=n_samples,
        seed=seed,
    )


def check_inverse_strongly_monotone(
    space: spc.SpaceDescriptor,
    A: MonotoneOperatorSpec,
    n_samples: int = 1000,
    seed: int = 0,
) -> MonotonicityReport:
    """Spot-check ``<Au - Av, u - v> >= alpha * ||Au - Av||^2`` on pairs."""
    rng = np.random.default_rng(seed)
    us = _sample_points(rng, space, n_samples)
    vs = _sample_points(rng, space, n_samples)
    worst_slack = np.inf
    witness = None
    for u, v in zip(us, vs):
        du = A(u) - A(v)
        slack = spc.inner(space, du, u - v) - A.ism_alpha * spc.norm(space, du) ** 2
        if slack < worst_slack:
            worst_slack = slack
            witness = (u, v)
    return MonotonicityReport(
        passed=bool(worst_slack >= -1e-10), worst_slack=float(worst_slack), witness=witness
    )


def average_pseudocontraction(
    S: Callable[[np.ndarray], np.ndarray],
    lam: float,
    theta: float,
    smooth_L: float = 1.0,
    domain: Optional[spc.ConvexSetBase] = None,
    label: str = "",
) -> NonexpansiveMap:
    """Averaged map ``T x = theta x + (1 - theta) S x`` of a pseudocontraction.

    For ``S`` strictly pseudocontractive with constant ``lam`` (in the sense
    ``||Sx - Sy||^2 <= ||x - y||^2 - lam ||(I-S)x - (I-S)y||^2``) on a space
    with smoothness constant ``smooth_L`` (1 in the Hilbert setting), the
    averaged map is nonexpansive whenever ``theta`` lies in
    ``(0, lam / smooth_L^2]``, and it has the same fixed points as ``S``.

    Parameters
    ----------
    S : callable or NonexpansiveMap-like
        The map to average.  A ``known_fixed_set`` attribute, if present,
        carries over to the result.
    lam : float
        Strict pseudocontractivity constant, in ``[0, 1)``.
    theta : float
        Averaging weight; must satisfy ``0 < theta <= lam / smooth_L**2``.
    smooth_L : float
        Smoothness constant of the space, default 1.

    Raises
    ------
    ConfigurationError
        If ``theta`` is outside the admissible interval.
    """
    if not (0.0 <= lam < 1.0):
        raise ConfigurationError(f"pseudocontractivity constant must lie in [0, 1), got {lam}")
    if not (smooth_L > 0.0):
        raise ConfigurationError(f"smoothness constant must be positive, got {smooth_L}")
    upper = lam / (smooth_L * smooth_L)
    if not (0.0 < theta <= upper):
        raise ConfigurationError(
            f"averaging weight must lie in (0, {upper:g}], got {theta}"
        )
    evaluator = getattr(S, "evaluator", S)
    theta = float(theta)

    def averaged(x, _ev=evaluator, _theta=theta):
        return _theta * x + (1.0 - _theta) * _ev(x)

    return NonexpansiveMap(
        evaluator=averaged,
        domain=domain if domain is not None else spc.WholeSpace(),
        known_fixed_set=getattr(S, "known_fixed_set", None),
        label=label or "averaged pseudocontraction",
    )


def forward_projected(
    space: spc.SpaceDescriptor,
    constraint: spc.ConvexSetBase,
    A: MonotoneOperatorSpec,
    gamma: float,
    label: str = "",
) -> NonexpansiveMap:
    """Projected forward step ``x -> P_K(x - gamma A x)`` of a monotone VI.

    Fixed points of the returned map are exactly the solutions of the
    variational inequality over ``constraint``.  Nonexpansiveness requires
    ``0 < gamma <= 2 * ism_alpha``.

    Raises
    ------
    ConfigurationError
        If ``gamma`` is outside ``(0, 2 * ism_alpha]``.
    """
    upper = 2.0 * A.ism_alpha
    if not (0.0 < gamma <= upper):
        raise ConfigurationError(
            f"step size gamma must lie in (0, {upper:g}] (twice the declared "
            f"monotonicity constant), got {gamma}"
        )
    gamma = float(gamma)

    def stepped(x, _A=A.evaluator, _g=gamma):
        return spc.project(space, constraint, x - _g * _A(x))

    return NonexpansiveMap(
        evaluator=stepped,
        domain=spc.WholeSpace(),
        known_fixed_set=None,
        label=label or "projected forward step",
    )


def fredholm_grid(problem: FredholmProblem):
    """Trapezoid space and grid nodes used to discretize ``problem``."""
    return spc.trapezoid(problem.grid_size), spc.trapezoid_nodes(problem.grid_size)


def _spot_check_lipschitz(problem: FredholmProblem, nodes: np.ndarray) -> None:
    # Hypothesis audit only; the solver runs fine either way, so warn.
    rng = np.random.default_rng(20240801)
    ts = rng.choice(nodes, size=200)
    ss = rng.choice(nodes, size=200)
    xs = rng.standard_normal(200) * 3.0
    ys = xs + rng.standard_normal(200) * 2.0
    keep = xs != ys
    if not np.any(keep):
        return
    num = np.abs(
        np.asarray(problem.kernel(ts[keep], ss[keep], xs[keep]), dtype=float)
        - np.asarray(problem.kernel(ts[keep], ss[keep], ys[keep]), dtype=float)
    )
    ratios = num / np.abs(xs[keep] - ys[keep])
    worst = float(np.max(ratios))
    if worst > problem.lipschitz_bound + 1e-9:
        warnings.warn(
            f"sampled kernel Lipschitz ratio {worst:.6g} exceeds the declared "
            f"bound {problem.lipschitz_bound:g}",
            stacklevel=3,
        )


def fredholm_operator(problem: FredholmProblem) -> NonexpansiveMap:
    """Discretize the integral operator on the trapezoid grid.

    Returns the map with components
    ``(T x)_i = g(t_i) + sum_j w_j Phi(t_i, t_j, x_j)`` acting on the
    ``grid_size + 1`` node values.  With the declared kernel Lipschitz
    bound at most 1 the map is nonexpansive in the weighted norm.
    """
    space, nodes = fredholm_grid(problem)
    _spot_check_lipschitz(problem, nodes)
    gvals = np.asarray(problem.g(nodes), dtype=np.float64)
    if gvals.shape != nodes.shape:
        gvals = np.broadcast_to(gvals, nodes.shape).astype(np.float64)
    weights = space.weights
    tcol = nodes[:, None]
    srow = nodes[None, :]

    shape = (nodes.size, nodes.size)

    def integral_step(x, _k=problem.kernel):
        values = np.asarray(_k(tcol, srow, x[None, :]), dtype=np.float64)
        if values.shape != shape:
            values = np.broadcast_to(values, shape)
        return gvals + values @ weights

    return NonexpansiveMap(
        evaluator=integral_step,
        domain=spc.WholeSpace(),
        known_fixed_set=None,
        label=f"integral operator on {problem.grid_size + 1} nodes",
    )
