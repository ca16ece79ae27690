"""Iteration engine: implicit inner solves, scheme drivers, and diagnostics.

Every scheme advances an iterate ``x_n`` by mixing a viscosity term
``f(x_n)``, the iterate itself, and an application of the target operator
``T``.  The implicit schemes place the unknown ``x_{n+1}`` inside ``T``;
each step then needs an inner fixed-point solve of the affine-in-``u`` map

    u  ->  base + coef * T(anchor + weight * u),

which is a contraction with factor ``coef * weight`` whenever ``T`` is
nonexpansive, so plain Picard iteration with a certified stopping rule
solves it.  The outer loop stops on the fixed-point residual
``||x_n - T x_n||``, the quantity the convergence analysis drives to zero.

Scheme names accepted throughout (also the CLI vocabulary):

``explicit``
    ``x' = a f(x) + (1 - a) T(x)`` with the single weight ``a``
    collapsed from the three-term schedule (see :func:`step`).
``midpoint``
    ``x' = a f(x) + (1 - a) T((x + x') / 2)``.
``kema``
    ``x' = a f(x) + (1 - a) T(delta x + (1 - delta) x')``.
``three_term``
    ``x' = a1 f(x) + a2 x + a3 T(delta x + (1 - delta) x')``.
``new_implicit``
    ``x' = a1 f(x) + a2 x + a3 T((1 - delta) f(x) + delta x')``.
``mann_implicit``
    ``new_implicit`` with the identity substituted for ``f``.
``midpoint_mann``
    ``midpoint`` with the identity substituted for ``f``.

The two ``*_mann`` presets are realized by substitution into the general
drivers, not separate code paths.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import space as spc
from .errors import (
    ConfigurationError,
    InnerSolveError,
    InputError,
    NotConvergedError,
    ViscofixError,
)
from .maps import GeneralizedContraction, NonexpansiveMap
from .schedules import Schedule, ScheduleParams, schedule_eval

__all__ = [
    "SchemeKind",
    "SolverConfig",
    "IterationState",
    "TraceRow",
    "Termination",
    "SolveReport",
    "ScheduleRangeError",
    "inner_implicit_solve",
    "step",
    "run",
    "vi_residual",
    "compare_limits",
    "TRACE_FIELDS",
    "write_trace_csv",
    "read_trace_csv",
]


class SchemeKind(str, enum.Enum):
    EXPLICIT = "explicit"
    MIDPOINT = "midpoint"
    KEMA = "kema"
    THREE_TERM = "three_term"
    NEW_IMPLICIT = "new_implicit"
    MANN_IMPLICIT = "mann_implicit"
    MIDPOINT_MANN = "midpoint_mann"

    def __str__(self):
        return self.value


# Presets that hard-wire the viscosity term to the identity map.
IDENTITY_SCHEMES = frozenset({SchemeKind.MANN_IMPLICIT, SchemeKind.MIDPOINT_MANN})


class Termination(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    SCHEDULE_RANGE_VIOLATION = "schedule_range_violation"

    def __str__(self):
        return self.value


class ScheduleRangeError(ViscofixError, RuntimeError):
    """Schedule produced weights outside their admissible ranges."""


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and iteration budgets for one run.

    ``outer_tol`` applies to the fixed-point residual ``||x - Tx||``;
    ``inner_tol`` to the certified residual of the implicit inner solve.
    """

    outer_tol: float = 1e-8
    max_outer: int = 100_000
    inner_tol: float = 1e-12
    max_inner: int = 1000
    record_trace: bool = True

    def __post_init__(self):
        if not (self.outer_tol > 0.0 and self.inner_tol > 0.0):
            raise ConfigurationError("tolerances must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ConfigurationError("iteration caps must be >= 1")


@dataclass(frozen=True, eq=False)
class IterationState:
    """Snapshot after a step: the iterate and its fixed-point residual."""

    n: int
    x: np.ndarray
    last_inner_iters: int
    residual: float


@dataclass(frozen=True)
class TraceRow:
    """One outer iteration: index ``n`` with the weights used at ``n``,
    the residual and step size of the produced iterate ``x_{n+1}``, and
    the inner-solve effort."""

    n: int
    residual: float
    step_norm: float
    inner_iters: int
    alpha1: float
    alpha2: float
    alpha3: float
    delta: float


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Outcome of a run.

    ``n_final`` is the index of ``final_point`` in the iteration (the
    start index when the initial point already met the tolerance).  The
    trace is empty when recording was disabled or no step was taken.
    """

    final_point: np.ndarray
    termination: Termination
    trace: List[TraceRow]
    n_final: int
    final_residual: float
    space: spc.SpaceDescriptor
    message: str = ""


def _weighted_norm(space: spc.SpaceDescriptor) -> Callable[[np.ndarray], float]:
    w = space.weights
    def nrm(v, _w=w):
        return math.sqrt(float(np.dot(_w * v, v)))
    return nrm


def _check_params(p: ScheduleParams, where: str) -> None:
    a1, a2, a3, d = p
    if not (math.isfinite(a1) and math.isfinite(a2) and math.isfinite(a3) and math.isfinite(d)):
        raise ScheduleRangeError(f"non-finite weights {where}")
    if not (0.0 <= a1 <= 1.0 and 0.0 <= a2 <= 1.0 and 0.0 <= a3 <= 1.0):
        raise ScheduleRangeError(
            f"weight outside [0, 1] {where}: ({a1:g}, {a2:g}, {a3:g})"
        )
    if abs(a1 + a2 + a3 - 1.0) > 1e-12:
        raise ScheduleRangeError(
            f"weights do not sum to 1 {where} (sum = {a1 + a2 + a3!r})"
        )
    if not (0.0 < d < 1.0):
        raise ScheduleRangeError(f"delta outside (0, 1) {where}: {d:g}")


def _collapsed_weight(p: ScheduleParams) -> float:
    # Single-parameter schemes keep the f-vs-T mixing ratio of the
    # three-term schedule: a = alpha1 / (alpha1 + alpha3).
    s = p.alpha1 + p.alpha3
    if s <= 0.0:
        raise ScheduleRangeError(
            "alpha1 + alpha3 = 0: the single-parameter schemes cannot consume "
            "this schedule index"
        )
    return p.alpha1 / s


def _identity(x):
    return x


def _viscosity_eval(scheme: SchemeKind, f: Optional[GeneralizedContraction]):
    if scheme in IDENTITY_SCHEMES:
        if f is not None:
            raise ConfigurationError(
                f"scheme {scheme} substitutes the identity for the viscosity term; "
                "pass f=None"
            )
        return _identity
    if f is None:
        raise ConfigurationError(f"scheme {scheme} requires a viscosity contraction f")
    return f.evaluator


def _picard_affine_solve(
    base: np.ndarray,
    coef: float,
    t_eval: Callable,
    anchor: np.ndarray,
    u_weight: float,
    factor: float,
    u0: np.ndarray,
    inner_tol: float,
    max_inner: int,
    nrm: Callable[[np.ndarray], float],
    record: Optional[list] = None,
):
    """Picard iteration on ``u -> base + coef * T(anchor + u_weight * u)``.

    ``factor = coef * u_weight`` bounds the contraction factor when ``T``
    is nonexpansive, which certifies the stopping rule: once
    ``factor * ||u_{k+1} - u_k|| <= inner_tol`` the returned iterate has
    residual at most ``inner_tol``.  A zero factor means the map is
    constant and one application suffices.  The iteration budget is the
    bound implied by the factor plus a margin of 10, never exceeding
    ``max_inner``; running past it means ``T`` shrank nothing, i.e. it is
    not the nonexpansive map it was declared to be.
    """
    if factor >= 1.0:
        raise ScheduleRangeError(
            f"inner map contraction factor {factor:g} is not below 1"
        )
    u = u0
    cap = max_inner
    k = 0
    while True:
        k += 1
        u_next = base + coef * t_eval(anchor + u_weight * u)
        if record is not None:
            record.append(u_next)
        gap = nrm(u_next - u)
        if factor * gap <= inner_tol:
            return u_next, k
        if k == 1 and factor > 0.0 and gap > 0.0:
            certified = math.ceil(
                math.log(inner_tol / (factor * gap)) / math.log(factor)
            ) + 1
            cap = min(max_inner, max(certified, 1) + 10)
        if k >= cap:
            raise InnerSolveError(
                f"inner solve exceeded {cap} applications (certified budget for "
                f"factor {factor:g}); the operator does not contract as declared"
            )
        u = u_next


def _inner_pieces(scheme: SchemeKind, x: np.ndarray, fx: np.ndarray, p: ScheduleParams):
    """Affine inner-map pieces (base, coef, anchor, u_weight) per scheme."""
    if scheme in (SchemeKind.NEW_IMPLICIT, SchemeKind.MANN_IMPLICIT):
        return p.alpha1 * fx + p.alpha2 * x, p.alpha3, (1.0 - p.delta) * fx, p.delta
    if scheme is SchemeKind.THREE_TERM:
        return p.alpha1 * fx + p.alpha2 * x, p.alpha3, p.delta * x, 1.0 - p.delta
    if scheme is SchemeKind.KEMA:
        a = _collapsed_weight(p)
        return a * fx, 1.0 - a, p.delta * x, 1.0 - p.delta
    if scheme in (SchemeKind.MIDPOINT, SchemeKind.MIDPOINT_MANN):
        a = _collapsed_weight(p)
        return a * fx, 1.0 - a, 0.5 * x, 0.5
    raise ConfigurationError(f"scheme {scheme} has no implicit inner map")


def inner_implicit_solve(
    space: spc.SpaceDescriptor,
    f: Optional[GeneralizedContraction],
    T: NonexpansiveMap,
    x_n,
    alphas: Sequence[float],
    delta: float,
    cfg: SolverConfig,
    record: Optional[list] = None,
):
    """Solve the implicit step of the general three-term scheme.

    Finds ``u`` with ``||u - W(u)|| <= inner_tol`` for
    ``W(u) = a1 f(x_n) + a2 x_n + a3 T((1 - delta) f(x_n) + delta u)``,
    by Picard iteration warm-started at ``u0 = x_n``.  The contraction
    factor of ``W`` is at most ``a3 * delta``.

    Parameters
    ----------
    f : GeneralizedContraction or None
        Viscosity term; ``None`` substitutes the identity.
    alphas : sequence of three reals
        Convex weights ``(a1, a2, a3)``; must sum to 1 within 1e-12.
    delta : float
        Implicit weight in ``(0, 1)``.
    record : list, optional
        When given, every Picard iterate is appended to it.

    Returns
    -------
    (numpy.ndarray, int)
        The solution and the number of Picard applications used.
    """
    a1, a2, a3 = (float(a) for a in alphas)
    p = ScheduleParams(a1, a2, a3, float(delta))
    try:
        _check_params(p, "in the supplied weights")
    except ScheduleRangeError as exc:
        raise InputError(str(exc)) from None
    x = space.point(x_n)
    fx = x if f is None else f.evaluator(x)
    base, coef, anchor, u_weight = _inner_pieces(SchemeKind.NEW_IMPLICIT, x, fx, p)
    return _picard_affine_solve(
        base,
        coef,
        T.evaluator,
        anchor,
        u_weight,
        coef * u_weight,
        x,
        cfg.inner_tol,
        cfg.max_inner,
        _weighted_norm(space),
        record,
    )


def _advance(
    scheme: SchemeKind,
    x: np.ndarray,
    f_eval: Callable,
    t_eval: Callable,
    p: ScheduleParams,
    cfg: SolverConfig,
    nrm: Callable[[np.ndarray], float],
):
    if scheme is SchemeKind.EXPLICIT:
        a = _collapsed_weight(p)
        return a * f_eval(x) + (1.0 - a) * t_eval(x), 0
    fx = x if f_eval is _identity else f_eval(x)
    base, coef, anchor, u_weight = _inner_pieces(scheme, x, fx, p)
    return _picard_affine_solve(
        base,
        coef,
        t_eval,
        anchor,
        u_weight,
        coef * u_weight,
        x,
        cfg.inner_tol,
        cfg.max_inner,
        nrm,
    )


def step(
    space: spc.SpaceDescriptor,
    scheme: SchemeKind,
    state: IterationState,
    f: Optional[GeneralizedContraction],
    T: NonexpansiveMap,
    schedule: Schedule,
    cfg: SolverConfig,
) -> IterationState:
    """Advance one outer iteration from ``state``.

    Evaluates the schedule at ``state.n`` (raising
    :class:`ScheduleRangeError` if the weights leave their ranges),
    produces ``x_{n+1}`` by the scheme's update, and returns the new state
    with the recomputed fixed-point residual.
    """
    scheme = SchemeKind(scheme)
    p = schedule_eval(schedule, state.n)
    _check_params(p, f"at n = {state.n}")
    f_eval = _viscosity_eval(scheme, f)
    nrm = _weighted_norm(space)
    x_next, inner_iters = _advance(scheme, state.x, f_eval, T.evaluator, p, cfg, nrm)
    residual = nrm(x_next - T.evaluator(x_next))
    return IterationState(
        n=state.n + 1, x=x_next, last_inner_iters=inner_iters, residual=residual
    )


def run(
    space: spc.SpaceDescriptor,
    scheme: SchemeKind,
    f: Optional[GeneralizedContraction],
    T: NonexpansiveMap,
    schedule: Schedule,
    x1,
    cfg: SolverConfig,
    observer: Optional[Callable[[IterationState], None]] = None,
) -> SolveReport:
    """Iterate the scheme from ``x1`` until the residual meets ``outer_tol``.

    The loop starts at the schedule's start index and stops when
    ``||x_n - T x_n|| <= outer_tol`` (including the initial point), when
    ``max_outer`` steps have been taken, or when the schedule leaves its
    admissible ranges.  ``observer``, when given, receives every
    :class:`IterationState` including the initial one; the trace records
    one row per executed step when ``cfg.record_trace`` is set.

    Runs are deterministic: identical inputs produce bitwise-identical
    traces and reports.
    """
    scheme = SchemeKind(scheme)
    f_eval = _viscosity_eval(scheme, f)
    nrm = _weighted_norm(space)
    t_eval = T.evaluator
    x = space.point(x1)
    residual = nrm(x - t_eval(x))
    n0 = schedule.start_index
    state = IterationState(n=n0, x=x, last_inner_iters=0, residual=residual)
    if observer is not None:
        observer(state)
    trace: List[TraceRow] = []
    if residual <= cfg.outer_tol:
        return SolveReport(
            final_point=x,
            termination=Termination.CONVERGED,
            trace=trace,
            n_final=n0,
            final_residual=residual,
            space=space,
        )
    for _ in range(cfg.max_outer):
        n = state.n
        try:
            p = schedule_eval(schedule, n)
            _check_params(p, f"at n = {n}")
            x_next, inner_iters = _advance(scheme, state.x, f_eval, t_eval, p, cfg, nrm)
        except ScheduleRangeError as exc:
            return SolveReport(
                final_point=state.x,
                termination=Termination.SCHEDULE_RANGE_VIOLATION,
                trace=trace,
                n_final=n,
                final_residual=state.residual,
                space=space,
                message=str(exc),
            )
        residual = nrm(x_next - t_eval(x_next))
        if cfg.record_trace:
            trace.append(
                TraceRow(
                    n=n,
                    residual=residual,
                    step_norm=nrm(x_next - state.x),
                    inner_iters=inner_iters,
                    alpha1=p.alpha1,
                    alpha2=p.alpha2,
                    alpha3=p.alpha3,
                    delta=p.delta,
                )
            )
        state = IterationState(
            n=n + 1, x=x_next, last_inner_iters=inner_iters, residual=residual
        )
        if observer is not None:
            observer(state)
        if residual <= cfg.outer_tol:
            return SolveReport(
                final_point=state.x,
                termination=Termination.CONVERGED,
                trace=trace,
                n_final=state.n,
                final_residual=residual,
                space=space,
            )
    return SolveReport(
        final_point=state.x,
        termination=Termination.MAX_ITERS,
        trace=trace,
        n_final=state.n,
        final_residual=state.residual,
        space=space,
        message=f"residual {state.residual:.6g} above tolerance after {cfg.max_outer} steps",
    )


def vi_residual(
    space: spc.SpaceDescriptor,
    p,
    f: GeneralizedContraction,
    samples: Sequence,
) -> float:
    """Worst variational-inequality pairing of a computed limit.

    For the limit ``p`` produced with viscosity term ``f``, returns
    ``min over samples x of <p - f(p), x - p>`` where the samples lie in
    the target fixed-point set.  A genuine viscosity limit makes this
    nonnegative up to tolerance.
    """
    if len(samples) == 0:
        raise InputError("vi_residual needs at least one sample point")
    p = space.point(p)
    direction = p - f.evaluator(p)
    return min(spc.inner(space, direction, space.point(x) - p) for x in samples)


def compare_limits(report_a: SolveReport, report_b: SolveReport) -> float:
    """Distance between the limits of two converged runs on one space."""
    bad = [
        str(r.termination)
        for r in (report_a, report_b)
        if r.termination is not Termination.CONVERGED
    ]
    if bad:
        raise NotConvergedError(
            "compare_limits needs converged runs, got termination "
            + " and ".join(bad)
        )
    if not spc.same_space(report_a.space, report_b.space):
        raise InputError("compare_limits needs runs on the same space")
    return spc.norm(report_a.space, report_a.final_point - report_b.final_point)


TRACE_FIELDS = ("n", "residual", "step_norm", "inner_iters", "alpha1", "alpha2", "alpha3", "delta")


def write_trace_csv(trace: Sequence[TraceRow], path) -> None:
    """Write trace rows as CSV with 17-significant-digit reals."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRACE_FIELDS)
        for row in trace:
            writer.writerow(
                [
                    row.n,
                    f"{row.residual:.17g}",
                    f"{row.step_norm:.17g}",
                    row.inner_iters,
                    f"{row.alpha1:.17g}",
                    f"{row.alpha2:.17g}",
                    f"{row.alpha3:.17g}",
                    f"{row.delta:.17g}",
                ]
            )


def read_trace_csv(path) -> List[TraceRow]:
    """Parse a trace CSV back into rows (exact round-trip of floats)."""
    rows: List[TraceRow] = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != list(TRACE_FIELDS):
            raise InputError(f"unexpected trace header: {header!r}")
        for record in reader:
            if len(record) != len(TRACE_FIELDS):
                raise InputError(f"malformed trace row: {record!r}")
            rows.append(
                TraceRow(
                    n=int(record[0]),
                    residual=float(record[1]),
                    step_norm=float(record[2]),
                    inner_iters=int(record[3]),
                    alpha1=float(record[4]),
                    alpha2=float(record[5]),
                    alpha3=float(record[6]),
                    delta=float(record[7]),
                )
            )
    return rows
