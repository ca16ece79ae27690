"""Strict line-oriented config files: ``[section]`` headers, ``key = value``.

The format is deliberately small: ASCII text, ``#`` starts a comment
(whole line or trailing), one ``key = value`` per line under the most
recent ``[section]`` header.  Parsing is strict in both directions: every
syntax problem and every key outside the known vocabulary is an error
naming the offending line, and missing required keys are errors naming
the section.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

from .errors import ConfigurationError
from .schedules import Schedule, compare_t16, custom_rational, eq75, halpern_mix
from .solver import SchemeKind, SolverConfig

__all__ = [
    "RawValue",
    "SectionView",
    "parse_sections",
    "RunConfig",
    "load_run_config",
    "schedule_from_section",
    "SCHEDULE_PRESETS",
]


@dataclass(frozen=True)
class RawValue:
    value: str
    line: int


def parse_sections(text: str, origin: str = "config") -> Dict[str, Dict[str, RawValue]]:
    """Parse config text into ``{section: {key: RawValue}}`` with line info."""
    sections: Dict[str, Dict[str, RawValue]] = {}
    current: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise ConfigurationError(f"{origin}: empty section name (line {lineno})")
            if name in sections:
                raise ConfigurationError(
                    f"{origin}: duplicate section [{name}] (line {lineno})"
                )
            sections[name] = {}
            current = name
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"{origin}: expected 'key = value' (line {lineno}): {raw.strip()!r}"
            )
        if current is None:
            raise ConfigurationError(
                f"{origin}: key outside any [section] (line {lineno})"
            )
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"{origin}: empty key (line {lineno})")
        if key in sections[current]:
            raise ConfigurationError(
                f"{origin}: duplicate key '{key}' in [{current}] (line {lineno})"
            )
        sections[current][key] = RawValue(value=value, line=lineno)
    return sections


class SectionView:
    """Typed access to one section; tracks consumption for strict mode."""

    def __init__(self, name: str, data: Dict[str, RawValue], origin: str):
        self.name = name
        self._data = dict(data)
        self._origin = origin

    def _take(self, key: str) -> Optional[RawValue]:
        return self._data.pop(key, None)

    def error(self, message: str) -> ConfigurationError:
        return ConfigurationError(f"{self._origin}: [{self.name}] {message}")

    def str_value(self, key: str, default=None, choices=None, required: bool = False):
        raw = self._take(key)
        if raw is None:
            if required:
                raise self.error(f"missing required key '{key}'")
            return default
        if choices is not None and raw.value not in choices:
            allowed = ", ".join(sorted(choices))
            raise self.error(
                f"key '{key}' must be one of {{{allowed}}}, got {raw.value!r} (line {raw.line})"
            )
        return raw.value

    def float_value(self, key: str, default=None, required: bool = False):
        raw = self._take(key)
        if raw is None:
            if required:
                raise self.error(f"missing required key '{key}'")
            return default
        try:
            value = float(raw.value)
        except ValueError:
            raise self.error(
                f"key '{key}' is not a number: {raw.value!r} (line {raw.line})"
            ) from None
        if value != value or value in (float("inf"), float("-inf")):
            raise self.error(f"key '{key}' must be finite (line {raw.line})")
        return value

    def int_value(self, key: str, default=None, required: bool = False):
        raw = self._take(key)
        if raw is None:
            if required:
                raise self.error(f"missing required key '{key}'")
            return default
        try:
            return int(raw.value)
        except ValueError:
            raise self.error(
                f"key '{key}' is not an integer: {raw.value!r} (line {raw.line})"
            ) from None

    def float_list(self, key: str, default=None, required: bool = False, count=None):
        raw = self._take(key)
        if raw is None:
            if required:
                raise self.error(f"missing required key '{key}'")
            return default
        parts = [part.strip() for part in raw.value.split(",")]
        try:
            values = [float(part) for part in parts]
        except ValueError:
            raise self.error(
                f"key '{key}' is not a comma-separated number list: "
                f"{raw.value!r} (line {raw.line})"
            ) from None
        if count is not None and len(values) != count:
            raise self.error(
                f"key '{key}' needs {count} comma-separated numbers, "
                f"got {len(values)} (line {raw.line})"
            )
        return values

    def finish(self) -> None:
        if self._data:
            key, raw = next(iter(self._data.items()))
            raise ConfigurationError(
                f"{self._origin}: unknown key '{key}' in [{self.name}] (line {raw.line})"
            )


SCHEDULE_PRESETS = {
    "eq75": eq75,
    "halpern-mix": halpern_mix,
    "compare-t16": compare_t16,
}


def schedule_from_section(view: SectionView) -> Schedule:
    preset = view.str_value("preset")
    kind = view.str_value("kind")
    n0 = view.int_value("n0")
    if preset is not None and kind is not None:
        raise view.error("give either 'preset' or 'kind = custom-rational', not both")
    if preset is not None:
        builder = SCHEDULE_PRESETS.get(preset)
        if builder is None:
            known = ", ".join(sorted(SCHEDULE_PRESETS))
            raise view.error(f"unknown preset {preset!r} (known: {known})")
        view.finish()
        return builder() if n0 is None else builder(start_index=n0)
    if kind != "custom-rational":
        raise view.error(
            "needs 'preset = <name>' or 'kind = custom-rational' with coefficients"
        )
    triples = {}
    for key in ("alpha1", "alpha2", "alpha3", "delta"):
        triples[key] = tuple(view.float_list(key, required=True, count=3))
    view.finish()
    return custom_rational(start_index=1 if n0 is None else n0, **triples)


@dataclass(frozen=True)
class ProblemConfig:
    kind: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ContractionConfig:
    kind: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RunConfig:
    """Validated, typed form of a config file."""

    problem: ProblemConfig
    contraction: Optional[ContractionConfig]
    scheme: SchemeKind
    schedule: Schedule
    solver: SolverConfig
    trace_path: Optional[str]
    space_kind: Optional[str]
    space_dim: Optional[int]
    space_grid_size: Optional[int]


_PROBLEM_KEYS = {
    "builtin-linear": {"required": ("slope",), "optional": ()},
    "line-projection": {"required": (), "optional": ()},
    "pseudocontraction": {"required": ("k", "lambda", "theta"), "optional": ("L",)},
    "monotone": {"required": ("gamma", "set"), "optional": ("radius",)},
    "fredholm": {"required": ("kernel", "grid_size"), "optional": ()},
}


def _problem_from_section(view: SectionView) -> ProblemConfig:
    kind = view.str_value("kind", required=True, choices=set(_PROBLEM_KEYS))
    spec = _PROBLEM_KEYS[kind]
    params = {}
    if kind == "fredholm":
        params["kernel"] = view.str_value(
            "kernel", required=True, choices={"separable-linear", "sine", "zero"}
        )
        params["grid_size"] = view.int_value("grid_size", required=True)
    elif kind == "monotone":
        params["gamma"] = view.float_value("gamma", required=True)
        params["set"] = view.str_value("set", required=True, choices={"whole-space", "ball"})
        radius = view.float_value("radius")
        if params["set"] == "ball":
            if radius is None:
                raise view.error("set = ball needs a 'radius' key")
            params["radius"] = radius
        elif radius is not None:
            raise view.error("'radius' only applies when set = ball")
    else:
        for key in spec["required"]:
            params[key] = view.float_value(key, required=True)
        for key in spec["optional"]:
            value = view.float_value(key)
            if value is not None:
                params[key] = value
    view.finish()
    return ProblemConfig(kind=kind, params=params)


def _contraction_from_section(view: SectionView) -> ContractionConfig:
    kind = view.str_value(
        "kind", required=True, choices={"constant-point", "linear", "rational"}
    )
    params = {}
    if kind == "linear":
        params["c"] = view.float_value("c", required=True)
    elif kind == "rational":
        params["beta"] = view.float_value("beta", required=True)
    else:
        params["point"] = view.float_list("point", required=True)
    view.finish()
    return ContractionConfig(kind=kind, params=params)


def load_run_config(path) -> RunConfig:
    """Read and validate a config file into a :class:`RunConfig`."""
    try:
        with open(path, "r", encoding="ascii") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    except UnicodeDecodeError as exc:
        raise ConfigurationError(f"config {path} is not ASCII: {exc}") from None
    origin = str(path)
    sections = parse_sections(text, origin=origin)

    known = {"space", "problem", "contraction", "scheme", "schedule", "solver", "output"}
    for name, data in sections.items():
        if name not in known:
            first = min(data.values(), key=lambda raw: raw.line) if data else None
            where = f" (line {first.line})" if first else ""
            raise ConfigurationError(f"{origin}: unknown section [{name}]{where}")

    def section(name: str, required: bool = False) -> Optional[SectionView]:
        if name not in sections:
            if required:
                raise ConfigurationError(f"{origin}: missing required section [{name}]")
            return None
        return SectionView(name, sections[name], origin)

    problem = _problem_from_section(section("problem", required=True))

    scheme_view = section("scheme", required=True)
    scheme_name = scheme_view.str_value(
        "name", required=True, choices={kind.value for kind in SchemeKind}
    )
    scheme_view.finish()
    scheme = SchemeKind(scheme_name)

    schedule = schedule_from_section(section("schedule", required=True))

    contraction_view = section("contraction")
    contraction = (
        None if contraction_view is None else _contraction_from_section(contraction_view)
    )

    solver_view = section("solver")
    if solver_view is None:
        solver = SolverConfig(record_trace=False)
    else:
        defaults = SolverConfig()
        solver = SolverConfig(
            outer_tol=solver_view.float_value("outer_tol", default=defaults.outer_tol),
            max_outer=solver_view.int_value("max_outer", default=defaults.max_outer),
            inner_tol=solver_view.float_value("inner_tol", default=defaults.inner_tol),
            max_inner=solver_view.int_value("max_inner", default=defaults.max_inner),
            record_trace=False,
        )
        solver_view.finish()

    output_view = section("output")
    trace_path = None
    if output_view is not None:
        trace_path = output_view.str_value("trace")
        output_view.finish()

    space_view = section("space")
    space_kind = space_dim = space_grid = None
    if space_view is not None:
        space_kind = space_view.str_value(
            "kind", required=True, choices={"euclidean", "trapezoid"}
        )
        space_dim = space_view.int_value("dim")
        space_grid = space_view.int_value("grid_size")
        space_view.finish()
        if space_kind == "euclidean" and space_dim is None:
            raise space_view.error("kind = euclidean needs 'dim'")
        if space_kind == "trapezoid" and space_grid is None:
            raise space_view.error("kind = trapezoid needs 'grid_size'")

    return RunConfig(
        problem=problem,
        contraction=contraction,
        scheme=scheme,
        schedule=schedule,
        solver=solver,
        trace_path=trace_path,
        space_kind=space_kind,
        space_dim=space_dim,
        space_grid_size=space_grid,
    )
