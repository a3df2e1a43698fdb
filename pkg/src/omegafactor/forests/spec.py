"""Forest-family spec files: model, normalization, validation, built-ins.

A spec is a JSON document

  {"factors": [{"components": [{"kind": ..., "params": {...}, "multiplicity": n | "omega"}],
                "repeat": n | "omega"}]}

Parsing failures are `SpecFormatError`. Hypothesis violations (finite component
counts, isolated vertices, bad generator parameters) are collected into a
`ValidationReport` instead of raised, so the CLI can list all of them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from omegafactor.domain import OMEGA, Count, SpecFormatError, count_from_json
from omegafactor.forests.shapes import EdgeListTree, LevelTree, OmegaTree, Shape
from omegafactor.jsonio import dumps

Multiplicity = Annotated[int, Field(ge=0)] | Literal["omega"]


class ComponentKind(str, Enum):
    FINITE_EDGE_LIST = "finite-edge-list"
    PATH = "path"
    RAY = "ray"
    STAR = "star"
    REGULAR_TREE = "regular-tree"
    COMPLETE_BINARY_TREE = "complete-binary-tree"


class ComponentGenerator(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: ComponentKind
    params: dict[str, Any] = Field(default_factory=dict)
    multiplicity: Multiplicity = 1

    @property
    def count(self) -> Count:
        return count_from_json(self.multiplicity)


class FactorDescription(BaseModel):
    model_config = ConfigDict(extra="forbid")

    components: list[ComponentGenerator]
    repeat: Multiplicity = 1

    @property
    def repeat_count(self) -> Count:
        return count_from_json(self.repeat)


class ForestFamilySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    factors: list[FactorDescription]
    # display name; not part of the normalized document
    name: str = Field(default="", exclude=True)


# ── Parsing / normalization ────────────────────────────────────────────────


def parse_spec(text: str, *, name: str = "") -> ForestFamilySpec:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecFormatError(f"malformed JSON: {e}") from e
    if not isinstance(raw, dict):
        raise SpecFormatError("spec must be a JSON object with a \"factors\" array")
    try:
        spec = ForestFamilySpec.model_validate(raw)
    except ValidationError as e:
        raise SpecFormatError(f"bad spec structure: {e.errors(include_url=False)}") from e
    spec.name = name
    return spec


def load_spec(path: str | Path) -> ForestFamilySpec:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise SpecFormatError(f"cannot read spec {p}: {e}") from e
    return parse_spec(text, name=p.stem)


def spec_document(spec: ForestFamilySpec) -> dict[str, Any]:
    return spec.model_dump(mode="json")


def normalize_spec(spec: ForestFamilySpec) -> str:
    """Canonical text: sorted keys, fixed indentation, explicit defaults."""
    return dumps(spec_document(spec))


# ── Shapes from generators ─────────────────────────────────────────────────


class ShapeParamError(ValueError):
    pass


def _nat_param(params: dict[str, Any], key: str, *, minimum: int, allow_omega: bool) -> Count:
    if key not in params:
        raise ShapeParamError(f"missing parameter {key!r}")
    raw = params[key]
    if allow_omega and raw == "omega":
        return OMEGA
    if isinstance(raw, bool) or not isinstance(raw, int):
        suffix = " or \"omega\"" if allow_omega else ""
        raise ShapeParamError(f"parameter {key!r} must be an integer{suffix}")
    if raw < minimum:
        if raw == minimum - 1:
            raise ShapeParamError(f"{key}={raw} yields a single-vertex component")
        raise ShapeParamError(f"parameter {key!r} must be >= {minimum}, got {raw}")
    return raw


def _no_extra(params: dict[str, Any], allowed: set[str]) -> None:
    extra = sorted(set(params) - allowed)
    if extra:
        raise ShapeParamError(f"unknown parameters {extra}")


def build_shape(gen: ComponentGenerator) -> Shape:
    """Shape for one generator. Raises ShapeParamError on bad parameters."""
    p = gen.params
    match gen.kind:
        case ComponentKind.PATH:
            _no_extra(p, {"n"})
            n = _nat_param(p, "n", minimum=2, allow_omega=False)
            assert isinstance(n, int)
            return LevelTree(1, 1, n - 1, f"path({n})")
        case ComponentKind.RAY:
            _no_extra(p, set())
            return LevelTree(1, 1, None, "ray")
        case ComponentKind.STAR:
            _no_extra(p, {"leaves"})
            leaves = _nat_param(p, "leaves", minimum=1, allow_omega=True)
            return LevelTree(leaves, 0, 1, f"star({leaves.value if leaves is OMEGA else leaves})")
        case ComponentKind.REGULAR_TREE:
            _no_extra(p, {"degree"})
            deg = _nat_param(p, "degree", minimum=1, allow_omega=True)
            if deg is OMEGA:
                return OmegaTree()
            assert isinstance(deg, int)
            if deg == 1:
                return LevelTree(1, 0, 1, "regular-tree(1)")
            return LevelTree(deg, deg - 1, None, f"regular-tree({deg})")
        case ComponentKind.COMPLETE_BINARY_TREE:
            _no_extra(p, {"depth"})
            depth = _nat_param(p, "depth", minimum=1, allow_omega=True)
            height = None if depth is OMEGA else depth
            assert not isinstance(height, str)
            return LevelTree(2, 2, height, f"complete-binary-tree({depth.value if depth is OMEGA else depth})")
        case ComponentKind.FINITE_EDGE_LIST:
            _no_extra(p, {"edges"})
            raw = p.get("edges")
            if not isinstance(raw, list) or not raw:
                raise ShapeParamError("edges must be a non-empty list (a single vertex is isolated)")
            edges: list[tuple[int, int]] = []
            for e in raw:
                if (
                    not isinstance(e, list | tuple)
                    or len(e) != 2
                    or not all(isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in e)
                ):
                    raise ShapeParamError(f"bad edge {e!r}")
                edges.append((e[0], e[1]))
            try:
                return EdgeListTree(edges)
            except ValueError as err:
                raise ShapeParamError(str(err)) from err
    raise ShapeParamError(f"unsupported kind {gen.kind}")


# ── Validation ─────────────────────────────────────────────────────────────


@dataclass(frozen=True, slots=True)
class Violation:
    message: str
    factor: int | None = None
    generator: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"factor": self.factor, "generator": self.generator, "message": self.message}


@dataclass(slots=True)
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, message: str, factor: int | None = None, generator: int | None = None) -> None:
        self.violations.append(Violation(message, factor, generator))

    def to_dict(self) -> dict[str, Any]:
        return {"valid": self.ok, "violations": [v.to_dict() for v in self.violations]}


def validate_description(desc: FactorDescription, fi: int, report: ValidationReport) -> None:
    if not desc.components:
        report.add(f"factor {fi} has no components", fi)
        return
    infinite = False
    total = 0
    for gi, gen in enumerate(desc.components):
        try:
            build_shape(gen)
        except ShapeParamError as e:
            msg = str(e)
            if "single-vertex" in msg or "isolated" in msg:
                report.add(f"factor {fi} generator {gi} yields a single-vertex component ({msg})", fi, gi)
            else:
                report.add(f"factor {fi} generator {gi} ({gen.kind.value}): {msg}", fi, gi)
        cnt = gen.count
        if cnt is OMEGA:
            infinite = True
        elif cnt == 0:
            report.add(f"factor {fi} generator {gi} has multiplicity 0", fi, gi)
        else:
            total += cnt
    if not infinite:
        report.add(f"factor {fi} has finite component count ({total})", fi)


def validate(spec: ForestFamilySpec) -> ValidationReport:
    """Every factor needs omega components without isolated vertices; omega factors overall."""
    report = ValidationReport()
    if not spec.factors:
        report.add("family has no factors")
        return report
    finite_factors = 0
    has_omega = False
    for fi, desc in enumerate(spec.factors):
        rep = desc.repeat_count
        if rep is OMEGA:
            has_omega = True
        elif rep == 0:
            report.add(f"factor {fi} has repeat 0", fi)
        else:
            finite_factors += rep
        validate_description(desc, fi, report)
    if not has_omega:
        report.add(f"family has {finite_factors} factors, needs omega (mark a factor \"repeat\": \"omega\")")
    return report


def validate_forests(descs: list[FactorDescription]) -> ValidationReport:
    """Per-forest checks only (no omega requirement); used for packing inputs."""
    report = ValidationReport()
    for fi, desc in enumerate(descs):
        if not desc.components:
            report.add(f"forest {fi} is empty", fi)
        for gi, gen in enumerate(desc.components):
            try:
                build_shape(gen)
            except ShapeParamError as e:
                report.add(f"forest {fi} generator {gi}: {e}", fi, gi)
            if gen.count == 0:
                report.add(f"forest {fi} generator {gi} has multiplicity 0", fi, gi)
    return report


# ── Built-in families ──────────────────────────────────────────────────────


def gen(kind: str, multiplicity: Multiplicity = "omega", **params: Any) -> ComponentGenerator:
    return ComponentGenerator(kind=ComponentKind(kind), params=params, multiplicity=multiplicity)


def regular_family(degree: Count) -> ForestFamilySpec:
    """Omega factors, each omega copies of the degree-regular tree."""
    deg: int | str = "omega" if degree is OMEGA else degree
    name = f"lambda:{deg}"
    return ForestFamilySpec(
        factors=[FactorDescription(components=[gen("regular-tree", degree=deg)], repeat="omega")],
        name=name,
    )


def _star_mix() -> ForestFamilySpec:
    return ForestFamilySpec(
        factors=[
            FactorDescription(components=[gen("star", leaves="omega")], repeat="omega"),
            FactorDescription(components=[gen("path", 2, n=3), gen("ray")], repeat="omega"),
        ],
        name="star-mix",
    )


def _mixed_trees() -> ForestFamilySpec:
    return ForestFamilySpec(
        factors=[
            FactorDescription(
                components=[
                    gen("finite-edge-list", edges=[[0, 1], [1, 2], [1, 3], [3, 4]]),
                    gen("complete-binary-tree", depth=2),
                ],
                repeat="omega",
            ),
            FactorDescription(
                components=[gen("path", 3, n=2), gen("star", leaves=3)],
                repeat="omega",
            ),
        ],
        name="mixed-trees",
    )


BUILTIN_NAMES = ("k2-family", "lambda:<n|omega>", "omega-regular", "star-mix", "mixed-trees")


def builtin_spec(name: str) -> ForestFamilySpec | None:
    match name:
        case "k2-family":
            spec = regular_family(1)
            spec.name = "k2-family"
            return spec
        case "omega-regular":
            spec = regular_family(OMEGA)
            spec.name = "omega-regular"
            return spec
        case "star-mix":
            return _star_mix()
        case "mixed-trees":
            return _mixed_trees()
    if name.startswith("lambda:"):
        raw = name.removeprefix("lambda:")
        if raw == "omega":
            return regular_family(OMEGA)
        if raw.isdigit() and int(raw) >= 1:
            return regular_family(int(raw))
        raise SpecFormatError(f"bad built-in {name!r}: degree must be a positive integer or omega")
    return None
