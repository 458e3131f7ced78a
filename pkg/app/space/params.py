"""Parameter space declarations and the numeric encoding shared by models and optimizers."""

import hashlib
import itertools
import json
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from app.core.exceptions import EncodingError, GridError, SpaceValidationError
from app.core.logging import get_logger

logger = get_logger(__name__)

Label = str | int | float | bool
Value = float | int | str | bool

# One value per parameter, aligned with the space order
Configuration = tuple[Value, ...]


class ParamKind(str, Enum):
    """Kind of a tunable or input parameter."""

    REAL = "real"
    INTEGER = "integer"
    CATEGORICAL = "categorical"
    BOOLEAN = "boolean"


class Role(str, Enum):
    """Whether the tuner controls a parameter (design) or receives it (input)."""

    INPUT = "input"
    DESIGN = "design"


def same_label(a: Label, b: Label) -> bool:
    """Compare two category labels without conflating bools, numbers and strings."""
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, str) or isinstance(b, str):
        return isinstance(a, str) and isinstance(b, str) and a == b
    return a == b


def label_text(label: Label) -> str:
    """Text form of a label, as written to CSV files and kernel command lines."""
    if isinstance(label, bool):
        return "true" if label else "false"
    if isinstance(label, float):
        return format(label, ".17g")
    return str(label)


@dataclass(frozen=True)
class ParameterSpec:
    """One declared parameter.

    Reals and integers carry inclusive bounds; categoricals carry an ordered
    label list. Booleans behave as the categorical {false, true}.
    """

    name: str
    kind: ParamKind
    role: Role
    low: float | None = None
    high: float | None = None
    categories: tuple[Label, ...] = ()

    @classmethod
    def real(cls, name: str, low: float, high: float, role: Role = Role.DESIGN) -> "ParameterSpec":
        return cls(name, ParamKind.REAL, role, float(low), float(high))

    @classmethod
    def integer(cls, name: str, low: int, high: int, role: Role = Role.DESIGN) -> "ParameterSpec":
        return cls(name, ParamKind.INTEGER, role, float(low), float(high))

    @classmethod
    def categorical(
        cls, name: str, categories: Sequence[Label], role: Role = Role.DESIGN
    ) -> "ParameterSpec":
        return cls(name, ParamKind.CATEGORICAL, role, categories=tuple(categories))

    @classmethod
    def boolean(cls, name: str, role: Role = Role.DESIGN) -> "ParameterSpec":
        return cls(name, ParamKind.BOOLEAN, role, categories=(False, True))

    @property
    def is_categorical(self) -> bool:
        return self.kind in (ParamKind.CATEGORICAL, ParamKind.BOOLEAN)

    @property
    def labels(self) -> tuple[Label, ...]:
        if self.kind == ParamKind.BOOLEAN:
            return (False, True)
        return self.categories

    @property
    def bounds(self) -> tuple[float, float]:
        """Encoded-space bounds (category codes for categoricals)."""
        if self.is_categorical:
            return 0.0, float(len(self.labels) - 1)
        assert self.low is not None and self.high is not None
        return self.low, self.high

    def code_of(self, label: Label) -> int:
        """Ordinal code of a category label."""
        for code, candidate in enumerate(self.labels):
            if same_label(candidate, label):
                return code
        raise EncodingError(f"unknown label {label!r} for parameter '{self.name}'")

    def parse(self, text: str) -> Value:
        """Parse the text form of a value (CSV cells, CLI arguments)."""
        text = text.strip()
        try:
            if self.kind == ParamKind.REAL:
                return float(text)
            if self.kind == ParamKind.INTEGER:
                number = float(text)
                if not number.is_integer():
                    raise ValueError(text)
                return int(number)
        except ValueError as e:
            raise EncodingError(f"invalid value {text!r} for parameter '{self.name}'") from e
        if self.kind == ParamKind.BOOLEAN:
            lowered = text.lower()
            if lowered in ("true", "1"):
                return True
            if lowered in ("false", "0"):
                return False
            raise EncodingError(f"invalid boolean {text!r} for parameter '{self.name}'")
        for label in self.labels:
            if label_text(label) == text:
                return label
        raise EncodingError(f"unknown label {text!r} for parameter '{self.name}'")

    def format(self, value: Value) -> str:
        if self.kind == ParamKind.REAL:
            return format(float(value), ".17g")
        if self.kind == ParamKind.INTEGER:
            return str(int(value))
        return label_text(value)

    def to_dict(self) -> dict:
        doc: dict = {"name": self.name, "kind": self.kind.value, "role": self.role.value}
        if self.is_categorical:
            doc["categories"] = list(self.labels)
        else:
            doc["low"] = self.low
            doc["high"] = self.high
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ParameterSpec":
        kind = ParamKind(doc["kind"])
        role = Role(doc["role"])
        if kind == ParamKind.BOOLEAN:
            return cls.boolean(doc["name"], role)
        if kind == ParamKind.CATEGORICAL:
            return cls.categorical(doc["name"], doc["categories"], role)
        return cls(doc["name"], kind, role, float(doc["low"]), float(doc["high"]))


@dataclass(frozen=True)
class ParameterSpace:
    """Ordered parameter declarations split into input and design roles."""

    params: tuple[ParameterSpec, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "_index", {p.name: i for i, p in enumerate(self.params)})

    def __len__(self) -> int:
        return len(self.params)

    def __iter__(self):
        return iter(self.params)

    def __getitem__(self, name: str) -> ParameterSpec:
        return self.params[self._index[name]]

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    @property
    def input_dims(self) -> list[int]:
        return [i for i, p in enumerate(self.params) if p.role == Role.INPUT]

    @property
    def design_dims(self) -> list[int]:
        return [i for i, p in enumerate(self.params) if p.role == Role.DESIGN]

    @property
    def categorical_dims(self) -> list[int]:
        return [i for i, p in enumerate(self.params) if p.is_categorical]

    def index(self, name: str) -> int:
        return self._index[name]

    def to_list(self) -> list[dict]:
        return [p.to_dict() for p in self.params]

    @classmethod
    def from_list(cls, docs: Sequence[dict]) -> "ParameterSpace":
        return cls(tuple(ParameterSpec.from_dict(d) for d in docs))

    def bounds_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Encoded lower/upper bounds as arrays."""
        lows, highs = zip(*(p.bounds for p in self.params), strict=True)
        return np.asarray(lows, dtype=float), np.asarray(highs, dtype=float)

    def combine(self, inputs: Sequence[Value], design: Sequence[Value]) -> Configuration:
        """Interleave an input-subspace point and a design configuration."""
        inputs_it, design_it = iter(inputs), iter(design)
        return tuple(
            next(inputs_it) if p.role == Role.INPUT else next(design_it) for p in self.params
        )

    def split(self, config: Sequence[Value]) -> tuple[Configuration, Configuration]:
        """Split a full configuration into (input values, design values)."""
        inputs = tuple(config[i] for i in self.input_dims)
        design = tuple(config[i] for i in self.design_dims)
        return inputs, design


def validate_space(space: ParameterSpace) -> None:
    """Check every declaration invariant and report all violations at once.

    Raises:
        SpaceValidationError: Listing each violated invariant
    """
    violations: list[str] = []
    seen: set[str] = set()
    for spec in space.params:
        if spec.name in seen:
            violations.append(f"duplicate name '{spec.name}'")
        seen.add(spec.name)
        if not spec.name.isidentifier():
            violations.append(f"'{spec.name}' is not a valid identifier")

        if spec.is_categorical:
            labels = spec.labels
            if not labels:
                violations.append(f"'{spec.name}': empty category list")
            for i, a in enumerate(labels):
                if any(same_label(a, b) for b in labels[:i]):
                    violations.append(f"'{spec.name}': duplicate category {a!r}")
            continue

        if spec.low is None or spec.high is None:
            violations.append(f"'{spec.name}': missing bounds")
            continue
        if not (math.isfinite(spec.low) and math.isfinite(spec.high)):
            violations.append(f"'{spec.name}': non-finite bounds")
        elif spec.kind == ParamKind.REAL and not spec.low < spec.high:
            violations.append(f"'{spec.name}': inverted bounds {spec.low} >= {spec.high}")
        elif spec.kind == ParamKind.INTEGER:
            if not (spec.low.is_integer() and spec.high.is_integer()):
                violations.append(f"'{spec.name}': integer bounds must be integral")
            elif spec.low > spec.high:
                violations.append(f"'{spec.name}': inverted bounds {spec.low} > {spec.high}")

    if not space.input_dims:
        violations.append("no input parameters")
    if not space.design_dims:
        violations.append("no design parameters")

    if violations:
        raise SpaceValidationError(violations)


def check_config(space: ParameterSpace, config: Sequence[Value]) -> None:
    """Raise EncodingError unless every value lies in its declared domain."""
    if len(config) != len(space):
        raise EncodingError(f"expected {len(space)} values, got {len(config)}")
    for spec, value in zip(space.params, config, strict=True):
        if spec.is_categorical:
            spec.code_of(value)
            continue
        if isinstance(value, bool | str):
            raise EncodingError(f"'{spec.name}' expects a number, got {value!r}")
        assert spec.low is not None and spec.high is not None
        if not (spec.low <= float(value) <= spec.high):
            raise EncodingError(f"'{spec.name}'={value} outside [{spec.low}, {spec.high}]")
        if spec.kind == ParamKind.INTEGER and not float(value).is_integer():
            raise EncodingError(f"'{spec.name}' expects an integer, got {value!r}")


def encode(space: ParameterSpace, config: Sequence[Value]) -> np.ndarray:
    """Numeric vector of a configuration: reals as-is, integers as floats, labels as ordinals."""
    if len(config) != len(space):
        raise EncodingError(f"expected {len(space)} values, got {len(config)}")
    out = np.empty(len(space), dtype=float)
    for i, (spec, value) in enumerate(zip(space.params, config, strict=True)):
        if spec.is_categorical:
            out[i] = spec.code_of(value)
        else:
            if isinstance(value, bool | str):
                raise EncodingError(f"'{spec.name}' expects a number, got {value!r}")
            out[i] = float(value)
    return out


def encode_many(space: ParameterSpace, configs: Iterable[Sequence[Value]]) -> np.ndarray:
    rows = [encode(space, c) for c in configs]
    if not rows:
        return np.empty((0, len(space)), dtype=float)
    return np.vstack(rows)


def decode_value(spec: ParameterSpec, x: float) -> Value:
    """Map one encoded coordinate back into the parameter's domain."""
    if not math.isfinite(x):
        raise EncodingError(f"non-finite value {x} for parameter '{spec.name}'")
    low, high = spec.bounds
    if spec.kind == ParamKind.REAL:
        return float(min(max(x, low), high))
    # np.rint rounds half to even
    rounded = float(np.rint(x))
    clamped = int(min(max(rounded, low), high))
    if spec.is_categorical:
        return spec.labels[clamped]
    return clamped


def decode(space: ParameterSpace, vector: Sequence[float]) -> Configuration:
    """Total inverse of `encode` on finite vectors (rounds and clamps)."""
    if len(vector) != len(space):
        raise EncodingError(f"expected {len(space)} values, got {len(vector)}")
    return tuple(decode_value(spec, float(x)) for spec, x in zip(space.params, vector, strict=True))


def subspace(space: ParameterSpace, role: Role) -> ParameterSpace:
    """The parameters of one role, in space order."""
    return ParameterSpace(tuple(p for p in space.params if p.role == role))


def fingerprint(space: ParameterSpace) -> str:
    """sha256 over a canonical JSON rendering of the ordered declarations."""
    text = json.dumps(space.to_list(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _axis_points(spec: ParameterSpec, count: int) -> list[Value]:
    if spec.is_categorical:
        labels = list(spec.labels)
        if count < len(labels):
            logger.bind(param=spec.name, requested=count, categories=len(labels)).warning(
                "grid_axis_truncated"
            )
            return labels[:count]
        return labels

    low, high = spec.bounds
    if spec.kind == ParamKind.REAL:
        if count < 2:
            raise GridError(f"real axis '{spec.name}' needs at least 2 points, got {count}")
        return [float(v) for v in np.linspace(low, high, count)]

    values: list[Value] = []
    for v in np.rint(np.linspace(low, high, count)):
        if not values or int(v) != values[-1]:
            values.append(int(v))
    if len(values) < count:
        logger.bind(param=spec.name, requested=count, effective=len(values)).warning(
            "grid_axis_reduced"
        )
    return values


def input_grid(space: ParameterSpace, dims_per_axis: Sequence[int]) -> list[Configuration]:
    """Regular grid over the input subspace, as input-subspace points in space order.

    Args:
        space: Full parameter space
        dims_per_axis: One point count per input parameter

    Returns:
        Cartesian product of the per-axis points (last axis varies fastest)
    """
    inputs = [space.params[i] for i in space.input_dims]
    if len(dims_per_axis) != len(inputs):
        raise GridError(f"expected {len(inputs)} grid counts, got {len(dims_per_axis)}")
    for spec, count in zip(inputs, dims_per_axis, strict=True):
        if count < 1:
            raise GridError(f"grid count for '{spec.name}' must be >= 1, got {count}")

    axes = [_axis_points(spec, int(c)) for spec, c in zip(inputs, dims_per_axis, strict=True)]
    return [tuple(point) for point in itertools.product(*axes)]
