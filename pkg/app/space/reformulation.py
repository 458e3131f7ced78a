"""Bound-variable lerp reformulation.

A design parameter whose admissible interval depends on other parameters is
exposed to the tuner as a free `alpha` in [0, 1]; the kernel receives
lerp(alpha, lb, ub) with lb and ub evaluated from small arithmetic expressions.
"""

import ast
import math
import operator
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from app.core.exceptions import EncodingError, ExpressionError, InfeasibleContextError
from app.space.params import ParameterSpace, ParamKind, Role, Value

_BINARY_OPS: dict[type, Callable[[float, float], float]] = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.FloorDiv: operator.floordiv,
}

_FUNCTIONS: dict[str, Callable[..., float]] = {
    "min": min,
    "max": max,
    "floor": lambda x: float(math.floor(x)),
}


@dataclass(frozen=True)
class Expression:
    """A parsed arithmetic expression over parameter names."""

    source: str
    tree: ast.expr = field(repr=False, compare=False)
    names: frozenset[str] = field(compare=False)

    @classmethod
    def parse(cls, source: str) -> "Expression":
        try:
            tree = ast.parse(source.strip(), mode="eval").body
        except SyntaxError as e:
            raise ExpressionError(f"cannot parse expression {source!r}: {e.msg}") from e
        names: set[str] = set()
        _check_node(tree, source, names)
        return cls(source, tree, frozenset(names))

    def evaluate(self, env: Mapping[str, Value]) -> float:
        return _eval_node(self.tree, env, self.source)


def _check_node(node: ast.AST, source: str, names: set[str]) -> None:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, int | float):
            raise ExpressionError(f"unsupported constant {node.value!r} in {source!r}")
    elif isinstance(node, ast.Name):
        names.add(node.id)
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in _BINARY_OPS:
            raise ExpressionError(f"unsupported operator in {source!r}")
        _check_node(node.left, source, names)
        _check_node(node.right, source, names)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, ast.USub | ast.UAdd):
            raise ExpressionError(f"unsupported operator in {source!r}")
        _check_node(node.operand, source, names)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
            raise ExpressionError(f"unsupported function call in {source!r}")
        if node.keywords or not node.args:
            raise ExpressionError(f"malformed call in {source!r}")
        if node.func.id == "floor" and len(node.args) != 1:
            raise ExpressionError(f"floor takes one argument in {source!r}")
        for arg in node.args:
            _check_node(arg, source, names)
    else:
        raise ExpressionError(f"unsupported syntax {type(node).__name__} in {source!r}")


def _eval_node(node: ast.AST, env: Mapping[str, Value], source: str) -> float:
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        if node.id not in env:
            raise ExpressionError(f"unknown name '{node.id}' in {source!r}")
        value = env[node.id]
        if isinstance(value, bool | str):
            raise ExpressionError(f"'{node.id}' is not numeric in {source!r}")
        return float(value)
    if isinstance(node, ast.BinOp):
        left = _eval_node(node.left, env, source)
        right = _eval_node(node.right, env, source)
        try:
            return _BINARY_OPS[type(node.op)](left, right)
        except ZeroDivisionError as e:
            raise ExpressionError(f"division by zero in {source!r}") from e
    if isinstance(node, ast.UnaryOp):
        operand = _eval_node(node.operand, env, source)
        return -operand if isinstance(node.op, ast.USub) else operand
    assert isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
    args = [_eval_node(a, env, source) for a in node.args]
    return float(_FUNCTIONS[node.func.id](*args))


@dataclass(frozen=True)
class BoundReformulation:
    """Replace `target` by lerp(alpha, lower, upper) over a free design parameter."""

    target: str
    alpha_name: str
    lower_expr: str
    upper_expr: str
    integer: bool = False
    lower: Expression = field(init=False, repr=False, compare=False)
    upper: Expression = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "lower", Expression.parse(self.lower_expr))
        object.__setattr__(self, "upper", Expression.parse(self.upper_expr))

    @property
    def names(self) -> frozenset[str]:
        return self.lower.names | self.upper.names


def apply_reformulation(
    reform: BoundReformulation, alpha: float, context: Mapping[str, Value]
) -> float | int:
    """Concrete target value for `alpha` in the given context.

    Integer targets are rounded half to even and kept inside
    [ceil(lb), floor(ub)].

    Raises:
        InfeasibleContextError: If the evaluated interval is empty
    """
    if not 0.0 <= alpha <= 1.0:
        raise EncodingError(f"alpha for '{reform.target}' must lie in [0, 1], got {alpha}")
    lb = reform.lower.evaluate(context)
    ub = reform.upper.evaluate(context)
    if lb > ub:
        raise InfeasibleContextError(
            f"'{reform.target}': lower bound {lb} exceeds upper bound {ub}"
        )
    value = lb + alpha * (ub - lb)
    if not reform.integer:
        return value
    lo_int, hi_int = math.ceil(lb), math.floor(ub)
    if lo_int > hi_int:
        raise InfeasibleContextError(
            f"'{reform.target}': no integer in [{lb}, {ub}]"
        )
    return int(min(max(int(np.rint(value)), lo_int), hi_int))


def check_reformulations(space: ParameterSpace, reforms: Sequence[BoundReformulation]) -> None:
    """Static checks: alpha parameters exist and are real design params in [0,1]; names resolve."""
    known = set(space.names)
    alphas = set()
    for reform in reforms:
        if reform.alpha_name not in known:
            raise ExpressionError(f"alpha parameter '{reform.alpha_name}' is not declared")
        spec = space[reform.alpha_name]
        if spec.kind != ParamKind.REAL or spec.role != Role.DESIGN:
            raise ExpressionError(
                f"alpha parameter '{reform.alpha_name}' must be a real design parameter"
            )
        if spec.low != 0.0 or spec.high != 1.0:
            raise ExpressionError(f"alpha parameter '{reform.alpha_name}' must have bounds [0, 1]")
        if reform.alpha_name in alphas:
            raise ExpressionError(f"alpha parameter '{reform.alpha_name}' used twice")
        if reform.target in known:
            raise ExpressionError(f"target '{reform.target}' collides with a declared parameter")
        alphas.add(reform.alpha_name)

    # Reformulations resolve in order, so a later bound may use an earlier target
    available = known - alphas
    for reform in reforms:
        unknown = reform.names - available
        if unknown:
            raise ExpressionError(
                f"bounds of '{reform.target}' reference unknown names {sorted(unknown)}"
            )
        available.add(reform.target)


def resolve(
    space: ParameterSpace,
    reforms: Sequence[BoundReformulation],
    config: Sequence[Value],
) -> dict[str, Value]:
    """Ordered name -> value mapping handed to the kernel.

    Each alpha parameter is replaced in place by its resolved target.
    """
    env: dict[str, Value] = {}
    alpha_of = {r.alpha_name: r for r in reforms}
    for spec, value in zip(space.params, config, strict=True):
        if spec.name not in alpha_of:
            env[spec.name] = value

    resolved: dict[str, Value] = {}
    for reform in reforms:
        alpha = float(config[space.index(reform.alpha_name)])
        resolved[reform.target] = apply_reformulation(reform, alpha, env)
        env[reform.target] = resolved[reform.target]

    out: dict[str, Value] = {}
    for spec, value in zip(space.params, config, strict=True):
        if spec.name in alpha_of:
            target = alpha_of[spec.name].target
            out[target] = resolved[target]
        else:
            out[spec.name] = value
    return out
