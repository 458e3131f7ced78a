"""C source emission for tuning trees.

Each design parameter becomes a pure function
`double <prefix>_<param>(double x0, ..., double x{k-1})` built from nested
if/else on `x_i <= threshold`. Thresholds and leaf values are printed with 17
significant digits so the compiled comparisons match the Python ones exactly.
"""

import re

from app.codegen.trees import DecisionTreeModel, TuningTrees, leaf_output
from app.core.exceptions import CodegenError
from app.space.params import ParameterSpec, label_text
from app.surrogate.tree import TreeNode

_INDENT = "    "


def sanitize(name: str) -> str:
    """Turn an arbitrary name into a C identifier."""
    ident = re.sub(r"[^0-9A-Za-z_]", "_", name)
    if not ident or ident[0].isdigit():
        ident = "_" + ident
    return ident


def c_double(value: float) -> str:
    text = format(value, ".17g")
    if text in ("inf", "-inf", "nan"):
        raise CodegenError(f"cannot emit non-finite constant {value}")
    return text


def _emit_node(node: TreeNode, spec: ParameterSpec, depth: int, lines: list[str]) -> None:
    pad = _INDENT * depth
    if node.is_leaf:
        lines.append(f"{pad}return {c_double(leaf_output(spec, node.value))};")
        return
    if node.left_codes is not None:
        raise CodegenError("category-subset splits cannot appear in tuning trees")
    assert node.left is not None and node.right is not None
    lines.append(f"{pad}if (x{node.feature} <= {c_double(node.threshold)}) {{")
    _emit_node(node.left, spec, depth + 1, lines)
    lines.append(f"{pad}}} else {{")
    _emit_node(node.right, spec, depth + 1, lines)
    lines.append(f"{pad}}}")


def _header(trees: TuningTrees, prefix: str) -> list[str]:
    inputs = trees.input_space.params
    lines = ["/*", f" * Tuning trees ({prefix}).", " *", " * Inputs:"]
    for i, spec in enumerate(inputs):
        lines.append(f" *   x{i} = {spec.name} ({spec.kind.value})")
    tables = [s for s in (*inputs, *trees.design_space.params) if s.is_categorical]
    if tables:
        lines += [" *", " * Category codes:"]
        for spec in tables:
            codes = ", ".join(f"{c}={label_text(label)}" for c, label in enumerate(spec.labels))
            lines.append(f" *   {spec.name}: {codes}")
    lines.append(" */")
    return lines


def emit_function(
    tree: DecisionTreeModel, spec: ParameterSpec, name: str, n_inputs: int
) -> list[str]:
    args = ", ".join(f"double x{i}" for i in range(n_inputs))
    lines = [f"double {name}({args})", "{"]
    body: list[str] = []
    _emit_node(tree.root, spec, 1, body)
    # Unused inputs would otherwise trigger -Wunused-parameter
    used = _used_features(tree.root)
    lines += [f"{_INDENT}(void)x{i};" for i in range(n_inputs) if i not in used]
    lines += body
    lines.append("}")
    return lines


def _used_features(node: TreeNode) -> set[int]:
    if node.is_leaf:
        return set()
    assert node.left is not None and node.right is not None
    return {node.feature} | _used_features(node.left) | _used_features(node.right)


def emit_c(trees: TuningTrees, symbol_prefix: str) -> str:
    """Self-contained C source, one function per design parameter.

    Raises:
        CodegenError: If two functions sanitize to the same identifier
    """
    prefix = sanitize(symbol_prefix)
    n_inputs = len(trees.input_space)
    design = trees.design_space.params

    names: dict[str, str] = {}
    for spec in design:
        ident = f"{prefix}_{sanitize(spec.name)}"
        if ident in names:
            raise CodegenError(
                f"identifier collision: '{spec.name}' and '{names[ident]}' both map to {ident}"
            )
        names[ident] = spec.name

    lines = _header(trees, prefix)
    for (ident, _), spec, tree in zip(names.items(), design, trees.trees, strict=True):
        lines.append("")
        if spec.is_categorical:
            lines.append(f"/* {spec.name}: returns the category code */")
        lines += emit_function(tree, spec, ident, n_inputs)
    return "\n".join(lines) + "\n"
