"""Portable, versioned document for tuning trees.

Layout: {"format": "tuning-trees", "version": 1, "space": [...], "trees": [...]},
written with sorted keys so the same trees always produce the same bytes.
"""

import json
from pathlib import Path
from typing import Any

from app.codegen.trees import DecisionTreeModel, TreeKind, TuningTrees
from app.core.exceptions import TreeFormatError
from app.space.params import ParameterSpace, Role, subspace
from app.surrogate.tree import node_from_doc, node_to_doc

FORMAT = "tuning-trees"
VERSION = 1


def to_document(trees: TuningTrees) -> dict[str, Any]:
    return {
        "format": FORMAT,
        "version": VERSION,
        "space": trees.space.to_list(),
        "trees": [
            {
                "target": t.target,
                "kind": t.kind.value,
                "max_depth": t.max_depth,
                "root": node_to_doc(t.root),
            }
            for t in trees.trees
        ],
    }


def from_document(doc: Any) -> TuningTrees:
    """Rebuild tuning trees from their document.

    Raises:
        TreeFormatError: On a foreign format, another version or a malformed body
    """
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise TreeFormatError("not a tuning-trees document")
    if doc.get("version") != VERSION:
        raise TreeFormatError(f"unsupported tuning-trees version {doc.get('version')!r}")
    try:
        space = ParameterSpace.from_list(doc["space"])
        trees = tuple(
            DecisionTreeModel(
                target=str(t["target"]),
                kind=TreeKind(t["kind"]),
                max_depth=int(t["max_depth"]),
                root=node_from_doc(t["root"]),
            )
            for t in doc["trees"]
        )
    except (KeyError, TypeError, ValueError) as e:
        raise TreeFormatError(f"malformed tuning-trees document: {e}") from e

    design = subspace(space, Role.DESIGN).names
    if [t.target for t in trees] != design:
        raise TreeFormatError(f"trees cover {[t.target for t in trees]}, expected {design}")
    return TuningTrees(space, trees)


def dumps(trees: TuningTrees) -> str:
    return json.dumps(to_document(trees), sort_keys=True, indent=1) + "\n"


def loads(text: str) -> TuningTrees:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise TreeFormatError(f"malformed tuning-trees document: {e}") from e
    return from_document(doc)


def save_trees(trees: TuningTrees, path: Path) -> None:
    path.write_text(dumps(trees), encoding="utf-8")


def load_trees(path: Path) -> TuningTrees:
    return loads(path.read_text(encoding="utf-8"))
