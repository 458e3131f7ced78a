"""Tests for the tuning-trees document."""

import json

import pytest

from app.codegen.serialize import dumps, load_trees, loads, save_trees, to_document
from app.core.exceptions import TreeFormatError


class TestTreeDocument:
    """Tests for dumps/loads and file persistence."""

    def test_round_trip(self, step_trees):
        """Should reload structurally equal trees."""
        assert loads(dumps(step_trees)) == step_trees

    def test_bytes_are_stable(self, step_trees):
        """Should produce the same text after a reload."""
        text = dumps(step_trees)
        assert dumps(loads(text)) == text

    def test_file_round_trip(self, tmp_path, step_trees):
        """Should save and load through a file."""
        path = tmp_path / "trees.json"
        save_trees(step_trees, path)
        assert load_trees(path) == step_trees

    def test_wrong_version(self, step_trees):
        """Should reject other versions."""
        doc = to_document(step_trees)
        doc["version"] = 2
        with pytest.raises(TreeFormatError, match="version"):
            loads(json.dumps(doc))

    def test_foreign_format(self):
        """Should reject documents of another format."""
        with pytest.raises(TreeFormatError):
            loads(json.dumps({"format": "gbdt-model", "version": 1}))

    def test_targets_must_match_design(self, step_trees):
        """Should reject trees that do not cover the design parameters in order."""
        doc = to_document(step_trees)
        doc["trees"].reverse()
        with pytest.raises(TreeFormatError, match="expected"):
            loads(json.dumps(doc))

    def test_malformed_body(self, step_trees):
        """Should wrap missing fields in TreeFormatError."""
        doc = to_document(step_trees)
        del doc["trees"][0]["root"]
        with pytest.raises(TreeFormatError):
            loads(json.dumps(doc))

    def test_invalid_json(self):
        """Should wrap JSON syntax errors."""
        with pytest.raises(TreeFormatError):
            loads("{")
