"""Configs shipped with the package: grammars, a sample course manifest,
and a sample peer directory."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def path(name: str) -> Path:
    """Filesystem path of a shipped data file, e.g. ``splach.grammar.json``."""
    p = resources.files(__package__) / name
    return Path(str(p))


def grammar_path(name: str) -> Path:
    return path(f"{name}.grammar.json")


def manifest_path() -> Path:
    return path("course.manifest.json")


def directory_path() -> Path:
    return path("directory.sample.json")
