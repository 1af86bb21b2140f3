"""Run manifests: what a command was asked to do and what it read and wrote."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _jsonable(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "value") and not isinstance(value, (int, float, str, bool)):
        return value.value
    return value


@dataclass
class RunManifest:
    """
    Record of one command invocation.

    Holds no timestamps, so two runs with the same flags and inputs produce
    identical manifests.
    """

    command: str
    arguments: dict[str, Any]
    version: str
    seed: int | None = None
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)

    def add_input(self, path: str | Path) -> None:
        self.inputs[str(path)] = sha256_file(path)

    def add_output(self, path: str | Path | None) -> None:
        if path is not None:
            self.outputs.append(str(path))

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "arguments": {k: _jsonable(v) for k, v in sorted(self.arguments.items())},
            "seed": self.seed,
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": list(self.outputs),
            "version": self.version,
        }

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path


def manifest_path(primary_output: str | Path) -> Path:
    """``out.rtnf`` -> ``out.rtnf.manifest.json``."""
    primary_output = Path(primary_output)
    return primary_output.with_name(primary_output.name + ".manifest.json")
