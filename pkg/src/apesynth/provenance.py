"""Provenance sidecars for emitted artifacts.

Every CLI-produced file gets a ``<file>.prov.json`` sidecar recording the tool
version, a normalized command line, the seed, and digests of all inputs and
of the artifact itself. Execution-only flags (worker count, batch size,
timeouts) are stripped from the recorded command line: they cannot affect
artifact bytes, so identical inputs and seed always reproduce identical
provenance.
"""

from __future__ import annotations

import hashlib
import json
from importlib import metadata

TOOL_NAME = "apesynth"

_EXECUTION_FLAGS = {"--threads", "--batch-size", "--timeout"}


def tool_version() -> str:
    try:
        return metadata.version(TOOL_NAME)
    except metadata.PackageNotFoundError:
        return "unknown"


def file_digest(path: str) -> str:
    """sha256 hex digest of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def normalized_command(argv: list[str]) -> list[str]:
    """argv with execution-only flags (and their values) removed."""
    out: list[str] = []
    skip = False
    for arg in argv:
        if skip:
            skip = False
            continue
        name = arg.split("=", 1)[0]
        if name in _EXECUTION_FLAGS:
            skip = "=" not in arg
            continue
        out.append(arg)
    return out


def write_sidecar(
    artifact_path: str,
    argv: list[str],
    seed: int | None,
    input_paths: list[str],
) -> str:
    """Write the sidecar next to the artifact; returns the sidecar path."""
    doc = {
        "tool": TOOL_NAME,
        "version": tool_version(),
        "command": normalized_command(argv),
        "seed": seed,
        "inputs": {p: file_digest(p) for p in sorted(set(input_paths))},
        "artifact": {artifact_path: file_digest(artifact_path)},
    }
    sidecar = artifact_path + ".prov.json"
    with open(sidecar, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return sidecar
