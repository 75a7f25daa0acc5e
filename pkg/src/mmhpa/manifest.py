"""Run manifests: ``key = value`` text, one entry per line, ``#`` comments."""

from __future__ import annotations

import hashlib
from pathlib import Path

from .errors import KeyFormatError


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def format_manifest(entries: dict) -> str:
    lines = ["# mmhpa run manifest"]
    for key, value in entries.items():
        if "=" in key or "\n" in str(value):
            raise ValueError(f"cannot encode manifest entry {key!r}")
        lines.append(f"{key} = {'' if value is None else value}")
    return "\n".join(lines) + "\n"


def parse_manifest(text: str) -> dict:
    out = {}
    for num, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise KeyFormatError(f"manifest line {num} has no '='")
        out[key.strip()] = value.strip()
    return out


def write_manifest(path, entries: dict) -> None:
    Path(path).write_text(format_manifest(entries))


def read_manifest(path) -> dict:
    return parse_manifest(Path(path).read_text())
