"""Run manifests: enough provenance to rerun a command bit-for-bit and detect tampering."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

from urcminer import __version__


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_atomic(path, data: str | bytes) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if isinstance(data, bytes) else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def pipeline_manifest(config: dict, inputs: dict, outputs: dict, seeds: dict | None = None) -> dict:
    record = {
        "tool": "urcminer",
        "version": __version__,
        "config": config,
        "config_hash": sha256_text(canonical(config)),
        "inputs": {k: {"path": str(p), "sha256": sha256_file(p)} for k, p in sorted(inputs.items()) if p},
        "outputs": {k: {"path": str(p), "sha256": sha256_file(p)} for k, p in sorted(outputs.items()) if p},
        "seeds": seeds or {},
    }
    record["digest"] = sha256_text(canonical(record))
    return record


def manifest_path(output) -> Path:
    return Path(str(output) + ".manifest.json")


def write_manifest(record: dict, output) -> Path:
    path = manifest_path(output)
    write_atomic(path, json.dumps(record, indent=2, sort_keys=True) + "\n")
    return path


def verify_manifest(record: dict) -> list[str]:
    """Human-readable mismatches; empty when every file and the digest check out."""
    problems = []
    body = {k: v for k, v in record.items() if k != "digest"}
    if sha256_text(canonical(body)) != record.get("digest"):
        problems.append("manifest digest does not match its contents")
    if sha256_text(canonical(record.get("config", {}))) != record.get("config_hash"):
        problems.append("config hash does not match config")
    for section in ("inputs", "outputs"):
        for name, entry in record.get(section, {}).items():
            p = entry["path"]
            if not os.path.exists(p):
                problems.append(f"{section[:-1]} {name}: {p} is missing")
            elif sha256_file(p) != entry["sha256"]:
                problems.append(f"{section[:-1]} {name}: {p} digest mismatch")
    return problems
