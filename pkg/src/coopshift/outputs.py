"""Atomic CSV/JSON emission and run manifests."""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import CoopShiftError


class OutputError(CoopShiftError, OSError):
    pass


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_atomic(path, text: str) -> Path:
    """Write `text` to `path` via a temporary file and rename."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None
    return path


def to_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


@dataclass
class RunManifest:
    tool_version: str
    command: str
    seed: int | None
    config: dict
    started: str = field(default_factory=utc_now)
    finished: str | None = None
    outputs: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "command": self.command,
            "seed": self.seed,
            "config": self.config,
            "started": self.started,
            "finished": self.finished,
            "outputs": list(self.outputs),
        }


def emit_outputs(out_dir, files: dict, manifest: RunManifest, manifest_name: str = "manifest.json") -> list[Path]:
    """Write each ``name -> text`` entry of `files` atomically, then the manifest listing them."""
    out_dir = Path(out_dir)
    written = []
    for name, text in files.items():
        written.append(write_atomic(out_dir / name, text))
        manifest.outputs.append(name)
    manifest.finished = utc_now()
    written.append(write_atomic(out_dir / manifest_name, to_json(manifest.as_dict())))
    return written
