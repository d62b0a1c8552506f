"""Versioned JSON for results and persisted run configurations."""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict

import mpmath
import numpy as np

from .circle import Angle, BinarySequence, RotationNumber
from .errors import SchemaMismatch

SCHEMA_VERSION = 1


def to_jsonable(x: Any) -> Any:
    """Plain JSON types; exact angles become "a/b" strings, complex numbers [re, im]."""
    if isinstance(x, (str, bool, int)) or x is None:
        return x
    if isinstance(x, float):
        # JSON has no infinities; the point at infinity is spelled out
        return x if math.isfinite(x) else str(x)
    if isinstance(x, complex):
        if cmath.isinf(x):
            return "inf"
        return [to_jsonable(x.real), to_jsonable(x.imag)]
    if isinstance(x, (Angle, RotationNumber, BinarySequence, Fraction)):
        return str(x)
    if isinstance(x, np.generic):
        return to_jsonable(x.item())
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 30)
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if hasattr(x, "to_dict"):
        return to_jsonable(x.to_dict())
    raise TypeError("no JSON form for %r" % (x,))


def emit_json(result: Any, kind: str = "result") -> bytes:
    doc = {"version": SCHEMA_VERSION, "kind": kind, "data": to_jsonable(result)}
    return (json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n").encode()


def load_json(raw: bytes, kind: str = None) -> Any:
    doc = json.loads(raw)
    _check_version(doc)
    if kind is not None and doc.get("kind") != kind:
        raise SchemaMismatch("expected a %r document, got %r" % (kind, doc.get("kind")))
    return doc["data"]


def _check_version(doc) -> None:
    if not isinstance(doc, dict) or "version" not in doc:
        raise SchemaMismatch("missing version field")
    if doc["version"] != SCHEMA_VERSION:
        raise SchemaMismatch("schema version %r, this build reads %d" % (doc["version"], SCHEMA_VERSION))


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation: the subcommand and its parameters, all JSON-native."""
    command: str
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"command": self.command, "params": to_jsonable(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if "command" not in d:
            raise SchemaMismatch("run config lacks a command")
        return cls(d["command"], dict(d.get("params", {})))


def save_config(cfg: RunConfig, path) -> Path:
    path = Path(path)
    path.write_bytes(emit_json(cfg.to_dict(), kind="run-config"))
    return path


def load_config(path) -> RunConfig:
    return RunConfig.from_dict(load_json(Path(path).read_bytes(), kind="run-config"))
