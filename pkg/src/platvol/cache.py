"""Content-addressed result cache and the serialized record formats.

A run is keyed by the SHA-256 of the canonical JSON of its manifest (plat
text, config snapshot, tool version, seed).  Records are written once per
hash via a temp-file rename, and verified against the stored hash and
schema version on load; a corrupt file triggers recomputation with a
warning rather than an error.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import warnings
from dataclasses import dataclass, field

from . import __version__
from .errors import CorruptCache

SCHEMA_VERSION = 1


def canonical_json(obj) -> str:
    """Deterministic serialization: sorted keys, fixed separators, floats
    at 17 significant digits (shortest round-trip exceeds this only in
    pathological cases)."""
    return json.dumps(_canonical(obj), sort_keys=True, separators=(",", ":"))


def _canonical(obj):
    if isinstance(obj, float):
        return float(format(obj, ".17g"))
    if isinstance(obj, dict):
        return {k: _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    return obj


@dataclass(frozen=True)
class RunManifest:
    """Everything that determines a run's output."""

    plat_text: str
    config: dict
    version: str = __version__
    seed: int = 0

    def content_hash(self) -> str:
        body = canonical_json(
            {
                "plat": self.plat_text,
                "config": self.config,
                "version": self.version,
                "seed": self.seed,
            }
        )
        return hashlib.sha256(body.encode()).hexdigest()


def arc_record(arc, integral=None) -> dict:
    """Serializable form of a traced arc."""
    samples = [
        {
            "theta_m": s.theta_m,
            "meridian_trace": s.point.trace,
            "invariant_traces": list(s.point.invariants),
            "omega_dtheta": s.omega,
            "sign": s.sign,
            "residual": s.point.residual,
        }
        for s in arc.samples
    ]
    rec = {
        "schema": SCHEMA_VERSION,
        "samples": samples,
        "endpoints": {
            "lo": {"kind": arc.lo.kind, "theta": arc.lo.theta, "measure": arc.lo.measure},
            "hi": {"kind": arc.hi.kind, "theta": arc.hi.theta, "measure": arc.hi.measure},
        },
    }
    if integral is not None:
        rec["integral"] = {
            "value": integral.value,
            "error": integral.error,
            "divergent": integral.divergent,
        }
    return rec


class ResultCache:
    """Write-once JSON store under a directory, one file per content hash."""

    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)

    def _path(self, digest: str) -> str:
        return os.path.join(self.root, f"{digest}.json")

    def store(self, manifest: RunManifest, records) -> str:
        digest = manifest.content_hash()
        path = self._path(digest)
        if os.path.exists(path):
            return digest
        payload = {
            "schema": SCHEMA_VERSION,
            "hash": digest,
            "manifest": {
                "plat": manifest.plat_text,
                "config": manifest.config,
                "version": manifest.version,
                "seed": manifest.seed,
            },
            "records": records,
        }
        body = canonical_json(payload)
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(body)
            os.replace(tmp, path)  # atomic publish
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return digest

    def load(self, manifest: RunManifest):
        """Returns the cached records or None on a miss.  Raises
        CorruptCache when the stored payload fails verification."""
        digest = manifest.content_hash()
        path = self._path(digest)
        if not os.path.exists(path):
            return None
        with open(path) as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as err:
                raise CorruptCache(f"unparseable cache file {path}: {err}") from err
        if payload.get("schema") != SCHEMA_VERSION:
            raise CorruptCache(f"schema {payload.get('schema')} != {SCHEMA_VERSION}")
        if payload.get("hash") != digest:
            raise CorruptCache("stored hash does not match the manifest")
        return payload["records"]

    def load_or_warn(self, manifest: RunManifest):
        """Cache read that degrades to a miss (with a warning) when the
        stored file is corrupt."""
        try:
            return self.load(manifest)
        except CorruptCache as err:
            warnings.warn(f"ignoring corrupt cache entry: {err}")
            return None
