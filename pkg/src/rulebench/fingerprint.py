"""Content fingerprints for binding artifacts together.

A fingerprint is the SHA-256 hex digest of a canonical JSON rendering:
sorted keys, no whitespace, UTF-8. Sessions store the fingerprints of the
model and corpus they were built against so a stale pairing is detected at
load time instead of producing silently wrong metrics.
"""

from __future__ import annotations

import hashlib
import json


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def fingerprint_obj(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()
