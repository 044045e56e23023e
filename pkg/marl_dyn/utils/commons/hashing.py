"""Stable hashes and seed derivation."""

import hashlib
import json
from typing import Any

import numpy as np

CONFIG_HASH_LENGTH = 16


def config_hash(config_dict: dict[str, Any]) -> str:
    payload = json.dumps(config_dict, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:CONFIG_HASH_LENGTH]


def stable_int(value: Any) -> int:
    """Process-independent 63-bit integer for any JSON-serialisable value."""
    payload = json.dumps(value, sort_keys=True, separators=(",", ":"))
    return int.from_bytes(hashlib.sha256(payload.encode("utf-8")).digest()[:8], "big") >> 1


def derive_seed(*keys: int) -> int:
    """Derive an independent seed from a key path such as (base_seed, run_index)."""
    if any(key < 0 for key in keys):
        raise ValueError(f"Seed keys must be non-negative, got {keys}")
    state = np.random.SeedSequence(list(keys)).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 32) | int(state[1])
