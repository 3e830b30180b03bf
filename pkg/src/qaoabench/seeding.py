"""Deterministic, platform-independent seed derivation."""

import hashlib


def derive_seed(*parts) -> int:
    """Map a tuple of labels to a stable 64-bit seed via SHA-256."""
    text = ":".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")
