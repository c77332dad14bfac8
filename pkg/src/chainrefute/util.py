"""Shared plumbing: seed derivation, budgets, subset rank/unrank."""

from __future__ import annotations

import hashlib
from math import comb
from typing import Iterable, List, Sequence, Tuple


class BudgetError(RuntimeError):
    """A stage would exceed its configured memory/size budget."""

    def __init__(self, stage: str, message: str, **counts):
        self.stage = stage
        self.counts = counts
        detail = ", ".join(f"{k}={v}" for k, v in counts.items())
        super().__init__(f"[{stage}] {message}" + (f" ({detail})" if detail else ""))


def derive_seed(seed: int, label: str) -> int:
    """Fan a master seed out to a labeled 64-bit sub-seed, reproducibly."""
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def subset_rank(subset: Sequence[int]) -> int:
    """Colexicographic rank of a sorted subset (combinatorial number system)."""
    return sum(comb(v, i + 1) for i, v in enumerate(subset))


def subset_unrank(rank: int, ell: int) -> Tuple[int, ...]:
    """Inverse of subset_rank for subsets of size ell."""
    out: List[int] = []
    rem = rank
    for i in range(ell, 0, -1):
        # largest v with C(v, i) <= rem
        lo, hi = i - 1, i
        while comb(hi, i) <= rem:
            hi *= 2
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if comb(mid, i) <= rem:
                lo = mid
            else:
                hi = mid
        out.append(lo)
        rem -= comb(lo, i)
    out.reverse()
    return tuple(out)


def tuple_rank(sets: Sequence[Sequence[int]], n: int, ell: int) -> int:
    """Rank a tuple of ell-subsets of [n]: big-endian mixed radix, base C(n, ell)."""
    base = comb(n, ell)
    r = 0
    for s in sets:
        r = r * base + subset_rank(s)
    return r


def tuple_unrank(rank: int, width: int, n: int, ell: int) -> Tuple[Tuple[int, ...], ...]:
    base = comb(n, ell)
    parts: List[Tuple[int, ...]] = []
    rem = rank
    for _ in range(width):
        rem, r = divmod(rem, base)
        parts.append(subset_unrank(r, ell))
    parts.reverse()
    return tuple(parts)


def stable_json_value(obj):
    """Round-trip helper: make tuples/sets JSON-friendly deterministically."""
    if isinstance(obj, dict):
        return {str(k): stable_json_value(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [stable_json_value(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(stable_json_value(v) for v in obj)
    if isinstance(obj, float) and obj == int(obj) and abs(obj) < 2**53:
        return obj
    return obj


def popcount_parity(mask: int) -> int:
    return mask.bit_count() & 1


def masks_from_supports(supports: Iterable[Sequence[int]]) -> List[int]:
    out = []
    for sup in supports:
        m = 0
        for v in sup:
            m |= 1 << v
        out.append(m)
    return out
