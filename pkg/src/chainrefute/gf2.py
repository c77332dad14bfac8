"""Linear algebra over F2 (packed int bitsets) and small prime fields."""

from __future__ import annotations

from typing import List, Sequence, Tuple


def gf2_rank(rows: Sequence[int], n_cols: int) -> int:
    """Rank over GF(2) via elimination on int bitsets."""
    work = [r for r in rows if r]
    rank = 0
    pivots: List[int] = []
    for row in work:
        cur = row
        for p in pivots:
            low = p & -p
            if cur & low:
                cur ^= p
        if cur:
            pivots.append(cur)
            rank += 1
    return rank


def gf2_kernel_basis(rows: Sequence[int], n_cols: int) -> List[int]:
    """Basis (as bitmasks) of {x : row . x = 0 mod 2 for every row}."""
    # Reduce to row echelon form, tracking pivot columns.
    work = [r for r in rows if r]
    pivot_col: List[int] = []
    echelon: List[int] = []
    for row in work:
        cur = row
        for col, er in zip(pivot_col, echelon):
            if (cur >> col) & 1:
                cur ^= er
        if cur == 0:
            continue
        col = (cur & -cur).bit_length() - 1
        echelon.append(cur)
        pivot_col.append(col)
    # Back-substitute so each pivot column appears in exactly one row.
    order = sorted(range(len(echelon)), key=lambda i: pivot_col[i])
    echelon = [echelon[i] for i in order]
    pivot_col = [pivot_col[i] for i in order]
    for i in range(len(echelon)):
        for j in range(i):
            if (echelon[j] >> pivot_col[i]) & 1:
                echelon[j] ^= echelon[i]
    pivot_set = set(pivot_col)
    free_cols = [c for c in range(n_cols) if c not in pivot_set]
    basis: List[int] = []
    for fc in free_cols:
        vec = 1 << fc
        for col, er in zip(pivot_col, echelon):
            if (er >> fc) & 1:
                vec |= 1 << col
        basis.append(vec)
    return basis


def mask_to_vector(mask: int, n: int) -> Tuple[int, ...]:
    return tuple((mask >> i) & 1 for i in range(n))


def vector_to_mask(vec: Sequence[int]) -> int:
    m = 0
    for i, v in enumerate(vec):
        if v % 2:
            m |= 1 << i
    return m


def modp_kernel_basis(rows: Sequence[Sequence[int]], n_cols: int, p: int) -> List[Tuple[int, ...]]:
    """Kernel basis of a small dense system over F_p (p prime)."""
    work = [list(r) for r in rows if any(v % p for v in r)]
    for r in work:
        for i in range(n_cols):
            r[i] %= p
    pivot_col: List[int] = []
    echelon: List[List[int]] = []
    for row in work:
        cur = row[:]
        for col, er in zip(pivot_col, echelon):
            f = cur[col]
            if f:
                for i in range(n_cols):
                    cur[i] = (cur[i] - f * er[i]) % p
        col = next((i for i in range(n_cols) if cur[i]), None)
        if col is None:
            continue
        inv = pow(cur[col], p - 2, p)
        cur = [(v * inv) % p for v in cur]
        echelon.append(cur)
        pivot_col.append(col)
    order = sorted(range(len(echelon)), key=lambda i: pivot_col[i])
    echelon = [echelon[i] for i in order]
    pivot_col = [pivot_col[i] for i in order]
    for i in range(len(echelon)):
        for j in range(i):
            f = echelon[j][pivot_col[i]]
            if f:
                for c in range(n_cols):
                    echelon[j][c] = (echelon[j][c] - f * echelon[i][c]) % p
    pivot_set = set(pivot_col)
    free_cols = [c for c in range(n_cols) if c not in pivot_set]
    basis: List[Tuple[int, ...]] = []
    for fc in free_cols:
        vec = [0] * n_cols
        vec[fc] = 1
        for col, er in zip(pivot_col, echelon):
            vec[col] = (-er[fc]) % p
        basis.append(tuple(vec))
    return basis
