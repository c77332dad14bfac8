"""t-chain hypergraphs: iterated compositions of local-correction constraints.

A t-chain (u, C_1, w_1, ..., C_t, w_t) strings together t constraints through
pivot variables; the edge C_h + {w_h} must belong to H at the negation of the
previous pivot (plain H_{w_{h-1}} over F2). Chains are stored as flat integer
tuples (u, c_h low, c_h high, w_h, ...) whose lexicographic order is the
canonical order used everywhere a deterministic "arbitrary choice" is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .instances import MatchingFamily
from .util import BudgetError

ChainEnc = Tuple[int, ...]

STAR = None  # pattern wildcard

DEFAULT_MAX_CHAINS = 2_000_000


def chain_head(ch: ChainEnc) -> int:
    return ch[0]


def chain_t(ch: ChainEnc) -> int:
    return (len(ch) - 1) // 3


def chain_link(ch: ChainEnc, h: int) -> Tuple[Tuple[int, int], int]:
    """(C_h, w_h) for 1-based h."""
    base = 1 + 3 * (h - 1)
    return (ch[base], ch[base + 1]), ch[base + 2]


def chain_tail(ch: ChainEnc) -> int:
    return ch[-1] if len(ch) > 1 else ch[0]


def chain_pivots(ch: ChainEnc) -> List[int]:
    return [ch[3 * h] for h in range(1, chain_t(ch) + 1)]


def chain_suffix(ch: ChainEnc, s: int) -> ChainEnc:
    """The length-s suffix chain (w_{t-s}, C_{t-s+1}, ..., w_t)."""
    t = chain_t(ch)
    if s == t:
        return ch
    head = ch[3 * (t - s)] if s < t else ch[0]
    return (head,) + ch[1 + 3 * (t - s) :]


def validate_chain(fam: MatchingFamily, ch: ChainEnc) -> bool:
    t = chain_t(ch)
    prev = ch[0]
    for h in range(1, t + 1):
        (c, w) = chain_link(ch, h)
        if w in c or c[0] == c[1]:
            return False
        edge = tuple(sorted((c[0], c[1], w)))
        if edge not in fam.edge_set(fam.nu(prev)):
            return False
        prev = w
    return True


@dataclass
class Pattern:
    """Length t+1 tuple over vertices and stars; the last entry is the tail."""

    entries: Tuple[Optional[int], ...]

    def __post_init__(self):
        if len(self.entries) < 1 or self.entries[-1] is STAR:
            raise ValueError("pattern must end in a concrete tail vertex")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def size(self) -> int:
        return sum(1 for e in self.entries if e is not STAR)

    @property
    def contiguous(self) -> bool:
        seen_concrete = False
        for e in self.entries:
            if e is STAR and seen_concrete:
                return False
            if e is not STAR:
                seen_concrete = True
        return True

    def key(self) -> Tuple:
        return self.entries

    def render(self) -> str:
        return ",".join("*" if e is STAR else str(e) for e in self.entries)

    @classmethod
    def parse(cls, text: str) -> "Pattern":
        return cls(tuple(STAR if p == "*" else int(p) for p in text.split(",")))


def contains(ch: ChainEnc, pattern: Pattern) -> bool:
    """Chain membership: tail must equal the last entry, others must lie in C_h."""
    t = chain_t(ch)
    if len(pattern) != t + 1:
        raise ValueError(f"pattern length {len(pattern)} does not match t+1={t + 1}")
    if chain_tail(ch) != pattern.entries[-1]:
        return False
    for h in range(1, t + 1):
        q = pattern.entries[h - 1]
        if q is not STAR:
            c, _ = chain_link(ch, h)
            if q != c[0] and q != c[1]:
                return False
    return True


@dataclass
class ChainSet:
    """All t-chains of a family, canonically sorted, with lazy position indexes."""

    fam: MatchingFamily
    t: int
    chains: Tuple[ChainEnc, ...]
    _by_head: Optional[Dict[int, List[int]]] = field(default=None, repr=False)
    _pos_index: Dict[Tuple[int, int], List[int]] = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.chains)

    def by_head(self) -> Dict[int, List[int]]:
        if self._by_head is None:
            idx: Dict[int, List[int]] = {}
            for i, ch in enumerate(self.chains):
                idx.setdefault(ch[0], []).append(i)
            self._by_head = idx
        return self._by_head

    def _position_ids(self, pos: int, v: int) -> List[int]:
        """Chain ids matching vertex v at pattern position pos (1-based)."""
        key = (pos, v)
        if key not in self._pos_index:
            hits: List[int] = []
            if pos == self.t + 1:
                for i, ch in enumerate(self.chains):
                    if chain_tail(ch) == v:
                        hits.append(i)
            else:
                base = 1 + 3 * (pos - 1)
                for i, ch in enumerate(self.chains):
                    if ch[base] == v or ch[base + 1] == v:
                        hits.append(i)
            self._pos_index[key] = hits
        return self._pos_index[key]

    def enumerate_containing(self, pattern: Pattern) -> List[ChainEnc]:
        if len(pattern) != self.t + 1:
            raise ValueError(
                f"pattern length {len(pattern)} does not match t+1={self.t + 1}"
            )
        concrete = [
            (pos + 1, v) for pos, v in enumerate(pattern.entries) if v is not STAR
        ]
        # Start from the tail position (always concrete), intersect the rest.
        pos0, v0 = concrete[-1]
        ids = set(self._position_ids(pos0, v0))
        for pos, v in concrete[:-1]:
            ids &= set(self._position_ids(pos, v))
            if not ids:
                break
        return [self.chains[i] for i in sorted(ids)]


def count_chains(fam: MatchingFamily, t: int) -> Tuple[int, List[int]]:
    """Exact chain counts (total, per-head) by DP over suffix heads."""
    counts = [1] * fam.n
    for _ in range(t):
        nxt = [0] * fam.n
        for u in range(fam.n):
            total = 0
            for e in fam.matchings[fam.nu(u)]:
                for w in e:
                    total += counts[w]
            nxt[u] = total
        counts = nxt
    return sum(counts), counts


def build_chains(
    fam: MatchingFamily, t: int, max_chains: int = DEFAULT_MAX_CHAINS
) -> ChainSet:
    """Materialize every valid t-chain, canonically sorted."""
    if t < 0:
        raise ValueError("t must be >= 0")
    total, _ = count_chains(fam, t)
    if total > max_chains:
        raise BudgetError("chains", "chain count exceeds budget", count=total, budget=max_chains)
    level: List[ChainEnc] = [(w,) for w in range(fam.n)]
    for _ in range(t):
        level = _extend_encodings(fam, level)
    return ChainSet(fam=fam, t=t, chains=tuple(sorted(level)))


def _extend_encodings(fam: MatchingFamily, chains: Iterable[ChainEnc]) -> List[ChainEnc]:
    by_pivot = fam.links_by_pivot()
    out: List[ChainEnc] = []
    for ch in chains:
        w = ch[0]
        for (u, c) in by_pivot.get(w, ()):
            out.append((u, c[0], c[1]) + ch)
    return out


def extend(
    fam: MatchingFamily, cs: ChainSet, max_chains: int = DEFAULT_MAX_CHAINS
) -> ChainSet:
    """One composition step: equals build_chains(fam, t+1) as a set."""
    per_head_new = [0] * fam.n
    heads = cs.by_head()
    by_pivot = fam.links_by_pivot()
    for w, ids in heads.items():
        per_head_new_links = len(by_pivot.get(w, ()))
        for (u, _) in by_pivot.get(w, ()):
            per_head_new[u] += len(ids)
    total = sum(per_head_new)
    if total > max_chains:
        raise BudgetError("chains", "extension exceeds budget", count=total, budget=max_chains)
    out = _extend_encodings(fam, cs.chains)
    return ChainSet(fam=fam, t=cs.t + 1, chains=tuple(sorted(out)))


def chain_parity(fam: MatchingFamily, ch: ChainEnc) -> Tuple[int, ...]:
    """Coefficient vector of the derived linear constraint, over the field.

    The chain's constraints, combined with alternating signs, telescope the
    pivots away; over F2 this reduces to the indicator of {u, w_t} and all
    C_h, mod 2. Every solution-space vector is orthogonal to the result.
    """
    p = fam.field_char
    coeff = [0] * fam.n
    t = chain_t(ch)
    prev = ch[0]
    sign = 1
    for h in range(1, t + 1):
        (c, w) = chain_link(ch, h)
        coeff[fam.nu(prev)] = (coeff[fam.nu(prev)] + sign) % p
        for v in c:
            coeff[v] = (coeff[v] - sign) % p
        coeff[w] = (coeff[w] - sign) % p
        prev = w
        sign = -sign
    return tuple(v % p for v in coeff)


def parity_support(fam: MatchingFamily, ch: ChainEnc) -> Tuple[int, ...]:
    """F2 support of chain_parity: {u, w_t} plus all C_h, reduced mod 2."""
    acc: set = set()
    t = chain_t(ch)
    for v in (ch[0], chain_tail(ch)) if t else ():
        acc ^= {v}
    for h in range(1, t + 1):
        (c, _) = chain_link(ch, h)
        acc ^= {c[0]}
        acc ^= {c[1]}
    return tuple(sorted(acc))


def dump_chains(cs: ChainSet) -> str:
    """Golden-file format: one canonical space-separated encoding per line."""
    return "\n".join(" ".join(map(str, ch)) for ch in cs.chains) + ("\n" if cs.chains else "")
