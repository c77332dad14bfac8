"""Greedy contiguously regular partition of the r-chain hypergraph.

The decomposition grows chains one link at a time. After each extension it
scans complete patterns Q' = (u, Q) in ascending lexicographic order and,
while more than d^(|Q'|-1) chains of the freshly extended piece contain Q',
peels off exactly that many (smallest in canonical chain order) into a new
piece labeled (Q', p'). Both tie-breaking rules make reruns bit-identical.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .chains import (
    STAR,
    ChainEnc,
    ChainSet,
    Pattern,
    chain_link,
    chain_suffix,
    chain_t,
    contains,
)
from .instances import MatchingFamily
from .util import BudgetError, derive_seed

PieceKey = Tuple[Tuple[Optional[int], ...], int]  # (pattern entries, p)


@dataclass
class Partition:
    r: int
    d: int
    pieces: Dict[PieceKey, Tuple[ChainEnc, ...]]
    provenance: Dict[PieceKey, str] = field(default_factory=dict)

    def level_sets(self) -> Dict[int, List[PieceKey]]:
        """P_t: keys of nonempty pieces grouped by |Q| - 1."""
        out: Dict[int, List[PieceKey]] = {}
        for key, chains in self.pieces.items():
            if not chains:
                continue
            size = sum(1 for e in key[0] if e is not STAR)
            out.setdefault(size - 1, []).append(key)
        for t in out:
            out[t].sort(key=lambda k: (tuple(-1 if e is STAR else e for e in k[0]), k[1]))
        return out

    def total_chains(self) -> int:
        return sum(len(c) for c in self.pieces.values())

    def negated(self, fam: MatchingFamily) -> "Partition":
        """Image of the partition under the negation action."""
        nu = fam.negation

        def neg_chain(ch: ChainEnc) -> ChainEnc:
            out = [nu[ch[0]]]
            for h in range(1, chain_t(ch) + 1):
                (c, w) = chain_link(ch, h)
                a, b = sorted((nu[c[0]], nu[c[1]]))
                out.extend((a, b, nu[w]))
            return tuple(out)

        pieces = {}
        prov = {}
        for (entries, p), chains in self.pieces.items():
            ne = tuple(STAR if e is STAR else nu[e] for e in entries)
            pieces[(ne, p)] = tuple(sorted(neg_chain(ch) for ch in chains))
            prov[(ne, p)] = self.provenance.get((entries, p), "")
        return Partition(r=self.r, d=self.d, pieces=pieces, provenance=prov)

    def to_json_dict(self) -> dict:
        doc: Dict[str, dict] = {}
        for (entries, p), chains in sorted(
            self.pieces.items(),
            key=lambda kv: (tuple(-1 if e is STAR else e for e in kv[0][0]), kv[0][1]),
        ):
            name = Pattern(entries).render() + f"/{p}"
            doc[name] = {
                "chains": [list(ch) for ch in chains],
                "provenance": self.provenance.get((entries, p), ""),
            }
        return {"r": self.r, "d": self.d, "pieces": doc}


def trivial_partition(cs: ChainSet) -> Partition:
    """Tail-indexed baseline: piece (*, ..., *, w) holds every chain with tail w."""
    buckets: Dict[PieceKey, List[ChainEnc]] = {}
    r = cs.t
    for ch in cs.chains:
        tail = ch[-1] if len(ch) > 1 else ch[0]
        entries = (STAR,) * r + (tail,)
        buckets.setdefault((entries, 1), []).append(ch)
    pieces = {k: tuple(sorted(v)) for k, v in buckets.items()}
    return Partition(
        r=r, d=0, pieces=pieces, provenance={k: "trivial" for k in pieces}
    )


def decompose(cs: ChainSet, d: int, max_pieces: int = 500_000) -> Partition:
    """Iterative greedy fixing; the result is d-contiguously regular."""
    if d < 1:
        raise ValueError("d must be >= 1")
    fam = cs.fam
    r = cs.t
    by_pivot = fam.links_by_pivot()

    # Stage 0: one piece per tail vertex.
    pieces: Dict[PieceKey, List[ChainEnc]] = {
        ((w,), 1): [(w,)] for w in range(fam.n)
    }
    provenance: Dict[PieceKey, str] = {k: "initialize" for k in pieces}

    for t in range(1, r + 1):
        # (a) Extend every piece by prepending all admissible first links.
        new_pieces: Dict[PieceKey, List[ChainEnc]] = {}
        new_prov: Dict[PieceKey, str] = {}
        for (entries, p), chains in pieces.items():
            ext: List[ChainEnc] = []
            for ch in chains:
                w = ch[0]
                for (u, c) in by_pivot.get(w, ()):
                    ext.append((u, c[0], c[1]) + ch)
            if not ext:
                continue
            key = ((STAR,) + entries, p)
            new_pieces[key] = sorted(ext)
            prev = provenance[(entries, p)]
            new_prov[key] = prev if prev.startswith("greedy-fix") else "extend"
        pieces, provenance = new_pieces, new_prov
        if len(pieces) > max_pieces:
            raise BudgetError("partition", "piece count exceeds budget",
                              pieces=len(pieces), budget=max_pieces)

        # (b) Greedy fixing of complete patterns Q' = (u, Q).
        quota = d**t
        # Sources: pieces whose pattern is a single star followed by concretes.
        sources = [
            key
            for key in pieces
            if key[0][0] is STAR and all(e is not STAR for e in key[0][1:])
        ]
        # Candidate Q' values, ascending lex on the complete tuple (u, Q).
        candidates: set = set()
        for key in sources:
            q_tail = key[0][1:]
            for ch in pieces[key]:
                (c, _) = chain_link(ch, 1)
                candidates.add((c[0],) + q_tail)
                candidates.add((c[1],) + q_tail)
        for qprime in sorted(candidates):
            u, q_tail = qprime[0], qprime[1:]
            pprime = 1
            matching_sources = sorted(
                (k for k in sources if k[0][1:] == q_tail and k in pieces),
                key=lambda k: k[1],
            )
            for key in matching_sources:
                if key not in pieces:
                    continue
                while True:
                    residual = [
                        ch
                        for ch in pieces[key]
                        if u in chain_link(ch, 1)[0]
                    ]
                    if len(residual) <= quota:
                        break
                    moved = residual[:quota]
                    moved_set = set(moved)
                    pieces[key] = [ch for ch in pieces[key] if ch not in moved_set]
                    nk = (qprime, pprime)
                    pieces[nk] = list(moved)
                    provenance[nk] = f"greedy-fix@{t}"
                    pprime += 1
                if not pieces[key]:
                    del pieces[key]
                    del provenance[key]
        if len(pieces) > max_pieces:
            raise BudgetError("partition", "piece count exceeds budget",
                              pieces=len(pieces), budget=max_pieces)

    final = {k: tuple(sorted(v)) for k, v in pieces.items() if v}
    return Partition(
        r=r, d=d, pieces=final,
        provenance={k: provenance[k] for k in final},
    )


@dataclass
class PropertyResult:
    ok: bool
    detail: str = ""


@dataclass
class PartitionReport:
    properties: Dict[str, PropertyResult]
    level_counts: Dict[int, int]
    max_piece_size: int

    @property
    def ok(self) -> bool:
        return all(pr.ok for pr in self.properties.values())

    def summary_lines(self) -> List[str]:
        lines = []
        for name, pr in self.properties.items():
            status = "pass" if pr.ok else "FAIL"
            lines.append(f"{name}: {status}" + (f" ({pr.detail})" if pr.detail else ""))
        return lines


def verify_partition(
    part: Partition,
    cs: ChainSet,
    d: int,
    suffix_cap: int = 4,
    sample_trials: int = 64,
    seed: int = 0,
    check_negation: bool = True,
) -> PartitionReport:
    """Check the five defining properties plus both piece-size bounds."""
    fam = cs.fam
    r = cs.t
    props: Dict[str, PropertyResult] = {}

    # (1) disjoint cover.
    seen: Dict[ChainEnc, PieceKey] = {}
    dup = None
    for key, chains in part.pieces.items():
        for ch in chains:
            if ch in seen:
                dup = (ch, seen[ch], key)
                break
            seen[ch] = key
        if dup:
            break
    if dup:
        props["1_disjoint_cover"] = PropertyResult(False, f"chain {dup[0]} in two pieces")
    elif set(seen) != set(cs.chains):
        missing = len(set(cs.chains) - set(seen))
        extra = len(set(seen) - set(cs.chains))
        props["1_disjoint_cover"] = PropertyResult(
            False, f"{missing} chains missing, {extra} extraneous"
        )
    else:
        props["1_disjoint_cover"] = PropertyResult(True)

    # (2) contiguity of nonempty pieces.
    bad = next(
        (key for key, chains in part.pieces.items()
         if chains and not Pattern(key[0]).contiguous),
        None,
    )
    props["2_contiguous"] = PropertyResult(bad is None, f"piece {bad}" if bad else "")

    # (3) singleton patterns only use p = 1.
    bad = next(
        (key for key, chains in part.pieces.items()
         if chains and Pattern(key[0]).size == 1 and key[1] != 1),
        None,
    )
    props["3_single_piece"] = PropertyResult(bad is None, f"piece {bad}" if bad else "")

    # Membership: every chain contains its piece's pattern.
    bad = None
    for key, chains in part.pieces.items():
        pat = Pattern(key[0])
        for ch in chains:
            if not contains(ch, pat):
                bad = (key, ch)
                break
        if bad:
            break
    props["0_membership"] = PropertyResult(bad is None, str(bad) if bad else "")

    # (4) suffix-count regularity, exhaustive up to the cap then sampled.
    rng = random.Random(derive_seed(seed, "verify-suffix"))
    violation = None
    for key, chains in part.pieces.items():
        if not chains:
            continue
        q_size = Pattern(key[0]).size
        for j in range(0, r + 2 - q_size):
            qp_size = q_size + j
            s = qp_size - 1
            exhaustive = qp_size <= suffix_cap
            buckets: Dict[Tuple[int, ...], set] = {}
            for ch in chains:
                suf = chain_suffix(ch, s) if s <= chain_t(ch) else ch
                links = [chain_link(ch, h)[0] for h in range(r - s + 1, r - q_size + 2)]
                if exhaustive:
                    combos = [()]
                    for c in links:
                        combos = [cm + (v,) for cm in combos for v in c]
                else:
                    combos = []
                    for _ in range(sample_trials):
                        combos.append(tuple(c[rng.randrange(2)] for c in links))
                for cm in combos:
                    buckets.setdefault(cm, set()).add(suf)
            for cm, sufs in buckets.items():
                if len(sufs) > d**s:
                    violation = (key, cm, len(sufs), d**s)
                    break
            if violation:
                break
        if violation:
            break
    props["4_regularity"] = PropertyResult(
        violation is None,
        "" if violation is None
        else f"piece {violation[0]} ext {violation[1]}: {violation[2]} > {violation[3]}",
    )

    # (5) level-count bound |P_t| d^t <= n (3 delta_eff n)^t. The exact-size
    # identity only makes sense for uniform matchings; otherwise it is skipped.
    levels = part.level_sets()
    level_counts = {t: len(keys) for t, keys in levels.items()}
    three_m = 3 * fam.min_size
    if fam.uniform:
        bad5 = None
        for t, cnt in level_counts.items():
            if cnt * d**t > fam.n * three_m**t:
                bad5 = (t, cnt)
                break
        props["5_level_bound"] = PropertyResult(
            bad5 is None,
            "" if bad5 is None else f"|P_{bad5[0]}| = {bad5[1]} breaks the bound",
        )
    else:
        props["5_level_bound"] = PropertyResult(True, "skipped: non-uniform |H_u|")

    # Observation size bounds on pieces and per-head pieces (uniform sizes only).
    bad_obs = None
    for key, chains in part.pieces.items():
        if not chains:
            continue
        if not fam.uniform or three_m == 0:
            break
        q = Pattern(key[0]).size
        bound = Fraction(fam.n) * Fraction(three_m) ** (r - q) * Fraction(d) ** (q - 1)
        if Fraction(len(chains)) > bound:
            bad_obs = (key, len(chains), bound, "piece")
            break
        if q <= r:
            per_head: Dict[int, int] = {}
            for ch in chains:
                per_head[ch[0]] = per_head.get(ch[0], 0) + 1
            hb = Fraction(three_m) ** (r - q) * Fraction(d) ** (q - 1)
            worst = max(per_head.values())
            if Fraction(worst) > hb:
                bad_obs = (key, worst, hb, "per-head")
                break
    props["6_size_bounds"] = PropertyResult(
        bad_obs is None,
        ("skipped: non-uniform |H_u|" if not fam.uniform else "")
        if bad_obs is None
        else f"{bad_obs[3]} {bad_obs[0]}: {bad_obs[1]} > {bad_obs[2]}",
    )

    if check_negation and fam.negation != tuple(range(fam.n)):
        neg = part.negated(fam)
        sub = verify_partition(neg, cs, d, suffix_cap, sample_trials, seed,
                               check_negation=False)
        props["7_negation_image"] = PropertyResult(
            sub.ok, "" if sub.ok else "negated partition fails: "
            + "; ".join(l for l in sub.summary_lines() if "FAIL" in l)
        )

    max_sz = max((len(c) for c in part.pieces.values()), default=0)
    return PartitionReport(
        properties=props, level_counts=level_counts, max_piece_size=max_sz
    )
