"""Normal-form local-correction matching families and their exact solution spaces.

A family holds one hypergraph matching H_u per vertex u; every hyperedge C in
H_u encodes the parity constraint x_u = sum of x_v over v in C. The optional
negation permutation carries the alpha = -1 group action used when lifting
codes over larger prime fields down to unit coefficients.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from math import comb, log2
from typing import Dict, List, Optional, Sequence, Tuple

from .gf2 import gf2_kernel_basis, mask_to_vector, modp_kernel_basis, vector_to_mask
from .util import derive_seed

Edge = Tuple[int, ...]


@dataclass
class MatchingFamily:
    """n matchings of (nominally 3-uniform) hyperedges plus a negation action."""

    n: int
    matchings: Tuple[Tuple[Edge, ...], ...]
    negation: Tuple[int, ...] = ()
    field_char: int = 2

    def __post_init__(self):
        if not self.negation:
            self.negation = tuple(range(self.n))
        self.matchings = tuple(
            tuple(sorted(tuple(sorted(c)) for c in edges)) for edges in self.matchings
        )
        self._edge_sets = None
        self._pair_index = None
        self._link_by_pivot = None

    # -- derived views ----------------------------------------------------

    @property
    def sizes(self) -> List[int]:
        return [len(h) for h in self.matchings]

    @property
    def min_size(self) -> int:
        return min(self.sizes) if self.n else 0

    @property
    def uniform(self) -> bool:
        s = self.sizes
        return len(set(s)) <= 1

    @property
    def delta_eff(self) -> float:
        return self.min_size / self.n if self.n else 0.0

    def nu(self, u: int) -> int:
        return self.negation[u]

    def edge_set(self, u: int) -> frozenset:
        if self._edge_sets is None:
            self._edge_sets = [frozenset(h) for h in self.matchings]
        return self._edge_sets[u]

    def pair_index(self) -> Dict[Tuple[int, int], List[Tuple[int, Edge]]]:
        """Global index pair {v,v'} -> [(u, C)] with {v,v'} inside C in H_u."""
        if self._pair_index is None:
            idx: Dict[Tuple[int, int], List[Tuple[int, Edge]]] = {}
            for u, edges in enumerate(self.matchings):
                for c in edges:
                    for a in range(len(c)):
                        for b in range(a + 1, len(c)):
                            idx.setdefault((c[a], c[b]), []).append((u, c))
            self._pair_index = idx
        return self._pair_index

    def links_by_pivot(self) -> Dict[int, List[Tuple[int, Edge]]]:
        """Index pivot w -> [(u, C)] with C + {w} an edge of H_{nu(u)}.

        These are exactly the admissible first links when a chain with head w
        is extended by one step to head u.
        """
        if self._link_by_pivot is None:
            idx: Dict[int, List[Tuple[int, Edge]]] = {}
            for u in range(self.n):
                for e in self.matchings[self.nu(u)]:
                    for w in e:
                        c = tuple(v for v in e if v != w)
                        idx.setdefault(w, []).append((u, c))
            for w in idx:
                idx[w].sort()
            self._link_by_pivot = idx
        return self._link_by_pivot

    def truncated(self, m: Optional[int] = None) -> "MatchingFamily":
        """Copy with every matching cut to its first m edges (deterministic order)."""
        m = self.min_size if m is None else m
        return MatchingFamily(
            n=self.n,
            matchings=tuple(h[:m] for h in self.matchings),
            negation=self.negation,
            field_char=self.field_char,
        )

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        doc = {
            "n": self.n,
            "field_char": self.field_char,
            "matchings": [[list(c) for c in edges] for edges in self.matchings],
        }
        if self.negation != tuple(range(self.n)):
            doc["negation"] = list(self.negation)
        return doc

    def save(self, path: str) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=1, sort_keys=True)
            f.write("\n")

    @classmethod
    def from_json_dict(cls, doc: dict) -> "MatchingFamily":
        if not isinstance(doc, dict):
            raise ValueError("instance file: top level must be an object")
        for key in ("n", "matchings"):
            if key not in doc:
                raise ValueError(f"instance file: missing key '{key}'")
        n = doc["n"]
        raw = doc["matchings"]
        if not isinstance(n, int) or n < 0:
            raise ValueError("instance file: 'n' must be a non-negative integer")
        if not isinstance(raw, list) or len(raw) != n:
            raise ValueError(f"instance file: 'matchings' must list {n} edge lists")
        matchings = []
        for u, edges in enumerate(raw):
            if not isinstance(edges, list):
                raise ValueError(f"matchings[{u}]: expected a list of hyperedges")
            row = []
            for j, c in enumerate(edges):
                if not isinstance(c, list) or not all(isinstance(v, int) for v in c):
                    raise ValueError(f"matchings[{u}][{j}]: hyperedge must be a list of ints")
                if any(v < 0 or v >= n for v in c):
                    raise ValueError(f"matchings[{u}][{j}]: vertex out of range [0,{n})")
                row.append(tuple(sorted(c)))
            matchings.append(tuple(row))
        negation = tuple(doc.get("negation", range(n)))
        if len(negation) != n:
            raise ValueError("instance file: 'negation' must be a length-n permutation")
        return cls(
            n=n,
            matchings=tuple(matchings),
            negation=negation,
            field_char=doc.get("field_char", 2),
        )

    @classmethod
    def load(cls, path: str) -> "MatchingFamily":
        with open(path) as f:
            return cls.from_json_dict(json.load(f))


@dataclass
class SolutionSpace:
    """Exact basis of every x with x_u = sum_{v in C} x_v for all u, C."""

    dimension: int
    basis: Tuple[Tuple[int, ...], ...]
    field_char: int = 2


def constraint_rows(fam: MatchingFamily) -> List[Tuple[int, ...]]:
    """One row e_u - sum_{v in C} e_v (mod p) per constraint, in family order."""
    p = fam.field_char
    rows = []
    for u, edges in enumerate(fam.matchings):
        for c in edges:
            row = [0] * fam.n
            row[u] = (row[u] + 1) % p
            for v in c:
                row[v] = (row[v] - 1) % p
            rows.append(tuple(row))
    return rows


def solution_space(fam: MatchingFamily) -> SolutionSpace:
    """Exact dimension and basis of the code cut out by all constraints."""
    p = fam.field_char
    if p == 2:
        masks = []
        for u, edges in enumerate(fam.matchings):
            for c in edges:
                m = 1 << u
                for v in c:
                    m ^= 1 << v
                masks.append(m)
        kernel = gf2_kernel_basis(masks, fam.n)
        basis = tuple(mask_to_vector(b, fam.n) for b in kernel)
    else:
        basis = tuple(modp_kernel_basis(constraint_rows(fam), fam.n, p))
    return SolutionSpace(dimension=len(basis), basis=basis, field_char=p)


def gen_random_matchings(n: int, m: int, seed: int, arity: int = 3) -> MatchingFamily:
    """Per-vertex uniformly random disjoint triples, rejection-free.

    Each H_u is drawn by shuffling [n] minus u and cutting the prefix into m
    hyperedges, so the matching property holds by construction.
    """
    if arity * m > n - 1:
        raise ValueError(f"need {arity}*m <= n-1, got m={m}, n={n}")
    matchings = []
    for u in range(n):
        rng = random.Random(derive_seed(seed, f"matching:{u}"))
        pool = [v for v in range(n) if v != u]
        rng.shuffle(pool)
        edges = [tuple(sorted(pool[arity * j : arity * (j + 1)])) for j in range(m)]
        matchings.append(tuple(sorted(edges)))
    return MatchingFamily(n=n, matchings=tuple(matchings))


def _flat_triples(mdim: int, u: int, cap: Optional[int]) -> List[Tuple[int, int, int]]:
    """Candidate affine 2-flats through u, in a u-rotated deterministic order."""
    n = 1 << mdim
    triples: List[Tuple[int, int, int]] = []
    if mdim <= 8:
        seen = set()
        for a in range(1, n):
            for b in range(a + 1, n):
                key = tuple(sorted((a, b, a ^ b)))
                if key not in seen:
                    seen.add(key)
                    triples.append(key)
        triples.sort()
        off = (u * 2 + 1) % len(triples)
        triples = triples[off:] + triples[:off]
    else:
        rng = random.Random(derive_seed(1, f"flat:{mdim}:{u}"))
        budget = cap if cap is not None else 6 * n
        seen = set()
        while len(triples) < budget:
            a = rng.randrange(1, n)
            b = rng.randrange(1, n)
            if a == b:
                continue
            key = tuple(sorted((a, b, a ^ b)))
            if key not in seen:
                seen.add(key)
                triples.append(key)
    return triples


def gen_flat_lcc(mdim: int) -> Tuple[MatchingFamily, SolutionSpace]:
    """Affine 2-flat correction family on 2^mdim points plus its exact code.

    For each point u, greedily packs disjoint flats {u^a, u^b, u^(a^b)}; the
    per-u candidate order is rotated with u so that the union of constraints
    cuts the solution space down to affine functions (dimension mdim + 1).
    """
    if not (2 <= mdim <= 16):
        raise ValueError("mdim must be in [2, 16]")
    n = 1 << mdim
    matchings = []
    for u in range(n):
        used: set = set()
        chosen: List[Edge] = []
        for (a, b, c) in _flat_triples(mdim, u, cap=None if mdim <= 8 else 6 * n):
            tri = (u ^ a, u ^ b, u ^ c)
            if used.isdisjoint(tri):
                used.update(tri)
                chosen.append(tuple(sorted(tri)))
        matchings.append(tuple(sorted(chosen)))
    fam = MatchingFamily(n=n, matchings=tuple(matchings))
    return fam, solution_space(fam)


def heavy_pair_degree(fam: MatchingFamily) -> Tuple[int, Optional[Tuple[int, int]]]:
    """Max number of (u, C) incidences over any fixed vertex pair, with witness."""
    best, witness = 0, None
    for pair, hits in fam.pair_index().items():
        if len(hits) > best:
            best, witness = len(hits), pair
    return best, witness


@dataclass
class CoefficientCode:
    """A code over F_q presented by coefficient constraints x_u = sum alpha_i x_{v_i}."""

    n: int
    q: int
    constraints: Tuple[Tuple[int, Tuple[Tuple[int, int], ...]], ...]


def lift_unit_coefficients(code: CoefficientCode) -> MatchingFamily:
    """Lift to unit coefficients on n(q-1) symbols (u, alpha), alpha in F_q*.

    Symbol (u, alpha) holds alpha * x_u; the constraint x_u = sum alpha_i x_{v_i}
    becomes, for every unit alpha, the unit-coefficient constraint
    (u, alpha) = sum over i of (v_i, alpha * alpha_i). Negation maps
    (u, alpha) to (u, -alpha).
    """
    q = code.q
    if q == 2:
        raise ValueError("q = 2 lift is a no-op; use the family directly")
    for u, terms in code.constraints:
        for v, a in terms:
            if a % q == 0:
                raise ValueError(f"zero coefficient in constraint for u={u}")
    units = list(range(1, q))
    index = {(u, a): u * (q - 1) + (a - 1) for u in range(code.n) for a in units}
    n_lift = code.n * (q - 1)
    matchings: List[List[Edge]] = [[] for _ in range(n_lift)]
    for u, terms in code.constraints:
        for alpha in units:
            head = index[(u, alpha)]
            edge = tuple(sorted(index[(v, (alpha * a) % q)] for v, a in terms))
            matchings[head].append(edge)
    negation = [0] * n_lift
    for (u, a), i in index.items():
        negation[i] = index[(u, (-a) % q)]
    return MatchingFamily(
        n=n_lift,
        matchings=tuple(tuple(sorted(r)) for r in matchings),
        negation=tuple(negation),
        field_char=q,
    )


def lift_codeword(code: CoefficientCode, x: Sequence[int]) -> Tuple[int, ...]:
    """Lifted word with entry alpha * x_u at symbol (u, alpha)."""
    q = code.q
    out = []
    for u in range(code.n):
        for a in range(1, q):
            out.append((a * x[u]) % q)
    return tuple(out)


def gkst_check(
    matchings: Sequence[Sequence[Tuple[int, int]]], delta: float, n: int
) -> Tuple[bool, float, float]:
    """The linear 2-LDC inequality delta * k <= 2 log2 n.

    Each G_i must be a matching of vertex pairs; their average size must be at
    least delta * n for the inequality to be meaningful.
    """
    k = len(matchings)
    for i, g in enumerate(matchings):
        seen: set = set()
        for (u, v) in g:
            if u == v:
                raise ValueError(f"G_{i}: self-loop ({u},{v})")
            if u in seen or v in seen:
                raise ValueError(f"G_{i}: vertex reused, not a matching")
            seen.update((u, v))
    avg = sum(len(g) for g in matchings) / k if k else 0.0
    if avg < delta * n - 1e-12:
        raise ValueError(f"average matching size {avg} below delta*n = {delta * n}")
    lhs = delta * k
    rhs = 2 * log2(n) if n > 0 else 0.0
    return lhs <= rhs, lhs, rhs


@dataclass
class ValidationReport:
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_normal_form(
    fam: MatchingFamily, sol: Optional[SolutionSpace] = None
) -> ValidationReport:
    """Structural checks plus, when a solution space is given, exact constraint checks."""
    rep = ValidationReport()
    p = fam.field_char
    if sorted(fam.negation) != list(range(fam.n)):
        rep.violations.append("negation: not a permutation")
    else:
        for u in range(fam.n):
            if fam.negation[fam.negation[u]] != u:
                rep.violations.append(f"negation: not an involution at u={u}")
                break
    for u, edges in enumerate(fam.matchings):
        seen: set = set()
        for c in edges:
            if len(c) != 3 or len(set(c)) != 3:
                rep.violations.append(f"H_{u}: edge {c} is not a 3-set")
            if u in c:
                rep.violations.append(f"H_{u}: edge {c} contains its own head")
            if seen.intersection(c):
                rep.violations.append(f"H_{u}: edge {c} overlaps another edge")
            seen.update(c)
    if fam.negation != tuple(range(fam.n)):
        for u in range(fam.n):
            image = frozenset(
                tuple(sorted(fam.negation[v] for v in c)) for c in fam.matchings[u]
            )
            if image != fam.edge_set(fam.negation[u]):
                rep.violations.append(f"negation image of H_{u} differs from H_nu({u})")
    if sol is not None:
        for b, vec in enumerate(sol.basis):
            for u, edges in enumerate(fam.matchings):
                for c in edges:
                    if (vec[u] - sum(vec[v] for v in c)) % p != 0:
                        rep.violations.append(
                            f"basis[{b}] violates constraint (u={u}, C={c})"
                        )
    return rep


def information_set(sol: SolutionSpace, n: int) -> List[int]:
    """First dimension-many coordinates whose basis columns are independent."""
    p = sol.field_char
    cols: List[int] = []
    picked: List[int] = []
    k = sol.dimension
    if k == 0:
        return []
    if p == 2:
        span_rows: List[int] = []
        for coord in range(n):
            col = vector_to_mask([vec[coord] for vec in sol.basis])
            cur = col
            for r in span_rows:
                low = r & -r
                if cur & low:
                    cur ^= r
            if cur:
                span_rows.append(cur)
                picked.append(coord)
            if len(picked) == k:
                break
        return picked
    # small dense variant for odd p
    import numpy as np

    mat = np.array([[vec[c] for vec in sol.basis] for c in range(n)], dtype=np.int64)
    rank_rows: List[List[int]] = []
    for coord in range(n):
        row = list(mat[coord] % p)
        cur = row[:]
        for prow in rank_rows:
            lead = next(i for i, v in enumerate(prow) if v)
            f = cur[lead] * pow(prow[lead], p - 2, p) % p
            if f:
                cur = [(a - f * b) % p for a, b in zip(cur, prow)]
        if any(cur):
            rank_rows.append(cur)
            picked.append(coord)
        if len(picked) == k:
            break
    return picked


def codeword_for_heads(
    sol: SolutionSpace, heads: Sequence[int], b_bits: Sequence[int], n: int
) -> Tuple[int, ...]:
    """A codeword x with x restricted to heads equal to b_bits (F2 only)."""
    if sol.field_char != 2:
        raise ValueError("codeword sections implemented for F2 only")
    k = len(heads)
    rows = []
    for vec in sol.basis:
        rows.append(vector_to_mask([vec[h] for h in heads]))
    # Solve c . rows = b over F2 by Gaussian elimination on the k x dim system.
    aug = []
    for j, r in enumerate(rows):
        aug.append((r, 1 << j))
    target = vector_to_mask(b_bits)
    pivots: List[Tuple[int, int, int]] = []
    for r, tag in aug:
        cur_r, cur_t = r, tag
        for pc, pr, pt in pivots:
            if (cur_r >> pc) & 1:
                cur_r ^= pr
                cur_t ^= pt
        if cur_r:
            col = (cur_r & -cur_r).bit_length() - 1
            pivots.append((col, cur_r, cur_t))
    combo = 0
    cur = target
    for pc, pr, pt in sorted(pivots):
        if (cur >> pc) & 1:
            cur ^= pr
            combo ^= pt
    if cur:
        raise ValueError("heads are not an information set for this solution space")
    x = [0] * n
    for j, vec in enumerate(sol.basis):
        if (combo >> j) & 1:
            for i in range(n):
                x[i] ^= vec[i]
    return tuple(x)
