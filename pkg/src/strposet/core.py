"""Core two-tier poset fragments.

A fragment is a finite poset with three levels: a unique minimum, a tier X1 of
height-one elements ("curves"), and a tier X2 of height-two elements
("points").  The only nontrivial order data is the bipartite incidence
between X1 and X2; elements within a tier are pairwise incomparable and the
minimum sits below everything.

Subsets of a tier travel as integer bitmasks (bit i set = element i of that
tier is in the set).  Fragments are immutable once constructed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import IntEnum
from itertools import permutations
from typing import Iterable, Iterator, Optional, Sequence

DEFAULT_MAX_TIER = 64
HARD_MAX_TIER = 512


class Tier(IntEnum):
    MIN = 0
    H1 = 1
    H2 = 2


@dataclass(frozen=True, slots=True, order=True)
class ElementId:
    """One element of a fragment: a tier plus an index within the tier.

    Ordered by (tier, index) so element lists sort stably; this sort order
    is unrelated to the poset order."""

    tier: Tier
    index: int

    def __repr__(self) -> str:
        if self.tier is Tier.MIN:
            return "Min"
        return f"{'h1' if self.tier is Tier.H1 else 'h2'}[{self.index}]"


MIN_ELEMENT = ElementId(Tier.MIN, 0)


def h1(i: int) -> ElementId:
    return ElementId(Tier.H1, i)


def h2(j: int) -> ElementId:
    return ElementId(Tier.H2, j)


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def bits_of(mask: int) -> Iterator[int]:
    """Indices of the set bits, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(slots=True)
class ValidationReport:
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def to_json(self) -> dict:
        return {"version": 1, "ok": self.ok, "problems": list(self.problems)}


class PosetFragment:
    """Immutable fragment with ``n1`` height-one and ``n2`` height-two elements.

    ``incidence`` lists the strict relations (i, j) meaning h1[i] < h2[j].
    Labels are display strings only; they carry no order information.
    """

    __slots__ = ("n1", "n2", "incidence", "h1_labels", "h2_labels",
                 "up", "down", "_hash")

    def __init__(self, n1: int, n2: int,
                 incidence: Iterable[tuple[int, int]],
                 h1_labels: Optional[Sequence[str]] = None,
                 h2_labels: Optional[Sequence[str]] = None,
                 max_size: int = DEFAULT_MAX_TIER):
        if not 0 < max_size <= HARD_MAX_TIER:
            raise ValueError(f"max_size must be in 1..{HARD_MAX_TIER}")
        if n1 < 0 or n2 < 0:
            raise ValueError("tier sizes must be nonnegative")
        if n1 > max_size or n2 > max_size:
            raise ValueError(
                f"tier size exceeds cap {max_size} (n1={n1}, n2={n2})")
        pairs = []
        seen = set()
        for pair in incidence:
            i, j = pair
            if not (0 <= i < n1):
                raise ValueError(f"h1 index {i} out of range (n1={n1})")
            if not (0 <= j < n2):
                raise ValueError(f"h2 index {j} out of range (n2={n2})")
            if (i, j) not in seen:
                seen.add((i, j))
                pairs.append((i, j))
        self.n1 = n1
        self.n2 = n2
        self.incidence = frozenset(pairs)
        self.h1_labels = self._check_labels(h1_labels, n1, "x")
        self.h2_labels = self._check_labels(h2_labels, n2, "m")
        up = [0] * n1
        down = [0] * n2
        for i, j in pairs:
            up[i] |= 1 << j
            down[j] |= 1 << i
        self.up = tuple(up)
        self.down = tuple(down)
        self._hash = hash((n1, n2, self.incidence,
                           self.h1_labels, self.h2_labels))

    @staticmethod
    def _check_labels(labels: Optional[Sequence[str]], n: int,
                      prefix: str) -> tuple[str, ...]:
        if labels is None:
            return tuple(f"{prefix}{i}" for i in range(n))
        labels = tuple(str(s) for s in labels)
        if len(labels) != n:
            raise ValueError(f"expected {n} labels, got {len(labels)}")
        return labels

    # -- identity ---------------------------------------------------------

    def __setattr__(self, name, value):
        if hasattr(self, "_hash"):
            raise AttributeError("PosetFragment is immutable")
        object.__setattr__(self, name, value)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PosetFragment)
                and self.n1 == other.n1 and self.n2 == other.n2
                and self.incidence == other.incidence
                and self.h1_labels == other.h1_labels
                and self.h2_labels == other.h2_labels)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return (f"PosetFragment(n1={self.n1}, n2={self.n2}, "
                f"|incidence|={len(self.incidence)})")

    # -- masks ------------------------------------------------------------

    @property
    def all_h1_mask(self) -> int:
        return (1 << self.n1) - 1

    @property
    def all_h2_mask(self) -> int:
        return (1 << self.n2) - 1

    def h2_above(self, i: int) -> int:
        return self.up[i]

    def h1_below(self, j: int) -> int:
        return self.down[j]

    def common_h2_above(self, h1_mask: int) -> int:
        """Points above every curve in the mask (all points for the empty mask)."""
        acc = self.all_h2_mask
        for i in bits_of(h1_mask):
            acc &= self.up[i]
        return acc

    def common_h1_below(self, h2_mask: int) -> int:
        acc = self.all_h1_mask
        for j in bits_of(h2_mask):
            acc &= self.down[j]
        return acc

    # -- elements and order -----------------------------------------------

    def elements(self) -> list[ElementId]:
        out = [MIN_ELEMENT]
        out.extend(ElementId(Tier.H1, i) for i in range(self.n1))
        out.extend(ElementId(Tier.H2, j) for j in range(self.n2))
        return out

    def _check_element(self, x: ElementId) -> None:
        if x.tier is Tier.MIN:
            if x.index != 0:
                raise ValueError("the minimum has index 0")
        elif x.tier is Tier.H1:
            if not 0 <= x.index < self.n1:
                raise ValueError(f"h1 index {x.index} out of range")
        elif not 0 <= x.index < self.n2:
            raise ValueError(f"h2 index {x.index} out of range")

    def leq(self, x: ElementId, y: ElementId) -> bool:
        self._check_element(x)
        self._check_element(y)
        if x == y:
            return True
        if x.tier is Tier.MIN:
            return True
        if x.tier is Tier.H1 and y.tier is Tier.H2:
            return bool(self.up[x.index] >> y.index & 1)
        return False

    def upper_set(self, elems: Iterable[ElementId],
                  strict: bool = False) -> frozenset[ElementId]:
        """Elements above every member of ``elems`` (all of X for the empty set).

        With ``strict`` the input elements themselves are removed.
        """
        elems = list(elems)
        out = {x for x in self.elements()
               if all(self.leq(a, x) for a in elems)}
        if strict:
            out -= set(elems)
        return frozenset(out)

    def lower_set(self, elems: Iterable[ElementId],
                  strict: bool = False) -> frozenset[ElementId]:
        elems = list(elems)
        out = {x for x in self.elements()
               if all(self.leq(x, a) for a in elems)}
        if strict:
            out -= set(elems)
        return frozenset(out)

    def mub(self, elems: Iterable[ElementId]) -> frozenset[ElementId]:
        """Minimal upper bounds of a nonempty set of elements."""
        elems = list(elems)
        if not elems:
            raise ValueError("mub of the empty set is not defined here")
        ub = [x for x in self.elements()
              if all(self.leq(a, x) for a in elems)]
        return frozenset(
            x for x in ub
            if not any(y != x and self.leq(y, x) for y in ub))

    def height(self, x: ElementId) -> int:
        self._check_element(x)
        return int(x.tier)

    def dim(self) -> int:
        """Length of the longest chain minus one."""
        if any(self.down):
            return 2
        if self.n1 or self.n2:
            return 1
        return 0

    # -- labels -----------------------------------------------------------

    def h1_label(self, i: int) -> str:
        return self.h1_labels[i]

    def h2_label(self, j: int) -> str:
        return self.h2_labels[j]

    def h1_mask_labels(self, mask: int) -> list[str]:
        return [self.h1_labels[i] for i in bits_of(mask)]

    def h2_mask_labels(self, mask: int) -> list[str]:
        return [self.h2_labels[j] for j in bits_of(mask)]

    def resolve_h1_label(self, label: str) -> int:
        return _resolve(label, self.h1_labels, "h1")

    def resolve_h2_label(self, label: str) -> int:
        return _resolve(label, self.h2_labels, "h2")


def _resolve(label: str, labels: Sequence[str], tier_name: str) -> int:
    hits = [i for i, s in enumerate(labels) if s == label]
    if not hits:
        raise KeyError(f"no {tier_name} element labeled {label!r}")
    if len(hits) > 1:
        raise KeyError(f"label {label!r} is ambiguous in tier {tier_name}")
    return hits[0]


def validate(fragment: PosetFragment) -> ValidationReport:
    """Structural invariants beyond what the constructor enforces.

    An empty report means the fragment is usable by every other operation.
    """
    report = ValidationReport()
    if fragment.n1 == 0:
        report.problems.append("X1 is empty")
    if fragment.n2 == 0:
        report.problems.append("X2 is empty")
    for j in range(fragment.n2):
        if not fragment.down[j]:
            report.problems.append(
                f"h2 element {j} ({fragment.h2_labels[j]}) has no h1 below it")
    return report


@dataclass(frozen=True)
class IsoMap:
    """Tier-preserving isomorphism between two fragments.

    ``h1_map[i]`` is the image index of h1[i] in the target, likewise
    ``h2_map``.  Construction fails unless the maps are bijections that
    preserve incidence in both directions.
    """

    source: PosetFragment
    target: PosetFragment
    h1_map: tuple[int, ...]
    h2_map: tuple[int, ...]

    def __post_init__(self):
        src, tgt = self.source, self.target
        if src.n1 != tgt.n1 or src.n2 != tgt.n2:
            raise ValueError("fragments differ in tier sizes")
        if sorted(self.h1_map) != list(range(src.n1)):
            raise ValueError("h1_map is not a bijection")
        if sorted(self.h2_map) != list(range(src.n2)):
            raise ValueError("h2_map is not a bijection")
        mapped = {(self.h1_map[i], self.h2_map[j]) for i, j in src.incidence}
        if mapped != tgt.incidence:
            raise ValueError("map does not preserve incidence")

    def apply(self, x: ElementId) -> ElementId:
        if x.tier is Tier.MIN:
            return MIN_ELEMENT
        if x.tier is Tier.H1:
            return ElementId(Tier.H1, self.h1_map[x.index])
        return ElementId(Tier.H2, self.h2_map[x.index])

    def h1_mask_image(self, mask: int) -> int:
        return mask_of(self.h1_map[i] for i in bits_of(mask))

    def h2_mask_image(self, mask: int) -> int:
        return mask_of(self.h2_map[j] for j in bits_of(mask))

    def inverse(self) -> "IsoMap":
        inv1 = [0] * len(self.h1_map)
        inv2 = [0] * len(self.h2_map)
        for i, y in enumerate(self.h1_map):
            inv1[y] = i
        for j, y in enumerate(self.h2_map):
            inv2[y] = j
        return IsoMap(self.target, self.source, tuple(inv1), tuple(inv2))

    @property
    def is_identity(self) -> bool:
        return (self.h1_map == tuple(range(len(self.h1_map)))
                and self.h2_map == tuple(range(len(self.h2_map))))

    def to_json(self) -> dict:
        return {"version": 1, "h1_map": list(self.h1_map),
                "h2_map": list(self.h2_map)}


def relabel(fragment: PosetFragment, seed: int,
            h1_perm: Optional[Sequence[int]] = None,
            h2_perm: Optional[Sequence[int]] = None
            ) -> tuple[PosetFragment, IsoMap]:
    """Uniformly random per-tier relabeling; explicit permutations override.

    Returns the relabeled fragment together with the witnessing map.
    Labels travel with their elements.
    """
    rng = random.Random(seed)
    if h1_perm is None:
        p1 = list(range(fragment.n1))
        rng.shuffle(p1)
    else:
        p1 = list(h1_perm)
    if h2_perm is None:
        p2 = list(range(fragment.n2))
        rng.shuffle(p2)
    else:
        p2 = list(h2_perm)
    pairs = [(p1[i], p2[j]) for i, j in sorted(fragment.incidence)]
    new_h1 = [""] * fragment.n1
    new_h2 = [""] * fragment.n2
    for i, y in enumerate(p1):
        new_h1[y] = fragment.h1_labels[i]
    for j, y in enumerate(p2):
        new_h2[y] = fragment.h2_labels[j]
    relabeled = PosetFragment(fragment.n1, fragment.n2, pairs,
                              new_h1, new_h2,
                              max_size=max(fragment.n1, fragment.n2,
                                           DEFAULT_MAX_TIER))
    return relabeled, IsoMap(fragment, relabeled, tuple(p1), tuple(p2))


# -- small abstract posets -------------------------------------------------

SMALL_POSET_CAP = 12


@dataclass(frozen=True)
class SmallPoset:
    """Abstract finite poset given by full reachability rows.

    Bit j of ``leq_rows[i]`` says element i is below-or-equal element j.
    Used for brute-force shape comparisons on tiny posets.
    """

    n: int
    leq_rows: tuple[int, ...]

    def leq(self, i: int, j: int) -> bool:
        return bool(self.leq_rows[i] >> j & 1)

    @classmethod
    def from_pairs(cls, n: int, strict_pairs: Iterable[tuple[int, int]]
                   ) -> "SmallPoset":
        """Reflexive-transitive closure of the given strict relations."""
        rows = [1 << i for i in range(n)]
        for i, j in strict_pairs:
            rows[i] |= 1 << j
        changed = True
        while changed:
            changed = False
            for i in range(n):
                acc = rows[i]
                for j in bits_of(acc):
                    acc |= rows[j]
                if acc != rows[i]:
                    rows[i] = acc
                    changed = True
        return cls(n, tuple(rows))

    @classmethod
    def i_r(cls, r: int) -> "SmallPoset":
        """r incomparable bottom elements under one common top."""
        if r < 1:
            raise ValueError("r must be positive")
        return cls.from_pairs(r + 1, [(i, r) for i in range(r)])


def small_poset_isomorphic(p: SmallPoset, q: SmallPoset) -> bool:
    """Brute-force order-isomorphism test, capped at 12 elements each."""
    if p.n > SMALL_POSET_CAP or q.n > SMALL_POSET_CAP:
        raise ValueError(f"poset too large for brute force (cap {SMALL_POSET_CAP})")
    if p.n != q.n:
        return False
    n = p.n

    def degrees(s: SmallPoset) -> list[tuple[int, int]]:
        ups = [s.leq_rows[i].bit_count() for i in range(n)]
        downs = [sum(s.leq(j, i) for j in range(n)) for i in range(n)]
        return [(downs[i], ups[i]) for i in range(n)]

    pdeg, qdeg = degrees(p), degrees(q)
    if sorted(pdeg) != sorted(qdeg):
        return False
    order = sorted(range(n), key=lambda i: pdeg[i])
    image = [-1] * n
    used = [False] * n

    def backtrack(k: int) -> bool:
        if k == n:
            return True
        i = order[k]
        for cand in range(n):
            if used[cand] or qdeg[cand] != pdeg[i]:
                continue
            ok = True
            for t in range(k):
                a = order[t]
                if (p.leq(i, a) != q.leq(cand, image[a])
                        or p.leq(a, i) != q.leq(image[a], cand)):
                    ok = False
                    break
            if ok:
                image[i] = cand
                used[cand] = True
                if backtrack(k + 1):
                    return True
                used[cand] = False
                image[i] = -1
        return False

    return backtrack(0)


def longest_chain_length(fragment: PosetFragment) -> int:
    """Chain enumeration oracle for dim(); only for tiny fragments."""
    elems = list(fragment.elements())
    if len(elems) > SMALL_POSET_CAP + 1:
        raise ValueError("fragment too large for chain enumeration")
    best = 0
    for r in range(1, len(elems) + 1):
        found = False
        for chain in permutations(elems, r):
            if all(chain[k] != chain[k + 1]
                   and fragment.leq(chain[k], chain[k + 1])
                   for k in range(r - 1)):
                found = True
                break
        if found:
            best = r
        else:
            break
    return best
