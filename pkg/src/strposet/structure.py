"""Pairs-of-sets order built on top of a fragment.

A node is a pair (A, B), A a set of curves and B a set of points, where some
curve of A lies below every point of B.  A ray node is the pair a single
curve makes with its whole upper set.  One node sits above another when it
dominates it through a witness set W: the dominating first ordinate strictly
grows, the second shrinks, W lies in the dominating first ordinate below its
second, and every point above W and any dominated curve already belongs to
the dominating second ordinate.

All second-ordinate quantifiers range over the fragment's own points; that
is the only computable reading on a finite window and it makes the relation
slightly coarser than the idealized one, which is called out where it
matters (see ray shadows in ``tests``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence, Union

from .conditions import find_j3_witness
from .core import PosetFragment, SmallPoset, bits_of, mask_of

BRUTE_CAP = 16
ENUM_CAP = 16

NodeLike = Union["StrNode", tuple[int, int]]


@dataclass(frozen=True, slots=True)
class StrNode:
    """A pair node; ``ray_of`` marks the materialization of (x, upper set of x).

    Ray and finite nodes with the same masks compare unequal on purpose: the
    reconstruction treats them differently.
    """

    a_mask: int
    b_mask: int
    ray_of: Optional[int] = None

    @property
    def is_ray(self) -> bool:
        return self.ray_of is not None

    def masks(self) -> tuple[int, int]:
        return self.a_mask, self.b_mask

    def to_json(self) -> dict:
        return {"a": list(bits_of(self.a_mask)),
                "b": list(bits_of(self.b_mask)),
                "ray": self.ray_of}

    @classmethod
    def from_json(cls, obj: dict) -> "StrNode":
        return cls(mask_of(obj["a"]), mask_of(obj["b"]), obj.get("ray"))


def finite_node(a_mask: int, b_mask: int) -> StrNode:
    return StrNode(a_mask, b_mask)


def ray_node(fragment: PosetFragment, x: int) -> StrNode:
    """The pair a curve makes with every point above it."""
    if not 0 <= x < fragment.n1:
        raise ValueError(f"h1 index {x} out of range")
    up = fragment.up[x]
    if not up:
        raise ValueError(f"curve {x} has no points above it")
    return StrNode(1 << x, up, ray_of=x)


def _masks(node: NodeLike) -> tuple[int, int]:
    if isinstance(node, StrNode):
        return node.a_mask, node.b_mask
    a, b = node
    return a, b


def _check_masks(fragment: PosetFragment, a_mask: int, b_mask: int) -> None:
    if a_mask < 0 or a_mask & ~fragment.all_h1_mask:
        raise ValueError("first ordinate is not an h1 mask of this fragment")
    if b_mask < 0 or b_mask & ~fragment.all_h2_mask:
        raise ValueError("second ordinate is not an h2 mask of this fragment")


def str_member(fragment: PosetFragment, node: NodeLike) -> bool:
    """Both ordinates nonempty and some curve of A below every point of B."""
    a_mask, b_mask = _masks(node)
    _check_masks(fragment, a_mask, b_mask)
    if not a_mask or not b_mask:
        return False
    up = fragment.up
    for i in bits_of(a_mask):
        if b_mask & ~up[i] == 0:
            return True
    return False


def require_member(fragment: PosetFragment, node: NodeLike) -> tuple[int, int]:
    if not str_member(fragment, node):
        a, b = _masks(node)
        raise ValueError(f"not a member pair: A={a:#x} B={b:#x}")
    return _masks(node)


def w_max(fragment: PosetFragment, c_mask: int, d_mask: int) -> int:
    """All curves of C below every point of D: the canonical witness set."""
    _check_masks(fragment, c_mask, d_mask)
    up = fragment.up
    out = 0
    for i in bits_of(c_mask):
        if d_mask & ~up[i] == 0:
            out |= 1 << i
    return out


def dominates_via(fragment: PosetFragment, upper: NodeLike, lower: NodeLike,
                  witness_mask: int) -> bool:
    """Whether (C, D) = upper dominates (A, B) = lower via the witness set."""
    c, d = require_member(fragment, upper)
    a, b = require_member(fragment, lower)
    # E1: A strictly below C, D within B.
    if a & ~c or a == c or d & ~b:
        return False
    # E2: nonempty witness inside C, below all of D.
    if not witness_mask or witness_mask & ~c:
        return False
    up = fragment.up
    for i in bits_of(witness_mask):
        if d & ~up[i]:
            return False
    # E3: points above the witness set and any curve of A stay inside D.
    common = fragment.common_h2_above(witness_mask)
    for i in bits_of(a):
        if up[i] & common & ~d:
            return False
    return True


def _leq_masks(fragment: PosetFragment, a: int, b: int, c: int, d: int) -> bool:
    """Order test on member pairs; no membership validation (hot path)."""
    if a == c and b == d:
        return True
    if a & ~c or a == c or d & ~b:
        return False
    up = fragment.up
    w = 0
    for i in bits_of(c):
        if d & ~up[i] == 0:
            w |= 1 << i
    if not w:
        return False
    common = fragment.all_h2_mask
    for i in bits_of(w):
        common &= up[i]
    for i in bits_of(a):
        if up[i] & common & ~d:
            return False
    return True


def _same_node(lower: NodeLike, upper: NodeLike) -> bool:
    """Equality across representations; bare tuples count as finite nodes."""
    lray = lower.ray_of if isinstance(lower, StrNode) else None
    uray = upper.ray_of if isinstance(upper, StrNode) else None
    return lray == uray and _masks(lower) == _masks(upper)


def str_leq(fragment: PosetFragment, lower: NodeLike, upper: NodeLike) -> bool:
    """Equality or domination via the canonical witness w_max(C, D).

    Any successful witness sits inside w_max and enlarging a witness keeps
    E2 and weakens E3's hypothesis, so this single check is complete.

    A ray and a finite node can materialize to the same masks inside the
    window; they are still different nodes (the ray's point set is open
    ended), and since domination needs a strictly larger first ordinate,
    neither is below the other.
    """
    a, b = require_member(fragment, lower)
    c, d = require_member(fragment, upper)
    if (a, b) == (c, d):
        return _same_node(lower, upper)
    return _leq_masks(fragment, a, b, c, d)


def str_leq_bruteforce(fragment: PosetFragment, lower: NodeLike,
                       upper: NodeLike) -> bool:
    """Reference order test trying every nonempty witness W inside C."""
    a, b = require_member(fragment, lower)
    c, d = require_member(fragment, upper)
    if a == c and b == d:
        return _same_node(lower, upper)
    if c.bit_count() > BRUTE_CAP:
        raise ValueError(f"first ordinate larger than {BRUTE_CAP}")
    if a & ~c or a == c or d & ~b:
        return False
    up = fragment.up
    w = c
    while w:
        ok = True
        for i in bits_of(w):
            if d & ~up[i]:
                ok = False
                break
        if ok:
            common = fragment.all_h2_mask
            for i in bits_of(w):
                common &= up[i]
            for i in bits_of(a):
                if up[i] & common & ~d:
                    ok = False
                    break
            if ok:
                return True
        w = (w - 1) & c
    return False


def ell(fragment: PosetFragment, node: NodeLike) -> int:
    """Number of curves of A below every point of B (at least 1 on members)."""
    a, b = require_member(fragment, node)
    return w_max(fragment, a, b).bit_count()


def eta(fragment: PosetFragment, node: NodeLike) -> int:
    a, b = require_member(fragment, node)
    return a.bit_count() - w_max(fragment, a, b).bit_count()


def fiber_height_positive(fragment: PosetFragment, node: NodeLike) -> bool:
    """True iff B is the minimal upper bound set of some K inside A.

    Any such K consists of curves below all of B, and shrinking K only grows
    its common upper set, so K exists iff the full set W = w_max(A, B) has
    at least two curves and common upper set exactly B.
    """
    a, b = require_member(fragment, node)
    if a.bit_count() > ENUM_CAP:
        raise ValueError(f"first ordinate larger than {ENUM_CAP}")
    w = w_max(fragment, a, b)
    if w.bit_count() < 2:
        return False
    return fragment.common_h2_above(w) == b


def has_strictly_smaller(fragment: PosetFragment, node: NodeLike) -> bool:
    """True iff some member node sits strictly below (A, B) in the fiber.

    A strictly smaller node is (A', B) with A' a proper subset of A meeting
    w_max(A, B), dominated via some W inside w_max.  When the common upper
    set of w_max already equals B, every such A' works (the witness
    condition becomes vacuous), so one exists as soon as |A| >= 2.  When it
    is larger than B, any a below all of B breaks the witness condition for
    every W, and every member A' contains such an a, so nothing lies below.
    This differs from fiber_height_positive exactly on nodes whose single
    fully-below curve w has upper set B: those sit above the one-curve nodes
    (w', B) without B being a minimal upper bound set inside A.
    """
    a, b = require_member(fragment, node)
    if a.bit_count() < 2:
        return False
    w = w_max(fragment, a, b)
    return fragment.common_h2_above(w) == b


@dataclass
class FiberView:
    """A finite slice of the pair order with one fixed second ordinate.

    ``leq_rows[i]`` has bit j set when node i is below-or-equal node j.
    """

    fragment: PosetFragment
    b_mask: int
    support_mask: int
    amax: int
    nodes: list[StrNode]
    leq_rows: list[int]

    def __len__(self) -> int:
        return len(self.nodes)

    def leq(self, i: int, j: int) -> bool:
        return bool(self.leq_rows[i] >> j & 1)

    def index_of(self, node: StrNode) -> int:
        return self.nodes.index(node)

    def down_indices(self, i: int) -> list[int]:
        return [j for j in range(len(self.nodes)) if self.leq(j, i)]

    def height_positive_by_order(self, i: int) -> bool:
        """Does some other node sit strictly below node i?"""
        return any(j != i and self.leq(j, i) for j in range(len(self.nodes)))

    def covers(self) -> list[tuple[int, int]]:
        n = len(self.nodes)
        out = []
        for i in range(n):
            for j in range(n):
                if i == j or not self.leq(i, j):
                    continue
                if not any(k != i and k != j and self.leq(i, k)
                           and self.leq(k, j) for k in range(n)):
                    out.append((i, j))
        return sorted(out)

    def to_small_poset(self, indices: Optional[Sequence[int]] = None
                       ) -> SmallPoset:
        idxs = list(range(len(self.nodes))) if indices is None else list(indices)
        pos = {v: k for k, v in enumerate(idxs)}
        rows = []
        for i in idxs:
            r = 0
            for j in idxs:
                if self.leq(i, j):
                    r |= 1 << pos[j]
            rows.append(r)
        return SmallPoset(len(idxs), tuple(rows))

    def to_json(self) -> dict:
        return {"version": 1,
                "b": list(bits_of(self.b_mask)),
                "support": list(bits_of(self.support_mask)),
                "amax": self.amax,
                "nodes": [n.to_json() for n in self.nodes],
                "node_labels": [format_node(self.fragment, n)
                                for n in self.nodes],
                "covers": [list(c) for c in self.covers()]}

    def to_dot(self, include_via: bool = True) -> str:
        lines = ["digraph strfiber {", "  rankdir=BT;"]
        for i, node in enumerate(self.nodes):
            lines.append(f'  n{i} [label="{format_node(self.fragment, node)}"];')
        for i, j in self.covers():
            upper = self.nodes[j]
            if include_via:
                via = w_max(self.fragment, upper.a_mask, upper.b_mask)
                names = ",".join(self.fragment.h1_mask_labels(via))
                lines.append(f'  n{i} -> n{j} [label="{{{names}}}"];')
            else:
                lines.append(f"  n{i} -> n{j};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def format_node(fragment: PosetFragment, node: StrNode) -> str:
    a = ",".join(fragment.h1_mask_labels(node.a_mask))
    b = ",".join(fragment.h2_mask_labels(node.b_mask))
    if node.is_ray:
        return f"(ray {fragment.h1_labels[node.ray_of]}|{b})"
    return f"({a}|{b})"


def _build_view(fragment: PosetFragment, b_mask: int, nodes: list[StrNode],
                support_mask: int, amax: int) -> FiberView:
    nodes = sorted(nodes, key=lambda n: (n.a_mask.bit_count(), n.a_mask))
    n = len(nodes)
    rows = [0] * n
    for i in range(n):
        ai, bi = nodes[i].masks()
        for j in range(n):
            aj, bj = nodes[j].masks()
            if _leq_masks(fragment, ai, bi, aj, bj):
                rows[i] |= 1 << j
    return FiberView(fragment, b_mask, support_mask, amax, nodes, rows)


def enumerate_fiber(fragment: PosetFragment, b_mask: int, support_mask: int,
                    amax: int) -> FiberView:
    """All member pairs (A, B) with A inside the support and |A| <= amax."""
    _check_masks(fragment, support_mask, b_mask)
    if not b_mask:
        raise ValueError("second ordinate must be nonempty")
    if amax < 1 or amax > ENUM_CAP:
        raise ValueError(f"amax must be in 1..{ENUM_CAP}")
    idxs = list(bits_of(support_mask))
    nodes = []
    for size in range(1, min(amax, len(idxs)) + 1):
        for combo in combinations(idxs, size):
            a = mask_of(combo)
            if str_member(fragment, (a, b_mask)):
                nodes.append(StrNode(a, b_mask))
    return _build_view(fragment, b_mask, nodes, support_mask, amax)


def down_set_in_fiber(fragment: PosetFragment, node: NodeLike) -> FiberView:
    """Members (A', B) with A' inside A lying below (A, B); E1 makes the
    restriction to subsets of A complete."""
    a, b = require_member(fragment, node)
    if a.bit_count() > ENUM_CAP:
        raise ValueError(f"first ordinate larger than {ENUM_CAP}")
    nodes = []
    sub = a
    while sub:
        if (str_member(fragment, (sub, b))
                and _leq_masks(fragment, sub, b, a, b)):
            nodes.append(StrNode(sub, b))
        sub = (sub - 1) & a
    return _build_view(fragment, b, nodes, a, a.bit_count())


def counting_formula(fragment: PosetFragment, node: NodeLike
                     ) -> tuple[int, int]:
    """(predicted, actual) size of the down set inside the fiber.

    Predicted is (2**l - 1) * 2**e from the split of A into curves below all
    of B (l of them) and the rest (e).  Only defined on nodes with something
    strictly below them; on height-zero nodes the down set is the node
    itself and the formula says nothing.
    """
    a, b = require_member(fragment, node)
    if not has_strictly_smaller(fragment, (a, b)):
        raise ValueError("counting formula needs a positive-height node")
    l = w_max(fragment, a, b).bit_count()
    e = a.bit_count() - l
    predicted = (2 ** l - 1) * 2 ** e
    actual = len(down_set_in_fiber(fragment, (a, b)))
    return predicted, actual


def parity_mub_check(fragment: PosetFragment, node: NodeLike) -> bool:
    """Whether (B = mub A) agrees with |down set| being odd.

    Meaningful only above height zero: a height-zero down set is the node
    alone, always odd, while B is never mub(A) there."""
    a, b = require_member(fragment, node)
    if not has_strictly_smaller(fragment, (a, b)):
        raise ValueError("parity check needs a positive-height node")
    is_mub = a.bit_count() >= 2 and fragment.common_h2_above(a) == b
    odd = len(down_set_in_fiber(fragment, (a, b))) % 2 == 1
    return is_mub == odd


def detect_I2(fragment: PosetFragment, node: NodeLike) -> bool:
    """Down set shaped like two points under one top: |A| = 2 and B = mub A."""
    a, b = require_member(fragment, node)
    return a.bit_count() == 2 and fragment.common_h2_above(a) == b


def mu_statistic(fragment: PosetFragment, x: int, m: int, amax: int = 4
                 ) -> tuple[Union[int, float], bool]:
    """Smallest positive-height down-set size in the fiber over {m} among
    pairs whose first ordinate contains x, plus the no-partner flag.

    Returns (mu, ge4) where mu is math.inf when no qualifying pair exists
    within the size budget.  ge4 is computed independently: no curve y pairs
    with x so that their only common point is m.

    Junk curves double the count and curves outside down(m) never help the
    witness set, so the minimum is realized on subsets of down(m); when x
    itself is not below m it is the single unavoidable junk element.
    """
    if not 0 <= x < fragment.n1:
        raise ValueError(f"h1 index {x} out of range")
    if not 0 <= m < fragment.n2:
        raise ValueError(f"h2 index {m} out of range")
    if amax < 2:
        raise ValueError("amax must be at least 2")
    target = 1 << m
    ge4 = not any(y != x and fragment.up[x] & fragment.up[y] == target
                  for y in range(fragment.n1))
    pool = list(bits_of(fragment.down[m]))
    x_below = bool(fragment.down[m] >> x & 1)
    if x_below:
        rest = [i for i in pool if i != x]
        for size in range(2, amax + 1):
            for combo in combinations(rest, size - 1):
                acc = fragment.up[x]
                for i in combo:
                    acc &= fragment.up[i]
                if acc == target:
                    return 2 ** size - 1, ge4
        return math.inf, ge4
    for size in range(2, amax):
        for combo in combinations(pool, size):
            acc = fragment.all_h2_mask
            for i in combo:
                acc &= fragment.up[i]
            if acc == target:
                return (2 ** size - 1) * 2, ge4
    return math.inf, ge4


def join_above(fragment: PosetFragment, first: NodeLike, second: NodeLike,
               b: int, size_cap: int = 4) -> Optional[StrNode]:
    """Common upper node (K + A + C, {b}) for two nodes sharing the point b,
    built from a J3 witness disjoint from both first ordinates."""
    a1, b1 = require_member(fragment, first)
    a2, b2 = require_member(fragment, second)
    if not (b1 >> b & 1 and b2 >> b & 1):
        raise ValueError("both nodes must carry the point b")
    k = find_j3_witness(fragment, b, a1 | a2, size_cap)
    if k is None:
        return None
    return StrNode(k | a1 | a2, 1 << b)
