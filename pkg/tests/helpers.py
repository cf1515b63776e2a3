"""Hand-built fixtures and independent brute-force oracles for the tests.

The oracles deliberately take the literal definition route (enumerate subsets,
call the element-level mub) rather than reusing the library's closed forms,
so the two implementations check each other.
"""

from itertools import combinations

from strposet import (PosetFragment, bits_of, finite_node, h1, h2, mask_of,
                      str_leq_bruteforce, str_member)


def make_f0() -> PosetFragment:
    """Three curves over two points: a and b through both, c through d only."""
    return PosetFragment(3, 2, [(0, 0), (0, 1), (1, 0), (1, 1), (2, 0)],
                         h1_labels=("a", "b", "c"), h2_labels=("d", "e"))


def make_f3() -> PosetFragment:
    """The cusp configuration, built by hand for comparison with the
    packaged generator."""
    pairs = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0), (2, 2)]
    return PosetFragment(3, 3, pairs, h1_labels=("P", "y1", "y2"),
                         h2_labels=("m", "n1", "n2"))


def brute_fhp(fragment: PosetFragment, a_mask: int, b_mask: int) -> bool:
    """Literal reading: some K inside A has minimal upper bound set B."""
    b_elems = frozenset(h2(j) for j in bits_of(b_mask))
    idxs = list(bits_of(a_mask))
    for size in range(1, len(idxs) + 1):
        for combo in combinations(idxs, size):
            if fragment.mub([h1(i) for i in combo]) == b_elems:
                return True
    return False


def brute_has_smaller(fragment: PosetFragment, a_mask: int,
                      b_mask: int) -> bool:
    """Literal reading: some member pair with a smaller first ordinate lies
    strictly below in the same fiber."""
    sub = (a_mask - 1) & a_mask
    while sub:
        if (str_member(fragment, (sub, b_mask))
                and str_leq_bruteforce(fragment, finite_node(sub, b_mask),
                                       finite_node(a_mask, b_mask))):
            return True
        sub = (sub - 1) & a_mask
    return False


def brute_down_set_size(fragment: PosetFragment, a_mask: int,
                        b_mask: int) -> int:
    node = finite_node(a_mask, b_mask)
    count = 0
    sub = a_mask
    while sub:
        if (str_member(fragment, (sub, b_mask))
                and str_leq_bruteforce(fragment, finite_node(sub, b_mask),
                                       node)):
            count += 1
        sub = (sub - 1) & a_mask
    return count


def brute_mu(fragment: PosetFragment, x: int, m: int, amax: int):
    """Minimum down-set size over every positive-height first ordinate
    containing x, by direct enumeration of all curve subsets up to amax.

    The gate is the mub-witness notion of positive height, not mere
    existence of a smaller node; a junk-padded singleton has a two-element
    down set but no K with mub(K) = {m} and does not count."""
    best = None
    others = [i for i in range(fragment.n1) if i != x]
    b_mask = 1 << m
    for extra in range(0, amax):
        for combo in combinations(others, extra):
            a_mask = mask_of(combo) | 1 << x
            if not str_member(fragment, (a_mask, b_mask)):
                continue
            if not brute_fhp(fragment, a_mask, b_mask):
                continue
            size = brute_down_set_size(fragment, a_mask, b_mask)
            if best is None or size < best:
                best = size
    return best


def brute_j3(fragment: PosetFragment, m: int, f_mask: int, cap: int):
    """Literal search for K disjoint from F whose minimal upper bounds are
    exactly {m}, via the element-level mub."""
    target = frozenset({h2(m)})
    pool = [i for i in range(fragment.n1) if not f_mask >> i & 1]
    for size in range(1, cap + 1):
        for combo in combinations(pool, size):
            if fragment.mub([h1(i) for i in combo]) == target:
                return mask_of(combo)
    return None


def eval_poly_label(label: str, a: int, b: int, p: int) -> int:
    """Evaluate a printed polynomial like '1+x*y+x^2' at (a, b) mod p.

    Parses the label from scratch so the check is independent of the
    generator's coefficient bookkeeping."""
    total = 0
    for term in label.split("+"):
        value = 1
        for factor in term.split("*"):
            if "^" in factor:
                base, exp = factor.split("^")
                exp = int(exp)
            else:
                base, exp = factor, 1
            if base == "x":
                value *= pow(a, exp, p)
            elif base == "y":
                value *= pow(b, exp, p)
            else:
                value *= int(base) ** exp
        total += value
    return total % p
