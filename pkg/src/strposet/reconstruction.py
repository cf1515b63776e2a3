"""Recovering a fragment isomorphism from an isomorphism of pair orders.

The pipeline mirrors how the pair order determines the fragment: nodes with a
fixed singleton second ordinate must land in a single target fiber (giving
the point map), ray nodes map to ray nodes (giving the curve map directly),
and without rays each curve is pinned down by intersecting the first
ordinates of the images of its K-sets, the nodes (K, {b}) with x in K and
mub(K) = {b}.  Every derived entry cites the nodes that forced it, and
inconsistencies are collected as conflicts instead of producing a wrong map.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Optional, Union

from .core import IsoMap, PosetFragment, bits_of, mask_of, relabel
from .structure import (StrNode, enumerate_fiber, ray_node, str_leq,
                        str_member)

Mapping = Union[dict, Callable[[StrNode], StrNode]]


@dataclass(slots=True)
class ReconstructionTrace:
    rho2_table: dict = field(default_factory=dict)
    rho1_table: dict = field(default_factory=dict)
    conflicts: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"version": 1,
                "rho2": {str(k): v for k, v in self.rho2_table.items()},
                "rho1": {str(k): v for k, v in self.rho1_table.items()},
                "conflicts": list(self.conflicts)}


class ReconstructionError(Exception):
    """Raised when the pipeline cannot produce a single consistent map; the
    trace explains why."""

    def __init__(self, message: str, trace: ReconstructionTrace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True, slots=True)
class DomainSpec:
    """Which nodes an induced map is tabulated over.

    Per point m, all pairs (K, {m}) with K drawn from the first
    ``fiber_support_cap`` curves below m and |K| <= k_cap; optionally every
    ray node; optionally the nodes of extra fibers given as
    (b_mask, support_mask, amax) triples.
    """

    k_cap: int = 3
    include_rays: bool = False
    fiber_support_cap: Optional[int] = None
    extra_fibers: tuple[tuple[int, int, int], ...] = ()


def enumerate_domain(fragment: PosetFragment, spec: DomainSpec
                     ) -> list[StrNode]:
    nodes: list[StrNode] = []
    for m in range(fragment.n2):
        pool = list(bits_of(fragment.down[m]))
        if spec.fiber_support_cap is not None:
            pool = pool[:spec.fiber_support_cap]
        for size in range(1, min(spec.k_cap, len(pool)) + 1):
            for combo in combinations(pool, size):
                nodes.append(StrNode(mask_of(combo), 1 << m))
    for b_mask, support_mask, amax in spec.extra_fibers:
        nodes.extend(enumerate_fiber(fragment, b_mask, support_mask,
                                     amax).nodes)
    if spec.include_rays:
        nodes.extend(ray_node(fragment, x) for x in range(fragment.n1))
    return list(dict.fromkeys(nodes))


class StrIso:
    """Bijection between enumerated node universes of two pair orders.

    ``forward`` and ``inverse`` may be tables or callables; the domain and
    codomain lists make the enumerated universes explicit either way.
    ``probes`` counts lookups so consumers can report how much of the map
    they touched.
    """

    def __init__(self, fragment_x: PosetFragment, fragment_y: PosetFragment,
                 forward: Mapping, inverse: Mapping,
                 domain: list[StrNode], codomain: list[StrNode]):
        self.fragment_x = fragment_x
        self.fragment_y = fragment_y
        self._forward = forward
        self._inverse = inverse
        self.domain = list(domain)
        self.codomain = list(codomain)
        self.probes = 0

    @classmethod
    def from_table(cls, fragment_x: PosetFragment, fragment_y: PosetFragment,
                   table: dict) -> "StrIso":
        inverse = {v: k for k, v in table.items()}
        return cls(fragment_x, fragment_y, table, inverse,
                   list(table.keys()), list(table.values()))

    def map(self, node: StrNode) -> StrNode:
        self.probes += 1
        if callable(self._forward):
            return self._forward(node)
        return self._forward[node]

    def unmap(self, node: StrNode) -> StrNode:
        self.probes += 1
        if callable(self._inverse):
            return self._inverse(node)
        return self._inverse[node]

    def reset_probes(self) -> None:
        self.probes = 0

    def validate(self, order_check: bool = True) -> list[str]:
        """Invariant audit: bijection between the universes, images are
        member pairs, and the order agrees in both directions on every
        domain pair where either side's second ordinates even allow a
        comparison."""
        problems = []
        if len(set(self.domain)) != len(self.domain):
            problems.append("domain has repeated nodes")
        if len(set(self.codomain)) != len(self.codomain):
            problems.append("codomain has repeated nodes")
        images = []
        for node in self.domain:
            img = self.map(node)
            images.append(img)
            if not str_member(self.fragment_y, img.masks()):
                problems.append(f"image of {node} is not a member pair")
            back = self.unmap(img)
            if back != node:
                problems.append(f"inverse(map({node})) = {back}")
        if set(images) != set(self.codomain):
            problems.append("forward image differs from the codomain")
        for img in self.codomain:
            if self.map(self.unmap(img)) != img:
                problems.append(f"map(inverse({img})) != {img}")
        if problems or not order_check:
            return problems
        fx, fy = self.fragment_x, self.fragment_y
        pairs = list(zip(self.domain, images))
        for i, (u, fu) in enumerate(pairs):
            for j, (v, fv) in enumerate(pairs):
                if i == j:
                    continue
                # u <= v needs v's points within u's; same on the image side.
                x_possible = v.b_mask & ~u.b_mask == 0
                y_possible = fv.b_mask & ~fu.b_mask == 0
                if not (x_possible or y_possible):
                    continue
                lx = x_possible and str_leq(fx, u, v)
                ly = y_possible and str_leq(fy, fu, fv)
                if lx != ly:
                    problems.append(
                        f"order mismatch: {u} <= {v} is {lx} "
                        f"but image comparison gives {ly}")
                    if len(problems) > 20:
                        return problems
        return problems

    def to_json(self) -> dict:
        if callable(self._forward):
            pairs = [[n.to_json(), self.map(n).to_json()] for n in self.domain]
        else:
            pairs = [[n.to_json(), self._forward[n].to_json()]
                     for n in self.domain]
        return {"version": 1, "pairs": pairs}

    @classmethod
    def from_json(cls, fragment_x: PosetFragment, fragment_y: PosetFragment,
                  obj: dict) -> "StrIso":
        if not isinstance(obj, dict) or obj.get("version") != 1:
            raise ValueError("unsupported map file")
        table = {StrNode.from_json(a): StrNode.from_json(b)
                 for a, b in obj["pairs"]}
        return cls.from_table(fragment_x, fragment_y, table)


def induce_str_iso(rho: IsoMap, spec: DomainSpec = DomainSpec()) -> StrIso:
    """Tabulate (A, B) -> (rho A, rho B) over the enumerated domain."""
    table = {}
    for node in enumerate_domain(rho.source, spec):
        ray = None if node.ray_of is None else rho.h1_map[node.ray_of]
        table[node] = StrNode(rho.h1_mask_image(node.a_mask),
                              rho.h2_mask_image(node.b_mask), ray)
    return StrIso.from_table(rho.source, rho.target, table)


def corrupt_str_iso(phi: StrIso, seed: int = 0) -> StrIso:
    """Swap the images of two finite domain nodes from different fibers;
    for exercising conflict reporting."""
    rng = random.Random(seed)
    finite = [n for n in phi.domain if not n.is_ray]
    rng.shuffle(finite)
    for u, v in combinations(finite, 2):
        if u.b_mask != v.b_mask:
            table = {n: phi.map(n) for n in phi.domain}
            table[u], table[v] = table[v], table[u]
            return StrIso.from_table(phi.fragment_x, phi.fragment_y, table)
    raise ValueError("domain has no two nodes in different fibers")


def rho2_from_phi(phi: StrIso) -> tuple[dict[int, int], ReconstructionTrace]:
    """Point map from where singleton-fiber nodes land.

    Every domain node over {m} must map into one singleton fiber {n};
    disagreements and non-singleton images become conflicts.
    """
    trace = ReconstructionTrace()
    fx, fy = phi.fragment_x, phi.fragment_y
    groups: dict[int, list[StrNode]] = {m: [] for m in range(fx.n2)}
    for node in phi.domain:
        if node.is_ray or node.b_mask.bit_count() != 1:
            continue
        groups[node.b_mask.bit_length() - 1].append(node)
    rho2: dict[int, int] = {}
    for m in range(fx.n2):
        if not groups[m]:
            raise ReconstructionError(
                f"no domain node in the fiber over {fx.h2_labels[m]}", trace)
        target = None
        witness = None
        for node in groups[m]:
            img = phi.map(node)
            if not str_member(fy, img.masks()):
                trace.conflicts.append(
                    {"kind": "image-not-member", "m": fx.h2_labels[m],
                     "node": node.to_json()})
                continue
            if img.b_mask.bit_count() != 1:
                trace.conflicts.append(
                    {"kind": "image-fiber-not-singleton",
                     "m": fx.h2_labels[m], "node": node.to_json(),
                     "image": img.to_json()})
                continue
            n = img.b_mask.bit_length() - 1
            if target is None:
                target, witness = n, node
            elif n != target:
                trace.conflicts.append(
                    {"kind": "fiber-split", "m": fx.h2_labels[m],
                     "images": sorted({n, target}),
                     "nodes": [witness.to_json(), node.to_json()]})
        if target is not None:
            rho2[m] = target
            trace.rho2_table[m] = {"image": target,
                                   "witness": witness.to_json()}
    values = [v for v in rho2.values()]
    if len(rho2) == fx.n2 and (len(set(values)) != fx.n2
                               or fx.n2 != fy.n2):
        trace.conflicts.append({"kind": "rho2-not-bijective",
                                "images": sorted(values)})
    return rho2, trace


def k_sets(fragment: PosetFragment, x: int, size_cap: int = 3
           ) -> list[StrNode]:
    """All (K, {b}) with x in K, |K| <= size_cap and mub(K) = {b}, ordered by
    point then size then lexicographic K."""
    if not 0 <= x < fragment.n1:
        raise ValueError(f"h1 index {x} out of range")
    out = []
    for b in bits_of(fragment.up[x]):
        target = 1 << b
        others = [i for i in bits_of(fragment.down[b]) if i != x]
        for size in range(2, min(size_cap, len(others) + 1) + 1):
            for combo in combinations(others, size - 1):
                acc = fragment.up[x]
                for i in combo:
                    acc &= fragment.up[i]
                if acc == target:
                    out.append(StrNode(mask_of(combo) | 1 << x, target))
    return out


def rho1_from_psi(psi: StrIso, size_cap: int = 3
                  ) -> tuple[dict[int, int], ReconstructionTrace]:
    """Curve map by intersecting the first ordinates of K-set images.

    The image intersection always contains the true image, so a singleton
    answer is correct whenever psi really is induced by a relabeling; a
    larger intersection is recorded as an ambiguity, never guessed at.
    Only K-sets psi actually tabulates count as evidence; a map file over a
    truncated domain fails here instead of deep in the lookup.
    """
    trace = ReconstructionTrace()
    fx, fy = psi.fragment_x, psi.fragment_y
    in_domain = set(psi.domain)
    rho1: dict[int, int] = {}
    for x in range(fx.n1):
        nodes = [n for n in k_sets(fx, x, size_cap) if n in in_domain]
        if not nodes:
            raise ReconstructionError(
                f"no K-sets for curve {fx.h1_labels[x]} within the size cap "
                f"and the map domain", trace)
        evidence = []
        inter = fy.all_h1_mask
        for node in nodes:
            img = psi.map(node)
            evidence.append({"node": node.to_json(), "image": img.to_json()})
            if (img.b_mask.bit_count() != 1
                    or img.a_mask.bit_count() < 2
                    or fy.common_h2_above(img.a_mask) != img.b_mask):
                trace.conflicts.append(
                    {"kind": "image-not-k-set", "x": fx.h1_labels[x],
                     "node": node.to_json(), "image": img.to_json()})
            inter &= img.a_mask
        entry = {"intersection": list(bits_of(inter)), "evidence": evidence}
        if inter.bit_count() == 1:
            rho1[x] = inter.bit_length() - 1
            entry["image"] = rho1[x]
        else:
            entry["image"] = None
            trace.conflicts.append(
                {"kind": "rho1-ambiguous", "x": fx.h1_labels[x],
                 "intersection": [fy.h1_labels[i] for i in bits_of(inter)]})
        trace.rho1_table[x] = entry
    return rho1, trace


def rho1_from_rays(phi: StrIso) -> tuple[dict[int, int], ReconstructionTrace]:
    """Curve map read directly off ray images."""
    trace = ReconstructionTrace()
    fx = phi.fragment_x
    in_domain = set(phi.domain)
    rho1: dict[int, int] = {}
    for x in range(fx.n1):
        ray = ray_node(fx, x)
        if ray not in in_domain:
            raise ReconstructionError(
                f"ray node for {fx.h1_labels[x]} not in the domain", trace)
        img = phi.map(ray)
        if not img.is_ray:
            trace.conflicts.append(
                {"kind": "ray-image-not-ray", "x": fx.h1_labels[x],
                 "image": img.to_json()})
            continue
        rho1[x] = img.ray_of
        trace.rho1_table[x] = {"image": img.ray_of,
                               "evidence": [{"node": ray.to_json(),
                                             "image": img.to_json()}]}
    return rho1, trace


def build_rho(phi: StrIso, size_cap: int = 3, prefer_rays: bool = True
              ) -> tuple[IsoMap, ReconstructionTrace]:
    """Assemble the fragment isomorphism, or raise with the full trace.

    Failure never yields a partial or guessed map: conflicts (fiber splits,
    ambiguous curves, incidence violations) surface in the trace of the
    raised error.
    """
    rho2, trace = rho2_from_phi(phi)
    fx = phi.fragment_x
    have_rays = {n.ray_of for n in phi.domain if n.is_ray}
    if prefer_rays and have_rays == set(range(fx.n1)):
        rho1, t1 = rho1_from_rays(phi)
    else:
        rho1, t1 = rho1_from_psi(phi, size_cap)
    trace.rho1_table.update(t1.rho1_table)
    trace.conflicts.extend(t1.conflicts)
    if trace.conflicts:
        raise ReconstructionError("conflicting evidence; see trace", trace)
    try:
        iso = IsoMap(phi.fragment_x, phi.fragment_y,
                     tuple(rho1[i] for i in range(fx.n1)),
                     tuple(rho2[j] for j in range(fx.n2)))
    except (KeyError, ValueError) as exc:
        trace.conflicts.append({"kind": "incidence-violation",
                                "detail": str(exc)})
        raise ReconstructionError(str(exc), trace) from exc
    return iso, trace


@dataclass(slots=True)
class FactorizationReport:
    checked: int
    violations: list

    @property
    def clean(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"version": 1, "checked": self.checked,
                "clean": self.clean, "violations": list(self.violations)}


def verify_factorization(phi: StrIso, rho: IsoMap,
                         sample_cap: Optional[int] = None,
                         seed: int = 0) -> FactorizationReport:
    """Check phi(A, B) = (rho A, rho B) nodewise; mismatches report the
    pulled-back ordinates of the actual image next to A and B."""
    nodes = phi.domain
    if sample_cap is not None and len(nodes) > sample_cap:
        nodes = random.Random(seed).sample(nodes, sample_cap)
    inv = rho.inverse()
    violations = []
    for node in nodes:
        img = phi.map(node)
        ray = None if node.ray_of is None else rho.h1_map[node.ray_of]
        expected = StrNode(rho.h1_mask_image(node.a_mask),
                           rho.h2_mask_image(node.b_mask), ray)
        if img != expected:
            violations.append(
                {"node": node.to_json(), "image": img.to_json(),
                 "expected": expected.to_json(),
                 "a_star": list(bits_of(inv.h1_mask_image(img.a_mask))),
                 "b_star": list(bits_of(inv.h2_mask_image(img.b_mask)))})
    return FactorizationReport(len(nodes), violations)


def extend_psi_to_phi(psi: StrIso, size_cap: int = 3) -> StrIso:
    """Grow a finite-nodes-only map to one defined on ray nodes as well,
    using the K-set curve map; raises with the trace when curves stay
    ambiguous."""
    rho1, trace = rho1_from_psi(psi, size_cap)
    if trace.conflicts:
        raise ReconstructionError("cannot extend: see trace", trace)
    fx, fy = psi.fragment_x, psi.fragment_y
    table = {node: psi.map(node) for node in psi.domain if not node.is_ray}
    for x in range(fx.n1):
        table[ray_node(fx, x)] = ray_node(fy, rho1[x])
    return StrIso.from_table(fx, fy, table)


# -- relabel round trip -------------------------------------------------------


@dataclass(slots=True)
class RoundTripResult:
    recovered: bool
    conflicts: list
    probes: int
    battery_passed: bool
    battery_reasons: list
    exact: Optional[bool] = None
    factorization_clean: Optional[bool] = None

    def to_json(self) -> dict:
        return {"version": 1, "recovered": self.recovered,
                "conflicts": list(self.conflicts), "probes": self.probes,
                "battery": {"passed": self.battery_passed,
                            "reasons": list(self.battery_reasons)}}


def round_trip(fragment: PosetFragment, seed: int, psi_only: bool = True,
               k_cap: int = 3, corrupt: bool = False) -> RoundTripResult:
    """Relabel with a hidden map, induce the node map, reconstruct, compare.

    ``recovered`` demands the exact hidden map back plus a clean
    factorization check; with ``corrupt`` the induced map is damaged first
    to exercise the conflict paths.
    """
    from .conditions import witness_battery
    battery = witness_battery(fragment)
    relabeled, rho_star = relabel(fragment, seed)
    spec = DomainSpec(k_cap=k_cap, include_rays=not psi_only)
    phi = induce_str_iso(rho_star, spec)
    if corrupt:
        phi = corrupt_str_iso(phi, seed)
    phi.reset_probes()
    try:
        rho_hat, trace = build_rho(phi, size_cap=k_cap,
                                   prefer_rays=not psi_only)
    except ReconstructionError as exc:
        return RoundTripResult(False, list(exc.trace.conflicts), phi.probes,
                               battery.passed, list(battery.reasons))
    report = verify_factorization(phi, rho_hat)
    exact = (rho_hat.h1_map == rho_star.h1_map
             and rho_hat.h2_map == rho_star.h2_map)
    conflicts = list(trace.conflicts) + list(report.violations)
    return RoundTripResult(exact and report.clean, conflicts, phi.probes,
                           battery.passed, list(battery.reasons),
                           exact=exact, factorization_clean=report.clean)
