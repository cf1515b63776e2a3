"""Finite two-tier poset fragments, their pair order of (curves, points)
nodes, fiber statistics, and reconstruction of fragment isomorphisms from
isomorphisms of the pair order."""

from .core import (DEFAULT_MAX_TIER, HARD_MAX_TIER, ElementId, IsoMap,
                   MIN_ELEMENT, PosetFragment, SmallPoset, Tier,
                   ValidationReport, bits_of, h1, h2, longest_chain_length,
                   mask_of, relabel, small_poset_isomorphic, validate)
from .conditions import (BatteryReport, ConditionReport, check_j1, check_j2,
                         check_j4, check_p1_to_p4, find_j3_witness,
                         find_p5_witness, find_special_t, survey_j3,
                         survey_p5, witness_battery)
from .structure import (FiberView, StrNode, counting_formula, detect_I2,
                        dominates_via, down_set_in_fiber, ell,
                        enumerate_fiber, eta, fiber_height_positive,
                        finite_node, format_node, has_strictly_smaller,
                        join_above, mu_statistic, parity_mub_check, ray_node,
                        str_leq, str_leq_bruteforce, str_member, w_max)
from .models import (FragmentFormatError, GeneratorParams,
                     affine_plane_fragment, cusp_fragment, dumps_fragment,
                     fragment_from_json, fragment_to_json, load_fragment,
                     random_fragment, save_fragment)
from .reconstruction import (DomainSpec, FactorizationReport,
                             ReconstructionError, ReconstructionTrace,
                             RoundTripResult, StrIso, build_rho,
                             corrupt_str_iso, enumerate_domain,
                             extend_psi_to_phi, induce_str_iso, k_sets,
                             rho1_from_psi, rho1_from_rays, rho2_from_phi,
                             round_trip, verify_factorization)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_MAX_TIER", "HARD_MAX_TIER", "ElementId", "IsoMap",
    "MIN_ELEMENT", "PosetFragment", "SmallPoset", "Tier",
    "ValidationReport", "bits_of", "h1", "h2", "longest_chain_length",
    "mask_of", "relabel", "small_poset_isomorphic", "validate",
    "BatteryReport", "ConditionReport", "check_j1", "check_j2", "check_j4",
    "check_p1_to_p4", "find_j3_witness", "find_p5_witness",
    "find_special_t", "survey_j3", "survey_p5", "witness_battery",
    "FiberView", "StrNode", "counting_formula", "detect_I2",
    "dominates_via", "down_set_in_fiber", "ell", "enumerate_fiber", "eta",
    "fiber_height_positive", "finite_node", "format_node",
    "has_strictly_smaller", "join_above", "mu_statistic",
    "parity_mub_check", "ray_node", "str_leq", "str_leq_bruteforce",
    "str_member", "w_max",
    "FragmentFormatError", "GeneratorParams", "affine_plane_fragment",
    "cusp_fragment", "dumps_fragment", "fragment_from_json",
    "fragment_to_json", "load_fragment", "random_fragment", "save_fragment",
    "DomainSpec", "FactorizationReport", "ReconstructionError",
    "ReconstructionTrace", "RoundTripResult", "StrIso", "build_rho",
    "corrupt_str_iso", "enumerate_domain", "extend_psi_to_phi",
    "induce_str_iso", "k_sets", "rho1_from_psi", "rho1_from_rays",
    "rho2_from_phi", "round_trip", "verify_factorization",
]
