"""Mechanism-design mathematics: decision problems, Groves/VCG taxes,
settlement into transfer schemes, and the bundled mechanisms."""

from .problems import (JointType, DecisionProblem, Verdict, decide_efficient,
                       groves_tax, vcg_offset, tax_vector, total_utility,
                       check_strategy_proof, classify,
                       BALANCED_OBSERVED, FEASIBLE_OBSERVED, NEITHER_OBSERVED)
from .rational import Rational, rational, encode_rational
from .settlement import COLLECTOR, TaxScheme, Transfer, settle
from .mechanisms import (MECHANISM_IDS, BUILD, NO_BUILD, build_problem,
                         vickrey, cavallo_redistribution, unit_demand,
                         single_minded, public_project,
                         vickrey_problem, cavallo_problem, first_price_problem,
                         unit_demand_problem, single_minded_problem,
                         public_project_problem,
                         validate_type_value, type_value_to_wire,
                         type_value_from_wire)

__all__ = [
    "JointType", "DecisionProblem", "Verdict", "decide_efficient",
    "groves_tax", "vcg_offset", "tax_vector", "total_utility",
    "check_strategy_proof", "classify",
    "BALANCED_OBSERVED", "FEASIBLE_OBSERVED", "NEITHER_OBSERVED",
    "Rational", "rational", "encode_rational",
    "COLLECTOR", "TaxScheme", "Transfer", "settle",
    "MECHANISM_IDS", "BUILD", "NO_BUILD", "build_problem",
    "vickrey", "cavallo_redistribution", "unit_demand", "single_minded",
    "public_project", "vickrey_problem", "cavallo_problem",
    "first_price_problem", "unit_demand_problem", "single_minded_problem",
    "public_project_problem", "validate_type_value", "type_value_to_wire",
    "type_value_from_wire",
]
