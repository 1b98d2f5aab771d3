"""Noninterference checking for a small process calculus.

Parses process specifications, builds their labelled transition systems,
decides strong, weak and branching bisimilarity, and checks ten
noninterference properties based on the last two.
"""
from .equiv import (BfMode, CyclicInput, Partition, Relation, bf_bisimilar_oracle, equivalent,
                    partition, partition_branching, partition_strong, partition_weak, saturate)
from .lts import (BuildLimits, Lts, StateSpaceExceeded, build_lts, export_aut, export_dot,
                  hide_high, parse_aut, restrict_high)
from .security import (ALL_PROPERTIES, AttackerBounds, Base, Outcome, PropertyId, Verdict, check,
                       enumerate_attackers, taxonomy_report)
from .syntax import ParseError, SpecError, SpecModel, check_guardedness, parse_spec, parse_term, to_text

__version__ = "0.1.0"

__all__ = [
    "ALL_PROPERTIES", "AttackerBounds", "Base", "BfMode", "BuildLimits", "CyclicInput", "Lts",
    "Outcome", "ParseError", "Partition", "PropertyId", "Relation", "SpecError", "SpecModel",
    "StateSpaceExceeded", "Verdict", "bf_bisimilar_oracle", "build_lts", "check",
    "check_guardedness", "enumerate_attackers", "equivalent", "export_aut", "export_dot",
    "hide_high", "parse_aut", "parse_spec", "parse_term", "partition", "partition_branching",
    "partition_strong", "partition_weak", "restrict_high", "saturate", "taxonomy_report", "to_text",
]
