"""Desk-scale toolkit for constraint satisfaction over finite templates:
exact solving, local consistency, clone gadgets, random regular hypergraphs,
a gadget-composition hardness pipeline, and a bounded-degree query oracle."""

__version__ = "0.1.0"

from .algebra import (Domain, GroupSpec, Operation, Relation, Structure,
                      coloring_structure, end_relation, endomorphisms, is_core,
                      is_polymorphism, perm_relation, preserves,
                      three_sum_relation, three_sum_structure)
from .instances import Constraint, Instance, Var, value
from .solver import SolveResult, max_value, solve
from .consistency import WidthParams, width_decide, width_error_hunt
from .gadgets import (clone_membership, core_reduce, end_gadget,
                      geiger_construct, verify_simulation)
from .hypergraphs import (Hypergraph, Matching, check_expander_property,
                          instance_from_hypergraph, local_sparsity_exact,
                          peel_order, perm_align, perm_value, sample_hypergraph,
                          sample_matching)
from .reduction import (PairSample, ReductionKit, audit, completeness_witness,
                        pullback_assignment, sample_pair, self_kit, transform,
                        verify_kit)
from .oracle import AdapterSession, OracleSession, adapter_session, bdstar_check, open_session
from .experiments import (advantage, clopper_pearson, no_mean_value, run_tester,
                          subinstance_compare, value_concentration_experiment)
