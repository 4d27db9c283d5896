"""Lovász Local Lemma toolkit.

Sufficient-condition criteria with rigorous interval verdicts, the
Moser-Tardos resampling solver with witness-tree machinery, and threshold
pipelines for diagonal Ramsey lower bounds, hypergraph colorings, and
directed cycles of prescribed modular length.
"""

from .criteria import (
    CriterionVerdict,
    SymmetricParams,
    Verdict,
    abstract_lll,
    cluster_expansion,
    cluster_vs_product,
    shearer_threshold,
    symmetric_check,
)
from .depgraph import DependencyDigraph, DependencyGraph, symmetrize
from .moser_tardos import EventSpec, Variable, VariableSpace, run, witness_tree
from .numeric import RealInterval, binomial, e_interval, lambert_w_minus1, stirling2

__all__ = [
    "CriterionVerdict",
    "DependencyDigraph",
    "DependencyGraph",
    "EventSpec",
    "RealInterval",
    "SymmetricParams",
    "Variable",
    "VariableSpace",
    "Verdict",
    "abstract_lll",
    "binomial",
    "cluster_expansion",
    "cluster_vs_product",
    "e_interval",
    "lambert_w_minus1",
    "run",
    "shearer_threshold",
    "stirling2",
    "symmetric_check",
    "symmetrize",
    "witness_tree",
]

__version__ = "0.1.0"
