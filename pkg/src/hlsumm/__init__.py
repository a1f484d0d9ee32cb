"""Graph summarization with hierarchical node labels under a two-part MDL code."""
from .assemble import STRATEGIES, assemble, check_lossless, decode, empty_model
from .encoding import CostBreakdown, Model, Structure, build_model, model_cost, reconstruct
from .pipeline import Summary, summarize
from .taxonomy import HGSError, HeteroGraph, LabelTaxonomy

__all__ = [
    "STRATEGIES",
    "CostBreakdown",
    "HGSError",
    "HeteroGraph",
    "LabelTaxonomy",
    "Model",
    "Structure",
    "Summary",
    "assemble",
    "build_model",
    "check_lossless",
    "decode",
    "empty_model",
    "model_cost",
    "reconstruct",
    "summarize",
]
