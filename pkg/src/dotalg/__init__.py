"""Compile hierarchical dot diagrams and discrete probabilistic programs into
bounded-width algebraic terms, and evaluate them over any semiring."""

from .algebraise import algebrise, algebrise_hierarchical, pipeline_stats
from .circuit import ArithmeticCircuit, compile_circuit, eval_circuit
from .diagrams import DotDiagram, HierarchicalDotDiagram, unfold, validate
from .errors import (DotAlgError, InterfaceMismatch, InvalidInput, ParseError, PreconditionError, ResourceLimit,
                     UnresolvedAcceptance, ValidationError)
from .evaluate import interpret_term
from .frontend import load_program, parse
from .inference import DyadicRational, InferenceResult, exact_inference, infer, truncated_eval
from .oracle import oracle_semantics
from .semiring import BOOLEAN, PRIME61, RATIONAL, TROPICAL, Interpretation, Matrix
from .terms import Term, dag_size, width

__all__ = [
    "ArithmeticCircuit", "BOOLEAN", "DotAlgError", "DotDiagram", "DyadicRational", "HierarchicalDotDiagram",
    "InferenceResult", "InterfaceMismatch", "Interpretation", "InvalidInput", "Matrix", "PRIME61", "ParseError",
    "PreconditionError", "RATIONAL", "ResourceLimit", "TROPICAL", "Term", "UnresolvedAcceptance",
    "ValidationError", "algebrise", "algebrise_hierarchical", "compile_circuit", "dag_size", "eval_circuit",
    "exact_inference", "infer", "interpret_term", "load_program", "oracle_semantics", "parse", "pipeline_stats",
    "truncated_eval", "unfold", "validate", "width",
]
