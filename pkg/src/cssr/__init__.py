"""Causal-state splitting reconstruction (CSSR) for discrete sequences."""

from .alphabet import Alphabet, Corpus, SymbolSequence, infer_alphabet, ingest, parse_alphabet, render
from .engine import InferenceConfig, StatePartition, infer, reconstruct
from .errors import CSSRError, InferenceError, ValidationError
from .harness import SweepConfig, TrialRecord, prediction_error, run_sweep, suggest_lmax
from .machine import (
    CausalStateMachine,
    Edge,
    ProcessSpec,
    deserialize,
    entropy_rate,
    generate,
    serialize,
    stationary_distribution,
    to_dot,
    word_distribution,
)
from .parse_tree import ParseTree, build_tree
from .processes import even_process, load_process_spec, named_process, seven_state_template
from .stats import chi_squared_two_sample, ks_two_sample, total_variation

__version__ = "0.1.0"

__all__ = [
    "Alphabet", "Corpus", "SymbolSequence", "infer_alphabet", "ingest", "parse_alphabet", "render",
    "InferenceConfig", "StatePartition", "infer", "reconstruct",
    "CSSRError", "InferenceError", "ValidationError",
    "SweepConfig", "TrialRecord", "prediction_error", "run_sweep", "suggest_lmax",
    "CausalStateMachine", "Edge", "ProcessSpec", "deserialize", "entropy_rate", "generate", "serialize",
    "stationary_distribution", "to_dot", "word_distribution",
    "ParseTree", "build_tree",
    "even_process", "load_process_spec", "named_process", "seven_state_template",
    "chi_squared_two_sample", "ks_two_sample", "total_variation",
]
