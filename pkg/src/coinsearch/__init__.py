"""Sequential search for three forged coins and the matching adder-channel code."""

from .analysis import asymptotic_rate, mean_closed_form, mean_triple_sum
from .channel import MessageTriple, decode_transcript, session
from .model import ProblemInstance, ScaleOracle, materialize, weigh
from .search import DECODE_TABLE, SearchTrace, decode_row, search

__all__ = [
    "DECODE_TABLE",
    "MessageTriple",
    "ProblemInstance",
    "ScaleOracle",
    "SearchTrace",
    "asymptotic_rate",
    "decode_row",
    "decode_transcript",
    "materialize",
    "mean_closed_form",
    "mean_triple_sum",
    "search",
    "session",
    "weigh",
]
