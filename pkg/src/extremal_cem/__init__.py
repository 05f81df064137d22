"""Cross-entropy search for counterexamples in extremal combinatorics,
with exact verification of explicit constructions."""

from .cem import CemConfig, CrossEntropySearch, RunResult, Session, run
from .encoding import ConstructionSpace, decode, encode_state
from .graph import Graph, peak_profile
from .linalg import DimensionTooLarge, charpoly_exact, det_exact, permanent, sym_eigenvalues
from .nn import PolicyNetwork
from .rewards import ScoreFn, get_score_fn
from .verify import VerificationReport, run_suite

__version__ = "0.1.0"

__all__ = [
    "CemConfig",
    "ConstructionSpace",
    "CrossEntropySearch",
    "DimensionTooLarge",
    "Graph",
    "PolicyNetwork",
    "RunResult",
    "ScoreFn",
    "Session",
    "VerificationReport",
    "charpoly_exact",
    "decode",
    "det_exact",
    "encode_state",
    "get_score_fn",
    "peak_profile",
    "permanent",
    "run",
    "run_suite",
    "sym_eigenvalues",
]
