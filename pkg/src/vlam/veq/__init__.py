from .proof import (
    SCHEMA_VERSION, ProofFormatError, ProofTree, VEquation, dump_proof, load_proof,
    tree_from_json, tree_to_json,
)
from .check import ProofError, check_proof
from .rewrite import NormalResult, eta_expand, normalize, normalize_term, reverse
from .search import Budget, SearchError, derive_bound
