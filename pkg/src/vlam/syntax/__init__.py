from .lexer import ParseError
from .parser import parse_context, parse_index, parse_raw_term, parse_term, parse_type
from .pretty import pretty
from .terms import *  # noqa: F401,F403
from .terms import SyntaxUsageError, alpha_eq, shuffles, is_shuffle
from .theory import Axiom, OpDecl, Theory, TheoryError, load_theory, parse_theory
