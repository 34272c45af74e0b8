"""Multiset-valued linear index grammars ({}-LIG) and unordered vector
grammars with dominance links (UVG-DL)."""
from .convert import LinkSymbol, mslig_to_uvgdl, uvgdl_to_mslig
from .derivation import (DerivationMetrics, SearchBounds, StepApplication, apply_step,
                         check_linear_restriction, derivation_metrics, enumerate_forms,
                         enumerate_mslig)
from .errors import MvgError
from .fileformat import TreeNode, parse_grammar, parse_tree, serialize_grammar, serialize_tree
from .grammar import (DominanceLink, MsligGrammar, MsligProduction, Nt, UvgdlGrammar,
                      UvgdlProduction, Vector, validate_mslig, validate_uvgdl)
from .multiset import IndexMultiset
from .normal_forms import is_etf, is_rinf, to_etf, to_rinf
from .recognizer import RecognizerConfig, extract_tree, recognize
from .uvgdl import (VectorAssignment, check_dominance, check_vector_cover, connectivity_lint,
                    enumerate_uvgdl, infer_assignment, yield_of)

__version__ = "0.1.0"
