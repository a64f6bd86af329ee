"""Exact Rips machine for systems of partial isometries of finite metric forests."""

from .errors import (BudgetExhausted, DistortionError, DocumentError, FieldMismatchError, ForestError,
                     InvariantError, PreconditionError, RipsError, ScalarParseError, TripleOverlapError)
from .scalar import Field, Scalar, parse_scalar
from .forest import Edge, Forest, Point, Subtree
from .isometry import PartialIsometry, build_isometry, compose, compose_word
from .graph import GraphMorphism, MultiGraph
from .system import System, cayley_view, independence_certificate, trajectory_tree
from .rips import RipsRun, RipsStep, elementary_step, is_reduced, limit_graph_view, run
from .analysis import (classify, finite_forest_integral, iet_to_system, index_surface_lemma_check,
                       rough_bound, singular_points, system_index)
from .io import SystemDocument, load, loads, save, dumps

__version__ = "0.1.0"
