"""SAT solving and gradient-steered sampling of model multisets."""
from .cdcl import BranchingHints, ResourceLimitError, Solver, SolverConfig, solve
from .costfn import differentiate, evaluate, parse_cost, simplify, sum_terms
from .model import Model, ModelMultiset, check_model, frequency, query_probability
from .parsers import ParseError, ProblemInstance, detect_format, parse
from .sampler import SampleResult, SamplerConfig, gradient_hints, project_and_report, sample
from .translate import CoreProblem, combined_cost_value, translate

__version__ = "0.1.0"
