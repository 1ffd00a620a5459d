"""Symbolic verification of Noether symmetries and conservation laws for 2D gas dynamics
in mass Lagrangian coordinates, with Eulerian mapping and numeric cross-checks."""

from .catalog import CatalogError, build_generator, conserved_vectors, entry, generators
from .euler_map import NoEulerianRepresentation, to_eulerian, verify_eulerian_claw
from .expr import Expr, ExprError, LedgerViolation, canonical_eq, canonicalize, is_zero
from .grammar import ParseError, parse, to_text
from .jet import Generator, JetFrame, divergence, noether_vector, total_derivative, variational_derivative
from .model import ConfigError, ModelConfig, build_lagrangian, euler_lagrange
from .noether import ConservedVector, DivergenceCertificate, divergence_symmetry_test, verify_conservation_law
from .oracle import GridSpec, ManufacturedSolution, manufactured_check, random_point_check
from .report import CheckRecord

__version__ = "0.1.0"

__all__ = [
    "CatalogError", "build_generator", "conserved_vectors", "entry", "generators",
    "NoEulerianRepresentation", "to_eulerian", "verify_eulerian_claw",
    "Expr", "ExprError", "LedgerViolation", "canonical_eq", "canonicalize", "is_zero",
    "ParseError", "parse", "to_text",
    "Generator", "JetFrame", "divergence", "noether_vector", "total_derivative", "variational_derivative",
    "ConfigError", "ModelConfig", "build_lagrangian", "euler_lagrange",
    "ConservedVector", "DivergenceCertificate", "divergence_symmetry_test", "verify_conservation_law",
    "GridSpec", "ManufacturedSolution", "manufactured_check", "random_point_check",
    "CheckRecord",
]
