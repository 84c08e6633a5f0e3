"""Numerical verification of sharp operator Polya-Szego and Diaz-Metcalf type inequalities."""

from .bounds import (
    SpectralBounds,
    alpha_general,
    alpha_polya_szego,
    alpha_weighted_geometric_closed,
    beta_general,
    beta_squared,
    bound_set,
    dm_constant,
    dm_squared_constant,
    gruss_bound,
    kantorovich_factor,
)
from .errors import (
    DimensionMismatch,
    DomainViolation,
    InvalidBounds,
    InvalidMapSpec,
    InvalidMeanSpec,
    InvariantViolation,
    NonConvergence,
    NotHermitian,
    NotStrictlyPositive,
    ParseError,
    RepresentingFunctionDomain,
    SharpboundError,
    WeightOutOfRange,
)
from .instances import Instance, OrderedPair, equality_witness, generate_instance, load_instance, save_instance
from .linalg import HermitianMatrix, eigh, jacobi_eigh, loewner_leq, optimal_constant
from .maps import PositiveMapSpec, apply_map, check_unital
from .means import MeanSpec, geometric_mean, kubo_ando_mean, weighted_geometric_mean
from .runner import BulkConfig, run_bulk, summarize
from .search import SearchReport, falsify, sweep
from .verify import ALL_CHECKS, InequalityReport, run_check

__version__ = "0.1.0"
