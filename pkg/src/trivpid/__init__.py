"""Partial information decompositions of trivariate distributions.

Computes the three PIDs of a finite system (X, Y, Z), the seven invariant
subatoms shared by them, the source/non-source redundancy split and the
non-negative decomposition of the joint entropy.
"""
from .broja import PidAtoms, PolytopePoint, SolverConfig, brute_force_pid, solve_pid
from .catalog import (
    SystemSpec,
    make_and,
    make_copy,
    make_dice,
    make_dyadic,
    make_markov,
    make_parallel,
    make_triadic,
    make_xor,
)
from .dist import (
    Alphabet,
    JointDist3,
    co_information,
    conditional_mutual_information,
    entropy,
    load_pmf,
    marginal,
    mutual_information,
)
from .errors import ConsistencyError, DegenerateError, SolverError, TrivPIDError, ValidationError
from .gaussian import GaussianCov, gaussian_mutual_informations, gaussian_pid, gaussian_sr_nsr
from .subatoms import (
    Decomposition,
    EntropyDecomposition,
    MinimalSet,
    RedundancySplit,
    ThreePids,
    decompose,
    entropy_decomposition,
    irsi_directed,
    minimal_set,
    rci_between,
    rsi_between,
    rui_between,
    source_redundancy,
    three_pids,
    verify_monotonicity,
)

__version__ = "0.1.0"
