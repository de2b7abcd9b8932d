"""Quantum f-divergences and the conditional entropies they define.

Finite-dimensional density matrices only.  The package is organized as:

- :mod:`qfdiv.linalg`: Hermitian eigendecomposition with spectral clustering,
  supports, tensor products, partial traces, spectral matrix functions.
- :mod:`qfdiv.fdiv`: the divergence-function catalog and the classical and
  quantum f-divergence engines (spectral form plus epsilon-sweep validation).
- :mod:`qfdiv.condent`: conditional entropies -- generic minimization over the
  conditioning marginal, closed forms, bounds, and register-state formulas.
- :mod:`qfdiv.channels`: Kraus channels and seeded random generators.
- :mod:`qfdiv.propsuite`: the seeded property-test suite with JSON reports.
- :mod:`qfdiv.cli`: the ``qfdiv`` command-line interface.
"""

from .channels import (
    KrausChannel,
    apply_channel,
    build_classical_register_state,
    embed_ancilla,
    pure_bipartite_from_schmidt,
    random_channel,
    random_density,
    support_pinching_channel,
    validate_tpcp,
)
from .condent import (
    BipartiteState,
    OptimizationReport,
    OptimizerOptions,
    alpha_log,
    chain_rule_rhs,
    classical_register_closed_form,
    conditional_entropy_optimize,
    conditional_entropy_tsallis_closed,
    conditional_entropy_vn_closed,
    pure_state_bounds_tsallis,
    thm2_bounds,
    tsallis_entropy,
)
from .errors import ConvergenceError, DomainError, PreconditionError
from .fdiv import (
    DivergenceFunction,
    csiszar_divergence,
    make_tsallis_f,
    quantum_f_divergence,
    quantum_f_divergence_eps_sweep,
    tsallis_divergence_closed,
    vn_relative_entropy_closed,
)
from .linalg import (
    DensityOperator,
    HermitianOperator,
    SpectralDecomposition,
    apply_spectral_function,
    eig_hermitian,
    hs_inner,
    kron,
    partial_trace,
    projector_join,
    support_projector,
)
from .propsuite import PropertyConfig, PropertyReport, run_property, run_suite

__version__ = "0.1.0"

__all__ = [
    "BipartiteState",
    "ConvergenceError",
    "DensityOperator",
    "DivergenceFunction",
    "DomainError",
    "HermitianOperator",
    "KrausChannel",
    "OptimizationReport",
    "OptimizerOptions",
    "PreconditionError",
    "PropertyConfig",
    "PropertyReport",
    "SpectralDecomposition",
    "alpha_log",
    "apply_channel",
    "apply_spectral_function",
    "build_classical_register_state",
    "chain_rule_rhs",
    "classical_register_closed_form",
    "conditional_entropy_optimize",
    "conditional_entropy_tsallis_closed",
    "conditional_entropy_vn_closed",
    "csiszar_divergence",
    "eig_hermitian",
    "embed_ancilla",
    "hs_inner",
    "kron",
    "make_tsallis_f",
    "partial_trace",
    "projector_join",
    "pure_bipartite_from_schmidt",
    "pure_state_bounds_tsallis",
    "quantum_f_divergence",
    "quantum_f_divergence_eps_sweep",
    "random_channel",
    "random_density",
    "run_property",
    "run_suite",
    "support_pinching_channel",
    "support_projector",
    "thm2_bounds",
    "tsallis_divergence_closed",
    "tsallis_entropy",
    "validate_tpcp",
    "vn_relative_entropy_closed",
]
