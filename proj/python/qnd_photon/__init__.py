"""Cascaded-transmon QND detection of a single microwave photon.

Thin wrapper over the C++ core; see README.md for the model and the CLI.
"""

from ._core import (
    ConfigError,
    IntegrationFailure,
    InvalidInput,
    __version__,
    canonical_config,
    chain_parameters,
    empirical_snr,
    fidelity,
    figure_ids,
    fit_sqrt_n,
    inferred_fidelity,
    master_equation,
    monte_carlo,
    reproduce,
    run_config,
    shapes,
    snr,
)

__all__ = [
    "ConfigError",
    "IntegrationFailure",
    "InvalidInput",
    "__version__",
    "canonical_config",
    "chain_parameters",
    "empirical_snr",
    "fidelity",
    "figure_ids",
    "fit_sqrt_n",
    "inferred_fidelity",
    "master_equation",
    "monte_carlo",
    "reproduce",
    "run_config",
    "shapes",
    "snr",
]
