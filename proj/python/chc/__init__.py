"""Optimal boundary control of a viscous Cahn-Hilliard system with dynamic boundary conditions."""

from ._chc import (
    Config,
    ConfigError,
    DomainViolation,
    Error,
    __version__,
    forward,
    gradcheck,
    gradient,
    load_config,
    optimize,
    parse_config,
    potential,
    run_command,
    sha256_hex,
)

__all__ = [
    "Config",
    "ConfigError",
    "DomainViolation",
    "Error",
    "__version__",
    "forward",
    "gradcheck",
    "gradient",
    "load_config",
    "optimize",
    "parse_config",
    "potential",
    "run_command",
    "sha256_hex",
]
