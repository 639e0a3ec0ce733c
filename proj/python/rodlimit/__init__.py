"""Limit models of thin elastic rod structures."""

from ._core import (
    ConfigError,
    DomainError,
    compute_A,
    exp_so3,
    log_so3,
    project_to_rotation,
    rotation_samples,
    run,
    scaling_study,
    solve,
    svk_density,
    validate_config,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "compute_A",
    "exp_so3",
    "log_so3",
    "project_to_rotation",
    "rotation_samples",
    "run",
    "scaling_study",
    "solve",
    "svk_density",
    "validate_config",
]
