"""Uniformly accurate two-scale particle-in-cell solvers for the 2D Vlasov and
Vlasov-Poisson equations under a strong non-homogeneous magnetic field."""

from gyroua.config import ConfigError, ExperimentConfig, load_config
from gyroua.driver import NumericalError, RunRecord, init_particles, run, run_external, run_reference, run_vlasov_poisson
from gyroua.kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "ExperimentConfig",
    "NumericalError",
    "RunRecord",
    "init_particles",
    "load_config",
    "run",
    "run_external",
    "run_reference",
    "run_vlasov_poisson",
]
