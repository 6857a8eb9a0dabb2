"""Quantum-annealing variants on random mean-variance portfolio instances.

Statevector simulation of forward and reverse annealing schedules for the
standard, transverse-coupler, inhomogeneous-driving, RFQA, and
counter-diabatic variants, with time-to-solution benchmarking.
"""

from .exact import (ClassicalSpectrum, HardnessReport, LocalMinimum,
                    ResourceLimitError, enumerate_spectrum, is_hard_instance,
                    local_minima)
from .evolution import (SpectrumTrace, StateVector, StepSizeError, evolve,
                        evolve_with_retries, initial_state, spectrum_trace)
from .experiments import ExperimentConfig, StudyReport, run_study
from .hamiltonians import (AlgorithmSpec, HamiltonianOperator, KINDS,
                           assemble, cd_alpha, coupler_term, driver_field,
                           make_algorithm, problem_diagonal)
from .instances import (IsingProblem, PortfolioSpec, QuboProblem,
                        build_ising, generate_instance, qubo_to_ising,
                        to_qubo)
from .metrics import (RunRecord, ScalingFit, advantage_ratio, fit_scaling,
                      success_probability, tts)
from .schedules import CdControl, Schedule, gamma_profile, gamma_site

__all__ = [
    "AlgorithmSpec", "CdControl", "ClassicalSpectrum", "ExperimentConfig",
    "HamiltonianOperator", "HardnessReport", "IsingProblem", "KINDS",
    "LocalMinimum", "PortfolioSpec", "QuboProblem", "ResourceLimitError",
    "RunRecord", "ScalingFit", "Schedule", "SpectrumTrace", "StateVector",
    "StepSizeError", "StudyReport", "advantage_ratio", "assemble",
    "build_ising", "cd_alpha", "coupler_term", "driver_field",
    "enumerate_spectrum", "evolve", "evolve_with_retries", "fit_scaling",
    "gamma_profile", "gamma_site", "generate_instance", "initial_state",
    "is_hard_instance", "local_minima", "make_algorithm", "problem_diagonal",
    "qubo_to_ising", "run_study", "spectrum_trace", "success_probability",
    "to_qubo", "tts",
]

__version__ = "0.1.0"
