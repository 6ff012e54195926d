"""Frog models with drift on d-ary trees: simulators, couplings and bounds."""

__version__ = "0.1.0"

from .bounds import (Base, MomentSequences, ThresholdResult, brw_min_growth, compute_moment_sequences,
                     critical_rho, pa_limit, pa_lower_bound, pz_empirical_check, q_star)
from .core.rng import trial_seed
from .core.sched import Policy
from .core.tree import DomainError, ModelParams, p_of_rho, rho_of_p
from .coupling import (Embedding, check_dominance, coupled_trials, effective_extra_kill,
                       run_coupled_fm, run_coupled_rfm)
from .fm import ConfigError, SimConfig, TrialOutcome, Truncation, estimate_root_visits, run_fm, run_fm_prime
from .rfm import EarlyRemovalPolicy, run_dominance_chain, run_rfm, sample_vt, visits_profile

__all__ = [
    "__version__", "Base", "MomentSequences", "ThresholdResult", "brw_min_growth",
    "compute_moment_sequences", "critical_rho", "pa_limit", "pa_lower_bound", "pz_empirical_check",
    "q_star", "trial_seed", "Policy", "DomainError", "ModelParams", "p_of_rho", "rho_of_p",
    "Embedding", "check_dominance", "coupled_trials", "effective_extra_kill", "run_coupled_fm",
    "run_coupled_rfm", "ConfigError", "SimConfig", "TrialOutcome", "Truncation",
    "estimate_root_visits", "run_fm", "run_fm_prime", "EarlyRemovalPolicy", "run_dominance_chain",
    "run_rfm", "sample_vt", "visits_profile",
]
