from .errors import AssumptionViolated, InvalidArgument, MetagameError, ProtocolViolation, SolverError
from .games import (CSP, FeedbackRecord, GameMatrix, Prior, SideSignalSource, SignalModel, Trajectory,
                    csp_from_trajectory, expected_utility, mix_csps, mixed_strategy, pure_strategy,
                    sample_signal)
from .gamefiles import resolve_game, resolve_prior
from .simplex import LinearProgram, lp_solve
from .StackelbergSolver import (StackelbergSolution, best_response_set, maximin_value, perturbed_commitment,
                                stackelberg_value, stackval_prior, weakly_dominated)
from .learners import (LearnerSpec, RegretReport, external_regret, learner_act, learner_init, learner_observe,
                       swap_regret)
from .ExperimentRunner import CspReport, EstimateReport, ExperimentConfig, estimate, estimate_csps, run_trial
from .MetaGameAuditor import (AuditReport, BeliefTraceReport, ClaimsReport, DeviationLibrary, audit_pne,
                              belief_trace, revelation_analysis, verify_claims)

__all__ = [
    'AssumptionViolated', 'AuditReport', 'BeliefTraceReport', 'CSP', 'ClaimsReport', 'CspReport',
    'DeviationLibrary', 'EstimateReport', 'ExperimentConfig', 'FeedbackRecord', 'GameMatrix',
    'InvalidArgument', 'LearnerSpec', 'LinearProgram', 'MetagameError', 'Prior', 'ProtocolViolation',
    'RegretReport', 'SideSignalSource', 'SignalModel', 'SolverError', 'StackelbergSolution', 'Trajectory',
    'audit_pne', 'belief_trace', 'best_response_set', 'csp_from_trajectory', 'estimate', 'estimate_csps',
    'expected_utility', 'external_regret', 'learner_act', 'learner_init', 'learner_observe', 'lp_solve',
    'maximin_value', 'mix_csps', 'mixed_strategy', 'perturbed_commitment', 'pure_strategy',
    'resolve_game', 'resolve_prior', 'revelation_analysis', 'run_trial', 'sample_signal',
    'stackelberg_value', 'stackval_prior', 'swap_regret', 'verify_claims', 'weakly_dominated',
]
