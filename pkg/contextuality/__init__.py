"""
Contextual and signalling fractions of empirical models, hidden-variable
model audits, and certification of genuine contextuality
"""

from .scenario import MeasurementScenario, new_scenario, incidence_matrix
from .empirical import EmpiricalModel, new_model, from_counts, is_nonsignalling, mim, mix, perturb, total_variation
from .contextual_fractions import (
    noncontextual_fraction, contextual_fraction, nonsignalling_fraction, signalling_fraction,
    nc_decomposition, ns_decomposition, bell_inequality,
)
from .hvm import HiddenVariableModel, new_hvm, audit, boundary_hvm, eta_star, sigma_star
from .certify import Verdict, CertificationReport, certify, estimate_eta, estimate_sigma
from .diagnostics import Diagnostic, DiagnosticLevel, DiagnosticLog
from .batch import BatchRunner, BatchTask, TaskStatus
from .exceptions import ContextualityError

__all__ = [
    'MeasurementScenario',
    'new_scenario',
    'incidence_matrix',
    'EmpiricalModel',
    'new_model',
    'from_counts',
    'is_nonsignalling',
    'mim',
    'mix',
    'perturb',
    'total_variation',
    'noncontextual_fraction',
    'contextual_fraction',
    'nonsignalling_fraction',
    'signalling_fraction',
    'nc_decomposition',
    'ns_decomposition',
    'bell_inequality',
    'HiddenVariableModel',
    'new_hvm',
    'audit',
    'boundary_hvm',
    'eta_star',
    'sigma_star',
    'Verdict',
    'CertificationReport',
    'certify',
    'estimate_eta',
    'estimate_sigma',
    'Diagnostic',
    'DiagnosticLevel',
    'DiagnosticLog',
    'BatchRunner',
    'BatchTask',
    'TaskStatus',
    'ContextualityError',
]
