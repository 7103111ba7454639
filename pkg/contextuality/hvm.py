"""
Hidden-variable models and their relaxation parameters.

eta_star is the smallest nondeterministic weight over decompositions
h = (1 - eta) h_OD + eta h'' with h_OD deterministic per context (signalling
allowed); sigma_star is the signalling fraction of a behaviour. An HVM with
2 eta + sigma < 1 cannot realize contextual fraction above eta.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence
import logging
import math
import numbers

import numpy as np

from .config import (
    DEFAULT_BACKEND,
    DUALITY_GAP_TOLERANCE,
    INCIDENCE_SIZE_CAP,
    PROBABILITY_TOLERANCE,
    REPORT_MARGIN,
)
from .contextual_fractions import contextual_fraction, signalling_fraction
from .catalog import chsh_scenario, deterministic_vertex, ncycle_vertices
from .empirical import EmpiricalModel, as_fraction, mix, new_model
from .exceptions import (
    AlphaOutOfRange,
    CorrectedBoundViolation,
    HvmError,
    NegativeProbability,
    NormalizationViolation,
    OutOfRange,
    ScenarioMismatch,
    SizeCapExceeded,
)
from .lp_core import ConstraintSense, new_program, solve
from .scenario import MeasurementScenario

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HiddenVariableModel:
    scenario: MeasurementScenario
    lambdas: tuple
    prior: np.ndarray
    behaviours: tuple


def new_hvm(lambdas: Sequence[str], prior: Sequence, behaviours: Sequence[EmpiricalModel],
            tolerance: float = PROBABILITY_TOLERANCE) -> HiddenVariableModel:
    """
    Validate an HVM: one behaviour per label, a prior summing to 1, one shared scenario.

    Raises:
        HvmError, NegativeProbability, NormalizationViolation, ScenarioMismatch
    """
    lambdas = tuple(str(label) for label in lambdas)
    behaviours = tuple(behaviours)
    if not lambdas:
        raise HvmError("HVM needs at least one hidden variable")
    if len(set(lambdas)) != len(lambdas):
        raise HvmError(f"Duplicate hidden-variable labels in {list(lambdas)}")
    if len(prior) != len(lambdas) or len(behaviours) != len(lambdas):
        raise HvmError(f"{len(lambdas)} labels, {len(prior)} prior weights, {len(behaviours)} behaviours")

    exact = any(isinstance(p, Fraction) for p in prior)
    weights = np.array([as_fraction(p) for p in prior] if exact else [float(p) for p in prior],
                       dtype=object if exact else float)
    if min(weights) < -tolerance:
        raise NegativeProbability(f"Prior has negative weight {float(min(weights)):.3e}")
    if abs(sum(weights) - 1) > tolerance:
        raise NormalizationViolation(f"Prior sums to {float(sum(weights)):.12g}")

    scenario = behaviours[0].scenario
    if any(h.scenario != scenario for h in behaviours):
        raise ScenarioMismatch("Hidden-variable behaviours live on different scenarios")
    weights.setflags(write=False)
    return HiddenVariableModel(scenario, lambdas, weights, behaviours)


def realized_behaviour(hvm: HiddenVariableModel) -> EmpiricalModel:
    """Context-wise sum of p(lambda) h^lambda"""
    exact = hvm.prior.dtype == object and all(h.is_exact for h in hvm.behaviours)
    behaviours = hvm.behaviours if exact else [h.as_float() for h in hvm.behaviours]
    prior = hvm.prior if exact else hvm.prior.astype(float)
    tables = []
    for k in range(hvm.scenario.num_contexts):
        table = prior[0] * behaviours[0].tables[k]
        for p, h in zip(prior[1:], behaviours[1:]):
            table = table + p * h.tables[k]
        tables.append(table)
    return new_model(hvm.scenario, tables)


def eta_star(behaviour: EmpiricalModel):
    """1 - min over contexts of the largest outcome probability"""
    return 1 - min(max(table) for table in behaviour.tables)


def eta_star_oracle(behaviour: EmpiricalModel, use_lp: bool = False,
                    backend: str = DEFAULT_BACKEND, limit: int = INCIDENCE_SIZE_CAP):
    """
    eta_star by enumeration: the best deterministic behaviour d maximises the
    largest r with r * v^d <= v^h, and eta_star = 1 - r.

    With use_lp each r comes from the one-variable program
    max r subject to r * v^d <= v^h, r >= 0.
    """
    scenario = behaviour.scenario
    count = math.prod(scenario.context_sizes)
    if count > limit:
        raise SizeCapExceeded(count, limit)
    if use_lp:
        behaviour = behaviour.as_exact() if backend == 'exact' else behaviour.as_float()

    best = None
    for choice in product(*(range(size) for size in scenario.context_sizes)):
        if use_lp:
            column = np.zeros((scenario.m, 1))
            for k, s in enumerate(choice):
                column[scenario.offsets[k] + s, 0] = 1
            solution = solve(new_program([1], column, behaviour.flat, [ConstraintSense.LE] * scenario.m),
                             backend=backend)
            r = solution.value
        else:
            r = min(table[s] for table, s in zip(behaviour.tables, choice))
        if best is None or r > best:
            best = r
    return 1 - best


def sigma_star(behaviour: EmpiricalModel, backend: str = DEFAULT_BACKEND,
               size_cap: int = INCIDENCE_SIZE_CAP):
    """Smallest parameter-dependent weight: the signalling fraction"""
    return signalling_fraction(behaviour, backend, size_cap)


def condition_holds(eta, sigma, tolerance: float = DUALITY_GAP_TOLERANCE) -> bool:
    """
    2 eta + sigma < 1. Equality fails. Values carrying float error must clear
    1 by tolerance; exact rationals are compared as they are.
    """
    value = 2 * eta + sigma
    if all(isinstance(v, numbers.Rational) for v in (eta, sigma)):
        return value < 1
    return value < 1 - tolerance


@dataclass
class LambdaAudit:
    label: str
    eta: object
    sigma: object
    cf: object
    condition_ok: bool

    def to_dict(self) -> Dict:
        return {
            'label': self.label,
            'eta': float(self.eta),
            'sigma': float(self.sigma),
            'cf': float(self.cf),
            'condition_ok': self.condition_ok,
        }


@dataclass
class HvmAudit:
    eta: object
    sigma: object
    realized_cf: object
    condition_ok: bool
    per_lambda: List[LambdaAudit] = field(default_factory=list)

    @property
    def condition_value(self):
        return 2 * self.eta + self.sigma

    def to_dict(self) -> Dict:
        return {
            'eta': float(self.eta),
            'sigma': float(self.sigma),
            'condition_value': float(self.condition_value),
            'condition_ok': self.condition_ok,
            'realized_cf': float(self.realized_cf),
            'per_lambda': [entry.to_dict() for entry in self.per_lambda],
        }


def audit(hvm: HiddenVariableModel, backend: str = DEFAULT_BACKEND,
          size_cap: int = INCIDENCE_SIZE_CAP,
          tolerance: float = DUALITY_GAP_TOLERANCE) -> HvmAudit:
    """
    Per-lambda (eta*, sigma*, CF), their maxima, the condition 2 eta + sigma < 1
    and the contextual fraction of the realized behaviour.

    Raises:
        CorrectedBoundViolation: the condition holds (for the HVM or for one
            lambda) yet the corresponding CF exceeds eta by more than tolerance
    """
    entries = []
    for label, h in zip(hvm.lambdas, hvm.behaviours):
        eta, sigma = eta_star(h), sigma_star(h, backend, size_cap)
        entry = LambdaAudit(label, eta, sigma, contextual_fraction(h, backend, size_cap),
                            condition_holds(eta, sigma, tolerance))
        if entry.condition_ok and entry.cf > entry.eta + tolerance:
            raise CorrectedBoundViolation(
                f"lambda {label}: 2*eta + sigma = {float(2 * eta + sigma):.6g} < 1 "
                f"but CF = {float(entry.cf):.12g} > eta = {float(eta):.12g}")
        entries.append(entry)

    eta = max(e.eta for e in entries)
    sigma = max(e.sigma for e in entries)
    report = HvmAudit(
        eta=eta,
        sigma=sigma,
        realized_cf=contextual_fraction(realized_behaviour(hvm), backend, size_cap),
        condition_ok=condition_holds(eta, sigma, tolerance),
        per_lambda=entries,
    )
    logger.info(f"HVM audit: eta={float(eta):.6g}, sigma={float(sigma):.6g}, "
                f"condition={'ok' if report.condition_ok else 'failed'}, CF={float(report.realized_cf):.6g}")
    if report.condition_ok and report.realized_cf > eta + tolerance:
        raise CorrectedBoundViolation(
            f"2*eta + sigma = {float(report.condition_value):.6g} < 1 but realized CF "
            f"{float(report.realized_cf):.12g} exceeds eta {float(eta):.12g}")
    return report


@dataclass(eq=False)
class BoundaryHvm:
    hvm: HiddenVariableModel
    alpha: Fraction
    eta: Fraction
    sigma: Fraction
    cf: object
    measured_sigma: object

    @property
    def behaviour(self) -> EmpiricalModel:
        return self.hvm.behaviours[0]


def boundary_hvm(n: int, alpha, backend: str = DEFAULT_BACKEND,
                 tolerance: float = DUALITY_GAP_TOLERANCE) -> BoundaryHvm:
    """
    Single behaviour alpha h_S1 + (1 - alpha) h_S2 on the n-cycle, with
    eta* = 1 - alpha and sigma* = 2 alpha - 1 so that sigma* + 2 eta* = 1,
    while its contextual fraction stays 1.

    Raises:
        HvmError: alpha is not a number
        AlphaOutOfRange: alpha outside [1/2, 1]
        NTooSmall: n < 3
    """
    try:
        alpha = as_fraction(alpha)
    except (TypeError, ValueError, ZeroDivisionError):
        raise HvmError(f"alpha must be a number, got {alpha!r}")
    if not Fraction(1, 2) <= alpha <= 1:
        raise AlphaOutOfRange(f"alpha {alpha} outside [1/2, 1]")
    s1, s2 = ncycle_vertices(n, exact=True)
    behaviour = mix(s1, s2, alpha)
    hvm = new_hvm(['ub'], [Fraction(1)], [behaviour])

    eta = eta_star(behaviour)
    sigma = 2 * alpha - 1
    if eta != 1 - alpha or sigma + 2 * eta != 1:
        raise HvmError(f"Boundary construction broke: eta={eta}, sigma={sigma}")
    cf = contextual_fraction(behaviour, backend)
    measured_sigma = sigma_star(behaviour, backend)
    if abs(cf - 1) > tolerance or abs(measured_sigma - sigma) > tolerance:
        raise HvmError(f"Boundary HVM for n={n}, alpha={alpha}: CF={float(cf)}, SF={float(measured_sigma)}")
    logger.debug(f"Boundary HVM n={n}, alpha={alpha}: eta*={eta}, sigma*={sigma}")
    return BoundaryHvm(hvm, alpha, eta, sigma, cf, measured_sigma)


def signalling_hvm_for_pr_box() -> HiddenVariableModel:
    """Two deterministic parameter-dependent behaviours whose even mixture is the PR-box"""
    scenario = chsh_scenario()
    first = deterministic_vertex(scenario, [('0', '0'), ('0', '0'), ('0', '0'), ('0', '1')], exact=True)
    second = deterministic_vertex(scenario, [('1', '1'), ('1', '1'), ('1', '1'), ('1', '0')], exact=True)
    return new_hvm(['lambda1', 'lambda2'], [Fraction(1, 2), Fraction(1, 2)], [first, second])


@dataclass
class DeterministicVerdict:
    cf: object
    sigma_prime: object
    genuine: bool

    def to_dict(self) -> Dict:
        return {'cf': float(self.cf), 'sigma_prime': float(self.sigma_prime), 'genuine': self.genuine}


def deterministic_count_decomposition(model: EmpiricalModel, sigma_prime,
                                      backend: str = DEFAULT_BACKEND,
                                      margin: float = REPORT_MARGIN,
                                      cf: Optional[object] = None) -> DeterministicVerdict:
    """
    Criterion for fully deterministic hidden variables carrying at most
    sigma_prime prior weight on parameter-dependent ones: CF(e) <= sigma_prime.
    Genuine when CF exceeds sigma_prime by more than margin.
    """
    if not 0 <= sigma_prime <= 1:
        raise OutOfRange(f"sigma_prime {sigma_prime} outside [0, 1]")
    if cf is None:
        cf = contextual_fraction(model, backend)
    return DeterministicVerdict(cf, sigma_prime, bool(cf > sigma_prime + margin))
