"""
Noncontextual and non-signalling fractions of empirical models, the
corresponding convex decompositions, and the data-optimised Bell inequality
read off the dual of the noncontextual-fraction program.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional
import logging

import numpy as np

from .config import DEFAULT_BACKEND, DUALITY_GAP_TOLERANCE, INCIDENCE_SIZE_CAP
from .empirical import EmpiricalModel, mix, new_model
from .exceptions import BoundsInverted, DegenerateResidual, NumericalFailure, ScenarioMismatch
from .lp_core import (
    ConstraintSense,
    LinearProgram,
    LpSolution,
    VariableBound,
    dual_program,
    new_program,
    solve,
)
from .scenario import MeasurementScenario, incidence_matrix

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class FractionResult:
    """
    Optimal value of a fraction program with its primal witness b (over
    global assignments) and dual vector y (over local assignments).
    """
    kind: str
    value: object
    witness: np.ndarray
    dual: np.ndarray
    solution: LpSolution

    @property
    def complement(self):
        return 1 - self.value

    def to_dict(self) -> Dict:
        return {
            'kind': self.kind,
            'value': float(self.value),
            'complement': float(self.complement),
            'lp': self.solution.to_dict(),
        }


@dataclass(eq=False)
class Decomposition:
    """e = weight * part_a + (1 - weight) * part_b; a part is None when its weight is 0"""
    kind: str
    weight: object
    part_a: Optional[EmpiricalModel]
    part_b: Optional[EmpiricalModel]

    def residual(self) -> EmpiricalModel:
        if self.part_b is None:
            raise DegenerateResidual(f"{self.kind} decomposition has weight 1; no residual part")
        return self.part_b

    def reconstruct(self) -> EmpiricalModel:
        if self.part_a is None:
            return self.part_b
        if self.part_b is None:
            return self.part_a
        return mix(self.part_a, self.part_b, self.weight)


@dataclass(eq=False)
class BellInequality:
    """
    Inequality a . v <= classical_bound over local assignments.

    dual is the optimal y of the dual program, scaled so that the smallest
    entry of M^T y is 1; coefficients are a = 1/|M| - y.
    """
    scenario: MeasurementScenario
    coefficients: np.ndarray
    dual: np.ndarray
    classical_bound: object
    value: object

    @property
    def normalized_violation(self):
        return self.value - self.classical_bound

    def to_dict(self) -> Dict:
        scenario = self.scenario
        terms = {}
        for i, a in enumerate(self.coefficients):
            k, joint = scenario.decode_local(i)
            terms.setdefault(scenario.context_key(k), {})[','.join(joint)] = a
        return {
            'coefficients': terms,
            'classical_bound': self.classical_bound,
            'value': self.value,
            'normalized_violation': self.normalized_violation,
        }


def _prepare(model: EmpiricalModel, backend: str) -> EmpiricalModel:
    return model.as_exact() if backend == 'exact' else model.as_float()


def _ncf_program(model: EmpiricalModel, size_cap: int) -> LinearProgram:
    M = incidence_matrix(model.scenario, size_cap=size_cap)
    rows, cols = M.shape
    return new_program(np.ones(cols), M, model.flat, [ConstraintSense.LE] * rows)


def _nsf_program(model: EmpiricalModel, size_cap: int) -> LinearProgram:
    M = incidence_matrix(model.scenario, size_cap=size_cap)
    rows, cols = M.shape
    rhs = np.concatenate([model.flat, np.zeros(rows, dtype=model.flat.dtype)])
    return new_program(
        np.ones(cols),
        np.vstack([M, M]),
        rhs,
        [ConstraintSense.LE] * rows + [ConstraintSense.GE] * rows,
        variable_bound=VariableBound.FREE,
    )


def _solve_fraction(kind: str, program: LinearProgram, backend: str) -> FractionResult:
    solution = solve(program, backend=backend)
    if not solution.optimal:
        # b = 0 is always feasible and 1.b <= 1, so anything else is a solver fault
        raise NumericalFailure(f"{kind} program reported {solution.status.value}")
    logger.debug(f"{kind} = {float(solution.value):.12g} ({backend}, {solution.iterations} iterations)")
    return FractionResult(kind, solution.value, solution.primal, solution.dual, solution)


def noncontextual_fraction(model: EmpiricalModel, backend: str = DEFAULT_BACKEND,
                           size_cap: int = INCIDENCE_SIZE_CAP) -> FractionResult:
    """
    NCF: maximise 1.b subject to M b <= v^e, b >= 0.

    Raises:
        SizeCapExceeded, NumericalFailure
    """
    model = _prepare(model, backend)
    return _solve_fraction('NCF', _ncf_program(model, size_cap), backend)


def contextual_fraction(model: EmpiricalModel, backend: str = DEFAULT_BACKEND,
                        size_cap: int = INCIDENCE_SIZE_CAP):
    return noncontextual_fraction(model, backend, size_cap).complement


def nonsignalling_fraction(model: EmpiricalModel, backend: str = DEFAULT_BACKEND,
                           size_cap: int = INCIDENCE_SIZE_CAP) -> FractionResult:
    """NSF: maximise 1.b subject to 0 <= M b <= v^e with b free"""
    model = _prepare(model, backend)
    result = _solve_fraction('NSF', _nsf_program(model, size_cap), backend)
    # rows come in pairs; the >= 0 half only restricts, the <= v half prices
    result.dual = result.dual[:model.scenario.m]
    return result


def signalling_fraction(model: EmpiricalModel, backend: str = DEFAULT_BACKEND,
                        size_cap: int = INCIDENCE_SIZE_CAP):
    return nonsignalling_fraction(model, backend, size_cap).complement


def dual_noncontextual_fraction(model: EmpiricalModel, backend: str = DEFAULT_BACKEND,
                                size_cap: int = INCIDENCE_SIZE_CAP):
    """NCF computed from the explicit dual: minimise y.v^e subject to M^T y >= 1, y >= 0"""
    model = _prepare(model, backend)
    program = dual_program(_ncf_program(model, size_cap))
    solution = solve(program, backend=backend)
    if not solution.optimal:
        raise NumericalFailure(f"Dual NCF program reported {solution.status.value}")
    return -solution.value


def _split(model: EmpiricalModel, kind: str, weight, explained: np.ndarray) -> Decomposition:
    """Build the two parts from the explained mass M b (length m)"""
    scenario = model.scenario
    exact = model.is_exact
    if exact:
        at_zero, at_one = weight == 0, weight == 1
    else:
        at_zero = weight <= DUALITY_GAP_TOLERANCE
        at_one = weight >= 1 - DUALITY_GAP_TOLERANCE

    def normalised(vector):
        tables = []
        for k in range(scenario.num_contexts):
            block = vector[scenario.context_block(k)]
            if not exact:
                block = np.clip(block.astype(float), 0, None)
            tables.append(block / sum(block))
        return new_model(scenario, tables)

    part_a = None if at_zero else normalised(explained)
    part_b = None if at_one else normalised(model.flat - explained)
    if at_zero:
        weight = 0 * weight
        part_b = model
    if at_one:
        weight = 0 * weight + 1
    return Decomposition(kind, weight, part_a, part_b)


def nc_decomposition(model: EmpiricalModel, backend: str = DEFAULT_BACKEND,
                     size_cap: int = INCIDENCE_SIZE_CAP) -> Decomposition:
    """e = NCF * e^NC + CF * e'; e^NC contexts are (M b)|_C / NCF"""
    model = _prepare(model, backend)
    result = noncontextual_fraction(model, backend, size_cap)
    M = incidence_matrix(model.scenario, size_cap=size_cap)
    return _split(model, 'noncontextual', result.value, M.dot(result.witness))


def ns_decomposition(model: EmpiricalModel, backend: str = DEFAULT_BACKEND,
                     size_cap: int = INCIDENCE_SIZE_CAP) -> Decomposition:
    """e = NSF * e^NS + SF * e'; e^NS contexts are (M b)|_C / NSF"""
    model = _prepare(model, backend)
    result = nonsignalling_fraction(model, backend, size_cap)
    M = incidence_matrix(model.scenario, size_cap=size_cap)
    return _split(model, 'non-signalling', result.value, M.dot(result.witness))


def bell_inequality(model: EmpiricalModel, backend: str = DEFAULT_BACKEND,
                    size_cap: int = INCIDENCE_SIZE_CAP) -> BellInequality:
    """
    Bell inequality optimised to the data, from the optimal dual of the NCF program.

    The classical bound is the maximum of a . v^d over every deterministic
    global assignment d; the normalized violation of the source model equals
    its contextual fraction.
    """
    model = _prepare(model, backend)
    scenario = model.scenario
    result = noncontextual_fraction(model, backend, size_cap)
    M = incidence_matrix(scenario, size_cap=size_cap)
    y = result.dual
    if model.is_exact:
        y = np.array([Fraction(v) for v in y], dtype=object)
        tightest = min(M.T.dot(y))
    else:
        y = np.clip(y.astype(float), 0, None)
        tightest = float(np.min(M.T @ y))
    if tightest > 1:
        y = y / tightest

    share = Fraction(1, scenario.num_contexts) if model.is_exact else 1.0 / scenario.num_contexts
    coefficients = share - y
    bound = max(M.T.dot(coefficients))
    value = evaluate_coefficients(coefficients, model)
    logger.info(f"Bell inequality: value {float(value):.12g}, classical bound {float(bound):.12g}")
    return BellInequality(scenario, coefficients, y, bound, value)


def evaluate_coefficients(coefficients: np.ndarray, model: EmpiricalModel):
    return sum((a * p for a, p in zip(coefficients, model.flat)), 0 * coefficients[0])


def evaluate_inequality(inequality: BellInequality, model: EmpiricalModel):
    """a . v^e for another model on the same scenario"""
    if model.scenario != inequality.scenario:
        raise ScenarioMismatch("Inequality and model live on different scenarios")
    return evaluate_coefficients(inequality.coefficients, model)


def inequality_to_cf(value, beta_cl, beta_max) -> float:
    """
    CF lower bound implied by an observed inequality value:
    (value - beta_cl) / (beta_max - beta_cl), clamped to [0, 1].
    """
    if beta_max <= beta_cl:
        raise BoundsInverted(f"beta_max {beta_max} must exceed beta_cl {beta_cl}")
    return min(1, max(0, (value - beta_cl) / (beta_max - beta_cl)))
