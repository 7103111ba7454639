"""
Linear-program contract shared by the fraction and hidden-variable computations.

Programs are stated as maximisation problems

    maximise c.x  subject to  A x (<= | >=) b  row-wise,  x >= 0 or x free

and solved either with scipy's HiGHS solver ("float") or with a rational
two-phase tableau simplex using Bland's rule ("exact"). Every optimal
solution carries a dual vector with one entry per row, equal to the
derivative of the optimal value with respect to that row's right-hand side:
non-negative for <= rows, non-positive for >= rows.
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence
import logging

import numpy as np
from scipy.optimize import linprog

from .config import (
    DEFAULT_BACKEND,
    DUALITY_GAP_TOLERANCE,
    EXACT_MAX_PIVOTS,
    LP_FEASIBILITY_TOLERANCE,
)
from .exceptions import LinearProgramError, NumericalFailure

logger = logging.getLogger(__name__)


class ConstraintSense(Enum):
    LE = "<="
    GE = ">="


class VariableBound(Enum):
    NONNEGATIVE = "nonnegative"
    FREE = "free"


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    objective: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray
    senses: tuple
    variable_bound: VariableBound = VariableBound.NONNEGATIVE

    def __post_init__(self):
        rows, cols = np.shape(self.constraint_matrix)
        if len(self.objective) != cols:
            raise LinearProgramError(f"Objective has {len(self.objective)} entries, matrix has {cols} columns")
        if len(self.rhs) != rows:
            raise LinearProgramError(f"Right-hand side has {len(self.rhs)} entries, matrix has {rows} rows")
        if len(self.senses) != rows:
            raise LinearProgramError(f"{len(self.senses)} constraint senses for {rows} rows")

    @property
    def shape(self):
        return np.shape(self.constraint_matrix)

    @property
    def is_exact(self) -> bool:
        return any(np.asarray(a).dtype == object for a in (self.objective, self.constraint_matrix, self.rhs))


@dataclass(eq=False)
class LpSolution:
    status: LpStatus
    primal: Optional[np.ndarray] = None
    dual: Optional[np.ndarray] = None
    value: Optional[object] = None
    backend: str = DEFAULT_BACKEND
    primal_residual: float = 0.0
    duality_gap: float = 0.0
    iterations: int = 0
    message: str = ''

    @property
    def optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL

    def to_dict(self) -> dict:
        return {
            'status': self.status.value,
            'value': None if self.value is None else float(self.value),
            'backend': self.backend,
            'primal_residual': float(self.primal_residual),
            'duality_gap': float(self.duality_gap),
            'iterations': self.iterations,
        }


def new_program(objective: Sequence, constraint_matrix, rhs: Sequence,
                senses: Sequence[ConstraintSense],
                variable_bound: VariableBound = VariableBound.NONNEGATIVE) -> LinearProgram:
    return LinearProgram(
        objective=_as_array(objective),
        constraint_matrix=_as_array(constraint_matrix, ndim=2),
        rhs=_as_array(rhs),
        senses=tuple(senses),
        variable_bound=variable_bound,
    )


def _as_array(values, ndim: int = 1) -> np.ndarray:
    array = np.asarray(values)
    if array.dtype != object:
        array = array.astype(float)
    if array.ndim != ndim:
        raise LinearProgramError(f"Expected a {ndim}-d array, got shape {array.shape}")
    return array


def dual_program(program: LinearProgram) -> LinearProgram:
    """
    Explicit dual of max c.x, A x <= b, x >= 0, written as the maximisation
    of -b.y subject to A^T y >= c, y >= 0. Its optimal value is minus the
    primal optimum.
    """
    if program.variable_bound != VariableBound.NONNEGATIVE or any(
            s != ConstraintSense.LE for s in program.senses):
        raise LinearProgramError("Explicit dual is only built for <= rows with non-negative variables")
    rows, cols = program.shape
    return LinearProgram(
        objective=-program.rhs,
        constraint_matrix=program.constraint_matrix.T,
        rhs=program.objective,
        senses=(ConstraintSense.GE,) * cols,
        variable_bound=VariableBound.NONNEGATIVE,
    )


def solve(program: LinearProgram, backend: str = DEFAULT_BACKEND,
          feasibility_tolerance: float = LP_FEASIBILITY_TOLERANCE,
          gap_tolerance: float = DUALITY_GAP_TOLERANCE) -> LpSolution:
    """
    Solve a program and certify the optimum.

    Args:
        program: Program to solve
        backend: "float" (HiGHS) or "exact" (rational simplex)
        feasibility_tolerance: Largest accepted primal residual (float backend)
        gap_tolerance: Largest accepted |c.x - b.y| (float backend)

    Returns:
        LpSolution; infeasible and unbounded programs are reported by status

    Raises:
        NumericalFailure: solver failure, or an optimum that misses the tolerances
    """
    rows, cols = program.shape
    logger.debug(f"Solving {rows}x{cols} program with {backend} backend")
    if backend == 'float':
        solution = _solve_float(program)
    elif backend == 'exact':
        program = _rational_program(program)
        solution = _solve_exact(program)
    else:
        raise LinearProgramError(f"Unknown backend: {backend}")

    if not solution.optimal:
        logger.info(f"Program {rows}x{cols} is {solution.status.value}")
        return solution

    solution.primal_residual = _primal_residual(program, solution.primal)
    solution.duality_gap = abs(_dot(program.objective, solution.primal) - _dot(program.rhs, solution.dual))
    if backend == 'float':
        if solution.primal_residual > feasibility_tolerance:
            raise NumericalFailure(
                f"Primal residual {solution.primal_residual:.3e} exceeds {feasibility_tolerance:.1e}")
        if solution.duality_gap > gap_tolerance:
            raise NumericalFailure(
                f"Duality gap {solution.duality_gap:.3e} exceeds {gap_tolerance:.1e}")
    elif solution.primal_residual != 0 or solution.duality_gap != 0:
        raise NumericalFailure("Exact backend produced an uncertified optimum")
    return solution


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b)), 0)


def _primal_residual(program: LinearProgram, x: np.ndarray):
    ax = program.constraint_matrix.dot(x)
    worst = 0
    for value, bound, sense in zip(ax, program.rhs, program.senses):
        excess = value - bound if sense == ConstraintSense.LE else bound - value
        worst = max(worst, excess)
    if program.variable_bound == VariableBound.NONNEGATIVE:
        worst = max([worst] + [-v for v in x])
    return worst


# Float backend

_HIGHS_OPTIONS = {
    'primal_feasibility_tolerance': 1e-10,
    'dual_feasibility_tolerance': 1e-10,
}

def _solve_float(program: LinearProgram) -> LpSolution:
    A = program.constraint_matrix.astype(float)
    b = program.rhs.astype(float)
    c = program.objective.astype(float)
    signs = np.array([1.0 if s == ConstraintSense.LE else -1.0 for s in program.senses])
    bounds = (0, None) if program.variable_bound == VariableBound.NONNEGATIVE else (None, None)

    result = linprog(-c, A_ub=A * signs[:, None], b_ub=b * signs, bounds=bounds, method='highs-ds',
                     options=_HIGHS_OPTIONS)
    if result.status == 2:
        return LpSolution(LpStatus.INFEASIBLE, backend='float', message=result.message)
    if result.status == 3:
        return LpSolution(LpStatus.UNBOUNDED, backend='float', message=result.message)
    if result.status != 0:
        raise NumericalFailure(f"HiGHS did not converge: {result.message}")

    # marginals are d(-value)/d(b_ub); undo the row sign flip
    dual = -result.ineqlin.marginals * signs
    return LpSolution(
        status=LpStatus.OPTIMAL,
        primal=np.asarray(result.x, dtype=float),
        dual=np.asarray(dual, dtype=float),
        value=float(-result.fun),
        backend='float',
        iterations=int(getattr(result, 'nit', 0)),
        message=result.message,
    )


# Exact backend

class _Tableau:
    """Dense rational tableau in canonical form, maximisation, Bland's rule"""

    def __init__(self, rows: List[List[Fraction]], rhs: List[Fraction], basis: List[int],
                 max_pivots: int):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.width = len(rows[0]) if rows else 0
        self.max_pivots = max_pivots
        self.pivots = 0

    def reduced_costs(self, cost: List[Fraction], allowed: List[bool]) -> List[Fraction]:
        reduced = []
        for j in range(self.width):
            if not allowed[j]:
                reduced.append(Fraction(0))
                continue
            z = sum((cost[self.basis[i]] * row[j] for i, row in enumerate(self.rows) if row[j]), Fraction(0))
            reduced.append(cost[j] - z)
        return reduced

    def value(self, cost: List[Fraction]) -> Fraction:
        return sum((cost[b] * r for b, r in zip(self.basis, self.rhs)), Fraction(0))

    def pivot(self, i: int, j: int):
        self.pivots += 1
        if self.pivots > self.max_pivots:
            raise NumericalFailure(f"Exact simplex exceeded {self.max_pivots} pivots")
        pivot_row = self.rows[i]
        p = pivot_row[j]
        self.rows[i] = pivot_row = [v / p for v in pivot_row]
        self.rhs[i] = self.rhs[i] / p
        for k, row in enumerate(self.rows):
            if k == i or not row[j]:
                continue
            f = row[j]
            self.rows[k] = [a - f * b for a, b in zip(row, pivot_row)]
            self.rhs[k] -= f * self.rhs[i]
        self.basis[i] = j

    def optimise(self, cost: List[Fraction], allowed: List[bool]) -> LpStatus:
        while True:
            reduced = self.reduced_costs(cost, allowed)
            entering = next((j for j in range(self.width) if allowed[j] and reduced[j] > 0), None)
            if entering is None:
                return LpStatus.OPTIMAL
            best = None
            for i, row in enumerate(self.rows):
                if row[entering] > 0:
                    key = (self.rhs[i] / row[entering], self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return LpStatus.UNBOUNDED
            self.pivot(best[1], entering)


def _fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    return Fraction(float(value))


def _rational_program(program: LinearProgram) -> LinearProgram:
    return LinearProgram(
        objective=np.array([_fraction(v) for v in program.objective], dtype=object),
        constraint_matrix=np.array(
            [[_fraction(v) for v in row] for row in program.constraint_matrix], dtype=object
        ).reshape(program.shape),
        rhs=np.array([_fraction(v) for v in program.rhs], dtype=object),
        senses=program.senses,
        variable_bound=program.variable_bound,
    )


def _solve_exact(program: LinearProgram, max_pivots: int = EXACT_MAX_PIVOTS) -> LpSolution:
    rows, cols = program.shape
    A = [[_fraction(v) for v in row] for row in program.constraint_matrix]
    b = [_fraction(v) for v in program.rhs]
    c = [_fraction(v) for v in program.objective]
    row_signs = [1 if s == ConstraintSense.LE else -1 for s in program.senses]
    free = program.variable_bound == VariableBound.FREE

    # Structural columns (x, or x+ and x- when free), one slack per row, then artificials
    structural = 2 * cols if free else cols
    flipped = []
    table, rhs = [], []
    for i in range(rows):
        row = [row_signs[i] * a for a in A[i]]
        if free:
            row = row + [-a for a in row]
        bound = row_signs[i] * b[i]
        slack = [Fraction(0)] * rows
        slack[i] = Fraction(1)
        if bound < 0:
            row = [-a for a in row]
            slack = [-a for a in slack]
            bound = -bound
            flipped.append(i)
        table.append(row + slack)
        rhs.append(bound)

    artificial_of = {}
    width = structural + rows
    for i in flipped:
        artificial_of[i] = width + len(artificial_of)
    total_width = width + len(artificial_of)
    for i, row in enumerate(table):
        extra = [Fraction(0)] * len(artificial_of)
        if i in artificial_of:
            extra[artificial_of[i] - width] = Fraction(1)
        table[i] = row + extra

    basis = [artificial_of.get(i, structural + i) for i in range(rows)]
    tableau = _Tableau(table, rhs, basis, max_pivots)

    if artificial_of:
        phase_one = [Fraction(0)] * total_width
        for col in artificial_of.values():
            phase_one[col] = Fraction(-1)
        tableau.optimise(phase_one, [True] * total_width)
        if tableau.value(phase_one) < 0:
            return LpSolution(LpStatus.INFEASIBLE, backend='exact', iterations=tableau.pivots)
        # Drive zero-level artificials out where a real column can replace them
        for i in range(rows):
            if tableau.basis[i] >= width:
                j = next((j for j in range(width) if tableau.rows[i][j] != 0), None)
                if j is not None:
                    tableau.pivot(i, j)

    cost = [Fraction(0)] * total_width
    for j in range(cols):
        cost[j] = c[j]
        if free:
            cost[cols + j] = -c[j]
    allowed = [j < width for j in range(total_width)]
    status = tableau.optimise(cost, allowed)
    if status == LpStatus.UNBOUNDED:
        return LpSolution(LpStatus.UNBOUNDED, backend='exact', iterations=tableau.pivots)

    values = [Fraction(0)] * total_width
    for i, j in enumerate(tableau.basis):
        values[j] = tableau.rhs[i]
    x = values[:cols]
    if free:
        x = [p - q for p, q in zip(values[:cols], values[cols:structural])]

    reduced = tableau.reduced_costs(cost, [True] * total_width)
    # y_i = -(reduced cost of slack i) for the <= form; >= rows flip sign back
    dual = [-reduced[structural + i] * row_signs[i] for i in range(rows)]

    return LpSolution(
        status=LpStatus.OPTIMAL,
        primal=np.array(x, dtype=object),
        dual=np.array(dual, dtype=object),
        value=tableau.value(cost),
        backend='exact',
        iterations=tableau.pivots,
    )
