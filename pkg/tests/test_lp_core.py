from fractions import Fraction

import pytest

from contextuality.exceptions import LinearProgramError
from contextuality.lp_core import (
    ConstraintSense,
    LpStatus,
    VariableBound,
    dual_program,
    new_program,
    solve,
)

LE, GE = ConstraintSense.LE, ConstraintSense.GE


@pytest.fixture
def textbook():
    # max x + y  s.t.  x + 2y <= 4,  3x + y <= 6
    return new_program([1, 1], [[1, 2], [3, 1]], [4, 6], [LE, LE])


def test_exact_optimum_and_dual(textbook):
    solution = solve(textbook, backend='exact')
    assert solution.status == LpStatus.OPTIMAL
    assert solution.value == Fraction(14, 5)
    assert list(solution.primal) == [Fraction(8, 5), Fraction(6, 5)]
    assert list(solution.dual) == [Fraction(2, 5), Fraction(1, 5)]
    assert solution.primal_residual == 0
    assert solution.duality_gap == 0


def test_float_optimum_and_dual(textbook):
    solution = solve(textbook, backend='float')
    assert solution.value == pytest.approx(2.8)
    assert list(solution.dual) == pytest.approx([0.4, 0.2])
    assert solution.duality_gap < 1e-8


@pytest.mark.parametrize('backend', ['float', 'exact'])
def test_explicit_dual_value_is_negated_primal(textbook, backend):
    primal = solve(textbook, backend=backend)
    dual = solve(dual_program(textbook), backend=backend)
    assert float(-dual.value) == pytest.approx(float(primal.value), abs=1e-9)


@pytest.mark.parametrize('backend', ['float', 'exact'])
def test_infeasible_program(backend):
    program = new_program([1], [[1]], [-1], [LE])
    assert solve(program, backend=backend).status == LpStatus.INFEASIBLE


def test_unbounded_program_exact():
    program = new_program([1], [[-1]], [0], [LE])
    assert solve(program, backend='exact').status == LpStatus.UNBOUNDED


def test_unbounded_program_float_is_not_optimal():
    program = new_program([1], [[-1]], [0], [LE])
    assert not solve(program, backend='float').optimal


@pytest.mark.parametrize('backend', ['float', 'exact'])
def test_free_variables_and_ge_rows(backend):
    # max x  s.t.  x <= 3,  x >= -2,  x free
    program = new_program([1], [[1], [1]], [3, -2], [LE, GE], variable_bound=VariableBound.FREE)
    solution = solve(program, backend=backend)
    assert float(solution.value) == pytest.approx(3)
    assert float(solution.dual[0]) == pytest.approx(1)
    assert float(solution.dual[1]) == pytest.approx(0)


@pytest.mark.parametrize('backend', ['float', 'exact'])
def test_negative_free_optimum(backend):
    # max -x  s.t.  x >= 1.5 with x free: x = 1.5
    program = new_program([-1], [[1]], [Fraction(3, 2)], [GE], variable_bound=VariableBound.FREE)
    solution = solve(program, backend=backend)
    assert float(solution.primal[0]) == pytest.approx(1.5)
    assert float(solution.dual[0]) == pytest.approx(-1)


def test_dual_requires_canonical_form():
    program = new_program([1], [[1]], [1], [GE])
    with pytest.raises(LinearProgramError):
        dual_program(program)


def test_dimension_checks():
    with pytest.raises(LinearProgramError):
        new_program([1, 1], [[1]], [1], [LE])
    with pytest.raises(LinearProgramError):
        new_program([1], [[1]], [1, 2], [LE])
    with pytest.raises(LinearProgramError):
        new_program([1], [1], [1], [LE])


def test_unknown_backend(textbook):
    with pytest.raises(LinearProgramError):
        solve(textbook, backend='gurobi')
