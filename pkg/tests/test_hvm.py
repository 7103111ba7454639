from fractions import Fraction
import math

import pytest

from conftest import GAP
from contextuality.catalog import chsh_quantum, global_vertex, ncycle_box, ncycle_vertices, pr_box, white_noise
from contextuality.empirical import mix
from contextuality.exceptions import (
    AlphaOutOfRange,
    HvmError,
    NormalizationViolation,
    NTooSmall,
    OutOfRange,
    ScenarioMismatch,
    SizeCapExceeded,
)
from contextuality.hvm import (
    audit,
    boundary_hvm,
    condition_holds,
    deterministic_count_decomposition,
    eta_star,
    eta_star_oracle,
    new_hvm,
    realized_behaviour,
    sigma_star,
    signalling_hvm_for_pr_box,
)


def test_eta_star_closed_form(pr_exact, quantum, chsh):
    assert eta_star(pr_exact) == Fraction(1, 2)
    assert eta_star(quantum) == pytest.approx(1 - (2 + math.sqrt(2)) / 8)
    assert eta_star(global_vertex(chsh, 5, exact=True)) == 0
    assert eta_star(white_noise(chsh, exact=True)) == Fraction(3, 4)


def test_eta_star_oracle_agrees(pr_exact, quantum):
    assert eta_star_oracle(pr_exact) == eta_star(pr_exact)
    assert eta_star_oracle(quantum, use_lp=True) == pytest.approx(eta_star(quantum), abs=GAP)
    assert eta_star_oracle(pr_exact, use_lp=True, backend='exact') == Fraction(1, 2)


def test_eta_star_oracle_limit(quantum):
    with pytest.raises(SizeCapExceeded):
        eta_star_oracle(quantum, limit=100)


def test_sigma_star_is_signalling_fraction(pr, counterexample):
    assert sigma_star(pr) == pytest.approx(0, abs=GAP)
    assert sigma_star(counterexample) == pytest.approx(0.8652, abs=GAP)


def test_sigma_star_of_half_signalled_pr_box(pr_exact):
    signalled = signalling_hvm_for_pr_box().behaviours[0]
    assert sigma_star(mix(pr_exact, signalled, Fraction(1, 2)), backend='exact') == Fraction(1, 2)
    assert sigma_star(mix(pr_exact.as_float(), signalled.as_float(), 0.5)) == pytest.approx(0.5, abs=GAP)


def test_condition_is_strict():
    assert not condition_holds(Fraction(1, 4), Fraction(1, 2))
    assert condition_holds(Fraction(1, 4), Fraction(49, 100))
    assert not condition_holds(0.0, 0.99999999999)
    assert condition_holds(0.01, 0.001)


def test_new_hvm_validation(pr, quantum, five_cycle):
    with pytest.raises(HvmError):
        new_hvm(['x', 'x'], [0.5, 0.5], [pr, quantum])
    with pytest.raises(HvmError):
        new_hvm(['x'], [0.5, 0.5], [pr, quantum])
    with pytest.raises(NormalizationViolation):
        new_hvm(['x', 'y'], [0.5, 0.6], [pr, quantum])
    with pytest.raises(ScenarioMismatch):
        new_hvm(['x', 'y'], [0.5, 0.5], [pr, ncycle_box(5)])


def test_pr_box_from_signalling_deterministic_hvm():
    hvm = signalling_hvm_for_pr_box()
    realized = realized_behaviour(hvm)
    assert realized.is_exact
    for got, expected in zip(realized.tables, pr_box(exact=True).tables):
        assert list(got) == list(expected)

    report = audit(hvm)
    assert report.eta == 0
    assert report.sigma == pytest.approx(1, abs=GAP)
    assert not report.condition_ok
    assert report.realized_cf == pytest.approx(1, abs=GAP)
    assert [entry.label for entry in report.per_lambda] == ['lambda1', 'lambda2']
    assert report.to_dict()['condition_ok'] is False


def test_audit_of_noncontextual_hvm(chsh):
    behaviours = [global_vertex(chsh, g) for g in (0, 6, 15)]
    hvm = new_hvm(['g0', 'g6', 'g15'], [0.2, 0.3, 0.5], behaviours)
    report = audit(hvm)
    assert report.condition_ok
    assert report.realized_cf == pytest.approx(0, abs=GAP)


def test_audit_with_unsharp_hidden_variable():
    quantum = chsh_quantum()
    hvm = new_hvm(['q'], [1.0], [quantum])
    report = audit(hvm)
    # eta* = 1 - p1 is about 0.573, so the condition fails and nothing is claimed
    assert not report.condition_ok
    assert report.realized_cf == pytest.approx(math.sqrt(2) - 1, abs=GAP)


@pytest.mark.parametrize('n', [4, 5])
@pytest.mark.parametrize('alpha', [Fraction(1, 2), Fraction(3, 4), Fraction(1)])
def test_boundary_hvm_sits_on_the_condition(n, alpha):
    boundary = boundary_hvm(n, alpha)
    assert boundary.eta == 1 - alpha
    assert boundary.sigma == 2 * alpha - 1
    assert boundary.sigma + 2 * boundary.eta == 1
    assert boundary.cf == pytest.approx(1, abs=GAP)
    assert not condition_holds(boundary.eta, boundary.sigma)


def test_boundary_hvm_input_checks():
    with pytest.raises(AlphaOutOfRange):
        boundary_hvm(4, 0.4)
    with pytest.raises(NTooSmall):
        boundary_hvm(2, 0.75)
    with pytest.raises(HvmError):
        boundary_hvm(4, 'abc')


def test_ncycle_vertices_are_signalling():
    s1, s2 = ncycle_vertices(4, exact=True)
    assert eta_star(s1) == 0
    assert sigma_star(s1, backend='exact') == 1
    assert sigma_star(s2, backend='exact') == 1


def test_deterministic_count_decomposition(pr):
    assert deterministic_count_decomposition(pr, 0.5).genuine
    assert not deterministic_count_decomposition(pr, 1.0).genuine
    with pytest.raises(OutOfRange):
        deterministic_count_decomposition(pr, 1.5)
