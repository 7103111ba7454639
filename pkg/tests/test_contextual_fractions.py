from fractions import Fraction
import math

import numpy as np
import pytest

from conftest import GAP, SQRT2_MINUS_1
from contextuality.catalog import (
    catalog_entries,
    chsh_quantum,
    global_vertex,
    mim_counterexample,
    ncycle_box,
    white_noise,
)
from contextuality.contextual_fractions import (
    bell_inequality,
    contextual_fraction,
    dual_noncontextual_fraction,
    evaluate_inequality,
    inequality_to_cf,
    nc_decomposition,
    noncontextual_fraction,
    ns_decomposition,
    signalling_fraction,
)
from contextuality.empirical import is_nonsignalling, mix
from contextuality.exceptions import BoundsInverted, DegenerateResidual, ScenarioMismatch, SizeCapExceeded
from contextuality.hvm import signalling_hvm_for_pr_box


def test_pr_box_exact(pr_exact):
    assert contextual_fraction(pr_exact, backend='exact') == 1
    assert signalling_fraction(pr_exact, backend='exact') == 0


def test_pr_box_float(pr):
    assert contextual_fraction(pr) == pytest.approx(1, abs=GAP)
    assert signalling_fraction(pr) == pytest.approx(0, abs=GAP)


def test_tsirelson_table(quantum):
    assert contextual_fraction(quantum) == pytest.approx(SQRT2_MINUS_1, abs=GAP)


def test_tsirelson_table_exact_backend():
    cf = contextual_fraction(chsh_quantum(exact=True), backend='exact')
    assert isinstance(cf, Fraction)
    assert float(cf) == pytest.approx(SQRT2_MINUS_1, abs=1e-10)


def test_noncontextual_models_have_zero_cf(chsh):
    assert contextual_fraction(white_noise(chsh)) == pytest.approx(0, abs=GAP)
    assert contextual_fraction(global_vertex(chsh, 11, exact=True), backend='exact') == 0


def test_counterexample_signalling_fraction():
    # the non-signalling part is capped by the two 0.0674 entries of the middle contexts
    model = mim_counterexample(exact=True)
    assert signalling_fraction(model, backend='exact') == Fraction('0.8652')
    assert signalling_fraction(mim_counterexample()) == pytest.approx(0.8652, abs=GAP)


def test_witness_is_feasible(quantum):
    result = noncontextual_fraction(quantum)
    assert (result.witness >= -1e-9).all()
    assert result.witness.sum() == pytest.approx(result.value)
    assert result.to_dict()['complement'] == pytest.approx(SQRT2_MINUS_1, abs=GAP)


@pytest.mark.parametrize('name', sorted(catalog_entries()))
def test_strong_duality_on_catalog(name):
    model = catalog_entries()[name].model()
    primal = noncontextual_fraction(model).value
    assert dual_noncontextual_fraction(model) == pytest.approx(primal, abs=GAP)


def test_strong_duality_exact(pr_exact):
    assert dual_noncontextual_fraction(pr_exact, backend='exact') == noncontextual_fraction(
        pr_exact, backend='exact').value


def test_nc_decomposition_reconstructs(quantum):
    decomposition = nc_decomposition(quantum)
    assert decomposition.weight == pytest.approx(2 - math.sqrt(2), abs=GAP)
    assert np.allclose(decomposition.reconstruct().flat, quantum.flat, atol=1e-8)
    assert contextual_fraction(decomposition.part_a) == pytest.approx(0, abs=1e-7)
    assert contextual_fraction(decomposition.residual()) == pytest.approx(1, abs=1e-6)


def test_decomposition_of_strongly_contextual_model(pr_exact):
    decomposition = nc_decomposition(pr_exact, backend='exact')
    assert decomposition.weight == 0
    assert decomposition.part_a is None
    assert decomposition.residual() is pr_exact
    assert decomposition.reconstruct() is pr_exact


def test_decomposition_of_noncontextual_model_has_no_residual(chsh):
    decomposition = nc_decomposition(white_noise(chsh, exact=True), backend='exact')
    assert decomposition.weight == 1
    assert decomposition.part_b is None
    with pytest.raises(DegenerateResidual):
        decomposition.residual()


def test_ns_decomposition_of_counterexample(counterexample):
    decomposition = ns_decomposition(counterexample)
    assert decomposition.weight == pytest.approx(0.1348, abs=GAP)
    assert np.allclose(decomposition.reconstruct().flat, counterexample.flat, atol=1e-8)
    assert signalling_fraction(decomposition.part_a) == pytest.approx(0, abs=1e-7)


def test_bell_inequality_violation_equals_cf(quantum):
    inequality = bell_inequality(quantum)
    assert inequality.normalized_violation == pytest.approx(SQRT2_MINUS_1, abs=1e-7)
    assert inequality.classical_bound == pytest.approx(0, abs=1e-7)
    assert evaluate_inequality(inequality, quantum) == pytest.approx(inequality.value)


def test_bell_inequality_exact(pr_exact):
    inequality = bell_inequality(pr_exact, backend='exact')
    assert inequality.normalized_violation == 1
    assert inequality.classical_bound == 0


def test_bell_inequality_respected_by_noncontextual_models(quantum, chsh):
    inequality = bell_inequality(quantum)
    for g in range(chsh.n):
        assert evaluate_inequality(inequality, global_vertex(chsh, g)) <= inequality.classical_bound + 1e-9


def test_bell_inequality_rejects_other_scenario(quantum):
    inequality = bell_inequality(quantum)
    with pytest.raises(ScenarioMismatch):
        evaluate_inequality(inequality, ncycle_box(5))


def test_size_cap_is_passed_through(quantum):
    with pytest.raises(SizeCapExceeded):
        contextual_fraction(quantum, size_cap=100)


def test_inequality_to_cf():
    assert inequality_to_cf(2.526, 2, 4) == pytest.approx(0.263)
    assert inequality_to_cf(1.5, 2, 4) == 0
    assert inequality_to_cf(5, 2, 4) == 1
    with pytest.raises(BoundsInverted):
        inequality_to_cf(3, 4, 4)


def test_ns_decomposition_of_half_signalled_pr_box(pr_exact):
    signalled = signalling_hvm_for_pr_box().behaviours[0]
    model = mix(pr_exact, signalled, Fraction(1, 2))
    decomposition = ns_decomposition(model, backend='exact')
    assert decomposition.weight == Fraction(1, 2)
    assert is_nonsignalling(decomposition.part_a).nonsignalling
    assert list(decomposition.reconstruct().flat) == list(model.flat)
