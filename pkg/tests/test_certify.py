import math

import pytest

from conftest import GAP, SQRT2_MINUS_1
from contextuality.catalog import experiment_presets
from contextuality.certify import (
    Assumption,
    EtaEstimator,
    EtaKind,
    Verdict,
    certify,
    certify_deterministic,
    certify_fraction,
    certify_inequality,
    compare_winter_bound,
    corrected_inequality_bound,
    estimate_eta,
    estimate_sigma,
    flip_sum_bound,
    run_preset,
)
from contextuality.exceptions import (
    BoundsInverted,
    EstimatorInputError,
    ManualValueMissing,
    MissingField,
    OutOfRange,
)


def test_manual_eta():
    eta = estimate_eta('manual', {'value': 0.01})
    assert eta.value == 0.01
    assert eta.provenance.startswith('manual')


def test_flip_probability_eta_is_the_largest_flip():
    eta = estimate_eta(EtaKind.FLIP_PROBABILITY, {'flip_probabilities': {'a,b': 0.01, "a,b'": 0.03}})
    assert eta.value == 0.03
    assert eta.details['flip_sum'] == pytest.approx(0.04)
    assert flip_sum_bound([0.01, 0.012, 0.008, 0.011]) == pytest.approx(0.041)


def test_hardy_zero_and_outcome_mismatch():
    assert estimate_eta('hardy_zero', {'probabilities': [0.01, 0.021, 0.005]}).value == 0.021
    assert estimate_eta('outcome_mismatch', {'mismatch_probabilities': [0.072, 0.05]}).value == 0.072


def test_repeatability_eta():
    assert estimate_eta('repeatability', {'epsilon': 0.03}).value == pytest.approx(0.0591)
    assert estimate_eta('repeatability', {'repeatability': 0.97}).value == pytest.approx(0.0591)


def test_max_deviation_eta():
    eta = estimate_eta('max_deviation', {'theory': [0.5, 0.0], 'observed': [0.49, 0.004]})
    assert eta.value == pytest.approx(0.01)
    assert estimate_eta('max_deviation', {'deviations': [-0.02, 0.01]}).value == pytest.approx(0.02)
    assert estimate_eta('max_deviation', {'deviations': -0.03}).value == pytest.approx(0.03)
    with pytest.raises(EstimatorInputError):
        estimate_eta('max_deviation', {'theory': [0.5], 'observed': [0.5, 0.5]})


def test_estimator_object_merges_parameters():
    estimator = EtaEstimator(EtaKind.HARDY_ZERO, {'probabilities': [0.02]})
    assert estimate_eta(estimator).value == 0.02


@pytest.mark.parametrize('kind, data, error', [
    ('manual', {}, MissingField),
    ('manual', {'value': 1.5}, OutOfRange),
    ('hardy_zero', {'probabilities': []}, MissingField),
    ('flip_probability', {'flip_probabilities': [-0.1]}, OutOfRange),
    ('manual', {'value': 'much'}, EstimatorInputError),
    ('max_deviation', {'deviations': ['x']}, EstimatorInputError),
    ('max_deviation', {'deviations': [None]}, EstimatorInputError),
    ('max_deviation', {'deviations': [1.5]}, OutOfRange),
])
def test_estimator_input_errors(kind, data, error):
    with pytest.raises(error):
        estimate_eta(kind, data)


def test_sigma_policies(counterexample):
    assert estimate_sigma('zero').value == 0
    assert estimate_sigma('manual', manual_value=0.001).value == 0.001
    assert estimate_sigma('sf_of_model', model=counterexample).value == pytest.approx(0.8652, abs=GAP)
    assert estimate_sigma('mim_of_model', model=counterexample).value == pytest.approx(0.2821)
    with pytest.raises(ManualValueMissing):
        estimate_sigma('manual')
    with pytest.raises(MissingField):
        estimate_sigma('sf_of_model')


def test_condition_equality_fails():
    report = certify_fraction(0.9, 0.25, 0.5)
    assert report.verdict == Verdict.CONDITION_FAILED
    assert not report.condition_ok


def test_cf_must_clear_eta_by_the_margin():
    assert certify_fraction(0.1 + 1e-7, 0.1, 0.0).verdict == Verdict.NOT_CERTIFIED
    assert certify_fraction(0.1 + 1e-5, 0.1, 0.0).verdict == Verdict.GENUINE


def test_certify_tsirelson_table(quantum):
    report = certify(quantum, 0.1, 0.0, inequality={'beta_cl': 2, 'beta_max': 4})
    assert report.verdict == Verdict.GENUINE
    assert report.cf == pytest.approx(SQRT2_MINUS_1, abs=GAP)
    assert report.sf == pytest.approx(0, abs=GAP)
    assert report.corrected_inequality.bound == pytest.approx(2.2)
    document = report.to_dict()
    assert document['verdict'] == 'GenuineContextuality'
    assert document['condition']['holds'] is True
    assert 'GenuineContextuality' in report.summary()


def test_certify_not_certified(quantum):
    assert certify(quantum, 0.45, 0.0).verdict == Verdict.NOT_CERTIFIED


def test_certify_keeps_model_diagnostics(counterexample):
    report = certify(counterexample, 0.1, Assumption(0.2, 'manual: sigma = 0.2'))
    assert report.diagnostics[0]['source'] == 'empirical.renormalize'


def test_certify_with_deterministic_criterion(pr):
    report = certify(pr, 0.1, 0.0, sigma_prime=0.5)
    assert report.deterministic.genuine
    assert not certify_deterministic(pr, 1.0).genuine


def test_corrected_inequality_bound():
    assert corrected_inequality_bound(2, 4, 0.06) == pytest.approx(2.12)
    assert corrected_inequality_bound(3, 5, 0.021) == pytest.approx(3.042)
    with pytest.raises(BoundsInverted):
        corrected_inequality_bound(4, 2, 0.1)


def test_certify_inequality():
    eta = estimate_eta('repeatability', {'epsilon': 0.03})
    report = certify_inequality(2.526, 2, 4, eta, 0.0)
    assert report.cf == pytest.approx(0.263)
    assert report.corrected_inequality.bound == pytest.approx(2.1182)
    assert report.verdict == Verdict.GENUINE


def test_winter_bound_comparison():
    chsh = compare_winter_bound([1] * 4, [2] * 4, 2, 4, 0.01)
    assert chsh.winter_bound == pytest.approx(0.02)
    assert chsh.our_bound == 0.01

    square = compare_winter_bound([8] * 9, [2] * 9, 5, 6, 1 / 72)
    assert square.winter_bound == pytest.approx(1)
    assert square.winter_saturation == pytest.approx(1 / 72)
    assert square.our_saturation == 1
    with pytest.raises(EstimatorInputError):
        compare_winter_bound([1], [2, 2], 2, 4, 0.01)


@pytest.mark.parametrize('name', ['hu', 'marques', 'wang', 'flip-probability'])
def test_published_certifications_are_genuine(name):
    outcome = run_preset(experiment_presets()[name])
    assert outcome.condition_ok
    assert outcome.report.verdict == Verdict.GENUINE


def test_preset_values():
    presets = experiment_presets()
    hu = run_preset(presets['hu'])
    assert hu.eta.value == pytest.approx(0.01)
    assert hu.sigma.value == 0.001

    marques = run_preset(presets['marques'])
    assert marques.eta.value == 0.021
    assert marques.report.corrected_inequality.bound == pytest.approx(3.042)

    wang = run_preset(presets['wang'])
    assert wang.eta.value == pytest.approx(0.0591)
    assert wang.report.cf == pytest.approx(0.263)
    assert '2.1182' in wang.expected and '0.06' in wang.expected
    assert wang.to_dict()['expected'] == wang.expected

    lapkiewicz = run_preset(presets['lapkiewicz'])
    assert lapkiewicz.report is None
    assert lapkiewicz.cf_bound == 0.072

    flips = run_preset(presets['flip-probability'])
    assert flips.eta.value == 0.012
    assert flips.eta.details['flip_sum'] == pytest.approx(0.041)

    square = run_preset(presets['peres-mermin'])
    assert square.winter.winter_saturation == pytest.approx(1 / 72)
    assert square.to_dict()['winter']['winter_bound'] == pytest.approx(1)


def test_reported_cf_is_a_plain_number_in_documents(quantum):
    document = certify(quantum, 0.1, 0.0).to_dict()
    assert isinstance(document['cf'], float)
    assert math.isclose(document['condition']['value'], 0.2)
