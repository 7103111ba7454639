"""
Corrected-inequality certification: estimate eta and sigma from experiment
metadata, check 2 eta + sigma < 1, and compare the contextual fraction with eta.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Union
import logging

from .config import DEFAULT_BACKEND, REPORT_MARGIN
from .contextual_fractions import contextual_fraction, inequality_to_cf, signalling_fraction
from .empirical import EmpiricalModel, mim
from .exceptions import (
    BoundsInverted,
    EstimatorInputError,
    ManualValueMissing,
    MissingField,
    OutOfRange,
)
from .hvm import DeterministicVerdict, condition_holds, deterministic_count_decomposition

logger = logging.getLogger(__name__)


class EtaKind(Enum):
    MANUAL = "manual"
    FLIP_PROBABILITY = "flip_probability"
    HARDY_ZERO = "hardy_zero"
    REPEATABILITY = "repeatability"
    MAX_DEVIATION = "max_deviation"
    OUTCOME_MISMATCH = "outcome_mismatch"


class SigmaPolicy(Enum):
    ZERO = "zero"
    SF_OF_MODEL = "sf_of_model"
    MIM_OF_MODEL = "mim_of_model"
    MANUAL = "manual"


class Verdict(Enum):
    GENUINE = "GenuineContextuality"
    NOT_CERTIFIED = "NotCertified"
    CONDITION_FAILED = "ConditionFailed"


@dataclass(frozen=True)
class EtaEstimator:
    kind: EtaKind
    parameters: Mapping = field(default_factory=dict)


@dataclass
class Assumption:
    """A value of eta or sigma together with where it came from"""
    value: float
    provenance: str
    details: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {'value': float(self.value), 'provenance': self.provenance, 'details': self.details}


def _require(data: Mapping, name: str):
    if name not in data or data[name] is None:
        raise MissingField(f"Estimator input '{name}' is missing")
    return data[name]


def _number(value, name: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise EstimatorInputError(f"{name} must be a number, got {value!r}")


def _probability(value, name: str) -> float:
    value = _number(value, name)
    if not 0 <= value <= 1:
        raise OutOfRange(f"{name} = {value} outside [0, 1]")
    return value


def _as_list(values, name: str) -> list:
    if isinstance(values, Mapping):
        values = list(values.values())
    elif not isinstance(values, (list, tuple)):
        values = [values]
    if not values:
        raise MissingField(f"Estimator input '{name}' is empty")
    return values


def _probabilities(values, name: str) -> List[float]:
    return [_probability(v, name) for v in _as_list(values, name)]


def flip_sum_bound(flip_probabilities: Union[Sequence, Mapping]) -> float:
    """Sum of per-context flip probabilities: the bound when determinism is kept"""
    return sum(_probabilities(flip_probabilities, 'flip_probabilities'))


def estimate_eta(estimator: Union[EtaEstimator, EtaKind, str], data: Optional[Mapping] = None) -> Assumption:
    """
    eta from experiment metadata.

    Inputs per kind:
        manual: value
        flip_probability: flip_probabilities (per context) -> max
        hardy_zero: probabilities of the events theory forbids -> max
        repeatability: epsilon (or repeatability = 1 - epsilon) -> 2 eps - eps^2
        max_deviation: theory and observed (paired) or deviations -> max |difference|
        outcome_mismatch: mismatch_probabilities p(A = o | A' = -o) -> max

    Raises:
        MissingField, OutOfRange, EstimatorInputError
    """
    if isinstance(estimator, EtaEstimator):
        kind, data = estimator.kind, {**estimator.parameters, **(data or {})}
    else:
        kind = EtaKind(estimator)
        data = data or {}

    details: Dict = {'kind': kind.value}
    if kind == EtaKind.MANUAL:
        eta = _probability(_require(data, 'value'), 'value')
        provenance = f"manual: eta = {eta:g}"
    elif kind == EtaKind.FLIP_PROBABILITY:
        flips = _probabilities(_require(data, 'flip_probabilities'), 'flip_probabilities')
        eta = max(flips)
        details['flip_sum'] = sum(flips)
        provenance = f"flip_probability: eta = max_C p_flip[C] = {eta:g} (sum {sum(flips):g})"
    elif kind == EtaKind.HARDY_ZERO:
        zeros = _probabilities(_require(data, 'probabilities'), 'probabilities')
        eta = max(zeros)
        provenance = f"hardy_zero: eta = max_i p(1,1|i,i+1) = {eta:g}"
    elif kind == EtaKind.REPEATABILITY:
        if 'epsilon' in data:
            epsilon = _probability(data['epsilon'], 'epsilon')
        else:
            epsilon = 1 - _probability(_require(data, 'repeatability'), 'repeatability')
        eta = 2 * epsilon - epsilon ** 2
        details['epsilon'] = epsilon
        provenance = f"repeatability: eta = 2 eps - eps^2 = {eta:g} with eps = {epsilon:g}"
    elif kind == EtaKind.MAX_DEVIATION:
        if 'deviations' in data:
            deviations = [_probability(abs(_number(d, 'deviations')), 'deviations')
                          for d in _as_list(_require(data, 'deviations'), 'deviations')]
        else:
            theory = _probabilities(_require(data, 'theory'), 'theory')
            observed = _probabilities(_require(data, 'observed'), 'observed')
            if len(theory) != len(observed):
                raise EstimatorInputError(f"{len(theory)} theory values for {len(observed)} observed values")
            deviations = [abs(t - o) for t, o in zip(theory, observed)]
        eta = max(deviations)
        provenance = f"max_deviation: eta = max_x |p_th(x) - p_exp(x)| = {eta:g}"
    elif kind == EtaKind.OUTCOME_MISMATCH:
        mismatches = _probabilities(_require(data, 'mismatch_probabilities'), 'mismatch_probabilities')
        eta = max(mismatches)
        provenance = f"outcome_mismatch: eta = max_o p(A = o | A' = -o) = {eta:g}"
    else:
        raise EstimatorInputError(f"Unknown estimator kind {kind}")

    logger.debug(provenance)
    return Assumption(eta, provenance, details)


def estimate_sigma(policy: Union[SigmaPolicy, str], model: Optional[EmpiricalModel] = None,
                   manual_value: Optional[float] = None,
                   backend: str = DEFAULT_BACKEND) -> Assumption:
    """
    sigma under a policy: zero (parameter independence assumed), the model's
    signalling fraction, the model's MIM (a lower bound on SF), or a manual value.

    Raises:
        ManualValueMissing, MissingField, OutOfRange
    """
    policy = SigmaPolicy(policy)
    if policy == SigmaPolicy.ZERO:
        return Assumption(0.0, 'zero: hidden variables assumed parameter-independent', {'policy': policy.value})
    if policy == SigmaPolicy.MANUAL:
        if manual_value is None:
            raise ManualValueMissing("Sigma policy 'manual' needs a value")
        sigma = _probability(manual_value, 'sigma')
        return Assumption(sigma, f"manual: sigma = {sigma:g}", {'policy': policy.value})
    if model is None:
        raise MissingField(f"Sigma policy '{policy.value}' needs a model")
    if policy == SigmaPolicy.SF_OF_MODEL:
        sigma = signalling_fraction(model, backend)
        return Assumption(sigma, f"sf_of_model: sigma = SF(e) = {float(sigma):.6g}", {'policy': policy.value})
    sigma = mim(model)
    return Assumption(sigma, f"mim_of_model: sigma = MIM(e) = {float(sigma):.6g} (a lower bound on SF)",
                      {'policy': policy.value})


def _assumption(value: Union[Assumption, float], name: str) -> Assumption:
    if isinstance(value, Assumption):
        _probability(value.value, name)
        return value
    value = _probability(value, name)
    return Assumption(value, f"manual: {name} = {value:g}", {'kind': 'manual'})


def corrected_inequality_bound(beta_cl, beta_max, eta):
    """Classical bound of an inequality corrected for unsharpness: beta_cl + (beta_max - beta_cl) eta"""
    if beta_max < beta_cl:
        raise BoundsInverted(f"beta_max {beta_max} is below beta_cl {beta_cl}")
    return beta_cl + (beta_max - beta_cl) * eta


@dataclass
class CorrectedInequality:
    beta_cl: float
    beta_max: float
    bound: float
    observed: Optional[float] = None

    def to_dict(self) -> Dict:
        return {
            'beta_cl': self.beta_cl,
            'beta_max': self.beta_max,
            'corrected_bound': float(self.bound),
            'observed': self.observed,
        }


@dataclass
class WinterComparison:
    winter_bound: float
    our_bound: float
    winter_saturation: float
    our_saturation: float = 1.0

    def to_dict(self) -> Dict:
        return {
            'winter_bound': self.winter_bound,
            'our_bound': self.our_bound,
            'winter_saturation': self.winter_saturation,
            'our_saturation': self.our_saturation,
        }


def compare_winter_bound(weights: Sequence[float], degrees: Sequence[int],
                         beta_cl: float, beta_max: float, epsilon: float) -> WinterComparison:
    """
    CF bound sum_i w_i (k_i - 1) / (beta_max - beta_cl) * eps, which assumes
    determinism, against CF <= eta with eta = eps when outcome mismatch is
    read as unsharpness. The saturation points are the noise levels at which
    each bound reaches 1.
    """
    if len(weights) != len(degrees):
        raise EstimatorInputError(f"{len(weights)} weights for {len(degrees)} degrees")
    if beta_max <= beta_cl:
        raise BoundsInverted(f"beta_max {beta_max} must exceed beta_cl {beta_cl}")
    epsilon = _probability(epsilon, 'epsilon')
    slope = sum(w * (k - 1) for w, k in zip(weights, degrees)) / (beta_max - beta_cl)
    return WinterComparison(
        winter_bound=slope * epsilon,
        our_bound=epsilon,
        winter_saturation=1 / slope if slope > 0 else float('inf'),
    )


@dataclass
class CertificationReport:
    cf: object
    eta: Assumption
    sigma: Assumption
    condition_ok: bool
    verdict: Verdict
    sf: Optional[object] = None
    mim: Optional[object] = None
    corrected_inequality: Optional[CorrectedInequality] = None
    deterministic: Optional[DeterministicVerdict] = None
    source: Optional[Dict] = None
    diagnostics: List[Dict] = field(default_factory=list)

    @property
    def condition_value(self):
        return 2 * self.eta.value + self.sigma.value

    def to_dict(self) -> Dict:
        return {
            'verdict': self.verdict.value,
            'cf': float(self.cf),
            'sf': None if self.sf is None else float(self.sf),
            'mim': None if self.mim is None else float(self.mim),
            'eta': self.eta.to_dict(),
            'sigma': self.sigma.to_dict(),
            'condition': {
                'value': float(self.condition_value),
                'holds': self.condition_ok,
            },
            'corrected_inequality': None if self.corrected_inequality is None
            else self.corrected_inequality.to_dict(),
            'deterministic': None if self.deterministic is None else self.deterministic.to_dict(),
            'source': self.source,
            'diagnostics': self.diagnostics,
        }

    def summary(self) -> str:
        lines = [
            f"CF          {float(self.cf):.6f}",
        ]
        if self.sf is not None:
            lines.append(f"SF          {float(self.sf):.6f}")
        if self.mim is not None:
            lines.append(f"MIM         {float(self.mim):.6f}")
        lines += [
            f"eta         {float(self.eta.value):.6f}  [{self.eta.provenance}]",
            f"sigma       {float(self.sigma.value):.6f}  [{self.sigma.provenance}]",
            f"2eta+sigma  {float(self.condition_value):.6f}  ({'< 1' if self.condition_ok else '>= 1'})",
        ]
        if self.corrected_inequality is not None:
            ci = self.corrected_inequality
            lines.append(f"corrected bound {float(ci.bound):.6f} (beta_cl {ci.beta_cl:g}, beta_max {ci.beta_max:g})")
        if self.deterministic is not None:
            lines.append(f"deterministic HVM criterion CF <= {float(self.deterministic.sigma_prime):g}: "
                         f"{'exceeded' if self.deterministic.genuine else 'respected'}")
        lines.append(f"verdict     {self.verdict.value}")
        return '\n'.join(lines)


def certify_fraction(cf, eta: Union[Assumption, float], sigma: Union[Assumption, float],
                     margin: float = REPORT_MARGIN, **extra) -> CertificationReport:
    """
    Compare a contextual fraction with eta under the condition 2 eta + sigma < 1.
    Equality in the condition fails; CF must exceed eta by more than margin.
    """
    eta, sigma = _assumption(eta, 'eta'), _assumption(sigma, 'sigma')
    condition_ok = condition_holds(eta.value, sigma.value, tolerance=0.0)
    if not condition_ok:
        verdict = Verdict.CONDITION_FAILED
    elif cf > eta.value + margin:
        verdict = Verdict.GENUINE
    else:
        verdict = Verdict.NOT_CERTIFIED
    logger.info(f"Certification: CF={float(cf):.6g}, eta={eta.value:.6g}, sigma={sigma.value:.6g} -> {verdict.value}")
    return CertificationReport(cf=cf, eta=eta, sigma=sigma, condition_ok=condition_ok, verdict=verdict, **extra)


def certify(model: EmpiricalModel, eta: Union[Assumption, float], sigma: Union[Assumption, float],
            backend: str = DEFAULT_BACKEND, margin: float = REPORT_MARGIN,
            inequality: Optional[Mapping] = None,
            sigma_prime: Optional[float] = None) -> CertificationReport:
    """
    Full certification of a model: CF, SF and MIM are computed, then
    certify_fraction decides.

    Args:
        inequality: Optional beta_cl / beta_max to report the corrected
            classical bound beside the verdict
        sigma_prime: Optional bound on the parameter-dependent prior weight of
            a fully deterministic HVM, reported with its own criterion
    """
    cf = contextual_fraction(model, backend)
    extra = {
        'sf': signalling_fraction(model, backend),
        'mim': mim(model),
        'diagnostics': [d.to_dict() for d in model.diagnostics],
    }
    eta = _assumption(eta, 'eta')
    if inequality is not None:
        extra['corrected_inequality'] = CorrectedInequality(
            inequality['beta_cl'], inequality['beta_max'],
            corrected_inequality_bound(inequality['beta_cl'], inequality['beta_max'], eta.value),
            inequality.get('observed'),
        )
    if sigma_prime is not None:
        extra['deterministic'] = certify_deterministic(model, sigma_prime, backend, cf=cf)
    return certify_fraction(cf, eta, sigma, margin, **extra)


def certify_inequality(value, beta_cl, beta_max, eta: Union[Assumption, float],
                       sigma: Union[Assumption, float],
                       margin: float = REPORT_MARGIN) -> CertificationReport:
    """Certification from an observed inequality value; CF is the lower bound it implies"""
    eta = _assumption(eta, 'eta')
    cf = inequality_to_cf(value, beta_cl, beta_max)
    corrected = CorrectedInequality(beta_cl, beta_max,
                                    corrected_inequality_bound(beta_cl, beta_max, eta.value), value)
    return certify_fraction(cf, eta, sigma, margin, corrected_inequality=corrected)


def certify_deterministic(model: EmpiricalModel, sigma_prime, backend: str = DEFAULT_BACKEND,
                          margin: float = REPORT_MARGIN, cf=None) -> DeterministicVerdict:
    return deterministic_count_decomposition(model, sigma_prime, backend, margin, cf=cf)


@dataclass
class PresetOutcome:
    name: str
    eta: Assumption
    sigma: Assumption
    condition_ok: bool
    report: Optional[CertificationReport] = None
    winter: Optional[WinterComparison] = None
    expected: str = ''

    @property
    def cf_bound(self):
        return self.eta.value

    def to_dict(self) -> Dict:
        return {
            'name': self.name,
            'eta': self.eta.to_dict(),
            'sigma': self.sigma.to_dict(),
            'condition_ok': self.condition_ok,
            'cf_bound': float(self.cf_bound),
            'report': None if self.report is None else self.report.to_dict(),
            'winter': None if self.winter is None else self.winter.to_dict(),
            'expected': self.expected,
        }


def run_preset(preset) -> PresetOutcome:
    """Replay a published certification from catalog.experiment_presets()"""
    eta = estimate_eta(preset.eta_kind, preset.eta_data)
    sigma = estimate_sigma(preset.sigma_policy, manual_value=preset.sigma_value)
    report = None
    inequality = preset.inequality or {}
    if 'observed' in inequality:
        report = certify_inequality(inequality['observed'], inequality['beta_cl'], inequality['beta_max'],
                                    eta, sigma)
    elif preset.cf is not None:
        extra = {}
        if inequality:
            extra['corrected_inequality'] = CorrectedInequality(
                inequality['beta_cl'], inequality['beta_max'],
                corrected_inequality_bound(inequality['beta_cl'], inequality['beta_max'], eta.value))
        report = certify_fraction(preset.cf, eta, sigma, **extra)
    winter = None
    if preset.winter is not None:
        w = preset.winter
        winter = compare_winter_bound(w['weights'], w['degrees'], w['beta_cl'], w['beta_max'], eta.value)
    return PresetOutcome(preset.name, eta, sigma, condition_holds(eta.value, sigma.value, tolerance=0.0),
                         report, winter, preset.expected)
