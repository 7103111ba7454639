"""
Canonical scenarios and behaviours: CHSH, PR-box, n-cycles, noise, deterministic
vertices, the signalling counterexample, and the published certification inputs.

Every builder takes exact=True to produce Fraction tables; the CHSH quantum
table then uses SQRT2_RATIONAL in place of sqrt(2).
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple
import logging
import math

from .config import SQRT2_RATIONAL
from .empirical import EmpiricalModel, is_nonsignalling, mix, new_model
from .exceptions import BadOutcomeChoice, HvmError, NTooSmall
from .scenario import MeasurementScenario, new_scenario

logger = logging.getLogger(__name__)

BINARY = ('0', '1')


def _half(exact: bool):
    return Fraction(1, 2) if exact else 0.5


def chsh_scenario() -> MeasurementScenario:
    return new_scenario(
        ['a', "a'", 'b', "b'"],
        [['a', 'b'], ['a', "b'"], ["a'", 'b'], ["a'", "b'"]],
        {x: BINARY for x in ['a', "a'", 'b', "b'"]},
    )


def chsh_quantum(exact: bool = False) -> EmpiricalModel:
    """Tsirelson table: p1 = (2 + sqrt2)/8 on equal outcomes, swapped on the last context"""
    sqrt2 = SQRT2_RATIONAL if exact else math.sqrt(2)
    p1 = (2 + sqrt2) / 8
    p2 = (2 - sqrt2) / 8
    correlated = [p1, p2, p2, p1]
    anticorrelated = [p2, p1, p1, p2]
    return new_model(chsh_scenario(), [correlated, correlated, correlated, anticorrelated])


def pr_box(exact: bool = False) -> EmpiricalModel:
    h = _half(exact)
    zero = h - h
    correlated = [h, zero, zero, h]
    anticorrelated = [zero, h, h, zero]
    return new_model(chsh_scenario(), [correlated, correlated, correlated, anticorrelated])


def ncycle_scenario(n: int) -> MeasurementScenario:
    """Measurements A1..An, contexts (Ai, Ai+1) with the wrap context (An, A1) last"""
    if n < 3:
        raise NTooSmall(f"n-cycle needs n >= 3, got {n}")
    labels = [f"A{i}" for i in range(1, n + 1)]
    contexts = [[labels[i], labels[i + 1]] for i in range(n - 1)] + [[labels[-1], labels[0]]]
    return new_scenario(labels, contexts, {x: BINARY for x in labels})


def deterministic_vertex(scenario: MeasurementScenario, choices: Sequence,
                         exact: bool = False) -> EmpiricalModel:
    """
    Dirac table per context.

    Args:
        choices: One joint outcome per context in context order, either a
            sequence of outcome labels or a comma-joined key

    Raises:
        BadOutcomeChoice: wrong number of choices or an unknown outcome
    """
    if len(choices) != scenario.num_contexts:
        raise BadOutcomeChoice(f"Need one joint outcome per context ({scenario.num_contexts}), got {len(choices)}")

    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    tables = []
    for k, joint in enumerate(choices):
        joint = tuple(joint.split(',')) if isinstance(joint, str) else tuple(str(o) for o in joint)
        try:
            index = scenario.encode_local(k, joint) - scenario.offsets[k]
        except ValueError as e:
            raise BadOutcomeChoice(f"Bad outcome choice {joint} for context {scenario.context_key(k)}: {e}")
        table = [zero] * scenario.context_sizes[k]
        table[index] = one
        tables.append(table)
    return new_model(scenario, tables)


def global_vertex(scenario: MeasurementScenario, index: int, exact: bool = False) -> EmpiricalModel:
    """Deterministic noncontextual behaviour of the global assignment with this index"""
    assignment = dict(zip(scenario.measurements, scenario.decode_global(index)))
    return deterministic_vertex(
        scenario, [tuple(assignment[x] for x in c) for c in scenario.contexts], exact=exact)


def ncycle_vertices(n: int, exact: bool = False) -> Tuple[EmpiricalModel, EmpiricalModel]:
    """
    h_S1: outcome 0 everywhere except (0, 1) on the wrap context; h_S2: its bit flip.
    Both are deterministic and signalling; their even mixture is the n-cycle box.
    """
    scenario = ncycle_scenario(n)
    s1 = deterministic_vertex(scenario, [('0', '0')] * (n - 1) + [('0', '1')], exact=exact)
    s2 = deterministic_vertex(scenario, [('1', '1')] * (n - 1) + [('1', '0')], exact=exact)
    return s1, s2


def ncycle_box(n: int, exact: bool = False) -> EmpiricalModel:
    s1, s2 = ncycle_vertices(n, exact=exact)
    box = mix(s1, s2, _half(exact))
    if not is_nonsignalling(box).nonsignalling:
        raise HvmError(f"{n}-cycle box is signalling")
    return box


def white_noise(scenario: MeasurementScenario, exact: bool = False) -> EmpiricalModel:
    tables = []
    for size in scenario.context_sizes:
        p = Fraction(1, size) if exact else 1.0 / size
        tables.append([p] * size)
    return new_model(scenario, tables)


_COUNTEREXAMPLE = [
    ['0', '0', '0', '1'],
    ['0.2821', '0', '0.0674', '0.6505'],
    ['0.2821', '0.0674', '0', '0.6505'],
    ['0.0821', '0.4589', '0.4589', '0'],
]


def mim_counterexample(exact: bool = False) -> EmpiricalModel:
    """
    Signalling CHSH table with MIM 0.2821.

    The last row as printed sums to 0.9999; it is renormalized, which leaves
    every overlapping marginal the MIM depends on untouched.
    """
    convert = Fraction if exact else float
    tables = [[convert(p) for p in row] for row in _COUNTEREXAMPLE]
    return new_model(chsh_scenario(), tables, renormalize=True)


# Catalog entries

@dataclass
class CatalogEntry:
    name: str
    description: str
    build_scenario: Callable[[], MeasurementScenario]
    build_model: Callable[..., EmpiricalModel]
    expected_metrics: Dict[str, Tuple[float, str]] = field(default_factory=dict)

    def model(self, exact: bool = False) -> EmpiricalModel:
        return self.build_model(exact=exact)


def catalog_entries() -> Dict[str, CatalogEntry]:
    """name -> entry; expected metrics carry (value, provenance)"""
    p1 = (2 + math.sqrt(2)) / 8
    entries = [
        CatalogEntry(
            'pr-box', 'PR-box on the CHSH scenario', chsh_scenario, pr_box,
            {'cf': (1.0, 'maximally contextual non-signalling box'),
             'sf': (0.0, 'non-signalling'),
             'mim': (0.0, 'uniform marginals'),
             'eta_star': (0.5, 'largest entry 1/2 in every context')},
        ),
        CatalogEntry(
            'chsh-quantum', 'Tsirelson table of the CHSH scenario', chsh_scenario, chsh_quantum,
            {'cf': (math.sqrt(2) - 1, 'exact LP over the 16 deterministic vertices'),
             'sf': (0.0, 'non-signalling'),
             'mim': (0.0, 'uniform marginals'),
             'eta_star': (1 - p1, 'largest entry (2 + sqrt2)/8')},
        ),
        CatalogEntry(
            'mim-counterexample', 'Signalling CHSH table whose MIM is below its SF',
            chsh_scenario, mim_counterexample,
            {'mim': (0.2821, 'marginal of a in the first two contexts'),
             'sf': (0.8652, 'LP; the non-signalling part is capped by the 0.0674 entries')},
        ),
        CatalogEntry(
            'white-noise-chsh', 'Uniform noise on the CHSH scenario', chsh_scenario,
            lambda exact=False: white_noise(chsh_scenario(), exact=exact),
            {'cf': (0.0, 'uniform mixture of all global assignments'),
             'sf': (0.0, 'non-signalling'),
             'eta_star': (0.75, '1 - 1/4')},
        ),
        CatalogEntry(
            'ncycle-box-5', 'Maximally contextual 5-cycle box', lambda: ncycle_scenario(5),
            lambda exact=False: ncycle_box(5, exact=exact),
            {'cf': (1.0, 'no global assignment fits the support'),
             'sf': (0.0, 'non-signalling'),
             'eta_star': (0.5, 'largest entry 1/2 in every context')},
        ),
        CatalogEntry(
            'hs1-4', 'Deterministic signalling vertex h_S1 of the 4-cycle', lambda: ncycle_scenario(4),
            lambda exact=False: ncycle_vertices(4, exact=exact)[0],
            {'cf': (1.0, 'support contradicts every global assignment'),
             'sf': (1.0, 'MIM is 1'),
             'mim': (1.0, 'marginal of A1 flips between contexts'),
             'eta_star': (0.0, 'deterministic')},
        ),
    ]
    return {entry.name: entry for entry in entries}


# Published certification inputs

@dataclass
class ExperimentPreset:
    """
    Inputs of a published certification.

    eta_kind / eta_data feed the eta estimator; sigma_policy / sigma_value
    the sigma policy; cf is the reported contextual fraction when the
    experiment states one; inequality holds beta_cl, beta_max and the
    observed value when the result is given as an inequality violation.
    """
    name: str
    description: str
    eta_kind: str
    eta_data: Mapping
    sigma_policy: str = 'zero'
    sigma_value: Optional[float] = None
    cf: Optional[float] = None
    inequality: Optional[Dict[str, float]] = None
    winter: Optional[Dict[str, List[float]]] = None
    expected: str = ''


def experiment_presets() -> Dict[str, ExperimentPreset]:
    presets = [
        ExperimentPreset(
            'hu', 'Photonic qutrit closing the compatibility loophole',
            'max_deviation', {'theory': [0.0], 'observed': [0.010]},
            sigma_policy='manual', sigma_value=0.001, cf=0.89,
            expected='GenuineContextuality',
        ),
        ExperimentPreset(
            'marques', 'Hardy-like KCBS test; sharp theory predicts p(1,1|i,i+1) = 0',
            'hardy_zero', {'probabilities': [0.021]},
            cf=0.16, inequality={'beta_cl': 3.0, 'beta_max': 5.0},
            expected='GenuineContextuality',
        ),
        ExperimentPreset(
            'wang', 'Trapped-ion CHSH-type test with measured repeatability',
            'repeatability', {'epsilon': 0.03},
            inequality={'beta_cl': 2.0, 'beta_max': 4.0, 'observed': 2.526},
            expected=(
                'GenuineContextuality; corrected bound 2.1182 from eta = 0.0591, '
                'quoted as 2.12 when eta is rounded to 0.06'
            ),
        ),
        ExperimentPreset(
            'lapkiewicz', 'KCBS test with A1 relabelled between its two contexts',
            'outcome_mismatch', {'mismatch_probabilities': [0.072]},
            expected='CF <= 0.072',
        ),
        ExperimentPreset(
            'flip-probability', 'Sequential CHSH with per-context outcome flips (illustrative)',
            'flip_probability',
            {'flip_probabilities': {'a,b': 0.010, "a,b'": 0.012, "a',b": 0.008, "a',b'": 0.011}},
            cf=math.sqrt(2) - 1,
            expected='GenuineContextuality',
        ),
        ExperimentPreset(
            'peres-mermin', 'Peres-Mermin square: bound comparison at equal noise',
            'manual', {'value': 1.0 / 72},
            winter={'weights': [8.0] * 9, 'degrees': [2] * 9, 'beta_cl': 5.0, 'beta_max': 6.0},
            expected='winter bound saturates at epsilon = 1/72',
        ),
    ]
    return {preset.name: preset for preset in presets}
