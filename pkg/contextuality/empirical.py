"""
Empirical models: one probability distribution per context of a scenario.

Tables hold floats, or Fraction objects when any entry was given as a
Fraction. The exact dtype survives flattening, marginalization and mixing so
the rational LP backend sees exact data.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union
import logging
import numbers

import numpy as np

from .config import PROBABILITY_TOLERANCE
from .diagnostics import Diagnostic, DiagnosticLevel, DiagnosticLog
from .exceptions import (
    LambdaOutOfRange,
    ModelError,
    NegativeProbability,
    NormalizationViolation,
    NotASubset,
    ScenarioMismatch,
    ShapeMismatch,
)
from .scenario import ContextRef, MeasurementScenario

logger = logging.getLogger(__name__)

TableInput = Union[Sequence, Mapping[str, object], np.ndarray]


def as_fraction(value) -> Fraction:
    """Exact rational for a number; floats go through their shortest decimal repr"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(repr(float(value)))


def _is_exact_input(values) -> bool:
    array = np.asarray(values, dtype=object).ravel()
    return any(isinstance(v, Fraction) for v in array)


def _as_table(values, exact: bool) -> np.ndarray:
    if exact:
        return np.array([as_fraction(v) for v in np.asarray(values, dtype=object).ravel()], dtype=object)
    return np.array(values, dtype=float).ravel()


@dataclass(frozen=True, eq=False)
class EmpiricalModel:
    """Validated behaviour; build through new_model"""
    scenario: MeasurementScenario
    tables: Tuple[np.ndarray, ...]
    diagnostics: Tuple[Diagnostic, ...] = ()

    @property
    def is_exact(self) -> bool:
        return any(t.dtype == object for t in self.tables)

    @cached_property
    def flat(self) -> np.ndarray:
        """The vector v^e indexed by local assignment"""
        flat = np.concatenate(self.tables)
        flat.setflags(write=False)
        return flat

    def context_table(self, context: ContextRef) -> np.ndarray:
        return self.tables[self.scenario.context_index(context)]

    def as_float(self) -> 'EmpiricalModel':
        if not self.is_exact:
            return self
        return EmpiricalModel(self.scenario, tuple(t.astype(float) for t in self.tables), self.diagnostics)

    def as_exact(self) -> 'EmpiricalModel':
        if self.is_exact:
            return self
        return EmpiricalModel(self.scenario, tuple(_as_table(t, True) for t in self.tables), self.diagnostics)

    def to_mapping(self) -> Dict[str, Dict[str, object]]:
        """context key -> outcome key -> probability, in canonical order"""
        result = {}
        for k, table in enumerate(self.tables):
            outcomes = self.scenario.context_outcomes(k)
            result[self.scenario.context_key(k)] = {
                ','.join(s): p for s, p in zip(outcomes, table)
            }
        return result


def new_model(scenario: MeasurementScenario,
              tables: Union[Sequence[TableInput], Mapping[str, TableInput]],
              renormalize: bool = False,
              tolerance: float = PROBABILITY_TOLERANCE) -> EmpiricalModel:
    """
    Validate per-context probability tables.

    Args:
        scenario: Scenario the tables live on
        tables: One table per context, either in context order or keyed by
            context; a table is a vector in canonical outcome order or a
            mapping from comma-joined outcome keys to probabilities
            (missing keys are 0)
        renormalize: Rescale contexts whose sum is off instead of failing;
            every rescaled context is recorded as a diagnostic
        tolerance: Accepted deviation from non-negativity and unit sums

    Raises:
        ShapeMismatch, NegativeProbability, NormalizationViolation
    """
    ordered = _order_tables(scenario, tables)
    exact = any(_is_exact_input(t) for t in ordered)
    log = DiagnosticLog()
    frozen = []

    for k, raw in enumerate(ordered):
        key = scenario.context_key(k)
        table = _as_table(raw, exact)
        if len(table) != scenario.context_sizes[k]:
            raise ShapeMismatch(
                f"Context {key} needs {scenario.context_sizes[k]} entries, got {len(table)}")
        lowest = min(table)
        if lowest < -tolerance:
            raise NegativeProbability(f"Context {key} has negative entry {float(lowest):.3e}")
        if lowest < 0:
            table = np.array([max(p, 0 * p) for p in table], dtype=table.dtype)

        total = sum(table, 0 * table[0])
        if abs(total - 1) > tolerance:
            if not renormalize or total <= 0:
                raise NormalizationViolation(f"Context {key} sums to {float(total):.12g}")
            table = table / total
            log.handle(Diagnostic(
                DiagnosticLevel.WARNING,
                f"Context {key} renormalized from sum {float(total):.12g}",
                'empirical.renormalize',
                {'context': key, 'sum': float(total)},
            ))
        table.setflags(write=False)
        frozen.append(table)

    return EmpiricalModel(scenario, tuple(frozen), tuple(log.items))


def _order_tables(scenario: MeasurementScenario, tables) -> List:
    if isinstance(tables, Mapping):
        ordered: List[Optional[TableInput]] = [None] * scenario.num_contexts
        for ref, table in tables.items():
            ordered[scenario.context_index(ref)] = table
        missing = [scenario.context_key(k) for k, t in enumerate(ordered) if t is None]
        if missing:
            raise ShapeMismatch(f"No table for contexts {missing}")
    else:
        ordered = list(tables)
        if len(ordered) != scenario.num_contexts:
            raise ShapeMismatch(f"Expected {scenario.num_contexts} context tables, got {len(ordered)}")

    result = []
    for k, table in enumerate(ordered):
        if isinstance(table, Mapping):
            table = _table_from_mapping(scenario, k, table)
        result.append(table)
    return result


def _table_from_mapping(scenario: MeasurementScenario, k: int, entries: Mapping) -> List:
    exact = _is_exact_input(list(entries.values()))
    table = [Fraction(0) if exact else 0.0] * scenario.context_sizes[k]
    for outcome_key, p in entries.items():
        joint = tuple(outcome_key.split(',')) if isinstance(outcome_key, str) else tuple(outcome_key)
        try:
            index = scenario.encode_local(k, joint) - scenario.offsets[k]
        except ValueError:
            raise ShapeMismatch(f"Unknown outcome {outcome_key} for context {scenario.context_key(k)}")
        table[index] = p
    return table


def flatten(model: EmpiricalModel) -> np.ndarray:
    return model.flat


def from_flat(scenario: MeasurementScenario, vector: Sequence, **kwargs) -> EmpiricalModel:
    """Split a length-m vector back into per-context tables"""
    vector = np.asarray(vector, dtype=object if _is_exact_input(vector) else float)
    if vector.shape != (scenario.m,):
        raise ShapeMismatch(f"Flat vector needs {scenario.m} entries, got shape {vector.shape}")
    tables = [vector[scenario.context_block(k)] for k in range(scenario.num_contexts)]
    return new_model(scenario, tables, **kwargs)


def from_counts(scenario: MeasurementScenario, counts: Union[Sequence, Mapping],
                exact: bool = False) -> EmpiricalModel:
    """
    Relative frequencies from raw event counts, context by context.

    No finite-statistics correction is applied; a warning diagnostic says so.
    """
    ordered = _order_tables(scenario, counts)
    tables = []
    for k, raw in enumerate(ordered):
        key = scenario.context_key(k)
        values = np.asarray(raw, dtype=object).ravel()
        if len(values) != scenario.context_sizes[k]:
            raise ShapeMismatch(
                f"Context {key} needs {scenario.context_sizes[k]} counts, got {len(values)}")
        if any(v < 0 for v in values):
            raise NegativeProbability(f"Context {key} has a negative count")
        total = sum(values)
        if total <= 0:
            raise NormalizationViolation(f"Context {key} has no events")
        if exact:
            tables.append([as_fraction(v) / as_fraction(total) for v in values])
        else:
            tables.append([float(v) / float(total) for v in values])

    model = new_model(scenario, tables)
    log = DiagnosticLog()
    log.warn('Probabilities are plain relative frequencies; no finite-statistics correction applied',
             'empirical.from_counts')
    return EmpiricalModel(model.scenario, model.tables, model.diagnostics + tuple(log.items))


def marginalize(model: EmpiricalModel, context: ContextRef, subset: Sequence[str]) -> np.ndarray:
    """
    Marginal of e_C on U, over O_U ordered lexicographically in the order U is given.

    Raises:
        NotASubset: U has a label outside C
    """
    scenario = model.scenario
    k = scenario.context_index(context)
    labels = scenario.contexts[k]
    subset = tuple(subset)
    outside = [x for x in subset if x not in labels]
    if outside:
        raise NotASubset(f"{outside} not in context {scenario.context_key(k)}")

    table = model.tables[k].reshape(scenario.context_dims[k])
    dropped = tuple(i for i, x in enumerate(labels) if x not in subset)
    kept = [x for x in labels if x in subset]
    marginal = table.sum(axis=dropped) if dropped else table
    order = [kept.index(x) for x in subset]
    return np.transpose(marginal, order).ravel() if order else np.atleast_1d(marginal)


def _overlap_marginals(model: EmpiricalModel) -> Iterator[Tuple[int, int, Tuple[str, ...], np.ndarray]]:
    """(k1, k2, intersection, difference of the two marginals) for every overlapping pair"""
    scenario = model.scenario
    for k1 in range(scenario.num_contexts):
        for k2 in range(k1 + 1, scenario.num_contexts):
            shared = set(scenario.contexts[k1]) & set(scenario.contexts[k2])
            if not shared:
                continue
            common = tuple(x for x in scenario.measurements if x in shared)
            yield k1, k2, common, marginalize(model, k1, common) - marginalize(model, k2, common)


@dataclass(frozen=True)
class SignallingCheck:
    nonsignalling: bool
    max_discrepancy: object
    worst: Optional[Dict] = None

    def to_dict(self) -> Dict:
        return {
            'nonsignalling': self.nonsignalling,
            'max_discrepancy': float(self.max_discrepancy),
            'worst': self.worst,
        }


def is_nonsignalling(model: EmpiricalModel, tolerance: float = PROBABILITY_TOLERANCE) -> SignallingCheck:
    """Compare marginals of every overlapping context pair; report the worst entry"""
    scenario = model.scenario
    best, worst = 0, None
    for k1, k2, common, diff in _overlap_marginals(model):
        gaps = np.abs(diff)
        i = int(np.argmax(gaps))
        if gaps[i] > best:
            best = gaps[i]
            dims = tuple(len(scenario.outcomes[x]) for x in common)
            digits = np.unravel_index(i, dims)
            worst = {
                'contexts': [scenario.context_key(k1), scenario.context_key(k2)],
                'intersection': list(common),
                'outcome': ','.join(scenario.outcomes[x][int(d)] for x, d in zip(common, digits)),
            }
    return SignallingCheck(nonsignalling=bool(best <= tolerance), max_discrepancy=best, worst=worst)


def mim(model: EmpiricalModel):
    """Maximum incompatibility of marginals; 0 when no contexts overlap"""
    return is_nonsignalling(model, tolerance=0).max_discrepancy


def _check_same_scenario(e1: EmpiricalModel, e2: EmpiricalModel):
    if e1.scenario != e2.scenario:
        raise ScenarioMismatch("Models live on different scenarios")


def total_variation(e1: EmpiricalModel, e2: EmpiricalModel):
    """max over contexts of half the L1 distance between the context tables"""
    _check_same_scenario(e1, e2)
    return max(sum(np.abs(t1 - t2)) / 2 for t1, t2 in zip(e1.tables, e2.tables))


def mix(e1: EmpiricalModel, e2: EmpiricalModel, lam) -> EmpiricalModel:
    """Context-wise lam * e1 + (1 - lam) * e2"""
    _check_same_scenario(e1, e2)
    if not 0 <= lam <= 1:
        raise LambdaOutOfRange(f"Mixing weight {lam} outside [0, 1]")
    if e1.is_exact and e2.is_exact and isinstance(lam, numbers.Rational):
        lam = Fraction(lam)
    else:
        e1, e2, lam = e1.as_float(), e2.as_float(), float(lam)
    tables = [lam * t1 + (1 - lam) * t2 for t1, t2 in zip(e1.tables, e2.tables)]
    return new_model(e1.scenario, tables)


def perturb(model: EmpiricalModel, epsilon: float, seed: Optional[int] = None) -> EmpiricalModel:
    """
    Move at most epsilon of mass per context towards a seeded Dirichlet target.

    Each context table p becomes p + t (q - p) with t = min(1, epsilon / V(p, q)),
    so the total variation to the input never exceeds epsilon.
    """
    if not 0 <= epsilon <= 1:
        raise ModelError(f"Perturbation size {epsilon} outside [0, 1]")
    if epsilon == 0:
        return model
    rng = np.random.default_rng(seed)
    tables = []
    for table in model.as_float().tables:
        target = rng.dirichlet(np.ones(len(table)))
        distance = np.abs(target - table).sum() / 2
        step = min(1.0, epsilon / distance) if distance > 0 else 0.0
        tables.append(table + step * (target - table))
    perturbed = new_model(model.scenario, tables)
    logger.debug(f"Perturbed model by epsilon={epsilon} (seed={seed})")
    return perturbed
