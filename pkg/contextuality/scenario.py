"""
Measurement scenarios: labels, maximal contexts, outcome sets and the
index spaces of global and local assignments
"""
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product
from typing import Dict, List, Mapping, Sequence, Tuple, Union
import logging
import math

import numpy as np

from .config import INCIDENCE_SIZE_CAP
from .diagnostics import Diagnostic, DiagnosticLevel
from .exceptions import (
    CoverViolation,
    DuplicateLabel,
    EmptyContext,
    ScenarioError,
    SizeCapExceeded,
    UnknownMeasurementInContext,
)

logger = logging.getLogger(__name__)

ContextRef = Union[int, str, Sequence[str]]


@dataclass(frozen=True)
class MeasurementScenario:
    """
    Validated scenario <X, M, O> with a frozen canonical ordering.

    Joint outcomes of a context are ordered lexicographically by the declared
    outcome order, the first measurement of the context varying slowest.
    Global assignments use the same mixed-radix rule over the declared
    measurement order.
    """
    measurements: Tuple[str, ...]
    contexts: Tuple[Tuple[str, ...], ...]
    outcome_lists: Tuple[Tuple[str, ...], ...]

    @property
    def outcomes(self) -> Dict[str, Tuple[str, ...]]:
        return dict(zip(self.measurements, self.outcome_lists))

    @cached_property
    def positions(self) -> Dict[str, int]:
        return {label: i for i, label in enumerate(self.measurements)}

    @cached_property
    def radices(self) -> Tuple[int, ...]:
        return tuple(len(o) for o in self.outcome_lists)

    @cached_property
    def context_positions(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(self.positions[x] for x in c) for c in self.contexts)

    @cached_property
    def context_dims(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(self.radices[p] for p in pos) for pos in self.context_positions)

    @cached_property
    def context_sizes(self) -> Tuple[int, ...]:
        return tuple(math.prod(dims) for dims in self.context_dims)

    @cached_property
    def offsets(self) -> Tuple[int, ...]:
        offsets, total = [], 0
        for size in self.context_sizes:
            offsets.append(total)
            total += size
        return tuple(offsets)

    @property
    def n(self) -> int:
        """Number of global assignments"""
        return math.prod(self.radices)

    @property
    def m(self) -> int:
        """Number of local assignments over all contexts"""
        return sum(self.context_sizes)

    @property
    def num_contexts(self) -> int:
        return len(self.contexts)

    def context_index(self, context: ContextRef) -> int:
        """Resolve a context given by index, comma-joined key or label sequence"""
        if isinstance(context, int):
            if not 0 <= context < self.num_contexts:
                raise ScenarioError(f"Context index {context} out of range")
            return context
        labels = tuple(context.split(',')) if isinstance(context, str) else tuple(context)
        for k, c in enumerate(self.contexts):
            if c == labels:
                return k
        wanted = frozenset(labels)
        for k, c in enumerate(self.contexts):
            if frozenset(c) == wanted:
                return k
        raise ScenarioError(f"Unknown context: {','.join(labels)}")

    def context_key(self, k: int) -> str:
        return ','.join(self.contexts[k])

    def context_block(self, k: int) -> slice:
        """Rows of context k in the flat vector and the incidence matrix"""
        return slice(self.offsets[k], self.offsets[k] + self.context_sizes[k])

    def context_outcomes(self, k: int) -> List[Tuple[str, ...]]:
        """Joint outcomes of context k in canonical order"""
        return list(product(*(self.outcome_lists[p] for p in self.context_positions[k])))

    # Global assignments

    def encode_global(self, assignment: Union[Mapping[str, str], Sequence[str]]) -> int:
        if isinstance(assignment, Mapping):
            assignment = [assignment[x] for x in self.measurements]
        if len(assignment) != len(self.measurements):
            raise ScenarioError(f"Global assignment needs {len(self.measurements)} outcomes")
        digits = [self.outcome_lists[i].index(o) for i, o in enumerate(assignment)]
        return int(np.ravel_multi_index(digits, self.radices))

    def decode_global(self, index: int) -> Tuple[str, ...]:
        if not 0 <= index < self.n:
            raise ScenarioError(f"Global index {index} out of range [0, {self.n})")
        digits = np.unravel_index(index, self.radices)
        return tuple(self.outcome_lists[i][int(d)] for i, d in enumerate(digits))

    def global_digits(self) -> np.ndarray:
        """(n, |X|) array of outcome positions of every global assignment"""
        return np.stack(np.unravel_index(np.arange(self.n), self.radices), axis=1)

    # Local assignments

    def encode_local(self, context: ContextRef, joint_outcome: Sequence[str]) -> int:
        k = self.context_index(context)
        positions = self.context_positions[k]
        if len(joint_outcome) != len(positions):
            raise ScenarioError(f"Joint outcome for {self.context_key(k)} needs {len(positions)} entries")
        digits = [self.outcome_lists[p].index(o) for p, o in zip(positions, joint_outcome)]
        return self.offsets[k] + int(np.ravel_multi_index(digits, self.context_dims[k]))

    def decode_local(self, index: int) -> Tuple[int, Tuple[str, ...]]:
        if not 0 <= index < self.m:
            raise ScenarioError(f"Local index {index} out of range [0, {self.m})")
        k = int(np.searchsorted(self.offsets, index, side='right')) - 1
        digits = np.unravel_index(index - self.offsets[k], self.context_dims[k])
        positions = self.context_positions[k]
        return k, tuple(self.outcome_lists[p][int(d)] for p, d in zip(positions, digits))

    # Reporting

    def lint(self) -> List[Diagnostic]:
        """Non-fatal findings: nested contexts and single-outcome measurements"""
        findings = []
        for i, a in enumerate(self.contexts):
            for j, b in enumerate(self.contexts):
                if i != j and set(a) < set(b):
                    findings.append(Diagnostic(
                        DiagnosticLevel.WARNING,
                        f"Context {','.join(a)} is a subset of {','.join(b)}",
                        'scenario.lint',
                        {'context': list(a), 'superset': list(b)},
                    ))
        for label, outcomes in zip(self.measurements, self.outcome_lists):
            if len(outcomes) == 1:
                findings.append(Diagnostic(
                    DiagnosticLevel.WARNING,
                    f"Measurement {label} has a single outcome",
                    'scenario.lint',
                    {'measurement': label},
                ))
        return findings

    def describe(self) -> Dict:
        return {
            'measurements': len(self.measurements),
            'contexts': self.num_contexts,
            'global_assignments': self.n,
            'local_assignments': self.m,
        }

    def to_dict(self) -> Dict:
        return {
            'measurements': list(self.measurements),
            'contexts': [list(c) for c in self.contexts],
            'outcomes': {x: list(o) for x, o in zip(self.measurements, self.outcome_lists)},
        }


def new_scenario(measurements: Sequence[str],
                 contexts: Sequence[Sequence[str]],
                 outcomes: Mapping[str, Sequence]) -> MeasurementScenario:
    """
    Validate and freeze a measurement scenario.

    Args:
        measurements: Ordered, distinct measurement labels
        contexts: Ordered maximal contexts, each an ordered list of labels
        outcomes: Measurement label -> ordered outcome labels

    Returns:
        MeasurementScenario

    Raises:
        DuplicateLabel, EmptyContext, UnknownMeasurementInContext, CoverViolation
    """
    labels = tuple(str(x) for x in measurements)
    if len(set(labels)) != len(labels):
        raise DuplicateLabel(f"Duplicate measurement labels in {list(labels)}")
    if not labels:
        raise CoverViolation("Scenario has no measurements")

    frozen_contexts = []
    seen = set()
    for context in contexts:
        context = tuple(str(x) for x in context)
        if not context:
            raise EmptyContext("Scenario contains an empty context")
        if len(set(context)) != len(context):
            raise DuplicateLabel(f"Duplicate label within context {','.join(context)}")
        unknown = [x for x in context if x not in labels]
        if unknown:
            raise UnknownMeasurementInContext(
                f"Context {','.join(context)} uses undeclared measurements {unknown}")
        key = frozenset(context)
        if key in seen:
            raise DuplicateLabel(f"Duplicate context {','.join(context)}")
        seen.add(key)
        frozen_contexts.append(context)

    covered = set().union(*frozen_contexts) if frozen_contexts else set()
    missing = [x for x in labels if x not in covered]
    if missing:
        raise CoverViolation(f"Contexts do not cover measurements {missing}")

    extra = [x for x in outcomes if str(x) not in labels]
    if extra:
        raise UnknownMeasurementInContext(f"Outcomes declared for unknown measurements {extra}")
    outcome_lists = []
    for label in labels:
        if label not in outcomes:
            raise ScenarioError(f"No outcomes declared for measurement {label}")
        values = tuple(str(o) for o in outcomes[label])
        if not values:
            raise ScenarioError(f"Measurement {label} has no outcomes")
        if len(set(values)) != len(values):
            raise DuplicateLabel(f"Duplicate outcome labels for measurement {label}")
        outcome_lists.append(values)

    scenario = MeasurementScenario(labels, tuple(frozen_contexts), tuple(outcome_lists))
    for finding in scenario.lint():
        logger.warning(f"{finding.source}: {finding.message}")
    logger.debug(f"Scenario with {len(labels)} measurements, {len(frozen_contexts)} contexts: "
                 f"n={scenario.n}, m={scenario.m}")
    return scenario


@lru_cache(maxsize=32)
def _incidence(scenario: MeasurementScenario) -> np.ndarray:
    n, m = scenario.n, scenario.m
    matrix = np.zeros((m, n), dtype=np.int64)
    digits = scenario.global_digits()
    columns = np.arange(n)
    for k, positions in enumerate(scenario.context_positions):
        local = np.ravel_multi_index(tuple(digits[:, list(positions)].T), scenario.context_dims[k])
        matrix[scenario.offsets[k] + local, columns] = 1
    matrix.setflags(write=False)
    return matrix


def incidence_matrix(scenario: MeasurementScenario,
                     size_cap: int = INCIDENCE_SIZE_CAP) -> np.ndarray:
    """
    Dense m x n restriction matrix: entry <C, s>, g is 1 iff g restricted to C equals s.

    The returned array is shared and read-only.

    Raises:
        SizeCapExceeded: when n * m is above size_cap
    """
    entries = scenario.n * scenario.m
    if entries > size_cap:
        raise SizeCapExceeded(entries, size_cap)
    return _incidence(scenario)
