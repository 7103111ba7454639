"""
JSON documents for scenarios, empirical models, hidden-variable models and
reports, with canonical serialization and sha256 fingerprints.

Model document:
    {"scenario": {"measurements": [...], "contexts": [[...], ...],
                  "outcomes": {label: [...]}},
     "model": {context key: {outcome key: p}},
     "counts": {context key: {outcome key: n}}}          (optional)

HVM document:
    {"scenario": ..., "lambdas": [...], "prior": [...],
     "behaviours": {label: {context key: {outcome key: p}}}}

Probabilities given as strings ("1/2", "0.2821") are read as exact rationals.
"""
from fractions import Fraction
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple, Union
import hashlib
import json
import logging
import numbers

import numpy as np

from .config import DOCUMENT_INDENT, SIGNIFICANT_DIGITS
from .empirical import EmpiricalModel, from_counts, new_model
from .exceptions import DocumentParseError, ShapeMismatch
from .hvm import HiddenVariableModel, new_hvm
from .scenario import MeasurementScenario, new_scenario

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def canonical_number(value, digits: int = SIGNIFICANT_DIGITS):
    """Fractions as 'p/q' strings, floats rounded to the given significant digits"""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (numbers.Integral, np.integer)):
        return int(value)
    if isinstance(value, (numbers.Real, np.floating)):
        rounded = float(f"{float(value):.{digits}g}")
        return 0.0 if rounded == 0 else rounded
    return value


def canonical(obj, digits: int = SIGNIFICANT_DIGITS):
    """Recursively render numbers; mapping key order is kept as declared"""
    if isinstance(obj, Mapping):
        return {str(k): canonical(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [canonical(v, digits) for v in obj]
    return canonical_number(obj, digits)


def dumps(document: Mapping, digits: int = SIGNIFICANT_DIGITS) -> str:
    return json.dumps(canonical(document, digits), ensure_ascii=False, indent=DOCUMENT_INDENT) + '\n'


def fingerprint(document: Union[Mapping, str]) -> str:
    """sha256 of the canonical text"""
    text = document if isinstance(document, str) else dumps(document)
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


# Reading

def loads(text: str) -> Dict:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentParseError(f"Invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}")
    if not isinstance(document, dict):
        raise DocumentParseError("Document must be a JSON object")
    return document


def load_document(path: PathLike) -> Dict:
    """
    Read a JSON document.

    Raises:
        DocumentParseError: unreadable file, invalid UTF-8 or JSON
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as e:
        raise DocumentParseError(f"Cannot read {path}: {e}")
    logger.debug(f"Loaded {path} ({len(text)} characters)")
    return loads(text)


def _section(document: Mapping, name: str, kind=dict):
    if name not in document:
        raise DocumentParseError(f"Document has no '{name}' section")
    section = document[name]
    if not isinstance(section, kind):
        raise DocumentParseError(f"Section '{name}' must be a JSON {kind.__name__}")
    return section


def _probability(value):
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError:
            raise DocumentParseError(f"Cannot read probability {value!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DocumentParseError(f"Probability must be a number or a rational string, got {value!r}")
    return value


def _tables(section: Mapping, name: str) -> Dict[str, Dict[str, object]]:
    tables = {}
    for key, table in section.items():
        if not isinstance(table, dict):
            raise DocumentParseError(f"{name} entry for context {key} must map outcome keys to numbers")
        tables[key] = {outcome: _probability(p) for outcome, p in table.items()}
    return tables


def parse_scenario(document: Mapping) -> MeasurementScenario:
    section = _section(document, 'scenario')
    measurements = _section(section, 'measurements', list)
    contexts = _section(section, 'contexts', list)
    outcomes = _section(section, 'outcomes', dict)
    if not all(isinstance(c, list) for c in contexts):
        raise DocumentParseError("Every context must be a list of measurement labels")
    return new_scenario(measurements, contexts, outcomes)


def parse_model(document: Mapping, use_counts: bool = False, renormalize: bool = False) -> EmpiricalModel:
    """
    Build the model of a model document; with use_counts the counts section is
    normalized instead of reading the model section.
    """
    scenario = parse_scenario(document)
    if use_counts:
        counts = _tables(_section(document, 'counts'), 'counts')
        rows = {}
        for key, table in counts.items():
            outcomes = [','.join(s) for s in scenario.context_outcomes(scenario.context_index(key))]
            unknown = [outcome for outcome in table if outcome not in outcomes]
            if unknown:
                raise ShapeMismatch(f"Unknown outcomes {unknown} in counts for context {key}")
            rows[key] = [table.get(outcome, 0) for outcome in outcomes]
        return from_counts(scenario, rows)
    return new_model(scenario, _tables(_section(document, 'model'), 'model'), renormalize=renormalize)


def parse_hvm(document: Mapping) -> HiddenVariableModel:
    scenario = parse_scenario(document)
    lambdas = _section(document, 'lambdas', list)
    prior = [_probability(p) for p in _section(document, 'prior', list)]
    behaviours = _section(document, 'behaviours')
    missing = [label for label in lambdas if label not in behaviours]
    if missing:
        raise DocumentParseError(f"No behaviour for hidden variables {missing}")
    models = [new_model(scenario, _tables(behaviours[label], f"behaviour {label}")) for label in lambdas]
    return new_hvm(lambdas, prior, models)


def read_model(path: PathLike, use_counts: bool = False,
               renormalize: bool = False) -> Tuple[EmpiricalModel, str]:
    """(model, fingerprint of the source document)"""
    document = load_document(path)
    return parse_model(document, use_counts=use_counts, renormalize=renormalize), fingerprint(document)


def read_hvm(path: PathLike) -> Tuple[HiddenVariableModel, str]:
    document = load_document(path)
    return parse_hvm(document), fingerprint(document)


# Writing

def model_to_document(model: EmpiricalModel, counts: Optional[Mapping] = None) -> Dict:
    document = {
        'scenario': model.scenario.to_dict(),
        'model': model.to_mapping(),
    }
    if counts is not None:
        document['counts'] = counts
    return document


def hvm_to_document(hvm: HiddenVariableModel) -> Dict:
    return {
        'scenario': hvm.scenario.to_dict(),
        'lambdas': list(hvm.lambdas),
        'prior': list(hvm.prior),
        'behaviours': {label: h.to_mapping() for label, h in zip(hvm.lambdas, hvm.behaviours)},
    }


def report_document(kind: str, payload: Mapping, source: Optional[str] = None) -> Dict:
    """Report envelope: kind, source fingerprint, then the payload"""
    return {'kind': kind, 'source': source, **payload}


def write_document(path: PathLike, document: Mapping) -> str:
    """Write canonical text; returns its fingerprint"""
    text = dumps(document)
    Path(path).write_text(text, encoding='utf-8')
    logger.info(f"Wrote {path}")
    return fingerprint(text)
