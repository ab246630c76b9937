"""Loading of fuzzy-system definitions from JSON documents.

Document layout::

    {
      "schema_version": 1,
      "name": "segment-assessment",
      "defuzz_grid_points": 1001,
      "variables": [
        {"name": "ra", "role": "input", "universe": [0, 1],
         "terms": [{"name": "Low", "kind": "sig", "params": [-12, 0.3]}, ...]},
        ...
        {"name": "quality", "role": "output", ...}
      ],
      "rules": [
        {"if": [{"ra": "Low", "severity": "Mild"}], "then": {"quality": "Good"}},
        ...
      ]
    }

``if`` is a list of conjunctions joined by OR; a single mapping is also accepted.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError, InvalidArgument
from .fuzzy import (
    DEFAULT_GRID_POINTS,
    FisDefinition,
    LinguisticVariable,
    MembershipFunction,
    Rule,
    validate_fis,
)

SCHEMA_VERSION = 1

ASSESSMENT_CONFIG = "assessment_fis.json"
SUGGESTION_CONFIG = "suggestion_fis.json"


def _variable(doc: Mapping[str, Any]) -> LinguisticVariable:
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise ConfigError(f"variable without a name: {doc!r}")
    try:
        lo, hi = (float(v) for v in doc["universe"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"variable {name!r}: universe must be [lo, hi]") from exc
    if not lo < hi:
        raise ConfigError(f"variable {name!r}: universe lo={lo} is not below hi={hi}")
    terms = []
    for term in doc.get("terms", []):
        try:
            mf = MembershipFunction(term["kind"], tuple(float(p) for p in term["params"]))
        except KeyError as exc:
            raise ConfigError(f"variable {name!r}: term missing {exc}") from exc
        except InvalidArgument as exc:
            raise ConfigError(f"variable {name!r}, term {term.get('name')!r}: {exc}") from exc
        terms.append((term["name"], mf))
    return LinguisticVariable(name=name, universe=(lo, hi), terms=tuple(terms))


def _rule(doc: Mapping[str, Any], index: int) -> Rule:
    clauses = doc.get("if")
    if isinstance(clauses, Mapping):
        clauses = [clauses]
    if not clauses or not all(isinstance(c, Mapping) and c for c in clauses):
        raise ConfigError(f"rule {index}: empty or malformed antecedent")
    then = doc.get("then")
    if not isinstance(then, Mapping) or len(then) != 1:
        raise ConfigError(f"rule {index}: consequent must name exactly one output term")
    (out_var, out_term), = then.items()
    return Rule(
        clauses=tuple(tuple((str(v), str(t)) for v, t in c.items()) for c in clauses),
        consequent=(str(out_var), str(out_term)),
    )


def parse_fis_config(doc: Mapping[str, Any]) -> FisDefinition:
    """Build and validate a :class:`FisDefinition`; raises :class:`ConfigError` on any defect."""
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    variables = doc.get("variables") or []
    inputs = [_variable(v) for v in variables if v.get("role") == "input"]
    outputs = [_variable(v) for v in variables if v.get("role") == "output"]
    if not inputs:
        raise ConfigError("no input variables declared")
    if len(outputs) != 1:
        raise ConfigError(f"exactly one output variable required, found {len(outputs)}")
    rules = [_rule(r, i) for i, r in enumerate(doc.get("rules") or [], start=1)]
    if not rules:
        raise ConfigError("rule base is empty")
    grid = int(doc.get("defuzz_grid_points", DEFAULT_GRID_POINTS))
    fis = FisDefinition(
        inputs=tuple(inputs),
        output=outputs[0],
        rules=tuple(rules),
        defuzz_grid_points=grid,
        name=str(doc.get("name", "fis")),
    )
    report = validate_fis(fis)
    if not report.ok:
        raise ConfigError(f"{fis.name}: {report}")
    return fis


def load_fis_config(source: str | Path | Mapping[str, Any]) -> FisDefinition:
    if isinstance(source, Mapping):
        return parse_fis_config(source)
    path = Path(source)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_fis_config(doc)


def shipped_path(name: str) -> Path:
    return Path(str(resources.files("roadq") / "data" / name))


def load_shipped(name: str) -> FisDefinition:
    return load_fis_config(shipped_path(name))


def assessment_fis() -> FisDefinition:
    return load_shipped(ASSESSMENT_CONFIG)


def suggestion_fis() -> FisDefinition:
    return load_shipped(SUGGESTION_CONFIG)
