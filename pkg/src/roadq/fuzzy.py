"""Mamdani fuzzy inference with sigmoid-family membership functions.

Operators are the classical Mamdani set: AND = min, OR = max,
implication = min (clipping), aggregation = max, centroid defuzzification
over a uniform grid of the output universe.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import ClampWarning, InvalidArgument, NoRuleFired

SIG = "sig"
PSIG = "psig"

DEFAULT_GRID_POINTS = 1001
COVERAGE_POINTS_PER_AXIS = 21
COVERAGE_MIN_STRENGTH = 1e-9


def _check_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise InvalidArgument(f"{name} must be finite, got {value!r}")


def _logistic(z: float) -> float:
    # split on sign so exp() never overflows
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _logistic_array(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def eval_sigmoid(a: float, m: float, n: float) -> float:
    """Sigmoid membership ``1 / (1 + exp(-m (a - n)))``.

    Opens to the right for ``m > 0`` and to the left for ``m < 0``;
    ``n`` is the inflection point where the degree is exactly 0.5.
    """
    _check_finite(a=a, m=m, n=n)
    return _logistic(m * (a - n))


def eval_psig(a: float, m1: float, n1: float, m2: float, n2: float) -> float:
    """Product of a rising and a falling sigmoid (a smooth bump)."""
    _check_finite(a=a, m1=m1, n1=n1, m2=m2, n2=n2)
    if np.sign(m1) == np.sign(m2):
        raise InvalidArgument(f"psig slopes must have opposite signs, got m1={m1}, m2={m2}")
    return _logistic(m1 * (a - n1)) * _logistic(m2 * (a - n2))


@dataclass(frozen=True)
class MembershipFunction:
    kind: str
    params: tuple[float, ...]

    def __post_init__(self) -> None:
        expected = {SIG: 2, PSIG: 4}.get(self.kind)
        if expected is None:
            raise InvalidArgument(f"unknown membership function kind {self.kind!r}")
        if len(self.params) != expected:
            raise InvalidArgument(
                f"{self.kind} takes {expected} parameters, got {len(self.params)}"
            )
        _check_finite(**{f"p{i}": p for i, p in enumerate(self.params)})
        if self.kind == PSIG and np.sign(self.params[0]) == np.sign(self.params[2]):
            raise InvalidArgument(
                f"psig slopes must have opposite signs, got {self.params[0]} and {self.params[2]}"
            )

    @classmethod
    def sig(cls, m: float, n: float) -> MembershipFunction:
        return cls(SIG, (float(m), float(n)))

    @classmethod
    def psig(cls, m1: float, n1: float, m2: float, n2: float) -> MembershipFunction:
        return cls(PSIG, (float(m1), float(n1), float(m2), float(n2)))

    def __call__(self, a: float) -> float:
        if self.kind == SIG:
            return eval_sigmoid(a, *self.params)
        return eval_psig(a, *self.params)

    def sample(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == SIG:
            m, n = self.params
            return _logistic_array(m * (x - n))
        m1, n1, m2, n2 = self.params
        return _logistic_array(m1 * (x - n1)) * _logistic_array(m2 * (x - n2))


@dataclass(frozen=True)
class LinguisticVariable:
    name: str
    universe: tuple[float, float]
    terms: tuple[tuple[str, MembershipFunction], ...]

    @property
    def lo(self) -> float:
        return self.universe[0]

    @property
    def hi(self) -> float:
        return self.universe[1]

    @property
    def term_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.terms)

    def term(self, name: str) -> MembershipFunction:
        for term_name, mf in self.terms:
            if term_name == name:
                return mf
        raise KeyError(f"variable {self.name!r} has no term {name!r}")

    def clamp(self, crisp: float) -> float:
        _check_finite(**{self.name: crisp})
        if crisp < self.lo or crisp > self.hi:
            clamped = min(max(crisp, self.lo), self.hi)
            warnings.warn(
                f"{self.name}={crisp} outside [{self.lo}, {self.hi}], clamped to {clamped}",
                ClampWarning,
                stacklevel=3,
            )
            return clamped
        return crisp


@dataclass(frozen=True)
class Rule:
    """``IF <clause> OR <clause> ... THEN output IS term``.

    Each clause is a conjunction of ``(variable, term)`` pairs.
    """

    clauses: tuple[tuple[tuple[str, str], ...], ...]
    consequent: tuple[str, str]

    @classmethod
    def when(cls, consequent: tuple[str, str], *clauses: Mapping[str, str]) -> Rule:
        return cls(
            clauses=tuple(tuple(clause.items()) for clause in clauses),
            consequent=consequent,
        )

    def describe(self) -> str:
        ors = [" AND ".join(f"{v} IS {t}" for v, t in clause) for clause in self.clauses]
        lhs = " OR ".join(f"({c})" if len(ors) > 1 else c for c in ors)
        return f"IF {lhs} THEN {self.consequent[0]} IS {self.consequent[1]}"


@dataclass(frozen=True)
class FisDefinition:
    inputs: tuple[LinguisticVariable, ...]
    output: LinguisticVariable
    rules: tuple[Rule, ...]
    defuzz_grid_points: int = DEFAULT_GRID_POINTS
    name: str = "fis"

    def input(self, name: str) -> LinguisticVariable:
        for var in self.inputs:
            if var.name == name:
                return var
        raise KeyError(f"no input variable {name!r}")

    @cached_property
    def grid(self) -> np.ndarray:
        return np.linspace(self.output.lo, self.output.hi, self.defuzz_grid_points)

    @cached_property
    def _output_curves(self) -> np.ndarray:
        return np.stack([mf.sample(self.grid) for _, mf in self.output.terms])

    @cached_property
    def digest(self) -> str:
        """Short content hash identifying this rule base and its parameters."""
        payload = {
            "name": self.name,
            "grid": self.defuzz_grid_points,
            "vars": [
                [v.name, list(v.universe), [[t, mf.kind, list(mf.params)] for t, mf in v.terms]]
                for v in (*self.inputs, self.output)
            ],
            "rules": [[[list(map(list, c)) for c in r.clauses], list(r.consequent)] for r in self.rules],
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


FuzzifiedInput = dict[str, dict[str, float]]


@dataclass(frozen=True)
class AggregatedOutput:
    values: np.ndarray
    strengths: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        self.values.setflags(write=False)


def fuzzify(var: LinguisticVariable, crisp: float) -> dict[str, float]:
    """Degree of ``crisp`` in every term of ``var``, after clamping to its universe."""
    x = var.clamp(float(crisp))
    return {name: mf(x) for name, mf in var.terms}


def fuzzify_all(fis: FisDefinition, inputs: Mapping[str, float]) -> FuzzifiedInput:
    missing = [v.name for v in fis.inputs if v.name not in inputs]
    if missing:
        raise InvalidArgument(f"missing input value(s) for {', '.join(missing)}")
    return {v.name: fuzzify(v, inputs[v.name]) for v in fis.inputs}


def rule_strength(rule: Rule, degrees: FuzzifiedInput) -> float:
    return max(min(degrees[var][term] for var, term in clause) for clause in rule.clauses)


def infer(fis: FisDefinition, inputs: Mapping[str, float]) -> AggregatedOutput:
    degrees = fuzzify_all(fis, inputs)
    strengths = tuple(rule_strength(rule, degrees) for rule in fis.rules)
    return aggregate(fis, strengths)


def aggregate(fis: FisDefinition, strengths: Sequence[float]) -> AggregatedOutput:
    """Clip each rule's consequent at its strength and combine by pointwise max."""
    # rules sharing a consequent collapse to the strongest one
    per_term = dict.fromkeys(fis.output.term_names, 0.0)
    for rule, s in zip(fis.rules, strengths):
        term = rule.consequent[1]
        per_term[term] = max(per_term[term], s)
    levels = np.array([per_term[t] for t in fis.output.term_names])[:, None]
    curve = np.minimum(fis._output_curves, levels).max(axis=0)
    return AggregatedOutput(values=curve, strengths=tuple(strengths))


def defuzzify_centroid(agg: AggregatedOutput, universe: tuple[float, float]) -> float:
    mu = np.asarray(agg.values, dtype=float)
    total = mu.sum()
    if not total > 0:
        raise NoRuleFired("aggregated output is zero everywhere")
    x = np.linspace(universe[0], universe[1], mu.size)
    centroid = float((x * mu).sum() / total)
    return min(max(centroid, universe[0]), universe[1])


def classify(fis: FisDefinition, crisp: float) -> str:
    """Output term with the largest membership at ``crisp``; ties go to the earlier term."""
    best_name, best_degree = None, -1.0
    for name, mf in fis.output.terms:
        degree = mf(crisp)
        if degree > best_degree:
            best_name, best_degree = name, degree
    return best_name


def evaluate(fis: FisDefinition, inputs: Mapping[str, float]) -> tuple[float, str]:
    """Full pipeline: crisp inputs to (crisp output, output label)."""
    crisp = defuzzify_centroid(infer(fis, inputs), fis.output.universe)
    return crisp, classify(fis, crisp)


@dataclass
class ValidationReport:
    rule_count: int
    errors: list[str] = field(default_factory=list)
    uncovered: list[dict[str, float]] = field(default_factory=list)
    # (i, j): rule i (1-based) can never fire stronger than rule j
    subsumed: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __str__(self) -> str:
        if self.ok:
            return f"ok ({self.rule_count} rules)"
        return "; ".join(self.errors)


def _check_variable(var: LinguisticVariable, errors: list[str]) -> None:
    lo, hi = var.universe
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        errors.append(f"variable {var.name!r}: universe [{lo}, {hi}] is not an interval")
    names = var.term_names
    if len(names) < 2:
        errors.append(f"variable {var.name!r}: needs at least 2 terms")
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        errors.append(f"variable {var.name!r}: duplicate term(s) {', '.join(dupes)}")
    for name, mf in var.terms:
        if mf.kind == PSIG and np.sign(mf.params[0]) == np.sign(mf.params[2]):
            errors.append(f"variable {var.name!r}, term {name!r}: psig slopes share a sign")


def _check_rules(fis: FisDefinition, errors: list[str]) -> None:
    if not fis.rules:
        errors.append("rule base is empty")
    inputs = {v.name: v for v in fis.inputs}
    for i, rule in enumerate(fis.rules, start=1):
        if not rule.clauses or any(not clause for clause in rule.clauses):
            errors.append(f"rule {i}: empty antecedent")
        for clause in rule.clauses:
            for var, term in clause:
                if var not in inputs:
                    errors.append(f"rule {i}: unknown input variable {var!r}")
                elif term not in inputs[var].term_names:
                    errors.append(f"rule {i}: variable {var!r} has no term {term!r}")
        out_var, out_term = rule.consequent
        if out_var != fis.output.name:
            errors.append(f"rule {i}: consequent names {out_var!r}, output is {fis.output.name!r}")
        elif out_term not in fis.output.term_names:
            errors.append(f"rule {i}: output {out_var!r} has no term {out_term!r}")


def coverage_holes(
    fis: FisDefinition, points_per_axis: int = COVERAGE_POINTS_PER_AXIS
) -> list[dict[str, float]]:
    """Grid points of the input cube where no rule fires above the threshold."""
    axes = [np.linspace(v.lo, v.hi, points_per_axis) for v in fis.inputs]
    mesh = np.meshgrid(*axes, indexing="ij")
    degrees = {
        v.name: {t: mf.sample(mesh[k]) for t, mf in v.terms} for k, v in enumerate(fis.inputs)
    }
    best = np.zeros(mesh[0].shape)
    for rule in fis.rules:
        strength = np.zeros(mesh[0].shape)
        for clause in rule.clauses:
            conj = np.ones(mesh[0].shape)
            for var, term in clause:
                conj = np.minimum(conj, degrees[var][term])
            strength = np.maximum(strength, conj)
        best = np.maximum(best, strength)
    holes = np.argwhere(best <= COVERAGE_MIN_STRENGTH)
    return [
        {v.name: float(axes[k][idx[k]]) for k, v in enumerate(fis.inputs)} for idx in holes
    ]


def _implies(weaker: Rule, stronger: Rule) -> bool:
    # under min/max, a clause with a subset of conditions is never weaker
    return weaker.consequent == stronger.consequent and all(
        any(set(sc) <= set(wc) for sc in stronger.clauses) for wc in weaker.clauses
    )


def subsumed_rules(fis: FisDefinition) -> list[tuple[int, int]]:
    """Pairs ``(i, j)`` where rule ``i`` adds nothing to the output given rule ``j``."""
    pairs = []
    for i, rule in enumerate(fis.rules, start=1):
        for j, other in enumerate(fis.rules, start=1):
            if i != j and _implies(rule, other) and not (_implies(other, rule) and j > i):
                pairs.append((i, j))
                break
    return pairs


def validate_fis(fis: FisDefinition) -> ValidationReport:
    report = ValidationReport(rule_count=len(fis.rules))
    if fis.defuzz_grid_points < 2:
        report.errors.append("defuzz_grid_points must be at least 2")
    for var in (*fis.inputs, fis.output):
        _check_variable(var, report.errors)
    names = [v.name for v in fis.inputs]
    if len(set(names)) != len(names):
        report.errors.append("input variable names are not unique")
    _check_rules(fis, report.errors)
    if report.errors:
        return report
    report.subsumed = subsumed_rules(fis)
    report.uncovered = coverage_holes(fis)
    if report.uncovered:
        first = report.uncovered[0]
        report.errors.append(
            f"{len(report.uncovered)} grid point(s) fire no rule, e.g. {first}"
        )
    return report
