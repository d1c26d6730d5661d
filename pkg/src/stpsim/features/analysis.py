"""Configuration validation, exhaustive enumeration, and product derivation.

Users list the features they intend; `normalize` closes that intent upward
(ancestors) and downward (mandatory children of selected and-parents) before
the group and constraint checks run. Normalization only ever adds features,
so a selection conflict surfaces as a validation failure instead of being
silently repaired away.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .model import (
    Configuration,
    FeatureModel,
    GroupKind,
    InvalidConfiguration,
    ModelTooLarge,
    Optionality,
    ProductSpec,
    UnknownFeatureName,
)


@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violations: tuple[Violation, ...]
    normalized: frozenset[str]

    def describe(self) -> str:
        if self.valid:
            return "valid"
        return "\n".join(str(v) for v in self.violations)


def normalize(model: FeatureModel, selected: frozenset[str]) -> frozenset[str]:
    """Monotone closure: add all ancestors, then mandatory children of
    selected and-parents, to a fixed point. Never removes a selection."""
    closed = set(selected)
    changed = True
    while changed:
        changed = False
        for name in list(closed):
            parent = model.parent_of(name)
            if parent is not None and parent not in closed:
                closed.add(parent)
                changed = True
            feature = model.feature(name)
            if feature.group is GroupKind.AND:
                for child in feature.children:
                    if child.optionality is Optionality.MANDATORY and child.name not in closed:
                        closed.add(child.name)
                        changed = True
    return frozenset(closed)


def _group_violations(model: FeatureModel, selected: frozenset[str]) -> list[Violation]:
    violations: list[Violation] = []
    root = model.root.name
    if root not in selected:
        violations.append(Violation("RootNotSelected", root, f"root feature {root} is not selected"))
    for name in sorted(selected):
        parent = model.parent_of(name)
        if parent is not None and parent not in selected:
            violations.append(Violation(
                "ParentNotSelected", name,
                f"{name} is selected but its parent {parent} is not",
            ))
    for name in model.feature_names():
        if name not in selected:
            continue
        feature = model.feature(name)
        chosen = [child.name for child in feature.children if child.name in selected]
        if feature.group is GroupKind.AND:
            for child in feature.children:
                if child.optionality is Optionality.MANDATORY and child.name not in selected:
                    violations.append(Violation(
                        "MandatoryChildMissing", child.name,
                        f"mandatory feature {child.name} of {name} is not selected",
                    ))
        elif feature.group is GroupKind.ALTERNATIVE and len(chosen) != 1:
            violations.append(Violation(
                "AlternativeCardinality", name,
                f"alternative group {name} selects {len(chosen)} children "
                f"({', '.join(chosen) or 'none'}), needs exactly 1",
            ))
        elif feature.group is GroupKind.OR and not chosen:
            violations.append(Violation(
                "OrCardinality", name,
                f"or group {name} selects no children, needs at least 1",
            ))
    return violations


def validate_configuration(model: FeatureModel, cfg: Configuration) -> ValidationReport:
    unknown = sorted(name for name in cfg.selected if name not in model)
    if unknown:
        raise UnknownFeatureName(", ".join(unknown))

    normalized = normalize(model, cfg.selected)
    violations = _group_violations(model, normalized)
    for constraint in model.constraints:
        if not constraint.holds(normalized):
            violations.append(Violation(
                "ConstraintViolated", constraint.describe(),
                f"cross-tree constraint violated: {constraint.describe()}",
            ))
    return ValidationReport(not violations, tuple(violations), normalized)


def enumerate_valid_configurations(model: FeatureModel, max_features: int = 20) -> list[Configuration]:
    """Every valid configuration in normal form, by exhaustive subset search.

    Selections that normalize to a different set are skipped: each valid
    configuration appears exactly once, as its own closure. Output is sorted
    lexicographically by selected-name list.
    """
    names = model.feature_names()
    if len(names) > max_features:
        raise ModelTooLarge(f"model has {len(names)} features, cap is {max_features}")

    found: list[Configuration] = []
    for size in range(len(names) + 1):
        for combo in itertools.combinations(names, size):
            subset = frozenset(combo)
            if normalize(model, subset) != subset:
                continue
            if validate_configuration(model, Configuration(subset)).valid:
                found.append(Configuration(subset))
    found.sort(key=lambda cfg: tuple(sorted(cfg.selected)))
    return found


def derive_product(model: FeatureModel, cfg: Configuration, name: str) -> ProductSpec:
    """Project a valid configuration onto its variation-point bindings."""
    report = validate_configuration(model, cfg)
    if not report.valid:
        raise InvalidConfiguration(report)

    selected = report.normalized
    bindings: dict[str, tuple[str, ...]] = {}
    for point in model.variation_points():
        if point.name not in selected:
            continue
        chosen = tuple(
            descendant
            for descendant in model.concrete_descendants(point.name)
            if descendant in selected
        )
        bindings[point.name] = chosen
    return ProductSpec(name, Configuration(selected), bindings)
