"""Ternary configurations: validation, propagation, enumeration, counting.

A configuration assigns each feature one of three states (selected,
deselected, undecided); features never mentioned are undecided. Validation
checks the variability rules in two modes: partial (may the configuration
still be completed?) and complete (is it a product?). Propagation applies
unit rules to a fixpoint and reports a conflict exactly when no valid
completion exists. Enumeration walks every completion through the bitmask
kernels and is the ground-truth oracle the test suite leans on.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping

import numpy as np

from . import kernels
from .errors import (
    DocumentSyntaxError,
    ModelMismatch,
    ModelTooLarge,
    StructureError,
)
from .model import DependencyKind, FeatureKind, FeatureModel, Optionality

MAX_MODEL_FEATURES = 64
MAX_UNDECIDED_FREE = 28


class State(str, Enum):
    SELECTED = "selected"
    DESELECTED = "deselected"
    UNDECIDED = "undecided"


class ValidationMode(str, Enum):
    PARTIAL = "partial"
    COMPLETE = "complete"


class Rule(str, Enum):
    """Names of the variability rules diagnostics and forcings refer to."""

    MANDATORY_CHILD_MISSING = "MandatoryChildMissing"
    GROUP_CARDINALITY_VIOLATED = "GroupCardinalityViolated"
    REQUIRES_VIOLATED = "RequiresViolated"
    EXCLUDES_VIOLATED = "ExcludesViolated"
    REQUIRES_ANY_VIOLATED = "RequiresAnyViolated"
    VARIANT_WITHOUT_PARENT = "VariantWithoutParent"
    ROOT_DESELECTED = "RootDeselected"


@dataclass(frozen=True)
class Diagnostic:
    """One violated rule, the features involved, and a readable explanation."""

    rule: Rule
    features: tuple[str, ...]
    message: str

    def to_object(self) -> dict:
        return {
            "rule": self.rule.value,
            "features": list(self.features),
            "message": self.message,
        }


@dataclass(frozen=True)
class ForcedDecision:
    """A decision propagation derived, tagged with the rule that forced it."""

    feature: str
    state: State
    rule: Rule

    def to_object(self) -> dict:
        return {"feature": self.feature, "state": self.state.value, "rule": self.rule.value}


class Configuration:
    """Ternary assignment over one model's features.

    Immutable from the outside: ``decide`` returns a new configuration.
    Completions produced by enumeration are backed by a bit mask and
    materialize their state map lazily.
    """

    __slots__ = ("model", "_states", "_mask", "_compiled")

    def __init__(self, model: FeatureModel, decisions: Mapping[str, State | str] | None = None):
        self.model = model
        self._mask = None
        self._compiled = None
        states: dict[str, State] = {}
        if decisions:
            for fid, raw in decisions.items():
                if fid not in model:
                    raise StructureError(
                        f"decision on undeclared feature '{fid}'", feature_id=fid
                    )
                state = State(raw)
                if state is not State.UNDECIDED:
                    states[fid] = state
        self._states = states

    @classmethod
    def _from_mask(cls, compiled: kernels.CompiledModel, mask: int) -> Configuration:
        config = object.__new__(cls)
        config.model = compiled.model
        config._mask = mask
        config._compiled = compiled
        config._states = None
        return config

    def _materialize(self) -> dict[str, State]:
        if self._states is None:
            bit_of = self._compiled.bit_of
            self._states = {
                fid: State.SELECTED if (self._mask >> bit_of[fid]) & 1 else State.DESELECTED
                for fid in self._compiled.order
            }
        return self._states

    def state(self, feature_id: str) -> State:
        if feature_id not in self.model:
            raise StructureError(
                f"unknown feature '{feature_id}'", feature_id=feature_id
            )
        if self._states is None:
            bit = self._compiled.bit_of[feature_id]
            return State.SELECTED if (self._mask >> bit) & 1 else State.DESELECTED
        return self._states.get(feature_id, State.UNDECIDED)

    def decisions(self) -> dict[str, State]:
        """Decided features in declaration order."""
        states = self._materialize()
        return {fid: states[fid] for fid in self.model.order() if fid in states}

    def decide(self, feature_id: str, state: State | str) -> Configuration:
        merged = dict(self._materialize())
        state = State(state)
        if state is State.UNDECIDED:
            merged.pop(feature_id, None)
            if feature_id not in self.model:
                raise StructureError(
                    f"decision on undeclared feature '{feature_id}'", feature_id=feature_id
                )
        else:
            merged[feature_id] = state
        return Configuration(self.model, merged)

    @property
    def is_complete(self) -> bool:
        if self._states is None:
            return True
        return len(self._states) == len(self.model.features)

    def selected(self) -> tuple[str, ...]:
        """Selected feature ids in declaration order."""
        if self._states is None:
            return self._compiled.selected_ids(self._mask)
        return tuple(
            fid for fid in self.model.order() if self._states.get(fid) is State.SELECTED
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return (
            self.model.digest() == other.model.digest()
            and self._materialize() == other._materialize()
        )

    def __repr__(self) -> str:
        ndecided = len(self.model.features) if self._states is None else len(self._states)
        return f"Configuration({ndecided} of {len(self.model.features)} features decided)"


def _require_binding(model: FeatureModel, config: Configuration) -> None:
    if config.model is model:
        return
    if config.model.digest() != model.digest():
        raise ModelMismatch(
            "configuration was built against a different model "
            f"({config.model.digest()} != {model.digest()})"
        )


# -- validation --------------------------------------------------------------

def validate(
    model: FeatureModel,
    config: Configuration,
    mode: ValidationMode = ValidationMode.COMPLETE,
) -> tuple[Diagnostic, ...]:
    """Check the variability rules; an empty result means no violation.

    Partial mode flags only violations no completion could repair; complete
    mode demands every rule hold outright.
    """
    _require_binding(model, config)
    mode = ValidationMode(mode)

    if (
        mode is ValidationMode.COMPLETE
        and config._mask is not None
        and config._compiled.model is model
        and config._compiled.full_checks.check_one(config._mask)
    ):
        return ()

    complete = mode is ValidationMode.COMPLETE
    st = {fid: config.state(fid) for fid in model.order()}
    diags: list[Diagnostic] = []

    root_state = st[model.root]
    if (complete and root_state is not State.SELECTED) or root_state is State.DESELECTED:
        diags.append(Diagnostic(
            Rule.ROOT_DESELECTED,
            (model.root,),
            f"the root feature '{model.root}' must be selected",
        ))

    for fid in model.order():
        if st[fid] is not State.SELECTED:
            continue
        for child in model.children(fid):
            if model.feature(child).optionality is not Optionality.MANDATORY:
                continue
            child_state = st[child]
            bad = child_state is not State.SELECTED if complete else child_state is State.DESELECTED
            if bad:
                diags.append(Diagnostic(
                    Rule.MANDATORY_CHILD_MISSING,
                    (child, fid),
                    f"'{child}' is a mandatory child of selected '{fid}' "
                    f"but is {child_state.value}",
                ))

    for fid in model.order():
        if st[fid] is not State.SELECTED or fid == model.root:
            continue
        ancestor = model.feature(fid).parent
        while ancestor is not None:
            anc_state = st[ancestor]
            bad = anc_state is not State.SELECTED if complete else anc_state is State.DESELECTED
            if bad:
                diags.append(Diagnostic(
                    Rule.VARIANT_WITHOUT_PARENT,
                    (fid, ancestor),
                    f"'{fid}' is selected but its ancestor '{ancestor}' is {anc_state.value}",
                ))
                break
            if anc_state is not State.SELECTED:
                ancestor = model.feature(ancestor).parent
            else:
                break

    for fid in model.order():
        feature = model.feature(fid)
        if feature.kind is not FeatureKind.VARIATION_POINT or st[fid] is not State.SELECTED:
            continue
        variants = model.variants_of(fid)
        n_sel = sum(1 for v in variants if st[v] is State.SELECTED)
        n_desel = sum(1 for v in variants if st[v] is State.DESELECTED)
        lo, hi = feature.group.min, feature.group.max
        if n_sel > hi:
            diags.append(Diagnostic(
                Rule.GROUP_CARDINALITY_VIOLATED,
                (fid,),
                f"group '{fid}' allows at most {hi} selected variants; {n_sel} are selected",
            ))
        elif complete and n_sel < lo:
            diags.append(Diagnostic(
                Rule.GROUP_CARDINALITY_VIOLATED,
                (fid,),
                f"group '{fid}' needs at least {lo} selected variants; {n_sel} are selected",
            ))
        elif not complete and len(variants) - n_desel < lo:
            diags.append(Diagnostic(
                Rule.GROUP_CARDINALITY_VIOLATED,
                (fid,),
                f"group '{fid}' needs at least {lo} selected variants but only "
                f"{len(variants) - n_desel} remain selectable",
            ))

    for dep in model.dependencies:
        src_state, tgt_state = st[dep.source], st[dep.target]
        if dep.kind is DependencyKind.REQUIRES:
            if src_state is not State.SELECTED:
                continue
            bad = tgt_state is not State.SELECTED if complete else tgt_state is State.DESELECTED
            if bad:
                diags.append(Diagnostic(
                    Rule.REQUIRES_VIOLATED,
                    (dep.source, dep.target),
                    f"'{dep.source}' requires '{dep.target}', which is {tgt_state.value}",
                ))
        else:
            if src_state is State.SELECTED and tgt_state is State.SELECTED:
                diags.append(Diagnostic(
                    Rule.EXCLUDES_VIOLATED,
                    (dep.source, dep.target),
                    f"'{dep.source}' excludes '{dep.target}'; both are selected",
                ))

    for con in model.constraints:
        if st[con.source] is not State.SELECTED:
            continue
        if complete:
            satisfied = any(st[t] is State.SELECTED for t in con.targets)
        else:
            satisfied = any(st[t] is not State.DESELECTED for t in con.targets)
        if not satisfied:
            diags.append(Diagnostic(
                Rule.REQUIRES_ANY_VIOLATED,
                (con.source, *con.targets),
                f"'{con.source}' requires at least one of: {', '.join(con.targets)}",
            ))

    return tuple(diags)


# -- propagation -------------------------------------------------------------

@dataclass(frozen=True)
class PropagationResult:
    configuration: Configuration
    forced: tuple[ForcedDecision, ...]
    conflict: Diagnostic | None


def propagate(model: FeatureModel, config: Configuration) -> PropagationResult:
    """Apply unit rules to a fixpoint.

    Rule order is fixed (tree, then groups, then dependencies, repeated), so
    the forced list is deterministic. Every forced decision holds in every
    valid completion of the input; ``conflict`` is set exactly when the input
    admits no valid completion.
    """
    _require_binding(model, config)
    states: dict[str, State] = dict(config.decisions())
    forced: list[ForcedDecision] = []
    conflict: Diagnostic | None = None

    def force(fid: str, state: State, rule: Rule, involved: tuple[str, ...], why: str) -> bool:
        nonlocal conflict
        current = states.get(fid)
        if current is state:
            return False
        if current is not None:
            conflict = Diagnostic(rule, involved, why)
            return False
        states[fid] = state
        forced.append(ForcedDecision(fid, state, rule))
        return True

    if states.get(model.root) is not State.SELECTED:
        force(
            model.root, State.SELECTED, Rule.ROOT_DESELECTED, (model.root,),
            f"the root feature '{model.root}' must be selected",
        )

    changed = True
    while changed and conflict is None:
        changed = False

        for fid in model.order():
            state = states.get(fid)
            if state is State.SELECTED:
                parent = model.feature(fid).parent
                if parent is not None and states.get(parent) is not State.SELECTED:
                    changed |= force(
                        parent, State.SELECTED, Rule.VARIANT_WITHOUT_PARENT, (fid, parent),
                        f"'{fid}' is selected, so '{parent}' cannot be deselected",
                    )
                for child in model.children(fid):
                    if model.feature(child).optionality is Optionality.MANDATORY:
                        changed |= force(
                            child, State.SELECTED, Rule.MANDATORY_CHILD_MISSING, (child, fid),
                            f"'{child}' is a mandatory child of selected '{fid}'",
                        )
            elif state is State.DESELECTED:
                for child in model.children(fid):
                    if states.get(child) is not State.DESELECTED:
                        changed |= force(
                            child, State.DESELECTED, Rule.VARIANT_WITHOUT_PARENT, (child, fid),
                            f"'{fid}' is deselected, so '{child}' cannot be selected",
                        )
            if conflict is not None:
                break
        if conflict is not None:
            break

        for fid in model.order():
            feature = model.feature(fid)
            if feature.kind is not FeatureKind.VARIATION_POINT:
                continue
            if states.get(fid) is not State.SELECTED:
                continue
            variants = model.variants_of(fid)
            selected = [v for v in variants if states.get(v) is State.SELECTED]
            undecided = [v for v in variants if states.get(v) is None]
            lo, hi = feature.group.min, feature.group.max
            if len(selected) > hi:
                conflict = Diagnostic(
                    Rule.GROUP_CARDINALITY_VIOLATED, (fid,),
                    f"group '{fid}' allows at most {hi} selected variants; "
                    f"{len(selected)} are selected",
                )
                break
            if len(selected) + len(undecided) < lo:
                conflict = Diagnostic(
                    Rule.GROUP_CARDINALITY_VIOLATED, (fid,),
                    f"group '{fid}' needs at least {lo} selected variants but only "
                    f"{len(selected) + len(undecided)} remain selectable",
                )
                break
            if selected and len(selected) == hi:
                for v in undecided:
                    changed |= force(
                        v, State.DESELECTED, Rule.GROUP_CARDINALITY_VIOLATED, (v, fid),
                        f"group '{fid}' already has {hi} selected variants",
                    )
            needed = lo - len(selected)
            if needed > 0 and len(undecided) == needed:
                for v in list(undecided):
                    changed |= force(
                        v, State.SELECTED, Rule.GROUP_CARDINALITY_VIOLATED, (v, fid),
                        f"group '{fid}' needs '{v}' to reach its minimum of {lo}",
                    )
        if conflict is not None:
            break

        for dep in model.dependencies:
            src, tgt = dep.source, dep.target
            if dep.kind is DependencyKind.REQUIRES:
                if states.get(src) is State.SELECTED:
                    changed |= force(
                        tgt, State.SELECTED, Rule.REQUIRES_VIOLATED, (src, tgt),
                        f"'{src}' requires '{tgt}'",
                    )
            else:
                if states.get(src) is State.SELECTED:
                    changed |= force(
                        tgt, State.DESELECTED, Rule.EXCLUDES_VIOLATED, (src, tgt),
                        f"'{src}' excludes '{tgt}'",
                    )
                if conflict is None and states.get(tgt) is State.SELECTED:
                    changed |= force(
                        src, State.DESELECTED, Rule.EXCLUDES_VIOLATED, (tgt, src),
                        f"'{tgt}' excludes '{src}'",
                    )
            if conflict is not None:
                break
        if conflict is not None:
            break

        for con in model.constraints:
            if states.get(con.source) is not State.SELECTED:
                continue
            if any(states.get(t) is State.SELECTED for t in con.targets):
                continue
            open_targets = [t for t in con.targets if states.get(t) is None]
            if not open_targets:
                conflict = Diagnostic(
                    Rule.REQUIRES_ANY_VIOLATED, (con.source, *con.targets),
                    f"'{con.source}' requires at least one of: {', '.join(con.targets)}",
                )
                break
            if len(open_targets) == 1:
                changed |= force(
                    open_targets[0], State.SELECTED, Rule.REQUIRES_ANY_VIOLATED,
                    (con.source, *con.targets),
                    f"'{open_targets[0]}' is the only remaining way to satisfy "
                    f"'{con.source}' requiring one of: {', '.join(con.targets)}",
                )
            if conflict is not None:
                break

    fixpoint = Configuration(model, states)
    if conflict is None:
        conflict = _completion_conflict(model, fixpoint)
    return PropagationResult(configuration=fixpoint, forced=tuple(forced), conflict=conflict)


def _completion_conflict(model: FeatureModel, fixpoint: Configuration) -> Diagnostic | None:
    """Detect fixpoints with zero valid completions.

    Unit rules alone cannot see every dead end, so satisfiability is settled
    by an early-exit kernel scan. When the scan comes up empty, the reported
    diagnostic is the first rule violated by the all-deselected completion of
    the fixpoint, which is concrete and reproducible. Models beyond the
    exhaustive-search guards skip the scan: unit conflicts are still found,
    deeper ones are not claimed.
    """
    if len(model.features) > MAX_MODEL_FEATURES:
        return None
    compiled = kernels.compiled_for(model)
    decided = {fid: st is State.SELECTED for fid, st in fixpoint.decisions().items()}
    plan = kernels.plan_scan(compiled, decided)
    if plan is not None and plan.k > MAX_UNDECIDED_FREE:
        return None
    if kernels.satisfiable(plan):
        return None
    pessimistic = dict(fixpoint.decisions())
    for fid in model.order():
        pessimistic.setdefault(fid, State.DESELECTED)
    diags = validate(model, Configuration(model, pessimistic), ValidationMode.COMPLETE)
    first = diags[0]
    return Diagnostic(
        first.rule,
        first.features,
        f"no valid completion exists; for example: {first.message}",
    )


# -- enumeration -------------------------------------------------------------

@dataclass(frozen=True)
class EnumerationResult:
    configurations: tuple[Configuration, ...]
    total: int
    truncated: bool


def _guard_width(model: FeatureModel) -> None:
    # must run before compiling: wider models do not fit the mask word
    n = len(model.features)
    if n > MAX_MODEL_FEATURES:
        raise ModelTooLarge(
            f"model has {n} features; exhaustive search caps at {MAX_MODEL_FEATURES}"
        )


def _plan_for(model: FeatureModel, config: Configuration | None) -> kernels.ScanPlan | None:
    if config is not None:
        _require_binding(model, config)
    _guard_width(model)
    compiled = kernels.compiled_for(model)
    decided = {}
    if config is not None:
        decided = {fid: st is State.SELECTED for fid, st in config.decisions().items()}
    plan = kernels.plan_scan(compiled, decided)
    if plan is not None and plan.k > MAX_UNDECIDED_FREE:
        raise ModelTooLarge(
            f"{plan.k} undecided free features exceed the exhaustive-search "
            f"guard of {MAX_UNDECIDED_FREE}"
        )
    return plan


def _collect_masks(model: FeatureModel, config: Configuration | None,
                   limit: int | None) -> tuple[int, np.ndarray]:
    plan = _plan_for(model, config)
    if plan is None:
        return 0, np.empty(0, dtype=np.uint64)
    if limit is None:
        total, _ = kernels.scan(plan)
        if total == 0:
            return 0, np.empty(0, dtype=np.uint64)
        _, masks = kernels.scan(plan, limit=total)
        return total, masks
    return kernels.scan(plan, limit=max(limit, 0))


def enumerate_completions(
    model: FeatureModel,
    config: Configuration | None = None,
    *,
    limit: int | None = None,
) -> EnumerationResult:
    """All valid complete configurations extending ``config``, in ascending
    lexicographic order over feature declaration (deselected sorts first).

    ``total`` always counts every completion; ``configurations`` is clipped
    to ``limit`` and ``truncated`` says whether clipping happened.
    """
    total, masks = _collect_masks(model, config, limit)
    compiled = kernels.compiled_for(model)
    configurations = tuple(
        Configuration._from_mask(compiled, int(m)) for m in masks.tolist()
    )
    return EnumerationResult(
        configurations=configurations,
        total=total,
        truncated=len(configurations) < total,
    )


def iter_completions(
    model: FeatureModel, config: Configuration | None = None
) -> Iterator[Configuration]:
    """Yield every valid completion lazily, in enumeration order."""
    _, masks = _collect_masks(model, config, None)
    compiled = kernels.compiled_for(model)
    for m in masks.tolist():
        yield Configuration._from_mask(compiled, m)


def count_products(model: FeatureModel) -> int:
    """Number of valid complete configurations of the model."""
    plan = _plan_for(model, None)
    total, _ = kernels.scan(plan)
    return total


# -- configuration documents -------------------------------------------------

BUILTIN_MODEL_REF = "builtin"


def _builtin_digest() -> str:
    from .webxr import builtin_webxr_model

    return builtin_webxr_model().digest()


def parse_config(document: str, model: FeatureModel) -> Configuration:
    """Parse a configuration document and bind it to ``model``."""
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise DocumentSyntaxError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return config_from_object(obj, model)


def config_from_object(obj, model: FeatureModel) -> Configuration:
    if not isinstance(obj, dict):
        raise StructureError("configuration document must be an object")
    for key in obj:
        if key not in ("model", "decisions"):
            raise StructureError(f"unknown top-level key {key!r}")
    if "model" not in obj:
        raise StructureError("configuration document needs a 'model' reference")
    ref = obj["model"]
    if ref != model.digest() and not (
        ref == BUILTIN_MODEL_REF and model.digest() == _builtin_digest()
    ):
        raise ModelMismatch(
            f"configuration references model {ref!r}, not the supplied model "
            f"({model.digest()})"
        )

    decisions: dict[str, State] = {}
    for entry in obj.get("decisions", []):
        if not isinstance(entry, dict):
            raise StructureError("decision records must be objects")
        fid = entry.get("feature")
        if not isinstance(fid, str):
            raise StructureError("decision records need a 'feature' id")
        raw_state = entry.get("state")
        if raw_state not in (State.SELECTED.value, State.DESELECTED.value):
            raise StructureError(
                f"decision on '{fid}' must be selected or deselected, got {raw_state!r}",
                feature_id=fid,
            )
        if fid in decisions:
            raise StructureError(f"duplicate decision on '{fid}'", feature_id=fid)
        decisions[fid] = State(raw_state)
    return Configuration(model, decisions)


def config_to_object(config: Configuration) -> dict:
    return {
        "model": config.model.digest(),
        "decisions": [
            {"feature": fid, "state": state.value}
            for fid, state in config.decisions().items()
        ],
    }


def serialize_config(config: Configuration) -> str:
    """Canonical configuration-document text (decisions in declaration order)."""
    return json.dumps(config_to_object(config), indent=2) + "\n"


def config_digest(config: Configuration) -> str:
    """Stable identifier of a configuration's decisions (hex, 16 chars)."""
    if config._states is None:
        # Mask-backed completions skip the state-map materialization; the
        # joined text is identical to the decisions() route below.
        compiled = config._compiled
        table = compiled.model.__dict__.get("_digest_parts")
        if table is None:
            table = tuple(
                (f"{fid}={State.DESELECTED.value}", f"{fid}={State.SELECTED.value}")
                for fid in compiled.order
            )
            compiled.model.__dict__["_digest_parts"] = table
        mask = config._mask
        bit_of = compiled.bit_of
        parts = [config.model.digest()]
        parts.extend(
            table[i][(mask >> bit_of[fid]) & 1]
            for i, fid in enumerate(compiled.order)
        )
    else:
        parts = [config.model.digest()]
        for fid, state in config.decisions().items():
            parts.append(f"{fid}={state.value}")
    return hashlib.sha256(";".join(parts).encode("utf-8")).hexdigest()[:16]
