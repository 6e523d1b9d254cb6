"""Feature-model structure, well-formedness checks, and the model-document format.

A feature model is a tree of features annotated with a variability kind
(variation point / variant / invariable) and an optionality (mandatory /
optional), plus cross-tree dependencies (requires / excludes) and
requires-any constraints. Models are immutable after construction and
validate all structural invariants in ``__post_init__``.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import DocumentSyntaxError, StructureError

_ID_RE = re.compile(r"[a-z0-9-]+")

PROCESSING_VALUES = ("direct", "indirect")


class Optionality(str, Enum):
    MANDATORY = "mandatory"
    OPTIONAL = "optional"


class FeatureKind(str, Enum):
    VARIATION_POINT = "variation-point"
    VARIANT = "variant"
    INVARIABLE = "invariable"


class DependencyKind(str, Enum):
    REQUIRES = "requires"
    EXCLUDES = "excludes"


def is_valid_feature_id(value: str) -> bool:
    """True when ``value`` matches the feature-id token grammar."""
    return isinstance(value, str) and bool(_ID_RE.fullmatch(value))


@dataclass(frozen=True)
class GroupCardinality:
    """Selection bounds for a variation point's variant children."""

    min: int
    max: int

    def __post_init__(self):
        if not (isinstance(self.min, int) and isinstance(self.max, int)):
            raise StructureError("group cardinality bounds must be integers")
        if self.min < 1 or self.max < self.min:
            raise StructureError(
                f"bad group cardinality [{self.min}, {self.max}]: need 1 <= min <= max"
            )

    @property
    def is_alternative(self) -> bool:
        return self.min == 1 and self.max == 1


@dataclass(frozen=True)
class Feature:
    id: str
    name: str
    optionality: Optionality
    kind: FeatureKind
    group: GroupCardinality | None = None
    parent: str | None = None
    processing: str | None = None
    description: str = ""

    def __post_init__(self):
        if not is_valid_feature_id(self.id):
            raise StructureError(f"invalid feature id {self.id!r}", feature_id=str(self.id))
        if self.kind is FeatureKind.VARIATION_POINT:
            if self.group is None:
                raise StructureError(
                    f"variation point '{self.id}' has no group cardinality", feature_id=self.id
                )
        elif self.group is not None:
            raise StructureError(
                f"feature '{self.id}' is not a variation point but carries a group",
                feature_id=self.id,
            )
        if self.processing is not None and self.processing not in PROCESSING_VALUES:
            raise StructureError(
                f"feature '{self.id}' has unknown processing tag {self.processing!r}",
                feature_id=self.id,
            )


@dataclass(frozen=True)
class Dependency:
    source: str
    kind: DependencyKind
    target: str


@dataclass(frozen=True)
class RequiresAny:
    """Selecting ``source`` demands at least one of ``targets`` selected."""

    source: str
    targets: tuple[str, ...]


@dataclass(frozen=True)
class FeatureModel:
    """Immutable feature tree plus cross-tree dependencies.

    ``features`` preserves declaration order; that order drives every
    deterministic output (serialization, enumeration, diagnostics).
    """

    root: str
    features: dict[str, Feature]
    dependencies: tuple[Dependency, ...] = ()
    constraints: tuple[RequiresAny, ...] = ()
    _children: dict[str, tuple[str, ...]] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )

    def __post_init__(self):
        object.__setattr__(self, "_children", _validate_tree(self))

    # -- lookups ---------------------------------------------------------

    def feature(self, feature_id: str) -> Feature:
        return self.features[feature_id]

    def __contains__(self, feature_id: str) -> bool:
        return feature_id in self.features

    def order(self) -> tuple[str, ...]:
        """Feature ids in declaration order."""
        return tuple(self.features)

    def children(self, feature_id: str) -> tuple[str, ...]:
        return self._children.get(feature_id, ())

    def variants_of(self, feature_id: str) -> tuple[str, ...]:
        return tuple(
            c for c in self.children(feature_id)
            if self.features[c].kind is FeatureKind.VARIANT
        )

    def digest(self) -> str:
        """Stable identifier of the model content (hex, 16 chars)."""
        cached = self.__dict__.get("_digest_cache")
        if cached is None:
            cached = hashlib.sha256(serialize_model(self).encode("utf-8")).hexdigest()[:16]
            object.__setattr__(self, "_digest_cache", cached)
        return cached


def _validate_tree(model: FeatureModel) -> dict[str, tuple[str, ...]]:
    features = model.features
    if model.root not in features:
        raise StructureError(f"root '{model.root}' is not a declared feature", feature_id=model.root)

    children: dict[str, list[str]] = {}
    for f in features.values():
        if f.parent is None:
            if f.id != model.root:
                raise StructureError(
                    f"feature '{f.id}' has no parent but is not the root", feature_id=f.id
                )
            continue
        if f.parent not in features:
            raise StructureError(
                f"feature '{f.id}' has dangling parent '{f.parent}'", feature_id=f.id
            )
        children.setdefault(f.parent, []).append(f.id)

    root = features[model.root]
    if root.parent is not None:
        raise StructureError(f"root '{root.id}' must not have a parent", feature_id=root.id)
    if root.kind is FeatureKind.VARIANT:
        raise StructureError("the root cannot be a variant", feature_id=root.id)
    if root.optionality is not Optionality.MANDATORY:
        raise StructureError("the root must be mandatory", feature_id=root.id)

    # Reachability from the root doubles as the cycle check: every feature
    # must walk up to the root without revisiting a node.
    for f in features.values():
        seen = {f.id}
        cur = f.parent
        while cur is not None:
            if cur in seen:
                raise StructureError(f"parent cycle through '{f.id}'", feature_id=f.id)
            seen.add(cur)
            cur = features[cur].parent
        if f.id != model.root and model.root not in seen:
            raise StructureError(f"feature '{f.id}' is not reachable from the root", feature_id=f.id)

    for f in features.values():
        kids = children.get(f.id, [])
        variant_kids = [c for c in kids if features[c].kind is FeatureKind.VARIANT]
        if f.kind is FeatureKind.VARIANT:
            parent = features[f.parent] if f.parent else None
            if parent is None or parent.kind is not FeatureKind.VARIATION_POINT:
                raise StructureError(
                    f"variant '{f.id}' must have a variation-point parent", feature_id=f.id
                )
        if f.kind is FeatureKind.VARIATION_POINT:
            if not variant_kids:
                raise StructureError(
                    f"variation point '{f.id}' has no variant children", feature_id=f.id
                )
            if f.group.max > len(variant_kids):
                raise StructureError(
                    f"variation point '{f.id}' allows up to {f.group.max} selections "
                    f"but has only {len(variant_kids)} variants",
                    feature_id=f.id,
                )

    for dep in model.dependencies:
        for end in (dep.source, dep.target):
            if end not in features:
                raise StructureError(f"dependency endpoint '{end}' does not resolve", feature_id=end)
        if dep.source == dep.target:
            raise StructureError(
                f"dependency of '{dep.source}' on itself", feature_id=dep.source
            )
    for con in model.constraints:
        if con.source not in features:
            raise StructureError(
                f"constraint source '{con.source}' does not resolve", feature_id=con.source
            )
        if not con.targets:
            raise StructureError(
                f"requires-any constraint on '{con.source}' has no targets", feature_id=con.source
            )
        for t in con.targets:
            if t not in features:
                raise StructureError(f"constraint target '{t}' does not resolve", feature_id=t)
            if t == con.source:
                raise StructureError(
                    f"requires-any constraint on '{con.source}' targets itself",
                    feature_id=con.source,
                )

    return {pid: tuple(kids) for pid, kids in children.items()}


def build_model(
    features: list[Feature],
    dependencies: list[Dependency] | tuple[Dependency, ...] = (),
    constraints: list[RequiresAny] | tuple[RequiresAny, ...] = (),
) -> FeatureModel:
    """Assemble a model from a declaration-ordered feature list."""
    table: dict[str, Feature] = {}
    roots = []
    for f in features:
        if f.id in table:
            raise StructureError(f"duplicate feature id '{f.id}'", feature_id=f.id)
        table[f.id] = f
        if f.parent is None:
            roots.append(f.id)
    if not roots:
        raise StructureError("no root feature (every feature has a parent)")
    if len(roots) > 1:
        raise StructureError(f"multiple roots: {', '.join(roots)}", feature_id=roots[1])
    return FeatureModel(
        root=roots[0],
        features=table,
        dependencies=tuple(dependencies),
        constraints=tuple(constraints),
    )


# -- model-document format -------------------------------------------------

def parse_model(document: str) -> FeatureModel:
    """Parse a model document into a validated :class:`FeatureModel`."""
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise DocumentSyntaxError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return model_from_object(obj)


def model_from_object(obj) -> FeatureModel:
    if not isinstance(obj, dict):
        raise StructureError("model document must be an object")
    allowed = {"root", "features", "dependencies", "constraints"}
    for key in obj:
        if key not in allowed:
            raise StructureError(f"unknown top-level key {key!r}")
    if "root" not in obj or "features" not in obj:
        raise StructureError("model document needs 'root' and 'features'")
    raw_features = obj["features"]
    if not isinstance(raw_features, list):
        raise StructureError("'features' must be an array")

    features = []
    for entry in raw_features:
        features.append(_feature_from_object(entry))

    dependencies = []
    for entry in obj.get("dependencies", []):
        if not isinstance(entry, dict):
            raise StructureError("dependency records must be objects")
        try:
            kind = DependencyKind(entry.get("kind"))
        except ValueError:
            raise StructureError(
                f"unknown dependency kind {entry.get('kind')!r}",
                feature_id=entry.get("source"),
            ) from None
        dependencies.append(
            Dependency(source=_req_str(entry, "source"), kind=kind, target=_req_str(entry, "target"))
        )

    constraints = []
    for entry in obj.get("constraints", []):
        if not isinstance(entry, dict):
            raise StructureError("constraint records must be objects")
        if entry.get("kind") != "requires-any":
            raise StructureError(
                f"unknown constraint kind {entry.get('kind')!r}", feature_id=entry.get("source")
            )
        targets = entry.get("targets")
        if not isinstance(targets, list) or not all(isinstance(t, str) for t in targets):
            raise StructureError(
                "requires-any 'targets' must be an array of feature ids",
                feature_id=entry.get("source"),
            )
        constraints.append(RequiresAny(source=_req_str(entry, "source"), targets=tuple(targets)))

    model = build_model(features, dependencies, constraints)
    if model.root != obj["root"]:
        raise StructureError(
            f"declared root '{obj['root']}' does not match the parentless feature '{model.root}'",
            feature_id=str(obj["root"]),
        )
    return model


def _req_str(entry: dict, key: str) -> str:
    value = entry.get(key)
    if not isinstance(value, str):
        raise StructureError(f"missing or non-string {key!r} field", feature_id=entry.get("id"))
    return value


def _feature_from_object(entry) -> Feature:
    if not isinstance(entry, dict):
        raise StructureError("feature records must be objects")
    fid = _req_str(entry, "id")
    try:
        optionality = Optionality(entry.get("optionality"))
    except ValueError:
        raise StructureError(
            f"unknown optionality {entry.get('optionality')!r}", feature_id=fid
        ) from None
    try:
        kind = FeatureKind(entry.get("kind"))
    except ValueError:
        raise StructureError(f"unknown kind {entry.get('kind')!r}", feature_id=fid) from None

    group = None
    if "group" in entry and entry["group"] is not None:
        g = entry["group"]
        if not isinstance(g, dict) or "min" not in g or "max" not in g:
            raise StructureError(f"bad group record on '{fid}'", feature_id=fid)
        try:
            group = GroupCardinality(min=g["min"], max=g["max"])
        except StructureError as exc:
            raise StructureError(f"{exc} (feature '{fid}')", feature_id=fid) from None

    parent = entry.get("parent")
    if parent is not None and not isinstance(parent, str):
        raise StructureError(f"bad parent on '{fid}'", feature_id=fid)
    description = entry.get("description", "")
    if not isinstance(description, str):
        raise StructureError(f"bad description on '{fid}'", feature_id=fid)
    name = entry.get("name", fid)
    if not isinstance(name, str):
        raise StructureError(f"bad name on '{fid}'", feature_id=fid)

    return Feature(
        id=fid,
        name=name,
        optionality=optionality,
        kind=kind,
        group=group,
        parent=parent,
        processing=entry.get("processing"),
        description=description,
    )


def serialize_model(model: FeatureModel) -> str:
    """Canonical model-document text; round-trips through :func:`parse_model`."""
    return json.dumps(model_to_object(model), indent=2) + "\n"


def model_to_object(model: FeatureModel) -> dict:
    features = []
    for f in model.features.values():
        entry: dict = {
            "id": f.id,
            "name": f.name,
            "optionality": f.optionality.value,
            "kind": f.kind.value,
        }
        if f.group is not None:
            entry["group"] = {"min": f.group.min, "max": f.group.max}
        entry["parent"] = f.parent
        if f.processing is not None:
            entry["processing"] = f.processing
        entry["description"] = f.description
        features.append(entry)
    obj: dict = {"root": model.root, "features": features}
    obj["dependencies"] = [
        {"source": d.source, "kind": d.kind.value, "target": d.target}
        for d in model.dependencies
    ]
    obj["constraints"] = [
        {"kind": "requires-any", "source": c.source, "targets": list(c.targets)}
        for c in model.constraints
    ]
    return obj
