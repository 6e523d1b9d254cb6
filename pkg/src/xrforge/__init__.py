"""Software-product-line engine for Web XR applications.

Feature models, ternary configurations with validation and propagation,
exhaustive product enumeration, and deterministic HTML skeleton generation,
exposed through a CLI and an HTTP service.
"""

from .configurator import (
    Configuration,
    Diagnostic,
    EnumerationResult,
    ForcedDecision,
    PropagationResult,
    Rule,
    State,
    ValidationMode,
    config_digest,
    config_from_object,
    config_to_object,
    count_products,
    enumerate_completions,
    iter_completions,
    parse_config,
    propagate,
    serialize_config,
    validate,
)
from .errors import (
    DocumentSyntaxError,
    InvalidConfiguration,
    ModelMismatch,
    ModelTooLarge,
    StructureError,
    UnknownModel,
    XRForgeError,
)
from .generator import (
    GeneratedArtifact,
    GenerationOptions,
    ManifestEntry,
    explain,
    generate,
    manifest_to_object,
)
from .model import (
    Dependency,
    DependencyKind,
    Feature,
    FeatureKind,
    FeatureModel,
    GroupCardinality,
    Optionality,
    RequiresAny,
    build_model,
    model_from_object,
    model_to_object,
    parse_model,
    serialize_model,
)
from .scenegraph import ComponentInstance, Entity, Scene, attach, entity_at, render
from .webxr import builtin_webxr_model

__version__ = "0.1.0"

__all__ = [
    "Configuration",
    "ComponentInstance",
    "Dependency",
    "DependencyKind",
    "Diagnostic",
    "DocumentSyntaxError",
    "Entity",
    "EnumerationResult",
    "Feature",
    "FeatureKind",
    "FeatureModel",
    "ForcedDecision",
    "GeneratedArtifact",
    "GenerationOptions",
    "GroupCardinality",
    "InvalidConfiguration",
    "ManifestEntry",
    "ModelMismatch",
    "ModelTooLarge",
    "Optionality",
    "PropagationResult",
    "RequiresAny",
    "Rule",
    "Scene",
    "State",
    "StructureError",
    "UnknownModel",
    "ValidationMode",
    "XRForgeError",
    "attach",
    "build_model",
    "builtin_webxr_model",
    "config_digest",
    "config_from_object",
    "config_to_object",
    "count_products",
    "entity_at",
    "enumerate_completions",
    "explain",
    "generate",
    "iter_completions",
    "manifest_to_object",
    "model_from_object",
    "model_to_object",
    "parse_config",
    "parse_model",
    "propagate",
    "render",
    "serialize_config",
    "serialize_model",
    "validate",
]
