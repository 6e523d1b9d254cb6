"""Template generation: a complete configuration becomes an HTML skeleton.

Each rule in the fixed table below fires when its feature condition holds,
appends entities or components to the scene, and records manifest entries
tracing every emitted element back to the features that caused it. Output
is byte-deterministic for identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .configurator import (
    Configuration,
    ValidationMode,
    config_digest,
    validate,
)
from .defaults import DEFAULT_APP_TITLE, DEFAULT_RUNTIME_URL
from .errors import InvalidConfiguration, UnknownModel
from .model import FeatureKind, FeatureModel
from .scenegraph import ComponentInstance, Entity, Scene, render

# Device variants with a dedicated controls component; anything else selected
# under the devices group falls back to the generic tracked-controls.
DEVICE_CONTROLS = {
    "magic-leap": "magicleap-controls",
    "oculus-go": "oculus-go-controls",
    "vive-focus": "vive-focus-controls",
}
FALLBACK_CONTROLS = "tracked-controls"

HAPTICS_EVENT = "gripdown"
HAPTICS_DURATION_MS = 100
HAPTICS_FORCE = 1

# Component instances are immutable value objects, so every rule that emits
# fixed property values shares one prebuilt instance across artifacts.
_BOX_COMPONENTS = (
    ComponentInstance("position", {"value": "-1 0.5 -3"}),
    ComponentInstance("rotation", {"value": "0 45 0"}),
    ComponentInstance("color", {"value": "#4CC3D9"}),
)
_SKY_COMPONENTS = (ComponentInstance("color", {"value": "#ECECEC"}),)
_RIG_ID = ComponentInstance("id", {"value": "rig"})
_CAMERA = ComponentInstance("camera")
_RIGHT_HAND = ComponentInstance("hand-controls", {"hand": "right"})
_LEFT_CONTROLS = {
    name: ComponentInstance(name, {"hand": "left"})
    for name in (*DEVICE_CONTROLS.values(), FALLBACK_CONTROLS)
}
_HAPTICS = ComponentInstance("haptics", {
    "events": HAPTICS_EVENT,
    "dur": HAPTICS_DURATION_MS,
    "force": HAPTICS_FORCE,
})
_SOUND = ComponentInstance("sound", {"src": ""})
_WEBXR_AR = ComponentInstance("webxr", {"requestedMode": "immersive-ar"})
_CLICK_EVENT_SET = ComponentInstance("event-set__click", {
    "_event": "click",
    "color": "#7BC8A4",
})

# Feature ids the rule table consults; models extending the built-in one
# must keep them.
RULE_FEATURE_IDS = (
    "virtual-world",
    "avatar",
    "desktop",
    "mobile",
    "wearable",
    "vision",
    "audition",
    "tactile",
    "mixed-reality",
    "click",
)
DEVICES_GROUP_ID = "devices"


@dataclass(frozen=True)
class GenerationOptions:
    """Knobs for a generation run; defaults produce a runnable demo skeleton."""

    app_title: str = DEFAULT_APP_TITLE
    author: str | None = None
    include_demo_objects: bool = True
    runtime_url: str = DEFAULT_RUNTIME_URL

    def __post_init__(self):
        if not isinstance(self.app_title, str) or not self.app_title:
            raise InvalidConfiguration("app_title must be a non-empty string")


@dataclass(frozen=True)
class ManifestEntry:
    """Traceability record: which feature(s) caused one emitted element.

    ``path`` is the root-relative child-index sequence of the owning entity
    ("" is the scene root); ``element`` is the entity tag or component name.
    """

    path: str
    element: str
    caused_by: tuple[str, ...]

    def to_object(self) -> dict:
        return {"path": self.path, "element": self.element, "caused_by": list(self.caused_by)}


@dataclass(frozen=True)
class GeneratedArtifact:
    scene: Scene
    document: str
    manifest: tuple[ManifestEntry, ...]
    config_digest: str


def _check_rule_ids(model: FeatureModel) -> None:
    missing = [fid for fid in RULE_FEATURE_IDS if fid not in model]
    devices_ok = (
        DEVICES_GROUP_ID in model
        and model.feature(DEVICES_GROUP_ID).kind is FeatureKind.VARIATION_POINT
    )
    if missing or not devices_ok:
        if not devices_ok:
            missing.append(DEVICES_GROUP_ID)
        raise UnknownModel(
            "model lacks feature ids the generation rules depend on: "
            + ", ".join(missing)
        )


def generate(
    model: FeatureModel,
    config: Configuration,
    options: GenerationOptions | None = None,
) -> GeneratedArtifact:
    """Apply the rule table to a complete, valid configuration."""
    options = options or GenerationOptions()
    _check_rule_ids(model)

    diagnostics = validate(model, config, ValidationMode.COMPLETE)
    if diagnostics or not config.is_complete:
        undecided = [
            fid for fid in model.order() if config.state(fid).value == "undecided"
        ]
        if undecided:
            reason = f"undecided features: {', '.join(undecided)}"
        else:
            reason = f"{len(diagnostics)} rule violation(s)"
        raise InvalidConfiguration(
            f"cannot generate from this configuration ({reason})",
            diagnostics=diagnostics,
        )

    selected = set(config.selected())
    scene = Scene()
    manifest: list[ManifestEntry] = []

    def entry(path: str, element: str, caused_by) -> None:
        manifest.append(ManifestEntry(path, element, tuple(caused_by)))

    # R1: scene root, plus demo box and sky. Mixed reality shows the real
    # surroundings, so the sky is suppressed when it is selected (R7).
    entry("", "a-scene", [model.root])
    demo = options.include_demo_objects and "virtual-world" in selected
    mixed = "mixed-reality" in selected
    box = None
    if demo:
        box = scene.root.add(Entity("a-box", _BOX_COMPONENTS))
        entry("0", "a-box", ["virtual-world"])
        if not mixed:
            scene.root.add(Entity("a-sky", _SKY_COMPONENTS))
            entry("1", "a-sky", ["virtual-world"])

    # R2: the user's presence — camera rig with a camera entity.
    rig_path = str(len(scene.root.children))
    rig = scene.root.add(Entity("a-entity", [_RIG_ID]))
    entry(rig_path, "a-entity", ["avatar"])
    camera = rig.add(Entity("a-entity", [_CAMERA]))
    camera_path = f"{rig_path}/0"
    entry(camera_path, "a-entity", ["avatar"])

    # R3: gaze cursor for flat platforms.
    flat = [fid for fid in ("desktop", "mobile") if fid in selected]
    if flat:
        camera.add(Entity("a-cursor"))
        entry(f"{camera_path}/0", "a-cursor", flat)

    # R4: hand entities for wearables. The right hand uses the
    # device-independent component; the left carries one controls component
    # per selected device, falling back to generic tracked controls.
    right = left = None
    right_path = left_path = ""
    if "wearable" in selected:
        right = rig.add(Entity("a-entity", [_RIGHT_HAND]))
        right_path = f"{rig_path}/1"
        entry(right_path, "a-entity", ["wearable"])
        entry(right_path, "hand-controls", ["wearable"])

        left = rig.add(Entity("a-entity"))
        left_path = f"{rig_path}/2"
        entry(left_path, "a-entity", ["wearable"])
        chosen = [d for d in model.variants_of(DEVICES_GROUP_ID) if d in selected]
        fallback = [d for d in chosen if d not in DEVICE_CONTROLS]
        fallback_attached = False
        for device in chosen:
            name = DEVICE_CONTROLS.get(device)
            if name is not None:
                left.attach(_LEFT_CONTROLS[name])
                entry(left_path, name, ["wearable", device])
            elif not fallback_attached:
                left.attach(_LEFT_CONTROLS[FALLBACK_CONTROLS])
                entry(left_path, FALLBACK_CONTROLS, ["wearable", *fallback])
                fallback_attached = True

    # R5: vibration feedback on both hands.
    if "tactile" in selected and right is not None:
        right.attach(_HAPTICS)
        entry(right_path, "haptics", ["tactile"])
        left.attach(_HAPTICS)
        entry(left_path, "haptics", ["tactile"])

    # R6: hearing — a sound component with a placeholder source.
    if "audition" in selected:
        target, target_path = (box, "0") if box is not None else (rig, rig_path)
        target.attach(_SOUND)
        entry(target_path, "sound", ["audition"])

    # R7: mixed reality requests a pass-through session.
    if mixed:
        scene.add_system(_WEBXR_AR)
        entry("", "webxr", ["mixed-reality"])

    # R8: click behavior on the demo box.
    if "click" in selected and box is not None:
        box.attach(_CLICK_EVENT_SET)
        entry("0", "event-set__click", ["click"])

    # R9: vision is the rendered scene itself; nothing extra to emit.

    document = render(
        scene,
        title=options.app_title,
        runtime_url=options.runtime_url,
        author=options.author,
    )
    return GeneratedArtifact(
        scene=scene,
        document=document,
        manifest=tuple(manifest),
        config_digest=config_digest(config),
    )


def explain(artifact: GeneratedArtifact, feature: str) -> tuple[ManifestEntry, ...]:
    """Manifest entries the given feature caused; empty when it caused none."""
    return tuple(e for e in artifact.manifest if feature in e.caused_by)


def manifest_to_object(manifest) -> dict:
    return {"entries": [e.to_object() for e in manifest]}
