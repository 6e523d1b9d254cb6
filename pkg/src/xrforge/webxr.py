"""The built-in Web XR application family model.

Root feature ``web-xr-app`` with the mandatory top-level features platform,
multimodal-interfaces, xr-modality, devices, browser, avatar and
virtual-world, plus the optional interaction-events. Cross-tree rules:
tactile feedback needs a wearable platform, a see-through headset needs
mixed reality, and mixed reality needs a camera-bearing platform.
"""

from __future__ import annotations

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
)

_MANDATORY = Optionality.MANDATORY
_OPTIONAL = Optionality.OPTIONAL
_VP = FeatureKind.VARIATION_POINT
_VARIANT = FeatureKind.VARIANT
_INVARIABLE = FeatureKind.INVARIABLE


def _feature(fid, name, optionality, kind, parent, group=None, processing=None, description=""):
    return Feature(
        id=fid,
        name=name,
        optionality=optionality,
        kind=kind,
        group=group,
        parent=parent,
        processing=processing,
        description=description,
    )


def builtin_webxr_model() -> FeatureModel:
    """Construct the fixed Web XR feature model shipped with the package."""
    f = []
    f.append(_feature(
        "web-xr-app", "Web XR App", _MANDATORY, _INVARIABLE, None,
        description="A browser-hosted XR application.",
    ))

    f.append(_feature(
        "platform", "Platform", _MANDATORY, _VP, "web-xr-app",
        group=GroupCardinality(1, 3),
        description="Device classes the application runs on.",
    ))
    f.append(_feature(
        "wearable", "Wearable", _OPTIONAL, _VARIANT, "platform",
        description="Immersive body-worn hardware such as headsets, haptic gear and motion sensors.",
    ))
    f.append(_feature(
        "desktop", "Desktop", _OPTIONAL, _VARIANT, "platform",
        description="Conventional keyboard-and-mouse computers.",
    ))
    f.append(_feature(
        "mobile", "Mobile", _OPTIONAL, _VARIANT, "platform",
        description="Phones and tablets with touch input.",
    ))

    f.append(_feature(
        "multimodal-interfaces", "Multimodal Interfaces", _MANDATORY, _VP, "web-xr-app",
        group=GroupCardinality(1, 3),
        description="Human senses the application engages.",
    ))
    f.append(_feature(
        "vision", "Vision", _OPTIONAL, _VARIANT, "multimodal-interfaces",
        processing="indirect",
        description="Visual output through displays.",
    ))
    f.append(_feature(
        "audition", "Audition", _OPTIONAL, _VARIANT, "multimodal-interfaces",
        processing="indirect",
        description="Audio output through speakers or headphones.",
    ))
    f.append(_feature(
        "tactile", "Tactile", _OPTIONAL, _VARIANT, "multimodal-interfaces",
        processing="indirect",
        description="Touch feedback through controller vibration.",
    ))

    f.append(_feature(
        "xr-modality", "XR Modality", _MANDATORY, _VP, "web-xr-app",
        group=GroupCardinality(1, 1),
        description="Whether the world is fully virtual or mixes in real surroundings.",
    ))
    f.append(_feature(
        "virtual-reality", "Virtual Reality", _OPTIONAL, _VARIANT, "xr-modality",
        description="The world consists of virtual objects only.",
    ))
    f.append(_feature(
        "mixed-reality", "Mixed Reality", _OPTIONAL, _VARIANT, "xr-modality",
        description="Virtual objects composited over the real surroundings.",
    ))

    f.append(_feature(
        "devices", "Devices", _MANDATORY, _VP, "web-xr-app",
        group=GroupCardinality(1, 7),
        description="Interaction and feedback hardware the application supports.",
    ))
    f.append(_feature("meta-quest", "Meta Quest", _OPTIONAL, _VARIANT, "devices"))
    f.append(_feature("htc-vive", "HTC Vive", _OPTIONAL, _VARIANT, "devices"))
    f.append(_feature("hololens", "HoloLens", _OPTIONAL, _VARIANT, "devices"))
    f.append(_feature("pcvr", "PCVR", _OPTIONAL, _VARIANT, "devices"))
    f.append(_feature("magic-leap", "Magic Leap", _OPTIONAL, _VARIANT, "devices"))
    f.append(_feature("oculus-go", "Oculus Go", _OPTIONAL, _VARIANT, "devices"))
    f.append(_feature("vive-focus", "Vive Focus", _OPTIONAL, _VARIANT, "devices"))

    f.append(_feature(
        "browser", "Browser", _MANDATORY, _VP, "web-xr-app",
        group=GroupCardinality(1, 4),
        description="Web browsers the application is verified against.",
    ))
    f.append(_feature("chrome", "Chrome", _OPTIONAL, _VARIANT, "browser"))
    f.append(_feature("firefox", "Firefox", _OPTIONAL, _VARIANT, "browser"))
    f.append(_feature("edge", "Edge", _OPTIONAL, _VARIANT, "browser"))
    f.append(_feature("safari", "Safari", _OPTIONAL, _VARIANT, "browser"))

    f.append(_feature(
        "avatar", "Avatar", _MANDATORY, _INVARIABLE, "web-xr-app",
        description="The user's representation in the world.",
    ))
    f.append(_feature(
        "virtual-world", "Virtual World", _MANDATORY, _INVARIABLE, "web-xr-app",
        description="The space the user is placed into.",
    ))

    f.append(_feature(
        "interaction-events", "Interaction Events", _OPTIONAL, _VP, "web-xr-app",
        group=GroupCardinality(1, 3),
        description="Input events wired to scene behavior; a purely passive viewer omits them.",
    ))
    f.append(_feature("click", "Click", _OPTIONAL, _VARIANT, "interaction-events"))
    f.append(_feature("grip", "Grip", _OPTIONAL, _VARIANT, "interaction-events"))
    f.append(_feature("hover", "Hover", _OPTIONAL, _VARIANT, "interaction-events"))

    dependencies = [
        Dependency("tactile", DependencyKind.REQUIRES, "wearable"),
        Dependency("hololens", DependencyKind.REQUIRES, "mixed-reality"),
    ]
    constraints = [
        RequiresAny("mixed-reality", ("wearable", "mobile")),
    ]
    return build_model(f, dependencies, constraints)
