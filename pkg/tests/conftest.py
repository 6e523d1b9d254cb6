import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

from xrforge import Configuration, FeatureModel, State, builtin_webxr_model

GOLDEN_DIR = pathlib.Path(__file__).resolve().parent / "golden"

# Quest-class headset app: wearable+mobile platforms, all three senses,
# virtual reality, two devices, chrome, no interaction events.
FIG8_SELECTED = frozenset({
    "web-xr-app", "platform", "wearable", "mobile",
    "multimodal-interfaces", "vision", "audition", "tactile",
    "xr-modality", "virtual-reality",
    "devices", "meta-quest", "pcvr",
    "browser", "chrome",
    "avatar", "virtual-world",
})

DESKTOP_ONLY_SELECTED = frozenset({
    "web-xr-app", "platform", "desktop",
    "multimodal-interfaces", "vision",
    "xr-modality", "virtual-reality",
    "devices", "pcvr",
    "browser", "chrome",
    "avatar", "virtual-world",
})


def complete_config(model: FeatureModel, selected: frozenset[str]) -> Configuration:
    """A fully decided configuration: listed ids selected, the rest deselected."""
    states = {
        fid: State.SELECTED if fid in selected else State.DESELECTED
        for fid in model.order()
    }
    return Configuration(model, states)


@pytest.fixture(scope="session")
def model() -> FeatureModel:
    return builtin_webxr_model()


@pytest.fixture(scope="session")
def fig8_config(model) -> Configuration:
    return complete_config(model, FIG8_SELECTED)


@pytest.fixture(scope="session")
def desktop_config(model) -> Configuration:
    return complete_config(model, DESKTOP_ONLY_SELECTED)
