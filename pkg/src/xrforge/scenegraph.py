"""Entity-component scene graphs and their serialization to HTML.

Entities are containers: they carry named components (ordered property
bags serialized as HTML attributes) and child entities, forming a tree.
A scene wraps the mandatory ``a-scene`` root entity plus scene-scoped
system components that serialize as root attributes. Rendering is pure
and byte-deterministic; nothing here talks to an actual XR runtime.
"""

from __future__ import annotations

import re
from html import escape

from .defaults import DEFAULT_APP_TITLE, DEFAULT_RUNTIME_URL
from .errors import StructureError

_TAG_RE = re.compile(r"[a-z][a-z0-9-]*")
_COMPONENT_RE = re.compile(r"[a-z][a-z0-9-]*(__[a-z0-9-]+)?")


class ComponentInstance:
    """A named, ordered property bag attached to an entity.

    A double-underscore suffix (``event-set__click``) distinguishes multiple
    instances of one component kind on the same entity.
    """

    __slots__ = ("name", "properties", "_attr")

    def __init__(self, name: str, properties=None):
        if not isinstance(name, str) or not _TAG_RE.fullmatch(name.split("__", 1)[0]) \
                or not _COMPONENT_RE.fullmatch(name):
            raise StructureError(f"invalid component name {name!r}")
        self.name = name
        pairs: dict[str, str] = {}
        items = properties.items() if hasattr(properties, "items") else (properties or ())
        for key, value in items:
            if not isinstance(key, str) or not key:
                raise StructureError(f"invalid property name {key!r} on component '{name}'")
            if key in pairs:
                raise StructureError(f"duplicate property '{key}' on component '{name}'")
            pairs[key] = str(value)
        self.properties = pairs
        self._attr = None

    def serialized_value(self) -> str | None:
        """Attribute value text, or ``None`` for a bare (property-free) flag."""
        if not self.properties:
            return None
        if len(self.properties) == 1 and "value" in self.properties:
            return self.properties["value"]
        return "; ".join(f"{k}: {v}" for k, v in self.properties.items())

    def __repr__(self) -> str:
        return f"ComponentInstance({self.name!r}, {self.properties!r})"


class Entity:
    """A scene-graph node: components plus child entities (Composite)."""

    __slots__ = ("tag", "components", "children", "text")

    def __init__(self, tag: str, components=(), text: str | None = None):
        if not isinstance(tag, str) or not _TAG_RE.fullmatch(tag):
            raise StructureError(f"invalid entity tag {tag!r}")
        self.tag = tag
        self.components: list[ComponentInstance] = []
        self.children: list[Entity] = []
        self.text = text
        for component in components:
            self.attach(component)

    def attach(self, component: ComponentInstance) -> Entity:
        """Append a component; reattaching a name replaces it in place."""
        for i, existing in enumerate(self.components):
            if existing.name == component.name:
                self.components[i] = component
                return self
        self.components.append(component)
        return self

    def add(self, child: Entity) -> Entity:
        """Append a child entity and return the child."""
        if child is self:
            raise StructureError(f"entity <{self.tag}> cannot contain itself")
        self.children.append(child)
        return child

    def __repr__(self) -> str:
        return f"Entity({self.tag!r}, {len(self.components)} components, {len(self.children)} children)"


def attach(entity: Entity, component: ComponentInstance) -> Entity:
    """Functional spelling of :meth:`Entity.attach`."""
    return entity.attach(component)


class Scene:
    """An ``a-scene`` root entity plus scene-scoped system components."""

    __slots__ = ("root", "systems")

    def __init__(self, root: Entity | None = None, systems=()):
        root = root if root is not None else Entity("a-scene")
        if root.tag != "a-scene":
            raise StructureError(f"scene root must be <a-scene>, got <{root.tag}>")
        self.root = root
        self.systems: list[ComponentInstance] = []
        for system in systems:
            self.add_system(system)

    def add_system(self, system: ComponentInstance) -> Scene:
        for i, existing in enumerate(self.systems):
            if existing.name == system.name:
                self.systems[i] = system
                return self
        self.systems.append(system)
        return self


def entity_at(scene: Scene, path: str) -> Entity:
    """Resolve a root-relative index path like ``"0/2"`` ("" is the root)."""
    node = scene.root
    if path == "":
        return node
    for part in path.split("/"):
        try:
            node = node.children[int(part)]
        except (ValueError, IndexError):
            raise StructureError(f"path {path!r} does not resolve in the scene") from None
    return node


def _attr_text(components) -> str:
    parts = []
    for component in components:
        # Components are value objects: name and properties are fixed at
        # construction, so the rendered fragment is memoised per instance.
        text = component._attr
        if text is None:
            value = component.serialized_value()
            if value is None:
                text = component.name
            else:
                text = f'{component.name}="{escape(value, quote=True)}"'
            component._attr = text
        parts.append(text)
    return " ".join(parts)


def _emit(entity: Entity, depth: int, lines: list[str], seen: set[int],
          extra_components=()) -> None:
    if id(entity) in seen:
        raise StructureError(f"entity <{entity.tag}> appears twice in the scene")
    seen.add(id(entity))
    indent = "  " * depth
    attrs = _attr_text([*entity.components, *extra_components])
    open_tag = f"<{entity.tag} {attrs}>" if attrs else f"<{entity.tag}>"
    if not entity.children:
        text = escape(entity.text) if entity.text else ""
        lines.append(f"{indent}{open_tag}{text}</{entity.tag}>")
        return
    lines.append(f"{indent}{open_tag}")
    if entity.text:
        lines.append(f"{indent}  {escape(entity.text)}")
    for child in entity.children:
        _emit(child, depth + 1, lines, seen)
    lines.append(f"{indent}</{entity.tag}>")


def render(
    scene: Scene,
    *,
    title: str = DEFAULT_APP_TITLE,
    runtime_url: str = DEFAULT_RUNTIME_URL,
    author: str | None = None,
) -> str:
    """Serialize the scene into a complete, deterministic HTML document.

    Two-space indentation per depth; attribute order follows component
    insertion order, with scene systems after the root's own components.
    """
    lines = [
        "<!DOCTYPE html>",
        "<html>",
        "  <head>",
        '    <meta charset="utf-8">',
        f"    <title>{escape(title)}</title>",
    ]
    if author:
        lines.append(f'    <meta name="author" content="{escape(author, quote=True)}">')
    lines.append(f'    <script src="{escape(runtime_url, quote=True)}"></script>')
    lines.append("  </head>")
    lines.append("  <body>")
    _emit(scene.root, 2, lines, set(), extra_components=scene.systems)
    lines.append("  </body>")
    lines.append("</html>")
    lines.append("")
    return "\n".join(lines)
