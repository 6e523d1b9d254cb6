"""Command-line interface.

Exit codes: 0 success, 1 validation failure (diagnostics or a propagation
conflict), 2 usage error, 3 I/O or document error. User errors print a
one-line message, never a traceback.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .configurator import (
    Configuration,
    ValidationMode,
    config_to_object,
    enumerate_completions,
    parse_config,
    propagate,
    validate,
)
from .errors import InvalidConfiguration, XRForgeError
from .generator import GenerationOptions, generate, manifest_to_object
from .model import FeatureModel, parse_model, serialize_model
from .service import load_service_config, serve
from .webxr import builtin_webxr_model

LIST_DEFAULT_LIMIT = 100


def _load_model(path: str | None) -> FeatureModel:
    if path is None:
        return builtin_webxr_model()
    return parse_model(Path(path).read_text(encoding="utf-8"))


def _load_config(path: str, model: FeatureModel) -> Configuration:
    return parse_config(Path(path).read_text(encoding="utf-8"), model)


def _diagnostic_line(diagnostic) -> str:
    features = ", ".join(diagnostic.features)
    return f"{diagnostic.rule.value} ({features}): {diagnostic.message}"


def _cmd_model_show(args) -> int:
    model = _load_model(args.file)
    sys.stdout.write(serialize_model(model))
    return 0


def _cmd_validate(args) -> int:
    model = builtin_webxr_model()
    config = _load_config(args.config, model)
    mode = ValidationMode.PARTIAL if args.partial else ValidationMode.COMPLETE
    diagnostics = validate(model, config, mode)
    for diagnostic in diagnostics:
        print(_diagnostic_line(diagnostic))
    return 1 if diagnostics else 0


def _cmd_propagate(args) -> int:
    model = builtin_webxr_model()
    config = _load_config(args.config, model)
    result = propagate(model, config)
    payload = {
        "configuration": config_to_object(result.configuration),
        "forced": [f.to_object() for f in result.forced],
    }
    if result.conflict is not None:
        payload["conflict"] = result.conflict.to_object()
    print(json.dumps(payload, indent=2))
    return 1 if result.conflict is not None else 0


def _cmd_enumerate(args) -> int:
    model = builtin_webxr_model()
    collect = 0
    if args.list:
        collect = args.limit if args.limit is not None else LIST_DEFAULT_LIMIT
    result = enumerate_completions(model, limit=collect)
    print(f"count: {result.total}")
    if args.list:
        print(f"truncated: {'true' if result.truncated else 'false'}")
        for config in result.configurations:
            print(" ".join(config.selected()))
    return 0


def _cmd_generate(args) -> int:
    model = builtin_webxr_model()
    config = _load_config(args.config, model)
    options = GenerationOptions(
        app_title=args.title if args.title is not None else GenerationOptions.app_title,
        include_demo_objects=not args.no_demo,
    )
    artifact = generate(model, config, options)
    Path(args.out).write_text(artifact.document, encoding="utf-8")
    if args.manifest:
        manifest_text = json.dumps(manifest_to_object(artifact.manifest), indent=2) + "\n"
        Path(args.manifest).write_text(manifest_text, encoding="utf-8")
    return 0


def _cmd_serve(args) -> int:
    service_config = load_service_config(args.config_file)
    serve(service_config)
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xrforge",
        description="Feature-model configurator and Web XR skeleton generator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    model_cmd = sub.add_parser("model", help="inspect feature models")
    model_sub = model_cmd.add_subparsers(dest="action", required=True)
    show = model_sub.add_parser("show", help="print the canonical model document")
    show.add_argument("--file", help="model document to print (default: built-in model)")
    show.set_defaults(func=_cmd_model_show)

    config_cmd = sub.add_parser("config", help="validate and complete configurations")
    config_sub = config_cmd.add_subparsers(dest="action", required=True)

    val = config_sub.add_parser("validate", help="check a configuration document")
    val.add_argument("--config", required=True, help="configuration document path")
    val.add_argument("--partial", action="store_true",
                     help="only flag violations no completion could repair")
    val.set_defaults(func=_cmd_validate)

    prop = config_sub.add_parser("propagate", help="derive forced decisions")
    prop.add_argument("--config", required=True, help="configuration document path")
    prop.set_defaults(func=_cmd_propagate)

    enum = config_sub.add_parser("enumerate", help="count or list every product")
    enum.add_argument("--limit", type=int, help="cap on listed configurations")
    enum.add_argument("--list", action="store_true", help="print each configuration")
    enum.set_defaults(func=_cmd_enumerate)

    gen = sub.add_parser("generate", help="write the HTML skeleton for a configuration")
    gen.add_argument("--config", required=True, help="configuration document path")
    gen.add_argument("--out", required=True, help="output document path")
    gen.add_argument("--manifest", help="also write the traceability manifest here")
    gen.add_argument("--title", help="document title")
    gen.add_argument("--no-demo", action="store_true", help="omit the demo box and sky")
    gen.set_defaults(func=_cmd_generate)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--config-file", help="service configuration document")
    srv.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except InvalidConfiguration as exc:
        print(f"error: {exc}", file=sys.stderr)
        for diagnostic in exc.diagnostics:
            print(_diagnostic_line(diagnostic), file=sys.stderr)
        return 1
    except (XRForgeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
