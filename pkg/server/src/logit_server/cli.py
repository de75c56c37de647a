"""Launcher: `logit-server --stdio` or `logit-server --port N`.

Without --model the bundled quadrant-brightness classifier is served; any
callable is mountable via --model <file.py|module>:<attr>[:<arg>].
"""

from __future__ import annotations

import argparse
import sys

from .models import load_plugin, quadrant_brightness_model
from .protocol import ServerConfig
from .server import serve_http, serve_stdio


def build_config(args) -> ServerConfig:
    class_names = tuple(args.classes)
    if args.model:
        model = load_plugin(args.model)
    else:
        model = quadrant_brightness_model(len(class_names))
    return ServerConfig(model=model, class_names=class_names)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="logit-server",
        description="Serve an image classifier over the JSON prediction protocol",
    )
    transport = parser.add_mutually_exclusive_group(required=True)
    transport.add_argument("--stdio", action="store_true", help="serve on stdin/stdout")
    transport.add_argument("--port", type=int, help="serve HTTP POST /predict on this port")
    parser.add_argument(
        "--model",
        default=None,
        help="plugin callable <file.py|module>:<attr>[:<arg>]; default: bundled "
        "quadrant-brightness model",
    )
    parser.add_argument(
        "--classes",
        nargs="+",
        default=["class0", "class1"],
        help="class names; the model must emit one logit per name",
    )
    args = parser.parse_args(argv)

    try:
        config = build_config(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"cannot build model: {exc}", file=sys.stderr)
        return 2

    if args.stdio:
        serve_stdio(config)
    else:
        serve_http(config, args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
