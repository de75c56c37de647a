"""Reference model server for the newline-delimited JSON prediction protocol."""

__version__ = "0.1.0"

from .models import box_additive_model, load_plugin, quadrant_brightness_model
from .protocol import ServerConfig, handle_line, handle_message
from .server import make_http_server, serve_http, serve_stdio

__all__ = [
    "ServerConfig",
    "box_additive_model",
    "handle_line",
    "handle_message",
    "load_plugin",
    "make_http_server",
    "quadrant_brightness_model",
    "serve_http",
    "serve_stdio",
]
