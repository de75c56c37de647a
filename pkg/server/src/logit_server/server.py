"""Transports: a stdio request loop and a sequential HTTP server.

Stdio is the default (no ports to race over in CI); ids are echoed verbatim
and responses are flushed per request, so clients may pipeline as deeply as
they like. The HTTP transport accepts the same protocol messages POSTed to
/predict, one response per request.
"""

from __future__ import annotations

import json
import sys
from http.server import BaseHTTPRequestHandler, HTTPServer

from .protocol import ServerConfig, handle_line


def serve_stdio(config: ServerConfig, stdin=None, stdout=None) -> None:
    """Answer protocol lines until EOF."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        response = handle_line(line, config)
        if response is not None:
            stdout.write(json.dumps(response) + "\n")
            stdout.flush()


class _Handler(BaseHTTPRequestHandler):
    config: ServerConfig  # set on the subclass by make_http_server

    def do_POST(self):  # noqa: N802 (http.server API)
        if self.path.rstrip("/") != "/predict":
            self.send_error(404, "only /predict is served")
            return
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length).decode("utf-8")
        response = handle_line(body, self.config)
        payload = json.dumps(response).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, format, *args):  # keep stdout clean
        pass


def make_http_server(config: ServerConfig, port: int, host: str = "127.0.0.1") -> HTTPServer:
    handler = type("ConfiguredHandler", (_Handler,), {"config": config})
    return HTTPServer((host, port), handler)


def serve_http(config: ServerConfig, port: int, host: str = "127.0.0.1") -> None:
    server = make_http_server(config, port, host)
    print(f"serving on http://{host}:{server.server_address[1]}/predict", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
