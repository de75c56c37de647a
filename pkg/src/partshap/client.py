"""Client for external model servers speaking the newline-delimited JSON protocol.

Transports: a spawned subprocess (JSON lines over stdin/stdout) or HTTP POST
to /predict. Every request carries a u64 id and responses may arrive out of
order; the stdio client pipelines up to `max_inflight` requests and matches
responses by id. Handshake:

    {"type": "hello"} -> {"type": "hello", "num_classes": C, "class_names": [...]}

Prediction:

    {"type": "predict", "id": N, "format": "png", "data": "<base64>"}
        -> {"type": "logits", "id": N, "values": [... C floats ...]}
        or {"type": "error", "id": N, "message": "..."}
"""

from __future__ import annotations

import base64
import itertools
import json
import shlex
import subprocess
import threading
import urllib.error
import urllib.request
from typing import Sequence

import numpy as np

from .errors import (
    ClassCountMismatch,
    EvaluatorUnavailable,
    HandshakeFailed,
    MalformedResponse,
    NonFiniteLogit,
)
from .image import RasterImage, encode_png
from .models import ValueFunction

_HANDSHAKE_TIMEOUT = 30.0
_REQUEST_TIMEOUT = 120.0


class StdioTransport:
    """Pipelined JSON-lines client over a child process's stdin/stdout."""

    def __init__(self, argv: Sequence[str], *, max_inflight: int = 64):
        self.argv = list(argv)
        self.max_inflight = max_inflight
        try:
            self._proc = subprocess.Popen(
                self.argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
            )
        except OSError as exc:
            raise EvaluatorUnavailable(f"cannot spawn {self.argv}: {exc}") from exc
        self._write_lock = threading.Lock()
        self._cond = threading.Condition()
        self._responses: dict[int, dict] = {}
        self._dead: Exception | None = None
        self._ids = itertools.count(1)
        self.hello = self._handshake()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _handshake(self) -> dict:
        try:
            self._proc.stdin.write(json.dumps({"type": "hello"}) + "\n")
            self._proc.stdin.flush()
        except (OSError, ValueError) as exc:
            raise HandshakeFailed(f"cannot reach {self.argv}: {exc}") from exc

        line: list[str | None] = [None]

        def read_one():
            line[0] = self._proc.stdout.readline()

        t = threading.Thread(target=read_one, daemon=True)
        t.start()
        t.join(_HANDSHAKE_TIMEOUT)
        if t.is_alive() or not line[0]:
            self.close()
            raise HandshakeFailed(f"no handshake response from {self.argv}")
        try:
            msg = json.loads(line[0])
        except json.JSONDecodeError as exc:
            self.close()
            raise HandshakeFailed(f"invalid handshake JSON: {line[0]!r}") from exc
        if msg.get("type") != "hello" or "num_classes" not in msg:
            self.close()
            raise HandshakeFailed(f"unexpected handshake response: {msg}")
        return msg

    def _read_loop(self) -> None:
        try:
            for raw in self._proc.stdout:
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    msg = json.loads(raw)
                    rid = int(msg["id"])
                except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                    with self._cond:
                        self._dead = MalformedResponse(f"unparsable response line: {raw!r}")
                        self._cond.notify_all()
                    return
                with self._cond:
                    self._responses[rid] = msg
                    self._cond.notify_all()
        except Exception as exc:  # pipe torn down
            with self._cond:
                self._dead = exc
                self._cond.notify_all()
            return
        with self._cond:
            self._dead = EvaluatorUnavailable("model process closed its output")
            self._cond.notify_all()

    def _send(self, payload: dict) -> int:
        with self._write_lock:
            rid = next(self._ids)
            line = json.dumps({**payload, "id": rid}) + "\n"
            try:
                self._proc.stdin.write(line)
                self._proc.stdin.flush()
            except (OSError, ValueError) as exc:
                raise EvaluatorUnavailable(f"model process is gone: {exc}") from exc
        return rid

    def _await(self, rid: int, timeout: float = _REQUEST_TIMEOUT) -> dict:
        deadline = timeout
        with self._cond:
            while rid not in self._responses:
                if self._dead is not None:
                    exc = self._dead
                    if isinstance(exc, MalformedResponse):
                        raise exc
                    raise EvaluatorUnavailable(str(exc))
                if deadline <= 0:
                    raise EvaluatorUnavailable(f"timed out waiting for response {rid}")
                self._cond.wait(0.5)
                deadline -= 0.5
            return self._responses.pop(rid)

    def request_many(self, payloads: Sequence[dict]) -> list[dict]:
        ids: list[int] = []
        collected: dict[int, dict] = {}
        for i, payload in enumerate(payloads):
            if i >= self.max_inflight:
                oldest = ids[i - self.max_inflight]
                collected[oldest] = self._await(oldest)
            ids.append(self._send(payload))
        for rid in ids:
            if rid not in collected:
                collected[rid] = self._await(rid)
        return [collected[rid] for rid in ids]

    def request(self, payload: dict) -> dict:
        return self.request_many([payload])[0]

    def close(self) -> None:
        proc = self._proc
        for stream in (proc.stdin,):
            try:
                stream.close()
            except OSError:
                pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()


class HttpTransport:
    """One POST per protocol message; requests are independent, so no pipelining."""

    def __init__(self, url: str):
        url = url.rstrip("/")
        if not url.endswith("/predict"):
            url = url + "/predict"
        self.url = url
        self._ids = itertools.count(1)
        self._lock = threading.Lock()
        self.hello = self._post({"type": "hello"})
        if self.hello.get("type") != "hello" or "num_classes" not in self.hello:
            raise HandshakeFailed(f"unexpected handshake response: {self.hello}")

    def _post(self, payload: dict) -> dict:
        data = json.dumps(payload).encode("utf-8")
        req = urllib.request.Request(
            self.url, data=data, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(req, timeout=_REQUEST_TIMEOUT) as resp:
                body = resp.read()
        except urllib.error.URLError as exc:
            if payload.get("type") == "hello":
                raise HandshakeFailed(f"cannot reach {self.url}: {exc}") from exc
            raise EvaluatorUnavailable(f"cannot reach {self.url}: {exc}") from exc
        try:
            return json.loads(body)
        except json.JSONDecodeError as exc:
            raise MalformedResponse(f"invalid JSON from {self.url}: {body[:200]!r}") from exc

    def request(self, payload: dict) -> dict:
        with self._lock:
            rid = next(self._ids)
        return self._post({**payload, "id": rid})

    def request_many(self, payloads: Sequence[dict]) -> list[dict]:
        return [self.request(p) for p in payloads]

    def close(self) -> None:
        pass


class RemoteValueFunction(ValueFunction):
    """A ValueFunction backed by one of the transports above."""

    def __init__(self, transport, expected_classes: int | None = None):
        hello = transport.hello
        num_classes = int(hello["num_classes"])
        if expected_classes is not None and num_classes != expected_classes:
            transport.close()
            raise ClassCountMismatch(
                f"server reports {num_classes} classes, expected {expected_classes}"
            )
        names = hello.get("class_names") or None
        super().__init__(num_classes, names)
        self.transport = transport

    @staticmethod
    def _predict_payload(image: RasterImage) -> dict:
        return {
            "type": "predict",
            "format": "png",
            "data": base64.b64encode(encode_png(image)).decode("ascii"),
        }

    def _parse(self, msg: dict) -> np.ndarray:
        kind = msg.get("type")
        if kind == "error":
            raise EvaluatorUnavailable(f"server error: {msg.get('message')}")
        if kind != "logits" or "values" not in msg:
            raise MalformedResponse(f"unexpected response: {msg}")
        values = np.asarray(msg["values"], dtype=np.float64)
        if values.shape != (self.num_classes,):
            raise MalformedResponse(
                f"expected {self.num_classes} logits, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteLogit(f"non-finite logits from server: {msg['values']}")
        return values

    def evaluate(self, image: RasterImage) -> np.ndarray:
        return self._parse(self.transport.request(self._predict_payload(image)))

    def evaluate_batch(self, images: Sequence[RasterImage]) -> np.ndarray:
        msgs = self.transport.request_many(
            [self._predict_payload(img) for img in images]
        )
        out = np.empty((len(images), self.num_classes), dtype=np.float64)
        for i, msg in enumerate(msgs):
            try:
                out[i] = self._parse(msg)
            except (EvaluatorUnavailable, MalformedResponse, NonFiniteLogit) as exc:
                raise type(exc)(f"batch index {i}: {exc}") from exc
        return out

    def close(self) -> None:
        self.transport.close()


def connect_external(
    endpoint: str | Sequence[str],
    expected_classes: int | None = None,
    *,
    max_inflight: int = 64,
) -> RemoteValueFunction:
    """Connect to a model server.

    `endpoint` is an http(s) URL, an argv list, or a command-line string for
    a subprocess speaking the stdio protocol.
    """
    if isinstance(endpoint, str) and endpoint.startswith(("http://", "https://")):
        transport = HttpTransport(endpoint)
    else:
        argv = shlex.split(endpoint) if isinstance(endpoint, str) else list(endpoint)
        transport = StdioTransport(argv, max_inflight=max_inflight)
    return RemoteValueFunction(transport, expected_classes)
