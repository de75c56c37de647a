"""Minimal stdin/stdout model server used by the client tests.

Usage: python proto_stub.py <mode>
Modes:
  fixed      two classes, every predict answers [1.0, -1.0]
  sum        logits derived deterministically from the image bytes
  reorder    answers predicts in reversed pairs to exercise id matching
  wrongcount hello advertises 9 classes
  badjson    answers predicts with unparsable output
  error      answers every predict with an error message
  nonfinite  answers with a NaN logit
  die        exits right after the handshake
"""

import base64
import json
import sys


def reply(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def logits_for(mode, msg):
    if mode == "fixed":
        return [1.0, -1.0]
    data = base64.b64decode(msg["data"])
    return [float(sum(data) % 251), float(len(data) % 97)]


def main():
    mode = sys.argv[1] if len(sys.argv) > 1 else "fixed"
    pending = []
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        msg = json.loads(line)
        if msg.get("type") == "hello":
            classes = 9 if mode == "wrongcount" else 2
            reply(
                {
                    "type": "hello",
                    "num_classes": classes,
                    "class_names": [f"c{i}" for i in range(classes)],
                }
            )
            if mode == "die":
                return
            continue
        if mode == "badjson":
            sys.stdout.write("{this is not json\n")
            sys.stdout.flush()
            continue
        if mode == "error":
            reply({"type": "error", "id": msg["id"], "message": "model exploded"})
            continue
        if mode == "nonfinite":
            reply({"type": "logits", "id": msg["id"], "values": [float("nan"), 0.0]})
            continue
        if mode == "reorder":
            pending.append(msg)
            if len(pending) == 2:
                for queued in reversed(pending):
                    reply(
                        {
                            "type": "logits",
                            "id": queued["id"],
                            "values": logits_for("sum", queued),
                        }
                    )
                pending = []
            continue
        reply({"type": "logits", "id": msg["id"], "values": logits_for(mode, msg)})
    for queued in pending:
        reply({"type": "logits", "id": queued["id"], "values": logits_for("sum", queued)})


if __name__ == "__main__":
    main()
