"""Deterministic stand-in for an embedding sidecar, used by the test suite.

Usage: mock_sidecar.py [MODE]. MODE is one of ok, wrong-id, bad-norm,
nondeterministic, error, wrong-dim, exit.
"""
import base64
import json
import math
import sys

DIM = 32
MODE = sys.argv[1] if len(sys.argv) > 1 else "ok"


def embed(raw):
    hist = [0.0] * 16
    grad = [0.0] * 16
    side = 224
    for y in range(0, side, 2):
        row = y * side
        for x in range(0, side - 1, 2):
            v = raw[row + x]
            hist[v >> 4] += 1.0
            d = raw[row + x + 1] - v
            grad[(d + 256) >> 5] += 1.0
    vec = hist + grad
    norm = math.sqrt(sum(v * v for v in vec))
    return [v / norm for v in vec]


def send(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


send({"op": "hello", "dim": DIM, "deterministic": MODE != "nondeterministic", "model": "mock-model"})
calls = 0
for line in sys.stdin:
    req = json.loads(line)
    calls += 1
    if MODE == "exit":
        sys.exit(3)
    raw = base64.b64decode(req["image"])
    if len(raw) != 224 * 224 or req.get("format") != "gray224":
        send({"id": req["id"], "error": "bad image"})
        continue
    if MODE == "error":
        send({"id": req["id"], "error": "model unavailable"})
        continue
    vec = embed(raw)
    rid = req["id"]
    if MODE == "wrong-id":
        rid += 1
    if MODE == "bad-norm":
        vec = [2.0 * v for v in vec]
    if MODE == "wrong-dim":
        vec = vec[:-1]
    send({"id": rid, "embedding": vec, "dim": len(vec)})
