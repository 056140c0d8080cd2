#!/usr/bin/env python3
"""Isolation probe: tries to read other agents' files and leaked env secrets.

Replies action 1 if any cross-read succeeded, else action 0 (mask permitting).
"""
import glob
import json
import os
import sys


def attempt_cross_reads() -> bool:
    candidates = []
    # fixed-name guesses relative to our scratch dir
    for rel in ("../secret.txt", "../agent-secret/secret.txt", "../../secret.txt"):
        candidates.append(rel)
    # naive discovery sweeps over the system temp dir
    for pattern in ("agent-*", "arena-*"):
        for hit in glob.glob(os.path.join("/tmp", pattern)):
            if os.path.realpath(hit) != os.path.realpath(os.getcwd()):
                candidates.append(os.path.join(hit, "secret.txt"))
    for path in candidates:
        try:
            with open(path, "r") as fh:
                if "SECRET" in fh.read():
                    return True
        except OSError:
            continue
    return "ARENA_PROBE_SECRET" in os.environ


for raw in sys.stdin:
    line = raw.strip()
    if not line:
        continue
    msg = json.loads(line)
    kind = msg.get("type")
    if kind == "hello":
        print(json.dumps({"type": "ready", "name": "probe"}), flush=True)
    elif kind == "act":
        leaked = attempt_cross_reads()
        print(json.dumps({"type": "action", "step": msg["step"], "action": 1 if leaked else 0}),
              flush=True)
    elif kind == "bye":
        break
