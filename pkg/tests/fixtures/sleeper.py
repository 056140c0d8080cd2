#!/usr/bin/env python3
"""Agent that sleeps a fixed delay (argv[1] seconds) before each action."""
import json
import sys
import time

delay = float(sys.argv[1]) if len(sys.argv) > 1 else 60.0

for raw in sys.stdin:
    line = raw.strip()
    if not line:
        continue
    msg = json.loads(line)
    kind = msg.get("type")
    if kind == "hello":
        print(json.dumps({"type": "ready", "name": "sleeper"}), flush=True)
    elif kind == "act":
        time.sleep(delay)
        mask = msg["action_mask"]
        action = next((i for i, b in enumerate(mask) if b), -1)
        print(json.dumps({"type": "action", "step": msg["step"], "action": action}), flush=True)
    elif kind == "bye":
        break
