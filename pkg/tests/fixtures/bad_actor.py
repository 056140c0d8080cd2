#!/usr/bin/env python3
"""Configurable misbehaviour (argv[1]):

  malformed_hello  first line is not JSON
  exit_now         exit before answering the handshake
  out_of_range     action beyond the mask length
  wrong_step       echoes step+1
  non_integer      action is a string
  crash_at_N       raise after N successful actions (e.g. crash_at_3)
  illegal          always plays the first ILLEGAL action
"""
import json
import sys

mode = sys.argv[1] if len(sys.argv) > 1 else "out_of_range"

if mode == "exit_now":
    sys.exit(1)
if mode == "malformed_hello":
    print("this is not json", flush=True)
    sys.exit(0)

answered = 0
for raw in sys.stdin:
    line = raw.strip()
    if not line:
        continue
    msg = json.loads(line)
    kind = msg.get("type")
    if kind == "hello":
        print(json.dumps({"type": "ready", "name": f"bad-{mode}"}), flush=True)
    elif kind == "act":
        mask = msg["action_mask"]
        step = msg["step"]
        if mode.startswith("crash_at_"):
            limit = int(mode.rsplit("_", 1)[1])
            if answered >= limit:
                raise RuntimeError("scripted crash")
            action = next((i for i, b in enumerate(mask) if b), -1)
            print(json.dumps({"type": "action", "step": step, "action": action}), flush=True)
            answered += 1
        elif mode == "out_of_range":
            print(json.dumps({"type": "action", "step": step, "action": len(mask) + 3}), flush=True)
        elif mode == "wrong_step":
            action = next((i for i, b in enumerate(mask) if b), -1)
            print(json.dumps({"type": "action", "step": step + 1, "action": action}), flush=True)
        elif mode == "non_integer":
            print(json.dumps({"type": "action", "step": step, "action": "four"}), flush=True)
        elif mode == "illegal":
            action = next((i for i, b in enumerate(mask) if not b), 0)
            print(json.dumps({"type": "action", "step": step, "action": action}), flush=True)
    elif kind == "bye":
        break
