"""Runner entry: load an agent source file and serve it over the protocol.

Usage: <interpreter> -m arena_sdk.runner <agent_source_path>

The source must define at least one concrete BaseAgent subclass; when there
are several, the last one defined wins. The class is instantiated with its
own name. Load or lookup failures exit nonzero before the handshake, which
the harness records as a structure-layer failure.
"""

from __future__ import annotations

import importlib.util
import inspect
import sys

from arena_sdk.agent import BaseAgent, serve


def load_agent_class(source_path: str) -> type[BaseAgent]:
    spec = importlib.util.spec_from_file_location("arena_sdk_loaded_agent", source_path)
    if spec is None or spec.loader is None:
        raise ImportError(f"cannot load agent source {source_path!r}")
    module = importlib.util.module_from_spec(spec)
    sys.modules[spec.name] = module
    spec.loader.exec_module(module)
    candidates = [
        obj for _, obj in vars(module).items()
        if inspect.isclass(obj)
        and issubclass(obj, BaseAgent)
        and obj is not BaseAgent
        and not inspect.isabstract(obj)
        and obj.__module__ == module.__name__
    ]
    if not candidates:
        raise ImportError(f"{source_path!r} defines no concrete BaseAgent subclass")
    return candidates[-1]


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        sys.stderr.write("usage: python -m arena_sdk.runner <agent_source_path>\n")
        return 2
    try:
        agent_cls = load_agent_class(argv[0])
        agent = agent_cls(agent_cls.__name__)
    except BaseException:
        import traceback

        sys.stderr.write("agent failed to load:\n" + traceback.format_exc())
        return 1
    serve(agent)
    return 0


if __name__ == "__main__":
    sys.exit(main())
