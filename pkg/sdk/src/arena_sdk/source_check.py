"""Structural source checks: parseability, interface compliance, imports.

The harness treats running agents as black boxes; this is the source-level
checker it delegates to for Python agents. Findings are data, never raised.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field

DEFAULT_DENYLIST = frozenset({
    "socket", "ssl", "http", "urllib", "requests", "ftplib", "telnetlib",
    "smtplib", "subprocess", "multiprocessing", "ctypes",
})


@dataclass(frozen=True)
class Finding:
    kind: str
    message: str
    line: int | None = None


@dataclass
class CheckReport:
    ok: bool
    findings: list[Finding] = field(default_factory=list)


def _base_is_agent(base: ast.expr) -> bool:
    if isinstance(base, ast.Name):
        return base.id == "BaseAgent"
    if isinstance(base, ast.Attribute):
        return base.attr == "BaseAgent"
    return False


def _positional_names(fn: ast.FunctionDef) -> tuple[list[str], int]:
    """Positional parameter names and how many of them lack defaults."""
    args = fn.args
    names = [a.arg for a in args.posonlyargs + args.args]
    required = len(names) - len(args.defaults)
    return names, required


def _check_class(node: ast.ClassDef) -> list[Finding]:
    findings: list[Finding] = []
    init = None
    select = None
    for item in node.body:
        if isinstance(item, ast.FunctionDef):
            if item.name == "__init__":
                init = item
            elif item.name == "select_action":
                select = item
    if init is not None:
        names, required = _positional_names(init)
        # must be constructible as cls(name): exactly one required arg after self
        if len(names) < 2 or required > 2:
            findings.append(Finding(
                "bad-constructor",
                f"{node.name}.__init__ must accept (self, name)", init.lineno,
            ))
    if select is None:
        findings.append(Finding(
            "missing-select-action",
            f"{node.name} does not define select_action", node.lineno,
        ))
    else:
        names, required = _positional_names(select)
        if len(names) < 3 or required > 3:
            findings.append(Finding(
                "bad-select-action-signature",
                f"{node.name}.select_action must accept (self, observation, action_mask)",
                select.lineno,
            ))
    return findings


def source_check(source_text: str, denylist: frozenset[str] = DEFAULT_DENYLIST) -> CheckReport:
    """Parse and inspect agent source; ok means deployable structure."""
    findings: list[Finding] = []
    try:
        tree = ast.parse(source_text)
    except SyntaxError as exc:
        findings.append(Finding("parse-error", str(exc.msg or "syntax error"), exc.lineno))
        return CheckReport(ok=False, findings=findings)

    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                root = alias.name.split(".")[0]
                if root in denylist:
                    findings.append(Finding(
                        "denylisted-import", f"import of {alias.name!r} is not allowed",
                        node.lineno,
                    ))
        elif isinstance(node, ast.ImportFrom):
            root = (node.module or "").split(".")[0]
            if root in denylist:
                findings.append(Finding(
                    "denylisted-import", f"import from {node.module!r} is not allowed",
                    node.lineno,
                ))

    agent_classes = [
        node for node in ast.walk(tree)
        if isinstance(node, ast.ClassDef) and any(_base_is_agent(b) for b in node.bases)
    ]
    if not agent_classes:
        findings.append(Finding("no-agent-class",
                                "no class inheriting BaseAgent was found", None))
    else:
        conforming = False
        class_findings: list[Finding] = []
        for node in agent_classes:
            issues = _check_class(node)
            if issues:
                class_findings.extend(issues)
            else:
                conforming = True
        if not conforming:
            findings.extend(class_findings)

    return CheckReport(ok=not findings, findings=findings)
