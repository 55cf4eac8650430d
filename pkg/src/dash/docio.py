"""Versioned, human-readable document format used by all file interfaces.

A document is a one-line format header (e.g. ``dash-scene/1``) followed by
a YAML body. Headers are checked on load so format evolution stays explicit.
"""

import yaml


class DocumentError(Exception):
    """Malformed document; message carries location/field details."""


def dumps(header: str, body: dict) -> str:
    return header + "\n" + yaml.safe_dump(body, sort_keys=True, default_flow_style=False)


def loads(text: str, expect_header: str) -> dict:
    lines = text.split("\n", 1)
    if not lines or lines[0].strip() != expect_header:
        got = lines[0].strip() if lines and lines[0].strip() else "<empty>"
        raise DocumentError(
            f"line 1: expected format header {expect_header!r}, got {got!r}")
    if len(lines) < 2 or not lines[1].strip():
        raise DocumentError("line 2: document body is empty")
    try:
        body = yaml.safe_load(lines[1])
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        loc = f"line {mark.line + 2}" if mark else "body"
        raise DocumentError(f"{loc}: invalid YAML: {e}") from e
    if not isinstance(body, dict):
        raise DocumentError("body: expected a mapping at top level")
    return body


def require(body: dict, field: str, context: str = "document"):
    if field not in body:
        raise DocumentError(f"{context}: missing required field {field!r}")
    return body[field]


def write_file(path, header: str, body: dict) -> None:
    with open(path, "w") as f:
        f.write(dumps(header, body))


def read_file(path, expect_header: str) -> dict:
    with open(path) as f:
        return loads(f.read(), expect_header)
