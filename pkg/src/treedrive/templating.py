"""Loader for the sectioned plain-text template files shipped with the package.

A section starts with a line ``=== name ===`` and runs to the next one. Lines
before the first section are ignored. Placeholders use :class:`string.Template`
syntax.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

_HEADER = re.compile(r"=== ([\w.]+) ===")


@lru_cache(maxsize=None)
def load_sections(package: str, filename: str) -> dict[str, str]:
    raw = resources.files(package).joinpath(filename).read_text(encoding="utf-8")
    sections: dict[str, str] = {}
    name = None
    body: list[str] = []
    for line in raw.splitlines():
        m = _HEADER.fullmatch(line)
        if m:
            if name is not None:
                sections[name] = "\n".join(body).strip("\n")
            name, body = m.group(1), []
        elif name is not None:
            body.append(line)
    if name is not None:
        sections[name] = "\n".join(body).strip("\n")
    return sections
