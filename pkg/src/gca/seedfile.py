"""Seed files: JSON descriptions of an (r,z)-seed, with optional Lambda and square completion.

    {"r": [1, 2], "B": [[0, -1], [1, 0]], "coefficients": "principal"}
    {"r": [1, 2], "Btilde": [[0, -1], [1, 0], [1, -1]], "coefficients": "explicit",
     "Lambda": [[...]], "completion": [[...]]}

``n`` and ``m`` may be given; they are checked against the matrices.
"""

from __future__ import annotations

import json
import re
from importlib import resources
from pathlib import Path

import numpy as np

from . import matrix as mx
from .seed import CompatibilityBroken, CompatiblePair, MutationData, SeedError, validate
from .tropical import SquareCompletion
from .verify import Instance


class SeedFileError(Exception):
    def __init__(self, msg: str, source: str = "<seed>", line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        where = source if line is None else f"{source}:{line}" + ("" if col is None else f":{col}")
        super().__init__(f"{where}: {msg}")


def sample_names() -> list[str]:
    root = resources.files("gca") / "samples"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def read_sample(name: str) -> str:
    return (resources.files("gca") / "samples" / f"{name}.json").read_text()


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return None if m is None else text.count("\n", 0, m.start()) + 1


def _int_matrix(obj, key, text, source, rows=None, cols=None) -> np.ndarray:
    line = _line_of(text, key)
    if not isinstance(obj, list) or not all(isinstance(r, list) for r in obj):
        raise SeedFileError(f"{key} must be a list of rows", source, line)
    if any(not isinstance(v, int) or isinstance(v, bool) for r in obj for v in r):
        raise SeedFileError(f"{key} must contain integers only", source, line)
    widths = {len(r) for r in obj}
    if len(widths) > 1:
        raise SeedFileError(f"{key} has rows of different lengths", source, line)
    w = widths.pop() if widths else 0
    if rows is not None and len(obj) != rows or cols is not None and w != cols:
        raise SeedFileError(f"{key} must be {rows}x{cols}, got {len(obj)}x{w}", source, line)
    return mx.imat(obj).reshape(len(obj), w)


class SeedFile:
    """A parsed seed file.  The compatible pair is built lazily: a broken Lambda is a
    check failure for the commands that use it, not a parse error."""

    def __init__(self, data: dict, text: str, source: str):
        self.source = source
        self.name = data.get("name", Path(source).stem)
        if "r" not in data:
            raise SeedFileError("missing key 'r'", source)
        r = data["r"]
        if not isinstance(r, list) or not r or any(not isinstance(v, int) or v < 1 for v in r):
            raise SeedFileError("r must be a non-empty list of positive integers", source, _line_of(text, "r"))
        n = len(r)
        kind = data.get("coefficients", "explicit")
        if kind == "principal":
            if "B" not in data:
                raise SeedFileError("principal coefficients need the n x n matrix 'B'", source)
            B = _int_matrix(data["B"], "B", text, source, n, n)
            m = 2 * n
            Btilde = np.vstack([B, mx.eye(n)])
        elif kind == "explicit":
            key = "Btilde" if "Btilde" in data else "B"
            if key not in data:
                raise SeedFileError("missing key 'Btilde'", source)
            Btilde = _int_matrix(data[key], key, text, source, cols=n)
            m = Btilde.shape[0]
        else:
            raise SeedFileError(f"coefficients must be 'principal' or 'explicit', got {kind!r}", source,
                                _line_of(text, "coefficients"))
        for key, want in (("n", n), ("m", m)):
            if key in data and data[key] != want:
                raise SeedFileError(f"{key}={data[key]} does not match the matrices ({want})", source, _line_of(text, key))
        try:
            self.md = MutationData(n, m, tuple(r))
            validate(self.md, Btilde)
        except SeedError as e:
            raise SeedFileError(str(e), source, _line_of(text, "B") or _line_of(text, "Btilde")) from e
        self.Btilde = Btilde
        self.kind = kind
        self._lambda = None
        if "Lambda" in data:
            self._lambda = _int_matrix(data["Lambda"], "Lambda", text, source, m, m)
        self.completion = None
        if "completion" in data:
            M = _int_matrix(data["completion"], "completion", text, source, m, m - n)
            try:
                self.completion = SquareCompletion.from_block(self.md, Btilde, M)
            except (ValueError, SeedError) as e:
                raise SeedFileError(str(e), source, _line_of(text, "completion")) from e

    def pair(self) -> CompatiblePair | None:
        """The configured compatible pair (principal Lambda by default); raises CompatibilityBroken."""
        if self._lambda is not None:
            return CompatiblePair(self.md, self.Btilde, self._lambda)
        if self.kind == "principal":
            return CompatiblePair.principal(self.md, self.Btilde[: self.md.n])
        return None

    def instance(self) -> Instance:
        try:
            pair = self.pair()
        except CompatibilityBroken:
            pair = None
        return Instance(self.md, self.Btilde, pair, self.completion, self.name)

    def to_json(self) -> dict:
        return {"name": self.name, "n": self.md.n, "m": self.md.m, "r": list(self.md.r),
                "Btilde": mx.to_list(self.Btilde)}


def parse_seed(text: str, source: str = "<seed>") -> SeedFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SeedFileError(e.msg, source, e.lineno, e.colno) from e
    if not isinstance(data, dict):
        raise SeedFileError("top level must be a JSON object", source, 1)
    return SeedFile(data, text, source)


def load_seed(source: str) -> SeedFile:
    """A path to a seed file, or the name of a shipped sample."""
    p = Path(source)
    if p.is_file():
        return parse_seed(p.read_text(), str(p))
    if source in sample_names():
        return parse_seed(read_sample(source), f"sample:{source}")
    raise SeedFileError(f"no such file or sample (samples: {', '.join(sample_names())})", source)
