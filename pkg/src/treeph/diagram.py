"""Persistence diagram container and its CSV format.

A diagram is a multiset of ``(birth, death)`` dots of a single homology
dimension.  The diagonal is implicit and never stored, so every stored dot
has ``death > birth``.  Essential classes carry ``death == inf``.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class PersistenceDiagram:
    dots: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    dim: int = 0
    truncated: bool = False
    max_scale: float | None = None

    def __post_init__(self):
        dots = np.asarray(self.dots, dtype=float).reshape(-1, 2)
        if dots.size and np.any(dots[:, 1] <= dots[:, 0]):
            raise ValueError("every stored dot must have death > birth")
        if np.any(np.isnan(dots)):
            raise ValueError("diagram contains NaN coordinates")
        self.dots = dots

    def __len__(self):
        return len(self.dots)

    def __iter__(self):
        return iter(map(tuple, self.dots))

    @property
    def births(self):
        return self.dots[:, 0]

    @property
    def deaths(self):
        return self.dots[:, 1]

    def persistence(self):
        """death - birth per dot (inf for essential dots)."""
        return self.dots[:, 1] - self.dots[:, 0]

    def finite(self) -> PersistenceDiagram:
        keep = np.isfinite(self.dots[:, 1])
        return PersistenceDiagram(self.dots[keep], self.dim)

    def essential(self):
        return self.dots[~np.isfinite(self.dots[:, 1])]

    def sorted(self) -> PersistenceDiagram:
        """Copy with dots in canonical (birth, death) order."""
        order = np.lexsort((self.dots[:, 1], self.dots[:, 0]))
        return PersistenceDiagram(self.dots[order], self.dim, self.truncated, self.max_scale)

    def same_dots(self, other, atol=0.0) -> bool:
        a, b = self.sorted().dots, other.sorted().dots
        if a.shape != b.shape:
            return False
        inf_a, inf_b = np.isinf(a), np.isinf(b)
        if not np.array_equal(inf_a, inf_b):
            return False
        return bool(np.all(np.abs(a[~inf_a] - b[~inf_b]) <= atol))

    def to_csv(self) -> str:
        return diagrams_to_csv([self])


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))


def diagrams_to_csv(diagrams) -> str:
    out = io.StringIO()
    for d in diagrams:
        if d.truncated:
            out.write(f"# truncated at {_fmt(d.max_scale)}\n")
    out.write("dim,birth,death\n")
    for d in diagrams:
        for b, e in d.sorted().dots:
            out.write(f"{d.dim},{_fmt(b)},{_fmt(e)}\n")
    return out.getvalue()


def write_diagram(path, diagram):
    Path(path).write_text(diagram.to_csv(), encoding="utf-8")


def read_diagrams(source) -> dict[int, PersistenceDiagram]:
    """Parse diagram CSV text (or a path) into one diagram per dimension."""
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = str(source)
    truncated_at = None
    rows: dict[int, list] = {}
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("truncated at"):
                truncated_at = float(body.split()[-1])
            continue
        if not header_seen:
            if line.replace(" ", "") != "dim,birth,death":
                raise ValueError(f"line {lineno}: expected header 'dim,birth,death'")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 3 fields, got {len(parts)}")
        dim = int(parts[0])
        rows.setdefault(dim, []).append((float(parts[1]), float(parts[2])))
    out = {}
    for dim, dots in rows.items():
        out[dim] = PersistenceDiagram(np.array(dots), dim)
    for dim, d in out.items():
        if truncated_at is not None:
            d.truncated, d.max_scale = True, truncated_at
    return out


def read_diagram(source, dim=None) -> PersistenceDiagram:
    """Read a single-dimension diagram file; an empty file gives an empty diagram."""
    found = read_diagrams(source)
    if dim is None:
        if len(found) > 1:
            raise ValueError(f"file holds dimensions {sorted(found)}; pass dim")
        if not found:
            return PersistenceDiagram()
        return next(iter(found.values()))
    return found.get(dim, PersistenceDiagram(dim=dim))
