"""Embedded trees: parsing, serialization, total length and subsampling.

Tree files are plain UTF-8 text, one record per line::

    # comment
    v <id> <x> <y> <z> [radius]
    e <id1> <id2>

Coordinates are in millimetres.  Point clouds are written one ``x y z``
triple per line, and cohort manifests are CSV files with the header
``subject_id,tree_path,age,sex``.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    CycleWarning,
    DuplicateVertexError,
    TreeFormatError,
    TreeParseError,
    TreeReferenceError,
)


@dataclass
class EmbeddedTree:
    """Vertices in R^3 with optional radii, plus an undirected edge list.

    ``positions[k]`` belongs to vertex ``ids[k]``; ``edges`` holds vertex ids.
    ``branches`` is derived: each branch is the vertex-id sequence of a
    maximal unbranched path, and together they cover every edge once.
    """

    ids: np.ndarray
    positions: np.ndarray
    edges: list[tuple[int, int]]
    radii: np.ndarray | None = None
    has_cycle: bool = field(default=False, init=False)
    _branches: list | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.int64)
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        if self.radii is not None:
            self.radii = np.asarray(self.radii, dtype=float)
        self.edges = [(int(a), int(b)) for a, b in self.edges]
        _validate(self)
        self.has_cycle = _has_cycle(self.ids, self.edges)

    @property
    def branches(self):
        if self._branches is None:
            self._branches = branch_partition(self.ids, self.edges)
        return self._branches

    @property
    def n_vertices(self):
        return len(self.ids)

    def index_of(self):
        return {int(v): k for k, v in enumerate(self.ids)}

    def edge_index_array(self):
        """Edges as an (E, 2) array of row indices into ``positions``."""
        idx = self.index_of()
        return np.array([(idx[a], idx[b]) for a, b in self.edges], dtype=np.int64).reshape(-1, 2)

    def position(self, vid):
        return self.positions[self.index_of()[vid]]


@dataclass
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(self.points)):
            raise ValueError("point cloud has non-finite coordinates")

    def __len__(self):
        return len(self.points)


@dataclass
class ManifestRow:
    subject_id: str
    tree_path: str
    age: float
    sex: str


def _validate(tree):
    if len(tree.ids) != len(tree.positions):
        raise ValueError("ids and positions differ in length")
    if tree.radii is not None and len(tree.radii) != len(tree.ids):
        raise ValueError("radii and ids differ in length")
    seen = set()
    for v in tree.ids.tolist():
        if v in seen:
            raise DuplicateVertexError(f"duplicate vertex id {v}")
        seen.add(v)
    for a, b in tree.edges:
        for v in (a, b):
            if v not in seen:
                raise TreeReferenceError(f"edge ({a}, {b}) references undefined vertex {v}")
        if a == b:
            raise TreeFormatError(f"self-loop on vertex {a}")


def _adjacency(ids, edges):
    adj = defaultdict(list)
    for v in np.asarray(ids).tolist():
        adj[v]
    for k, (a, b) in enumerate(edges):
        adj[a].append((b, k))
        adj[b].append((a, k))
    return adj


def _has_cycle(ids, edges):
    parent = {v: v for v in np.asarray(ids).tolist()}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            return True
        parent[ra] = rb
    return False


def branch_partition(ids, edges):
    """Split the edge set into maximal paths whose interior vertices have degree 2.

    Returns a list of vertex-id sequences.  Pure cycles of degree-2 vertices
    come back as a closed sequence (first id repeated at the end).
    """
    adj = _adjacency(ids, edges)
    used = [False] * len(edges)
    branches = []

    def walk(start, first_nbr, first_edge):
        path = [start, first_nbr]
        used[first_edge] = True
        prev_edge, cur = first_edge, first_nbr
        while len(adj[cur]) == 2 and cur != start:
            (n0, e0), (n1, e1) = adj[cur]
            nxt, ne = (n1, e1) if e0 == prev_edge else (n0, e0)
            if used[ne]:
                break
            used[ne] = True
            path.append(nxt)
            prev_edge, cur = ne, nxt
        return path

    for v in sorted(adj):
        if len(adj[v]) != 2:
            for nbr, k in sorted(adj[v]):
                if not used[k]:
                    branches.append(walk(v, nbr, k))
    # whatever is left lies on cycles made only of degree-2 vertices
    for v in sorted(adj):
        for nbr, k in sorted(adj[v]):
            if not used[k]:
                branches.append(walk(v, nbr, k))
    return branches


def parse_tree(stream) -> EmbeddedTree:
    """Read a tree from a text stream, an iterable of lines, or a string."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    ids, pos, radii, edges = [], [], [], []
    seen: dict[int, int] = {}
    edge_lines = []
    for lineno, raw in enumerate(stream, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        try:
            if tag == "v":
                if len(parts) not in (5, 6):
                    raise TreeFormatError("vertex record needs 'v id x y z [radius]'", lineno)
                vid = _parse_id(parts[1], lineno)
                xyz = [float(t) for t in parts[2:5]]
                r = float(parts[5]) if len(parts) == 6 else math.nan
                if not all(math.isfinite(c) for c in xyz):
                    raise TreeFormatError("non-finite coordinate", lineno)
                if vid in seen:
                    raise DuplicateVertexError(
                        f"vertex id {vid} already defined on line {seen[vid]}", lineno
                    )
                seen[vid] = lineno
                ids.append(vid)
                pos.append(xyz)
                radii.append(r)
            elif tag == "e":
                if len(parts) != 3:
                    raise TreeFormatError("edge record needs 'e id1 id2'", lineno)
                a, b = _parse_id(parts[1], lineno), _parse_id(parts[2], lineno)
                if a == b:
                    raise TreeFormatError(f"self-loop on vertex {a}", lineno)
                edges.append((a, b))
                edge_lines.append(lineno)
            else:
                raise TreeFormatError(f"unknown record type {tag!r}", lineno)
        except TreeParseError:
            raise
        except ValueError as exc:
            raise TreeFormatError(str(exc), lineno) from None

    for (a, b), lineno in zip(edges, edge_lines):
        for v in (a, b):
            if v not in seen:
                raise TreeReferenceError(f"edge references undefined vertex {v}", lineno)

    radius_arr = np.array(radii, dtype=float)
    if np.all(np.isnan(radius_arr)):
        radius_arr = None
    tree = EmbeddedTree(np.array(ids, dtype=np.int64), np.array(pos).reshape(-1, 3), edges, radius_arr)
    if tree.has_cycle:
        warnings.warn("tree edge set contains a cycle", CycleWarning, stacklevel=2)
    return tree


def _parse_id(token, lineno):
    try:
        v = int(token)
    except ValueError:
        raise TreeFormatError(f"vertex id {token!r} is not an integer", lineno) from None
    if v < 0:
        raise TreeFormatError(f"vertex id {v} is negative", lineno)
    return v


def load_tree(path) -> EmbeddedTree:
    with open(path, encoding="utf-8") as fh:
        return parse_tree(fh)


def serialize_tree(tree: EmbeddedTree) -> str:
    out = io.StringIO()
    radii = tree.radii.tolist() if tree.radii is not None else None
    for k, (vid, (x, y, z)) in enumerate(zip(tree.ids.tolist(), tree.positions.tolist())):
        line = f"v {vid} {x!r} {y!r} {z!r}"
        if radii is not None and not math.isnan(radii[k]):
            line += f" {radii[k]!r}"
        out.write(line + "\n")
    for a, b in tree.edges:
        out.write(f"e {a} {b}\n")
    return out.getvalue()


def write_tree(path, tree):
    Path(path).write_text(serialize_tree(tree), encoding="utf-8")


def total_length(tree: EmbeddedTree) -> float:
    """Sum of Euclidean edge lengths (mm)."""
    if not tree.edges:
        return 0.0
    e = tree.edge_index_array()
    seg = tree.positions[e[:, 1]] - tree.positions[e[:, 0]]
    return float(np.sum(np.linalg.norm(seg, axis=1)))


def _allocate(weights, total, rng, minimum):
    """Largest-remainder split of ``total`` items over ``weights``.

    Every slot first receives ``minimum`` items when ``total`` allows it;
    remainder ties are broken by a seeded random key.
    """
    k = len(weights)
    base = np.full(k, minimum if total >= minimum * k else 0, dtype=np.int64)
    rest = total - int(base.sum())
    w = np.asarray(weights, dtype=float)
    if rest == 0:
        return base
    if w.sum() <= 0:
        w = np.ones(k)
    quota = w / w.sum() * rest
    share = np.floor(quota).astype(np.int64)
    short = rest - int(share.sum())
    frac = quota - share
    order = np.lexsort((rng.random(k), -frac))
    share[order[:short]] += 1
    return base + share


def subsample(tree: EmbeddedTree, m: int, seed: int = 0) -> PointCloud:
    """Resample the tree to ``m`` points spread evenly along its branches.

    Branch end points (vertices of degree other than 2) are always kept.
    The remaining budget goes to branch interiors in proportion to branch
    arc length, at least one point per branch when the budget allows, and
    each branch places its points at uniform arc-length spacing.  Trees
    with no more than ``m`` vertices are returned whole.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if tree.n_vertices <= m:
        return PointCloud(tree.positions.copy())
    rng = np.random.default_rng(seed)
    idx = tree.index_of()
    touched = {v for e in tree.edges for v in e}
    nodes = {b[0] for b in tree.branches} | {b[-1] for b in tree.branches}
    nodes = sorted(nodes | (set(tree.ids.tolist()) - touched))
    if len(nodes) >= m:
        pick = np.sort(rng.choice(len(nodes), size=m, replace=False))
        return PointCloud(np.array([tree.positions[idx[nodes[k]]] for k in pick]))

    polylines = [tree.positions[[idx[v] for v in b]] for b in tree.branches]
    seglens = [np.linalg.norm(np.diff(p, axis=0), axis=1) for p in polylines]
    lengths = np.array([s.sum() for s in seglens])
    counts = _allocate(lengths, m - len(nodes), rng, minimum=1)

    pts = [tree.positions[idx[v]] for v in nodes]
    for poly, seg, length, k in zip(polylines, seglens, lengths, counts):
        if k == 0:
            continue
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        targets = length * np.arange(1, k + 1) / (k + 1)
        coords = np.column_stack([np.interp(targets, cum, poly[:, c]) for c in range(3)])
        pts.extend(coords)
    return PointCloud(np.array(pts))


def write_point_cloud(path, cloud: PointCloud):
    with open(path, "w", encoding="utf-8") as fh:
        for row in cloud.points.tolist():
            fh.write(" ".join(repr(c) for c in row) + "\n")


def read_point_cloud(path) -> PointCloud:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if rows and len(parts) != len(rows[0]):
                raise TreeFormatError("point records must all have the same length", lineno)
            rows.append([float(t) for t in parts])
    return PointCloud(np.array(rows))


MANIFEST_FIELDS = ["subject_id", "tree_path", "age", "sex"]


def read_manifest(path) -> list[ManifestRow]:
    """Read a cohort manifest; relative tree paths resolve against its folder."""
    path = Path(path)
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != MANIFEST_FIELDS:
            raise ValueError(f"{path}: manifest header must be {','.join(MANIFEST_FIELDS)}")
        seen = set()
        for lineno, rec in enumerate(reader, 2):
            sid = rec["subject_id"].strip()
            if sid in seen:
                raise ValueError(f"{path}:{lineno}: duplicate subject_id {sid!r}")
            seen.add(sid)
            age = float(rec["age"])
            if not age > 0:
                raise ValueError(f"{path}:{lineno}: age must be positive")
            sex = rec["sex"].strip().upper()
            if sex not in ("M", "F"):
                raise ValueError(f"{path}:{lineno}: sex must be M or F")
            tree_path = Path(rec["tree_path"].strip())
            if not tree_path.is_absolute():
                tree_path = path.parent / tree_path
            rows.append(ManifestRow(sid, str(tree_path), age, sex))
    return rows


def write_manifest(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_FIELDS)
        for r in rows:
            w.writerow([r.subject_id, r.tree_path, repr(float(r.age)), r.sex])
