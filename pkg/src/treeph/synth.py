"""Synthetic cohorts of embedded trees with plantable age and sex effects.

Each subject is a random binary branching tree grown inside a box.  Branch
centre lines run close to horizontal and carry a vertical sinusoidal bend
whose amplitude is ``bend_base + bend_slope * age`` plus noise; every bend
trough is a local minimum of height, so the amplitude shows up directly in
the zero-dimensional persistences.  Optional near-loops (two arcs leaving
the same vertex and tracing a horizontal circle that stops just short of
closing) leave the tree acyclic but produce a loop in the thickening whose
persistence grows with the circle radius; for male subjects the radius is
multiplied by ``sex_effect_size``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .treeio import EmbeddedTree, ManifestRow, write_manifest, write_tree


@dataclass
class SynthSpec:
    n_subjects: int = 60
    seed: int = 0
    branch_count: tuple[int, int] = (24, 32)
    branch_length: tuple[float, float] = (20.0, 45.0)  # mm
    bend_base: float = 2.0  # mm
    bend_slope: float = 0.05  # mm per year of age
    bend_noise: float = 0.15  # mm, standard deviation
    bend_cycles: tuple[float, float] = (1.0, 2.5)  # per branch
    loop_count: int = 4
    loop_probability: float = 0.9
    loop_radius: tuple[float, float] = (8.0, 12.0)  # mm
    loop_gap: float = 1.5  # mm between the two arc ends
    sex_effect_size: float = 1.0
    age_range: tuple[float, float] = (18.0, 72.0)
    box: tuple[float, float, float] = (120.0, 120.0, 100.0)  # mm
    vertex_spacing: float = 1.0  # mm

    def validate(self):
        if self.n_subjects < 1:
            raise ValueError("n_subjects must be positive")
        lo, hi = self.age_range
        if not 0 < lo <= hi:
            raise ValueError("age_range must be positive and ordered")
        if self.bend_base <= 0 or min(self.bend_base + self.bend_slope * a for a in (lo, hi)) <= 0:
            raise ValueError("bend amplitude must stay positive over the age range")
        if self.loop_radius[0] <= 0 or self.loop_radius[1] < self.loop_radius[0]:
            raise ValueError("loop_radius must be a positive ordered range")
        if not 0 <= self.loop_probability <= 1:
            raise ValueError("loop_probability must lie in [0, 1]")
        if self.sex_effect_size <= 0:
            raise ValueError("sex_effect_size must be positive")
        if self.branch_count[0] < 1 or self.branch_count[1] < self.branch_count[0]:
            raise ValueError("branch_count must be a positive ordered range")
        if self.vertex_spacing <= 0 or self.loop_gap <= 0:
            raise ValueError("vertex_spacing and loop_gap must be positive")


class _Builder:
    def __init__(self):
        self.pos = []
        self.edges = []

    def add(self, p, parent=None):
        vid = len(self.pos)
        self.pos.append(np.asarray(p, dtype=float))
        if parent is not None:
            self.edges.append((parent, vid))
        return vid

    def polyline(self, pts, start_vid):
        prev = start_vid
        for p in pts:
            prev = self.add(p, prev)
        return prev


def _horizontal_turn(d, angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * d[0] - s * d[1], s * d[0] + c * d[1], d[2]])


def _unit(v):
    return v / np.linalg.norm(v)


def _grow_branch(rng, start, direction, spec, amplitude, box):
    length = rng.uniform(*spec.branch_length)
    margin = 5.0
    d = direction.copy()
    end = start + length * d
    for ax in range(3):
        if end[ax] < margin or end[ax] > box[ax] - margin:
            d[ax] = -d[ax]
    d = _unit(d)
    k = max(2, int(math.ceil(length / spec.vertex_spacing)))
    t = np.arange(1, k + 1) / k * length
    cycles = rng.uniform(*spec.bend_cycles)
    phase_sign = rng.choice([-1.0, 1.0])
    pts = start + np.outer(t, d)
    pts[:, 2] += phase_sign * amplitude * np.sin(2 * np.pi * cycles * t / length)
    pts = np.clip(pts, 0.0, np.asarray(box))
    return pts, d


def _add_loop(rng, b, at_vid, radius, spec):
    p = b.pos[at_vid]
    theta0 = rng.uniform(0, 2 * np.pi)
    u = np.array([math.cos(theta0), math.sin(theta0), 0.0])
    center = p + radius * u
    start_angle = theta0 + np.pi  # angle of p seen from the centre
    half_span = np.pi - spec.loop_gap / (2 * radius)
    n_arc = max(3, int(math.ceil(radius * half_span / spec.vertex_spacing)))
    rise = 0.02  # slight climb so the arcs add no height minima
    for sign in (1.0, -1.0):
        ang = start_angle + sign * np.linspace(0, half_span, n_arc + 1)[1:]
        arc = np.column_stack([
            center[0] + radius * np.cos(ang),
            center[1] + radius * np.sin(ang),
            p[2] + rise * radius * np.abs(ang - start_angle),
        ])
        b.polyline(arc, at_vid)


def generate_tree(rng, spec: SynthSpec, amplitude: float, loop_scale: float = 1.0) -> EmbeddedTree:
    box = np.asarray(spec.box, dtype=float)
    b = _Builder()
    root = b.add([box[0] / 2, box[1] / 2, 10.0])
    n_branches = int(rng.integers(spec.branch_count[0], spec.branch_count[1] + 1))
    ang = rng.uniform(0, 2 * np.pi)
    first = _unit(np.array([math.cos(ang), math.sin(ang), rng.uniform(0.1, 0.35)]))
    queue = [(root, first)]
    made = 0
    ends = []
    while queue and made < n_branches:
        start_vid, d = queue.pop(0)
        pts, d = _grow_branch(rng, b.pos[start_vid], d, spec, amplitude, box)
        end_vid = b.polyline(pts, start_vid)
        made += 1
        ends.append(end_vid)
        for sign in (1.0, -1.0):
            turn = sign * rng.uniform(np.radians(25), np.radians(70))
            nd = _horizontal_turn(d, turn)
            nd[2] = rng.uniform(-0.35, 0.35)
            queue.append((end_vid, _unit(nd)))

    for _ in range(spec.loop_count):
        if rng.random() < spec.loop_probability:
            at = ends[int(rng.integers(len(ends)))]
            radius = rng.uniform(*spec.loop_radius) * loop_scale
            _add_loop(rng, b, at, radius, spec)
    return EmbeddedTree(np.arange(len(b.pos)), np.array(b.pos), b.edges)


def generate_cohort(spec: SynthSpec):
    """Build ``spec.n_subjects`` trees and their manifest rows.

    Ages are uniform on ``age_range``; sexes are split as evenly as possible
    and shuffled.  Each subject draws from its own seeded stream, so a
    subject's tree depends only on (seed, index, age, sex).
    """
    spec.validate()
    cohort_rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 0]))
    n = spec.n_subjects
    ages = np.round(cohort_rng.uniform(*spec.age_range, size=n), 1)
    sexes = np.array(["M"] * (n // 2) + ["F"] * (n - n // 2))
    cohort_rng.shuffle(sexes)
    trees, rows = [], []
    width = max(3, len(str(n - 1)))
    for s in range(n):
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 1, s]))
        age = float(ages[s])
        amp = spec.bend_base + spec.bend_slope * age + spec.bend_noise * rng.standard_normal()
        amp = max(amp, 0.05 * spec.bend_base)
        loop_scale = spec.sex_effect_size if sexes[s] == "M" else 1.0
        trees.append(generate_tree(rng, spec, amp, loop_scale))
        sid = f"S{s:0{width}d}"
        rows.append(ManifestRow(sid, f"{sid}.tree", age, str(sexes[s])))
    return trees, rows


def write_cohort(directory, trees, rows):
    """Write one ``.tree`` file per subject plus ``manifest.csv``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for tree, row in zip(trees, rows):
        write_tree(out / row.tree_path, tree)
    write_manifest(out / "manifest.csv", rows)
    return out / "manifest.csv"
