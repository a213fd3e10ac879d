"""Experiment runner, instance generators, report files and the mass-density demo."""
from __future__ import annotations

import csv
import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ._numeric import EXACT, FLOAT, to_json
from .axb import CZSet, cz_box, cz_hull_bound, side_range
from .core.certify import check_dyadic_conditions, hl4_constant, homogeneous_bound
from .core.instance import Instance
from .core.maximal import (FAIL, INCONCLUSIVE, PASS, empirical_hl_lower_bound, maximal_function,
                           random_setfunction, verify_hl_inequality)
from .core.ops import build_integral_setfunction
from .errors import ConfigurationError, MalformedInput
from .euclid import Box, Window, centered_balls, dyadic_instance, grid_instance
from .tree import TreeModel, fitting_trapezoids, tree_instance, width_witness

GEOMETRIES = ("dyadic", "grid-balls", "grid-cubes", "tree", "cz", "custom-json")

# where each geometry's constant comes from
PROVENANCE = {
    "dyadic": "nested-family",
    "grid-balls": "doubling",
    "grid-cubes": "doubling",
    "tree": "trapezoid",
    "cz": "cz-hull",
    "custom-json": "hull",
}


@dataclass
class ExperimentSpec:
    """What to build, which set functions to try, and which constant to verify.

    ``provenance`` defaults to the geometry's own route; ``"hull"`` is
    accepted for every geometry and takes ``c`` from :func:`hl4_constant`
    with ``lam = 2``.  An explicit ``c`` must equal the route's constant.
    """

    geometry: str
    params: dict = field(default_factory=dict)
    strategies: dict = field(default_factory=dict)
    c: object = None
    provenance: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise ConfigurationError(f"unknown geometry {self.geometry!r}; expected one of {GEOMETRIES}")
        if self.provenance is None:
            self.provenance = PROVENANCE[self.geometry]
        if self.provenance not in (PROVENANCE[self.geometry], "hull"):
            raise ConfigurationError(
                f"constant provenance {self.provenance!r} does not apply to geometry {self.geometry!r}")

    @classmethod
    def from_dict(cls, data):
        known = {"geometry", "params", "strategies", "c", "provenance", "seed"}
        extra = set(data) - known
        if extra:
            raise ConfigurationError(f"unknown spec keys {sorted(extra)}")
        if "geometry" not in data:
            raise ConfigurationError("spec needs a geometry")
        return cls(data["geometry"], dict(data.get("params", {})), dict(data.get("strategies", {})),
                   data.get("c"), data.get("provenance"), int(data.get("seed", 0)))

    def to_dict(self):
        return {"geometry": self.geometry, "params": self.params, "strategies": self.strategies,
                "c": to_json(self.c), "provenance": self.provenance, "seed": self.seed}


# ------------------------------------------------------------- generators
def _grid_window(n, side=1):
    return Window((0,) * n, (side,) * n)


def grid_cubes(window: Window, h, half_sides_cells: Sequence[int]):
    """Axis-parallel cubes of half-side ``k*h`` centered at every cell center."""
    h = Fraction(h)
    counts = [int((b - a) / h) for a, b in zip(window.lo, window.hi)]
    shapes, ids = [], []
    for cell in itertools.product(*(range(c) for c in counts)):
        c = [float(lo + (i + Fraction(1, 2)) * h) for lo, i in zip(window.lo, cell)]
        for k in half_sides_cells:
            r = float(k * h)
            shapes.append(Box(tuple(x - r for x in c), tuple(x + r for x in c)))
            ids.append("Q" + ",".join(map(str, cell)) + f"k{k}")
    return shapes, ids


def random_cz_family(n: int, count: int, rng: random.Random, h=Fraction(1, 16)):
    """Small-r CZ sets inside ``[0,1)^n x [-8,-4)`` resolvable on a grid of side ``h``."""
    out = []
    h = float(h)
    while len(out) < count:
        r = rng.uniform(max(h, 0.1), 0.5)
        t = rng.uniform(-7.5 + r, -4.5 - r)
        lo, hi = side_range(t, r)
        lo, hi = max(lo, 2 * h), min(hi, 1.0)
        if lo >= hi:
            continue
        L = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        corner = tuple(rng.uniform(0, 1 - L) for _ in range(n))
        out.append(CZSet(corner, L, t, r))
    return out


def build_instance(spec: ExperimentSpec, rng: random.Random):
    """Instance plus the geometry's own constant and an optional geometry witness."""
    p = spec.params
    g = spec.geometry
    if g == "dyadic":
        n = int(p.get("n", 1))
        inst = dyadic_instance(n, int(p.get("scale_min", 0)), int(p.get("scale_max", 6)), EXACT)
        return inst, 1, None
    if g in ("grid-balls", "grid-cubes"):
        n = int(p.get("n", 1))
        h = Fraction(p.get("h", "1/32"))
        window = _grid_window(n)
        radii = p.get("radii_cells", [1, 2, 4] if n > 1 else [1, 2, 4, 8])
        if g == "grid-balls":
            shapes, ids = centered_balls(window, h, radii, p.get("metric", "euclidean"))
        else:
            shapes, ids = grid_cubes(window, h, radii)
        inst = grid_instance(shapes, window, h, p.get("pointing", "containing"), FLOAT, ids)
        _, bound = homogeneous_bound(1, 2, 2 ** n)
        return inst, bound, None
    if g == "tree":
        model = TreeModel(int(p.get("q", 2)), int(p.get("depth", 6)), int(p.get("root_level", 0)),
                          p.get("convention", "standard"))
        family = fitting_trapezoids(model, "members", p.get("max_h"))
        return tree_instance(model, family, p.get("pointing", "containing")), 4, width_witness(model)
    if g == "cz":
        n = int(p.get("n", 1))
        h = Fraction(p.get("h", "1/16"))
        family = random_cz_family(n, int(p.get("count", 12)), rng, h)
        window = Window((0,) * n + (-8,), (1,) * n + (-4,))
        inst = grid_instance([cz_box(Z) for Z in family], window, h, "containing", FLOAT,
                             [f"Z{k}" for k in range(len(family))])
        return inst, cz_hull_bound(n), None
    # custom-json
    if "instance" in p:
        data = p["instance"]
        if isinstance(data, str):
            data = json.loads(Path(data).read_text())
        return Instance.from_dict(data), None, None
    raise ConfigurationError("custom-json geometry needs params.instance (inline object or path)")


def _random_density(instance: Instance, rng: random.Random):
    # sparse nonnegative density; exact values in exact mode
    out = {}
    for p in instance.point_ids:
        if rng.random() < 0.3:
            out[p] = Fraction(rng.randint(1, 1000), 100) if instance.mode == EXACT else rng.uniform(0, 10)
        else:
            out[p] = 0
    return out


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    c: object
    status: str
    rows: list              # one dict per set function tried
    search: Optional[dict]  # empirical lower-bound report
    summary: dict

    @property
    def passed(self):
        return self.status == PASS

    def to_dict(self):
        return {"spec": self.spec.to_dict(), "c": to_json(self.c), "status": self.status,
                "summary": self.summary, "search": self.search, "rows": self.rows}


def run_experiment(spec, out_dir=None) -> ExperimentResult:
    """Build the instance, verify ``c`` on every generated set function, write reports.

    Status is ``fail`` if any check fails (including a searched lower bound
    above ``c``), ``inconclusive`` if some check could not be decided, else
    ``pass``.  Output is a pure function of the spec (seeded RNG).
    """
    if isinstance(spec, dict):
        spec = ExperimentSpec.from_dict(spec)
    rng = random.Random(spec.seed)
    try:
        inst, own_c, witness = build_instance(spec, rng)
    except (MalformedInput, ConfigurationError) as exc:
        raise type(exc)(f"{spec.geometry} generator: {exc}") from exc
    notes = []
    if spec.provenance == "hull":
        c = hl4_constant(inst, 2)
    elif spec.geometry == "dyadic":
        rep = check_dyadic_conditions(inst)
        if not rep.passed:
            raise ConfigurationError("dyadic family fails the nested-family conditions")
        c = rep.certified_c
    else:
        c = own_c
    if spec.c is not None:
        given = inst.number(spec.c)
        if abs(float(given) - float(c)) > 1e-9 * max(1.0, abs(float(c))):
            raise ConfigurationError(
                f"c={spec.c} does not match the {spec.provenance} constant {to_json(c)} for {spec.geometry}")
    st = spec.strategies
    rows = []
    fns = []
    for k in range(int(st.get("random", 20))):
        fns.append(("random", random_setfunction(inst, rng, rng.choice((0.0, 0.5, 0.9)))))
    for k in range(int(st.get("integral", 0))):
        fns.append(("integral", build_integral_setfunction(inst, _random_density(inst, rng))))
    statuses = []
    first_profile = None
    for k, (kind, F) in enumerate(fns):
        rep = verify_hl_inequality(inst, F, c, witness=witness)
        statuses.append(rep.status)
        rows.append({"index": k, "strategy": kind, "status": rep.status, "ratio": to_json(rep.ratio),
                     "norm_lower": to_json(rep.norm_lower), "norm_upper": to_json(rep.norm_upper),
                     "norm_exact": rep.norm_exact, "witness_v": to_json(rep.witness_v)})
        if first_profile is None:
            first_profile = maximal_function(inst, F)
    search = None
    if st.get("search", True):
        s = st.get("search") if isinstance(st.get("search"), dict) else {}
        er = empirical_hl_lower_bound(inst, int(s.get("trials", 5)), int(s.get("ascent_steps", 10)),
                                      spec.seed)
        search = {"lower_bound": to_json(er.lower_bound), "strategy": er.strategy,
                  "norm_exact": er.norm_exact}
        if er.lower_bound > c * (1 + (inst.tol if inst.mode == FLOAT else 0)):
            statuses.append(FAIL)
            notes.append("searched lower bound exceeds c")
    if FAIL in statuses:
        status = FAIL
    elif INCONCLUSIVE in statuses:
        status = INCONCLUSIVE
    else:
        status = PASS
    summary = {"points": inst.n_points, "sets": inst.n_sets, "mode": inst.mode,
               "checked": len(fns), "failed": statuses.count(FAIL),
               "inconclusive": statuses.count(INCONCLUSIVE), "notes": notes}
    result = ExperimentResult(spec, c, status, rows, search, summary)
    if out_dir is not None:
        write_reports(result, inst, first_profile, out_dir)
    return result


def write_reports(result: ExperimentResult, instance: Instance, profile, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "result.json").write_text(json.dumps(result.to_dict(), indent=2, sort_keys=True))
    with open(out / "verdicts.csv", "w", newline="") as fh:
        cols = ["index", "strategy", "status", "ratio", "norm_lower", "norm_upper", "norm_exact", "witness_v"]
        w = csv.DictWriter(fh, cols)
        w.writeheader()
        w.writerows(result.rows)
    if profile is not None:
        with open(out / "profile.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["point", "maximal"])
            for pid, v in zip(instance.point_ids, profile.values):
                w.writerow([pid, to_json(v)])


def aggregate_reports(directory) -> list:
    """One summary row per ``result.json`` below ``directory``; also writes ``summary.csv``."""
    root = Path(directory)
    rows = []
    for path in sorted(root.rglob("result.json")):
        data = json.loads(path.read_text())
        rows.append({"run": str(path.parent.relative_to(root)) or ".",
                     "geometry": data["spec"]["geometry"], "c": data["c"], "status": data["status"],
                     "checked": data["summary"]["checked"], "failed": data["summary"]["failed"],
                     "lower_bound": (data.get("search") or {}).get("lower_bound")})
    with open(root / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, ["run", "geometry", "c", "status", "checked", "failed", "lower_bound"])
        w.writeheader()
        w.writerows(rows)
    return rows


# ------------------------------------------------------------ mass density
CUBE_CONSTANT_3D = 2 ** 12


@dataclass(frozen=True)
class MassDistribution:
    """Point masses in ``R^3`` with total ``M``; ``alpha`` is the fraction of ``M`` to exceed.

    ``alpha`` is dimensionless here: a side-``s`` cube qualifies when it
    captures more than ``alpha * M``.
    """

    positions: tuple
    masses: tuple
    alpha: float
    side: float = 1.0

    def __post_init__(self):
        pos = tuple(tuple(float(c) for c in p) for p in self.positions)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        if not pos:
            raise MalformedInput("empty particle list")
        if len(pos) != len(self.masses):
            raise MalformedInput("positions and masses differ in length")
        if any(len(p) != 3 for p in pos):
            raise MalformedInput("particles must be points of R^3")
        if any(not m > 0 for m in self.masses):
            raise MalformedInput("particle masses must be positive")
        if not 0 < self.alpha < 1:
            raise MalformedInput(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.side > 0:
            raise MalformedInput("cube side must be positive")

    @property
    def total(self):
        return sum(self.masses)

    @classmethod
    def from_dict(cls, data, alpha=None, side=None):
        parts = data["particles"] if isinstance(data, dict) else data
        pos = [p["x"] for p in parts]
        mass = [p.get("m", 1.0) for p in parts]
        a = alpha if alpha is not None else data.get("alpha")
        s = side if side is not None else (data.get("side", 1.0) if isinstance(data, dict) else 1.0)
        if a is None:
            raise MalformedInput("alpha is required")
        return cls(pos, mass, float(a), float(s))


@dataclass(frozen=True)
class RegionEstimate:
    volume: float
    bound: float
    cells: int
    h: float

    def to_dict(self):
        return {"volume": self.volume, "bound": self.bound, "cells": self.cells, "h": self.h,
                "within_bound": self.volume <= self.bound}


def _axis_capture(x, pos, s):
    """Per-axis candidate cube corners for grid coordinates ``x`` and what each captures.

    A corner ``c`` gives a cube ``[c, c+s)`` holding ``x`` iff ``c`` is in
    ``(x-s, x]``, and capturing particle ``j`` iff ``c`` is in ``(p_j-s, p_j]``.
    The best corners can be taken among ``x`` and the ``p_j`` in ``(x-s, x]``.
    Returns ``valid`` of shape ``(N+1, G)`` and ``hit`` of shape ``(N+1, G, N)``.
    """
    cand = np.concatenate([x[None, :], np.broadcast_to(pos[:, None], (len(pos), len(x)))])
    valid = (cand > x[None, :] - s) & (cand <= x[None, :])
    hit = (cand[:, :, None] > pos[None, None, :] - s) & (cand[:, :, None] <= pos[None, None, :])
    return valid, hit


def mass_density_region(dist: MassDistribution, h: float = 0.05) -> RegionEstimate:
    """Volume of ``{x : some side-s cube containing x captures more than alpha*M}``.

    Sampled at the centers of a side-``h`` grid over the particles' bounding
    box grown by ``s``; each sample is decided exactly.  The bound is
    ``alpha^-1 * 2^12 * s^3`` (cube-family weak-type constant in ``R^3``).
    """
    if not h > 0:
        raise MalformedInput("resolution must be positive")
    pos = np.array(dist.positions)
    m = np.array(dist.masses)
    s = dist.side
    thresh = dist.alpha * dist.total
    axes = []
    for d in range(3):
        lo = pos[:, d].min() - s
        k = int(math.ceil((pos[:, d].max() + s - lo) / h))
        axes.append(lo + (np.arange(k) + 0.5) * h)
    caps = [_axis_capture(ax, pos[:, d], s) for d, ax in enumerate(axes)]
    N = len(m)
    best = np.zeros(tuple(len(a) for a in axes))
    for a, b, c in itertools.product(range(N + 1), repeat=3):
        va, ha = caps[0][0][a], caps[0][1][a]
        vb, hb = caps[1][0][b], caps[1][1][b]
        vc, hc = caps[2][0][c], caps[2][1][c]
        hit = ha[:, None, None, :] & hb[None, :, None, :] & hc[None, None, :, :]
        mass = hit @ m
        ok = va[:, None, None] & vb[None, :, None] & vc[None, None, :]
        np.maximum(best, np.where(ok, mass, 0.0), out=best)
    count = int(np.count_nonzero(best > thresh))
    bound = CUBE_CONSTANT_3D / dist.alpha * s ** 3
    return RegionEstimate(count * h ** 3, bound, count, h)


def particle_count_region(positions, alpha: float, h: float = 0.05, side: float = 1.0) -> RegionEstimate:
    """:func:`mass_density_region` with unit masses (a count of particles per cube)."""
    return mass_density_region(MassDistribution(positions, [1.0] * len(positions), alpha, side), h)


def interval_region_length(points: Sequence, masses: Sequence, threshold, s=1) -> Fraction:
    """Exact 1-D oracle: length of ``{x : some [c, c+s) containing x captures > threshold}``.

    Capture is piecewise constant in ``c`` with breaks at ``p_j - s`` and
    ``p_j``; every elementary piece (and every breakpoint) is tested, and the
    region is the union of ``[a, b + s)`` over qualifying ``c``-ranges ``[a, b]``.
    """
    pts = [Fraction(p) for p in points]
    ms = [Fraction(x) for x in masses]
    s = Fraction(s)
    thr = Fraction(threshold)
    brk = sorted(set(pts) | {p - s for p in pts})

    def captured(c):
        return sum((m for p, m in zip(pts, ms) if c <= p < c + s), Fraction(0))

    good = []
    for a in brk:
        if captured(a) > thr:
            good.append((a, a))
    for a, b in zip(brk, brk[1:]):
        if captured((a + b) / 2) > thr:
            good.append((a, b))
    spans = sorted((a, b + s) for a, b in good)
    total = Fraction(0)
    cur = None
    for a, b in spans:
        if cur is None or a > cur[1]:
            if cur is not None:
                total += cur[1] - cur[0]
            cur = [a, b]
        else:
            cur[1] = max(cur[1], b)
    if cur is not None:
        total += cur[1] - cur[0]
    return total
