"""Euclidean kernels: balls, dyadic cubes, closed sets, Whitney cubes and grid instances."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from ._numeric import EXACT, FLOAT
from .core.instance import Instance
from .covering import CoverSelection, CoverVerdict, GaugedFamily, greedy_vitali
from .errors import ConfigurationError, MalformedInput

EUCLIDEAN = "euclidean"
MAX = "max"


def _frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


# ------------------------------------------------------------------- balls
@dataclass(frozen=True)
class Ball:
    """Open ball ``{y : d(y, center) < radius}`` for the Euclidean or max metric."""

    center: tuple
    radius: float
    metric: str = EUCLIDEAN

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(self.center))
        if not self.radius > 0:
            raise MalformedInput(f"ball radius must be positive, got {self.radius}")
        if self.metric not in (EUCLIDEAN, MAX):
            raise MalformedInput(f"unknown metric {self.metric!r}")

    @property
    def dim(self):
        return len(self.center)

    def dist_center(self, p):
        if self.metric == MAX:
            return max(abs(a - b) for a, b in zip(self.center, p))
        return math.dist(self.center, p)

    def contains_point(self, p) -> bool:
        return self.dist_center(p) < self.radius

    def meets(self, other: "Ball") -> bool:
        return self.dist_center(other.center) < self.radius + other.radius

    def contains_ball(self, other: "Ball", tol: float = 0.0) -> bool:
        """Exact containment test ``d(c, c') + r' <= r`` (with ``tol`` slack)."""
        return self.dist_center(other.center) + other.radius <= self.radius * (1 + tol)


def ball_dilate(ball: Ball, t) -> Ball:
    """Same center, radius multiplied by ``t >= 1``."""
    if t < 1:
        raise MalformedInput(f"dilation factor must be >= 1, got {t}")
    return Ball(ball.center, ball.radius * t, ball.metric)


def vitali_5b(balls: Sequence[Ball], lam=2) -> CoverSelection:
    """Greedy radius selection with dilation ``5B``: disjoint balls whose 5-fold dilates cover all."""
    fam = GaugedFamily(tuple(balls), tuple(b.radius for b in balls), lam,
                       dilation=tuple(ball_dilate(b, 5) for b in balls),
                       meets=lambda a, b: a.meets(b))
    return greedy_vitali(fam)


def verify_5b_cover(balls: Sequence[Ball], selection: CoverSelection, tol: float = 1e-12) -> CoverVerdict:
    """Chosen balls pairwise disjoint and each input ball inside some chosen ``5B``."""
    chosen = [balls[k] for k in selection.chosen]
    for a, b in itertools.combinations(range(len(chosen)), 2):
        if chosen[a].meets(chosen[b]):
            return CoverVerdict(False, "chosen balls intersect",
                                (selection.chosen[a], selection.chosen[b]))
    hulls = selection.hulls
    for k, b in enumerate(balls):
        if not any(h.contains_ball(b, tol) for h in hulls):
            return CoverVerdict(False, "ball not contained in any chosen 5B", k)
    return CoverVerdict(True)


# ------------------------------------------------------------ dyadic cubes
@dataclass(frozen=True, order=True)
class DyadicCube:
    """``2**scale * (index + [0,1)^n)``."""

    scale: int
    index: tuple

    def __post_init__(self):
        object.__setattr__(self, "index", tuple(int(i) for i in self.index))

    @property
    def dim(self):
        return len(self.index)

    @property
    def side(self) -> Fraction:
        return Fraction(2) ** self.scale

    @property
    def lo(self):
        s = self.side
        return tuple(i * s for i in self.index)

    @property
    def hi(self):
        s = self.side
        return tuple((i + 1) * s for i in self.index)

    def parent(self):
        return DyadicCube(self.scale + 1, tuple(i >> 1 for i in self.index))

    def ancestor(self, scale: int):
        shift = scale - self.scale
        return DyadicCube(scale, tuple(i >> shift for i in self.index))

    def children(self):
        for bits in itertools.product((0, 1), repeat=self.dim):
            yield DyadicCube(self.scale - 1, tuple(2 * i + b for i, b in zip(self.index, bits)))

    def contains_point(self, p) -> bool:
        return all(lo <= x < hi for lo, hi, x in zip(self.lo, self.hi, p))

    @classmethod
    def containing(cls, p, scale: int) -> "DyadicCube":
        s = Fraction(2) ** scale
        return cls(scale, tuple(math.floor(_frac(x) / s) for x in p))

    @property
    def id(self):
        return f"D{self.scale}[{','.join(map(str, self.index))}]"

    def to_dict(self):
        return {"scale": self.scale, "index": list(self.index)}


def dyadic_relate(a: DyadicCube, b: DyadicCube) -> str:
    """``equal``, ``contains`` (a contains b), ``contained`` or ``disjoint``; exact."""
    if a.dim != b.dim:
        raise MalformedInput("dyadic cubes of different dimension")
    if a.scale == b.scale:
        return "equal" if a.index == b.index else "disjoint"
    if a.scale > b.scale:
        return "contains" if b.ancestor(a.scale).index == a.index else "disjoint"
    return "contained" if a.ancestor(b.scale).index == b.index else "disjoint"


def dyadic_instance(n: int, scale_min: int, scale_max: int, mode: str = EXACT) -> Instance:
    """All dyadic cubes with scales ``scale_min..scale_max`` inside ``[0, 2**scale_max)^n``.

    Points are the cubes of scale ``scale_min`` with Lebesgue weight
    ``2**(n*scale_min)``; every point is pointed to every cube containing it.
    """
    if n < 1 or scale_min > scale_max:
        raise MalformedInput("need n >= 1 and scale_min <= scale_max")
    k = scale_max - scale_min
    cells = list(itertools.product(range(2 ** k), repeat=n))
    pid = ["c" + ",".join(map(str, c)) for c in cells]
    groups = {}
    for c, p in zip(cells, pid):
        for s in range(k + 1):
            groups.setdefault((s, tuple(i >> s for i in c)), []).append(p)
    sets = [(DyadicCube(scale_min + s, idx).id, mem) for (s, idx), mem in sorted(groups.items())]
    w = Fraction(2) ** (n * scale_min)
    return Instance.build([(p, w if mode == EXACT else float(w)) for p in pid], sets, mode=mode)


# --------------------------------------------------------------- closed sets
INF = float("inf")


def _coord(x):
    if isinstance(x, str) and x.strip().lower() in ("inf", "+inf", "-inf"):
        return INF if not x.strip().startswith("-") else -INF
    if isinstance(x, float) and math.isinf(x):
        return x
    return _frac(x)


@dataclass(frozen=True)
class ClosedSetSpec:
    """Finite union of closed axis-aligned boxes (possibly unbounded) and isolated points."""

    boxes: tuple = ()   # ((lo...), (hi...)) pairs
    points: tuple = ()

    def __post_init__(self):
        boxes = tuple((tuple(_coord(x) for x in lo), tuple(_coord(x) for x in hi))
                      for lo, hi in self.boxes)
        points = tuple(tuple(_frac(x) for x in p) for p in self.points)
        object.__setattr__(self, "boxes", boxes)
        object.__setattr__(self, "points", points)
        if not boxes and not points:
            raise MalformedInput("closed set must be nonempty")
        dims = {len(lo) for lo, _ in boxes} | {len(hi) for _, hi in boxes} | {len(p) for p in points}
        if len(dims) != 1:
            raise MalformedInput("closed set components have mixed dimensions")
        for lo, hi in boxes:
            if any(a > b for a, b in zip(lo, hi)):
                raise MalformedInput("box with lo > hi")

    @property
    def dim(self):
        return len(self.boxes[0][0]) if self.boxes else len(self.points[0])

    def components(self):
        yield from self.boxes
        for p in self.points:
            yield p, p

    @classmethod
    def from_dict(cls, data):
        return cls(tuple((b["lo"], b["hi"]) for b in data.get("boxes", ())),
                   tuple(data.get("points", ())))

    def to_dict(self):
        def j(x):
            return str(x) if isinstance(x, float) else (str(x) if x.denominator != 1 else int(x))
        return {"boxes": [{"lo": [j(x) for x in lo], "hi": [j(x) for x in hi]} for lo, hi in self.boxes],
                "points": [[j(x) for x in p] for p in self.points]}


def _gap(lo1, hi1, lo2, hi2):
    g = max(lo2 - hi1, lo1 - hi2)
    return g if g > 0 else 0


def box_dist2(lo1, hi1, lo2, hi2):
    """Squared Euclidean distance between closed boxes (exact for rational data)."""
    return sum(_gap(a, b, c, d) ** 2 for a, b, c, d in zip(lo1, hi1, lo2, hi2))


def dist2_to_closed(lo, hi, F: ClosedSetSpec):
    if len(lo) != F.dim:
        raise MalformedInput("dimension mismatch with closed set")
    return min(box_dist2(lo, hi, clo, chi) for clo, chi in F.components())


def dist_to_closed(obj, F: ClosedSetSpec) -> float:
    """Distance from a dyadic cube (its closure) or a point to ``F``."""
    if isinstance(obj, DyadicCube):
        lo, hi = obj.lo, obj.hi
    else:
        lo = hi = tuple(_frac(x) for x in obj)
    return math.sqrt(dist2_to_closed(lo, hi, F))


def whitney_admissible(cube: DyadicCube, F: ClosedSetSpec) -> bool:
    """``sqrt(n) L <= dist(Q, F) <= 4 sqrt(n) L``, compared in squares (exact)."""
    n = cube.dim
    d2 = dist2_to_closed(cube.lo, cube.hi, F)
    L2 = cube.side ** 2
    return n * L2 <= d2 <= 16 * n * L2


@dataclass(frozen=True)
class Window:
    """Half-open box ``[lo, hi)``."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(_frac(x) for x in self.lo))
        object.__setattr__(self, "hi", tuple(_frac(x) for x in self.hi))
        if len(self.lo) != len(self.hi) or any(a >= b for a, b in zip(self.lo, self.hi)):
            raise MalformedInput("window must have lo < hi in every coordinate")

    @property
    def dim(self):
        return len(self.lo)

    def contains_point(self, p):
        return all(a <= x < b for a, b, x in zip(self.lo, self.hi, p))

    def corners(self):
        return itertools.product(*zip(self.lo, self.hi))


def whitney_required_max_scale(F: ClosedSetSpec, window: Window) -> int:
    """Smallest top scale for which every window point has a covering candidate at or below it."""
    n = window.dim
    bound2 = None
    for clo, chi in F.components():
        worst = max(box_dist2(c, c, clo, chi) for c in window.corners())
        bound2 = worst if bound2 is None else min(bound2, worst)
    # need n * 4**(top+2) >= bound2
    top = -64
    while n * Fraction(4) ** (top + 2) < bound2:
        top += 1
    return top


def _check_window(window: Window, scale_max: int, F: ClosedSetSpec):
    if F.dim != window.dim:
        raise MalformedInput("closed set and window differ in dimension")
    s = Fraction(2) ** scale_max
    for x in window.lo + window.hi:
        if (x / s).denominator != 1:
            raise ConfigurationError(f"window corners must be multiples of 2**{scale_max}")
    need = whitney_required_max_scale(F, window)
    if need > scale_max:
        raise ConfigurationError(f"scale range too small: requires scale_max >= {need}")


def whitney_decompose(F: ClosedSetSpec, window: Window, scale_min: int, scale_max: int,
                      check: bool = True) -> list:
    """Maximal dyadic cubes inside ``window`` with scales in ``[scale_min, scale_max]``
    whose distance to ``F`` lies between ``sqrt(n) L`` and ``4 sqrt(n) L``.

    Top-down: a cube is output when admissible (its ancestors were not), split
    when not and a finer scale remains.  Children of a cube farther than
    ``4 sqrt(n) L`` from ``F`` can never qualify and are pruned.  The output
    is the set of inclusion-maximal admissible cubes, pairwise disjoint.
    """
    if scale_min > scale_max:
        raise ConfigurationError("scale_min must not exceed scale_max")
    if check:
        _check_window(window, scale_max, F)
    n = window.dim
    s = Fraction(2) ** scale_max
    ranges = [range(math.floor(lo / s), math.ceil(hi / s)) for lo, hi in zip(window.lo, window.hi)]
    stack = [DyadicCube(scale_max, idx) for idx in itertools.product(*ranges)]
    out = []
    while stack:
        q = stack.pop()
        if not all(a >= wl for a, wl in zip(q.lo, window.lo)) or \
                not all(b <= wh for b, wh in zip(q.hi, window.hi)):
            continue
        d2 = dist2_to_closed(q.lo, q.hi, F)
        L2 = q.side ** 2
        if n * L2 <= d2 <= 16 * n * L2:
            out.append(q)
        elif d2 > 16 * n * L2:
            continue
        elif q.scale > scale_min:
            stack.extend(q.children())
    out.sort()
    return out


def whitney_candidates(F: ClosedSetSpec, window: Window, scale_min: int, scale_max: int) -> list:
    """Every admissible dyadic cube in the window and scale range (brute force)."""
    out = []
    for scale in range(scale_min, scale_max + 1):
        s = Fraction(2) ** scale
        ranges = [range(math.floor(lo / s), math.ceil(hi / s)) for lo, hi in zip(window.lo, window.hi)]
        for idx in itertools.product(*ranges):
            q = DyadicCube(scale, idx)
            if all(a >= wl for a, wl in zip(q.lo, window.lo)) and \
                    all(b <= wh for b, wh in zip(q.hi, window.hi)) and whitney_admissible(q, F):
                out.append(q)
    return out


def whitney_certified(x, F: ClosedSetSpec, window: Window, scale_min: int) -> bool:
    """Whether ``x`` lies in the region where coverage is guaranteed:
    inside the window with ``dist(x, F) > sqrt(n) 2**(scale_min+1)``."""
    if not window.contains_point(x):
        return False
    n = window.dim
    p = tuple(_frac(v) for v in x)
    return dist2_to_closed(p, p, F) > n * Fraction(4) ** (scale_min + 1)


class CubeLookup:
    """Find the output cubes containing a point, scale by scale."""

    def __init__(self, cubes: Iterable[DyadicCube]):
        self.by_scale = {}
        for q in cubes:
            self.by_scale.setdefault(q.scale, set()).add(q.index)

    def containing(self, x):
        hits = []
        for scale, idx in self.by_scale.items():
            q = DyadicCube.containing(x, scale)
            if q.index in idx:
                hits.append(q)
        return hits

    def counts(self, points) -> "np.ndarray":
        """Number of output cubes containing each row of a float array ``points``.

        Dividing a float by a power of two is exact, so the floors are the
        exact dyadic indices of the given binary coordinates.
        """
        pts = np.asarray(points, dtype=float)
        out = np.zeros(len(pts), dtype=int)
        for scale, idx in self.by_scale.items():
            cells = np.floor(np.ldexp(pts, -scale)).astype(np.int64)
            out += np.fromiter((tuple(c) in idx for c in cells.tolist()), dtype=bool, count=len(pts))
        return out


# ------------------------------------------------------------ grid instances
@dataclass(frozen=True)
class Box:
    """Half-open box ``[lo, hi)`` used as a grid shape."""

    lo: tuple
    hi: tuple

    def contains_point(self, p):
        return all(a <= x < b for a, b, x in zip(self.lo, self.hi, p))

    @property
    def center(self):
        return tuple((a + b) / 2 for a, b in zip(self.lo, self.hi))


def grid_instance(shapes: Sequence, window: Window, h, pointing: str = "containing",
                  mode: str = FLOAT, shape_ids: Optional[Sequence[str]] = None) -> Instance:
    """Discretise a shape family on the grid of side-``h`` cells covering ``window``.

    Cell weight is ``h**n``.  A shape becomes the set of cells whose centers
    it contains.  ``pointing="containing"`` points each cell to every shape
    containing its center; ``"centered"`` to the shapes whose center lies in
    the cell.  Cells left with an empty pointing are dropped when no shape
    contains them, otherwise the build fails.
    """
    h = _frac(h)
    if not h > 0:
        raise MalformedInput("grid resolution must be positive")
    n = window.dim
    counts = []
    for lo, hi in zip(window.lo, window.hi):
        k = (hi - lo) / h
        if k.denominator != 1:
            raise ConfigurationError("window sides must be multiples of h")
        counts.append(int(k))
    cells = list(itertools.product(*(range(c) for c in counts)))
    centers = [tuple(float(lo + (i + Fraction(1, 2)) * h) for lo, i in zip(window.lo, cell))
               for cell in cells]
    ids = list(shape_ids) if shape_ids is not None else [f"S{k}" for k in range(len(shapes))]
    members = []
    for sid, shape in zip(ids, shapes):
        mem = _cells_in(shape, window, h, counts, centers)
        if not mem:
            raise MalformedInput(f"shape {sid!r} captures no grid cell (thinner than h?)")
        members.append(mem)
    cell_of = {}
    if pointing == "centered":
        for k, shape in enumerate(shapes):
            c = shape.center
            idx = tuple(math.floor((_frac(x) - lo) / h) for x, lo in zip(c, window.lo))
            cell_of.setdefault(idx, []).append(k)
    elif pointing != "containing":
        raise MalformedInput(f"unknown pointing mode {pointing!r}")
    used = set()
    for mem in members:
        used |= mem
    pts, ptab = [], {}
    for ci, cell in enumerate(cells):
        if ci not in used:
            continue
        pid = "c" + ",".join(map(str, cell))
        pts.append(pid)
        if pointing == "centered":
            ptab[pid] = [ids[k] for k in cell_of.get(cell, ())]
    if pointing == "containing":
        ptab = "containing"
    w = h ** n
    weight = w if mode == EXACT else float(w)
    cell_ids = ["c" + ",".join(map(str, cell)) for cell in cells]
    return Instance.build([(p, weight) for p in pts],
                          [(sid, [cell_ids[i] for i in sorted(mem)]) for sid, mem in zip(ids, members)],
                          ptab, mode=mode)


def _cells_in(shape, window, h, counts, centers):
    # scan only the cells in the shape's bounding box
    if isinstance(shape, Ball):
        lo = [c - shape.radius for c in shape.center]
        hi = [c + shape.radius for c in shape.center]
    else:
        lo, hi = list(shape.lo), list(shape.hi)
    ranges = []
    for d, (a, b) in enumerate(zip(lo, hi)):
        i0 = max(0, math.floor((float(a) - float(window.lo[d])) / float(h)) - 1)
        i1 = min(counts[d], math.ceil((float(b) - float(window.lo[d])) / float(h)) + 1)
        ranges.append(range(i0, i1))
    out = set()
    strides = [1] * len(counts)
    for d in range(len(counts) - 2, -1, -1):
        strides[d] = strides[d + 1] * counts[d + 1]
    for cell in itertools.product(*ranges):
        ci = sum(i * s for i, s in zip(cell, strides))
        if shape.contains_point(centers[ci]):
            out.add(ci)
    return frozenset(out)


def centered_balls(window: Window, h, radii_cells: Sequence, metric: str = EUCLIDEAN):
    """A ball of each radius ``r*h`` centered at every cell center of the grid."""
    h = _frac(h)
    counts = [int((b - a) / h) for a, b in zip(window.lo, window.hi)]
    shapes, ids = [], []
    for cell in itertools.product(*(range(c) for c in counts)):
        c = tuple(float(lo + (i + Fraction(1, 2)) * h) for lo, i in zip(window.lo, cell))
        for r in radii_cells:
            shapes.append(Ball(c, float(r * h), metric))
            ids.append("B" + ",".join(map(str, cell)) + f"r{r}")
    return shapes, ids
