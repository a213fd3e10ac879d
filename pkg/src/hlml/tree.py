"""Rooted model of a homogeneous tree with levels and the weighted counting measure.

Vertices are words over ``q`` letters of length at most ``depth``; the root
has level ``root_level`` and every step down lowers the level by one, so a
vertex ``w`` has level ``root_level - len(w)`` and point mass ``q**level``.

A trapezoid with apex ``x`` and height ``h`` is the band of descendants of
``x`` at relative depths ``h .. 2h-1`` (the singleton ``{x}`` when ``h == 1``).
With this band every relative depth contributes exactly the apex width
``q**level(x)``, so the trapezoid measure is ``h`` times the width.  The
envelope adds the depths ``ceil(h/2) .. 4h-1`` and always contains the
trapezoid itself.  ``convention="literal"`` switches both to the alternative
reading (band ``h .. 2h-2``, envelope without the trapezoid) for comparison.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .core.instance import Instance
from .core.maximal import HLReport, verify_hl_inequality
from .covering import GaugedFamily, select_disjoint_indices
from .errors import MalformedInput

DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"
STANDARD = "standard"
LITERAL = "literal"


@dataclass(frozen=True)
class TreeModel:
    q: int
    depth: int
    root_level: int = 0
    convention: str = STANDARD

    def __post_init__(self):
        if not 2 <= self.q <= len(DIGITS):
            raise MalformedInput(f"q must be in [2, {len(DIGITS)}], got {self.q}")
        if self.depth < 0:
            raise MalformedInput("depth cap must be nonnegative")
        if self.convention not in (STANDARD, LITERAL):
            raise MalformedInput(f"unknown convention {self.convention!r}")

    def check(self, vertex: str):
        if len(vertex) > self.depth or any(c not in DIGITS[:self.q] for c in vertex):
            raise MalformedInput(f"vertex {vertex!r} is not in the depth-{self.depth} model")

    def level(self, vertex: str) -> int:
        return self.root_level - len(vertex)

    def vertices(self, max_depth: Optional[int] = None):
        top = self.depth if max_depth is None else max_depth
        for d in range(top + 1):
            for w in itertools.product(DIGITS[:self.q], repeat=d):
                yield "".join(w)

    def descendants_at(self, vertex: str, rel: int):
        for w in itertools.product(DIGITS[:self.q], repeat=rel):
            yield vertex + "".join(w)

    @classmethod
    def from_dict(cls, data):
        return cls(int(data["q"]), int(data["depth"]), int(data.get("root_level", 0)),
                   data.get("convention", STANDARD))


def tau_point(model: TreeModel, vertex: str) -> Fraction:
    """Exact point mass ``q**level``."""
    model.check(vertex)
    return Fraction(model.q) ** model.level(vertex)


@dataclass(frozen=True, order=True)
class Trapezoid:
    apex: str
    h: int

    def __post_init__(self):
        if self.h < 1:
            raise MalformedInput("trapezoid height must be >= 1")

    @property
    def id(self):
        return f"T[{self.apex or '.'}:{self.h}]"

    def to_dict(self):
        return {"apex": self.apex, "h": self.h}


def member_depths(model: TreeModel, T: Trapezoid) -> range:
    """Relative depths (below the apex) making up ``T``."""
    if T.h == 1:
        return range(0, 1)
    top = 2 * T.h - 1 if model.convention == STANDARD else 2 * T.h - 2
    return range(T.h, top + 1)


def envelope_depths(model: TreeModel, T: Trapezoid) -> list:
    band = range(-(-T.h // 2), 4 * T.h)
    if model.convention == LITERAL:
        return list(band)
    return sorted(set(band) | set(member_depths(model, T)))


def width(model: TreeModel, T: Trapezoid) -> Fraction:
    return Fraction(model.q) ** model.level(T.apex)


def _fits(model, T, depths):
    return len(T.apex) + max(depths, default=0) <= model.depth


def trapezoid_members(model: TreeModel, T: Trapezoid) -> frozenset:
    model.check(T.apex)
    depths = member_depths(model, T)
    if not _fits(model, T, depths):
        raise MalformedInput(f"trapezoid {T.id} reaches below the depth cap {model.depth}")
    return frozenset(v for d in depths for v in model.descendants_at(T.apex, d))


def _band_measure(model, T, depths):
    # q**d vertices at relative depth d, each of mass q**(level(apex) - d)
    q = model.q
    lev = model.level(T.apex)
    num, den = 0, 1
    for d in depths:
        e = lev - d
        if e >= 0:
            num += q ** d * q ** e * den
        else:
            # common denominator grows to the deepest negative power
            if q ** -e > den:
                num *= q ** -e // den
                den = q ** -e
            num += q ** d * (den // q ** -e)
    return Fraction(num, den)


def trapezoid_measure(model: TreeModel, T: Trapezoid) -> Fraction:
    """Exact measure, summed depth by depth."""
    model.check(T.apex)
    depths = member_depths(model, T)
    if not _fits(model, T, depths):
        raise MalformedInput(f"trapezoid {T.id} reaches below the depth cap {model.depth}")
    return _band_measure(model, T, depths)


def envelope(model: TreeModel, T: Trapezoid) -> frozenset:
    model.check(T.apex)
    depths = envelope_depths(model, T)
    if not _fits(model, T, depths):
        raise MalformedInput(f"envelope of {T.id} reaches below the depth cap {model.depth}")
    return frozenset(v for d in depths for v in model.descendants_at(T.apex, d))


def envelope_measure(model: TreeModel, T: Trapezoid) -> Fraction:
    """Exact measure of the envelope (no depth-cap requirement)."""
    return _band_measure(model, T, envelope_depths(model, T))


def in_trapezoid(model: TreeModel, T: Trapezoid, v: str) -> bool:
    return v.startswith(T.apex) and (len(v) - len(T.apex)) in member_depths(model, T)


def in_envelope(model: TreeModel, T: Trapezoid, v: str) -> bool:
    return v.startswith(T.apex) and (len(v) - len(T.apex)) in envelope_depths(model, T)


def max_height(model: TreeModel, apex: str, fit: str = "envelope") -> int:
    """Largest height whose members (or envelope) stay within the depth cap; 0 if none."""
    h = 0
    while True:
        T = Trapezoid(apex, h + 1)
        depths = envelope_depths(model, T) if fit == "envelope" else member_depths(model, T)
        if not _fits(model, T, depths):
            return h
        h += 1


def enumerate_trapezoids(model: TreeModel, apexes: Iterable[str], heights: Iterable[int],
                         fit: str = "members") -> list:
    """All ``(apex, h)`` combinations in deterministic order.

    Every trapezoid must fit the depth cap (its envelope too with
    ``fit="envelope"``); envelope measures are computed without enumeration,
    so member fit is enough for the inequality checks.
    """
    heights = sorted(set(heights))
    out = []
    for a in apexes:
        model.check(a)
        for h in heights:
            T = Trapezoid(a, h)
            depths = envelope_depths(model, T) if fit == "envelope" else member_depths(model, T)
            if not _fits(model, T, depths):
                raise MalformedInput(f"{T.id} reaches below the depth cap {model.depth} ({fit} fit)")
            out.append(T)
    return out


def fitting_trapezoids(model: TreeModel, fit: str = "envelope", max_h: Optional[int] = None) -> list:
    """Every trapezoid whose envelope (``fit="envelope"``) or members (``"members"``) fit."""
    out = []
    for a in model.vertices():
        top = max_height(model, a, fit)
        if max_h is not None:
            top = min(top, max_h)
        out.extend(Trapezoid(a, h) for h in range(1, top + 1))
    return out


def tree_instance(model: TreeModel, family: Sequence[Trapezoid], pointing: str = "containing") -> Instance:
    """Instance on the vertices covered by ``family`` with exact weights.

    ``pointing="containing"``: each vertex is pointed to every trapezoid
    containing it.  ``"apex"``: to the trapezoids with that apex which
    contain it; since a band of height >= 2 does not contain its own apex,
    only singletons survive and the ground set is their apexes.
    """
    family = list(dict.fromkeys(family))
    if not family:
        raise MalformedInput("empty trapezoid family")
    mem = {T: trapezoid_members(model, T) for T in family}
    if pointing == "containing":
        used = family
        verts = sorted(set().union(*mem.values()), key=lambda v: (len(v), v))
        ptab = "containing"
    elif pointing == "apex":
        used = [T for T in family if T.apex in mem[T]]
        if not used:
            raise MalformedInput("apex pointing leaves every vertex with an empty pointing")
        verts = sorted({T.apex for T in used}, key=lambda v: (len(v), v))
        ptab = {v: [] for v in verts}
        for T in used:
            ptab[T.apex].append(T.id)
    else:
        raise MalformedInput(f"unknown pointing mode {pointing!r}")
    points = [(v or ".", tau_point(model, v)) for v in verts]
    name = {v: v or "." for v in verts}
    sets = [(T.id, [name[v] for v in sorted(mem[T])]) for T in used]
    if isinstance(ptab, dict):
        ptab = {name[v]: ids for v, ids in ptab.items()}
    inst = Instance.build(points, sets, ptab, mode="exact")
    inst.__dict__["trapezoids"] = tuple(used)
    return inst


def width_witness(model: TreeModel):
    """Disjoint subfamily builder: max-width greedy with envelope hulls.

    Pass as ``witness=`` to :func:`verify_hl_inequality` on a tree instance;
    each step takes a remaining trapezoid of largest width.
    """
    def build(instance: Instance, values, candidates):
        traps = instance.__dict__["trapezoids"]
        widths = [width(model, T) for T in traps]
        masks = instance.masks
        return select_disjoint_indices(widths, lambda a, b: masks[a] & masks[b] != 0, candidates)
    return build


def width_family(model: TreeModel, trapezoids: Sequence[Trapezoid]) -> GaugedFamily:
    """Family with gauge = width and dilation = envelope (members as vertex sets)."""
    members = tuple(trapezoid_members(model, T) for T in trapezoids)
    dil = tuple(m | frozenset(v for d in envelope_depths(model, T)
                              for v in model.descendants_at(T.apex, d)) for m, T in zip(members, trapezoids))
    return GaugedFamily(members, tuple(width(model, T) for T in trapezoids), 1, dil,
                        ids=tuple(T.id for T in trapezoids))


def containment_violations(model: TreeModel, trapezoids: Sequence[Trapezoid], limit: int = 10) -> list:
    """Pairs ``(T1, T2)`` that meet, have ``width(T1) <= width(T2)`` and ``T1`` not inside env(T2)."""
    mem = {T: trapezoid_members(model, T) for T in trapezoids}
    through = {}
    for T, m in mem.items():
        for v in m:
            through.setdefault(v, []).append(T)
    seen = set()
    bad = []
    for group in through.values():
        for T1, T2 in itertools.permutations(group, 2):
            if (T1, T2) in seen:
                continue
            seen.add((T1, T2))
            if width(model, T1) <= width(model, T2):
                if not all(in_envelope(model, T2, v) for v in mem[T1]):
                    bad.append((T1, T2))
                    if len(bad) >= limit:
                        return bad
    return bad


def verify_trapezoid_inequality(model: TreeModel, instance: Instance, F, c=4) -> HLReport:
    return verify_hl_inequality(instance, F, c, witness=width_witness(model))

