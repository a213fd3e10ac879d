"""Constructive Vitali-type selections on finite families.

Every routine here terminates on finite input and returns a pairwise-disjoint
subfamily together with the enlargement ("hull") of each chosen member, so
that the covering inclusion can be checked point by point with
:func:`verify_cover`.

Members are frozensets by default.  Other member types (balls, cubes) work as
long as a ``meets(a, b)`` predicate is supplied.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .errors import HypothesisError, MalformedInput


def sets_meet(a, b) -> bool:
    return not a.isdisjoint(b)


@dataclass(frozen=True)
class GaugedFamily:
    """A finite family with a gauge ``gamma``, a factor ``lam`` and an optional dilation.

    Each selection step takes a remaining member of largest gauge, which is
    eligible under the ``gauge >= sup / lam`` rule for every ``lam >= 1``;
    ``lam`` enters through the hulls.  ``dilation[k]`` is an explicit
    superset of ``members[k]``; without it the gauge-ball hull of
    :func:`gauge_hull` is used.
    """

    members: tuple
    gauge: tuple
    lam: object = 1
    dilation: Optional[tuple] = None
    ids: Optional[tuple] = None
    meets: Callable = sets_meet

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "gauge", tuple(self.gauge))
        if len(self.gauge) != len(self.members):
            raise MalformedInput("gauge and members differ in length")
        if any(g < 0 for g in self.gauge):
            raise MalformedInput("gauge values must be nonnegative")
        if self.lam < 1:
            raise MalformedInput(f"lambda must be >= 1, got {self.lam}")
        if self.ids is None:
            object.__setattr__(self, "ids", tuple(str(k) for k in range(len(self.members))))
        elif len(self.ids) != len(self.members):
            raise MalformedInput("ids and members differ in length")
        if self.dilation is not None:
            dil = tuple(self.dilation)
            object.__setattr__(self, "dilation", dil)
            if len(dil) != len(self.members):
                raise MalformedInput("dilation and members differ in length")
            for k, (m, d) in enumerate(zip(self.members, dil)):
                if isinstance(m, (set, frozenset)) and not m <= d:
                    raise MalformedInput(f"dilation of member {self.ids[k]!r} is not a superset")

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class CoverSelection:
    chosen: tuple                   # indices into the family, in selection order
    hulls: tuple                    # hull of each chosen member
    residual_suprema: tuple         # r_0, r_1, ...: sup gauge of what was still available
    ignored: tuple = field(default=())  # zero-gauge members left out

    def chosen_ids(self, family: GaugedFamily):
        return [family.ids[k] for k in self.chosen]


def _greedy(gauge, meets_idx, candidates):
    remaining = list(candidates)
    chosen, sups = [], []
    while remaining:
        sup = max(gauge[k] for k in remaining)
        sups.append(sup)
        # the largest gauge is always eligible (gauge >= sup / lam); lowest index on ties
        pick = next(k for k in remaining if gauge[k] == sup)
        chosen.append(pick)
        remaining = [k for k in remaining if not meets_idx(k, pick)]
    return chosen, sups


def gauge_hull(family: GaugedFamily, k: int):
    """Union of every member meeting ``members[k]`` whose gauge is at most ``lam * gauge[k]``."""
    if not 0 <= k < len(family):
        raise MalformedInput(f"unknown member index {k}")
    c = family.members[k]
    limit = family.lam * family.gauge[k]
    out = set(c)
    for g, m in zip(family.gauge, family.members):
        if g <= limit and family.meets(m, c):
            out |= m
    return frozenset(out)


def greedy_vitali(family: GaugedFamily) -> CoverSelection:
    """Disjoint selection for the gauge/dilation covering lemma.

    Members of zero gauge are ignored (with a warning); whenever the
    pair hypothesis holds for the supplied dilation, the union of the family
    lies in the union of the chosen dilations.
    """
    zero_gauge = tuple(k for k, g in enumerate(family.gauge) if g == 0)
    if zero_gauge:
        warnings.warn(f"ignoring {len(zero_gauge)} zero-gauge member(s)", stacklevel=2)
    members = family.members
    chosen, sups = _greedy(family.gauge, lambda a, b: family.meets(members[a], members[b]),
                           [k for k, g in enumerate(family.gauge) if g > 0])
    if family.dilation is not None:
        hulls = tuple(family.dilation[k] for k in chosen)
    else:
        hulls = tuple(gauge_hull(family, k) for k in chosen)
    return CoverSelection(tuple(chosen), hulls, tuple(sups), zero_gauge)


def greedy_dilation_select(family: GaugedFamily) -> CoverSelection:
    """Residual-supremum selection with gauge-ball hulls.

    Step ``i`` looks at the members disjoint from everything chosen so far,
    records their supremum ``r_i`` and takes one attaining it (lowest index),
    which in particular has gauge at least ``r_i / lam``.  Stops when nothing
    is left.  Every gauge must be positive.
    """
    for k, g in enumerate(family.gauge):
        if not g > 0:
            raise HypothesisError(f"member {family.ids[k]!r} has zero gauge", witness=family.ids[k])
    members = family.members
    chosen, sups = _greedy(family.gauge, lambda a, b: family.meets(members[a], members[b]),
                           range(len(family)))
    hulls = tuple(gauge_hull(family, k) for k in chosen)
    return CoverSelection(tuple(chosen), hulls, tuple(sups))


def select_disjoint_indices(gauge, meets_idx, candidates):
    """Index-level residual-supremum selection (used by the inequality verifier)."""
    return _greedy(gauge, meets_idx, candidates)[0]


def _relate_sets(a, b):
    if a == b:
        return "equal"
    if a.isdisjoint(b):
        return "disjoint"
    if b < a:
        return "contains"
    if a < b:
        return "contained"
    return "overlap"


def laminar_select(members: Sequence, relate: Optional[Callable] = None, ids=None) -> CoverSelection:
    """Inclusion-maximal members of a laminar family (duplicates kept once).

    ``relate(a, b)`` must return one of ``equal``, ``contains``, ``contained``,
    ``disjoint`` or ``overlap``; the default handles frozensets.  A pair
    reported as ``overlap`` raises :class:`HypothesisError`.
    """
    members = list(members)
    relate = relate or _relate_sets
    ids = list(ids) if ids is not None else [str(k) for k in range(len(members))]
    n = len(members)
    dominated = [False] * n
    for a in range(n):
        for b in range(a + 1, n):
            rel = relate(members[a], members[b])
            if rel == "overlap":
                raise HypothesisError(
                    f"members {ids[a]!r} and {ids[b]!r} overlap without nesting",
                    witness=(ids[a], ids[b]))
            if rel == "contains":
                dominated[b] = True
            elif rel == "contained":
                dominated[a] = True
            elif rel == "equal":
                dominated[b] = True
    chosen = tuple(k for k in range(n) if not dominated[k])
    return CoverSelection(chosen, tuple(members[k] for k in chosen), ())


@dataclass(frozen=True)
class CoverVerdict:
    passed: bool
    reason: str = ""
    witness: object = None

    def __bool__(self):
        return self.passed


def verify_cover(selection: CoverSelection, family: GaugedFamily) -> CoverVerdict:
    """Check that chosen members are pairwise disjoint and the hulls cover the family.

    The zero-gauge members a selection deliberately ignored are not required
    to be covered.
    """
    members = family.members
    chosen = selection.chosen
    for a in range(len(chosen)):
        for b in range(a + 1, len(chosen)):
            if family.meets(members[chosen[a]], members[chosen[b]]):
                return CoverVerdict(False, "chosen members intersect",
                                    (family.ids[chosen[a]], family.ids[chosen[b]]))
    covered = set()
    for h in selection.hulls:
        covered |= set(h)
    skip = set(selection.ignored)
    for k, m in enumerate(members):
        if k in skip:
            continue
        for x in sorted(m, key=str):
            if x not in covered:
                return CoverVerdict(False, f"point of member {family.ids[k]!r} not covered", x)
    return CoverVerdict(True)


def check_vitali_hypothesis(family: GaugedFamily):
    """All-pairs scan of the gauge/dilation hypothesis.

    Returns ``None`` when for all meeting pairs with ``gauge(C1) <= lam *
    gauge(C2)`` we have ``C1`` inside the dilation of ``C2``; otherwise the
    first offending ``(id1, id2)``.  Quadratic; meant for small families.
    """
    if family.dilation is None:
        return None  # the gauge-ball hull satisfies the hypothesis by construction
    for a, (ma, ga) in enumerate(zip(family.members, family.gauge)):
        for b, (mb, gb) in enumerate(zip(family.members, family.gauge)):
            if ga <= family.lam * gb and family.meets(ma, mb) and not ma <= family.dilation[b]:
                return (family.ids[a], family.ids[b])
    return None
