"""Finite pointed families with a positive point weighting.

An :class:`Instance` holds a finite ground set ``X`` of weighted points, a
family of nonempty subsets and, for every point, the nonempty list of family
members it is "pointed" to.  Weights are strictly positive, so the induced
measure is positive and finite on every member.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .._numeric import DEFAULT_TOL, EXACT, FLOAT, MODES, mpq, parse_number, to_json, zero
from ..errors import MalformedInput

MPQ_TYPE = type(mpq(0))

POINTING_CONTAINING = "containing"


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable finite instance.

    Points and sets are stored positionally; ``point_ids``/``set_ids`` carry the
    external names.  ``members[j]`` is the frozenset of point indices in set
    ``j`` and ``pointing[i]`` the tuple of set indices pointed to by point ``i``.
    """

    point_ids: tuple
    weights: tuple
    set_ids: tuple
    members: tuple
    pointing: tuple
    mode: str = EXACT
    tol: float = DEFAULT_TOL

    # ------------------------------------------------------------------ build
    @classmethod
    def build(cls, points, sets, pointing=POINTING_CONTAINING, mode=EXACT, tol=DEFAULT_TOL):
        """Validate id-based data and build an instance.

        ``points`` is an iterable of ``(id, weight)``; ``sets`` an iterable of
        ``(id, member ids)``; ``pointing`` either a mapping ``point id -> [set
        ids]`` or the string ``"containing"`` (every set containing the point).
        """
        if mode not in MODES:
            raise MalformedInput(f"unknown numeric mode {mode!r}")
        points = list(points)
        point_ids = tuple(str(p) for p, _ in points)
        if len(set(point_ids)) != len(point_ids):
            raise MalformedInput("duplicate point id")
        weights = []
        for pid, w in points:
            w = parse_number(w, mode)
            if not w > 0:
                raise MalformedInput(f"weight of point {pid!r} must be positive, got {w}")
            weights.append(w)
        pindex = {p: i for i, p in enumerate(point_ids)}

        sets = list(sets)
        set_ids = tuple(str(s) for s, _ in sets)
        if len(set(set_ids)) != len(set_ids):
            raise MalformedInput("duplicate set id")
        members = []
        for sid, mem in sets:
            mem = list(mem)
            try:
                idx = frozenset(pindex[str(m)] for m in mem)
            except KeyError as exc:
                raise MalformedInput(f"set {sid!r} references unknown point {exc.args[0]!r}") from None
            if not idx:
                raise MalformedInput(f"set {sid!r} is empty")
            members.append(idx)
        sindex = {s: j for j, s in enumerate(set_ids)}

        if isinstance(pointing, str):
            if pointing != POINTING_CONTAINING:
                raise MalformedInput(f"unknown pointing mode {pointing!r}")
            ptab = [[] for _ in point_ids]
            for j, mem in enumerate(members):
                for i in mem:
                    ptab[i].append(j)
            ptab = [tuple(p) for p in ptab]
        else:
            unknown = set(map(str, pointing)) - set(point_ids)
            if unknown:
                raise MalformedInput(f"pointing references unknown point {sorted(unknown)[0]!r}")
            ptab = []
            for pid in point_ids:
                row = []
                for sid in pointing.get(pid, ()):
                    if str(sid) not in sindex:
                        raise MalformedInput(f"pointing of {pid!r} references unknown set {sid!r}")
                    row.append(sindex[str(sid)])
                ptab.append(tuple(dict.fromkeys(row)))
        inst = cls(point_ids, tuple(weights), set_ids, tuple(members), tuple(ptab), mode, tol)
        inst.validate()
        return inst

    def validate(self):
        """Check positive weights, pointings inside their sets and the bookkeeping; raise :class:`MalformedInput`."""
        n = len(self.point_ids)
        if len(self.weights) != n or len(self.pointing) != n:
            raise MalformedInput("points, weights and pointing have different lengths")
        if len(self.members) != len(self.set_ids):
            raise MalformedInput("set ids and members have different lengths")
        for w, pid in zip(self.weights, self.point_ids):
            if not w > 0:
                raise MalformedInput(f"weight of point {pid!r} must be positive")
        pointed = set()
        for i, row in enumerate(self.pointing):
            if not row:
                raise MalformedInput(f"point {self.point_ids[i]!r} has an empty pointing")
            for j in row:
                if i not in self.members[j]:
                    raise MalformedInput(
                        f"point {self.point_ids[i]!r} is pointed to set {self.set_ids[j]!r} "
                        f"which does not contain it")
                pointed.add(j)
        if len(pointed) != len(self.set_ids):
            missing = next(self.set_ids[j] for j in range(len(self.set_ids)) if j not in pointed)
            raise MalformedInput(f"set {missing!r} is not in any pointing (family must equal the union)")

    # --------------------------------------------------------------- derived
    @property
    def n_points(self):
        return len(self.point_ids)

    @property
    def n_sets(self):
        return len(self.set_ids)

    @cached_property
    def point_index(self):
        return {p: i for i, p in enumerate(self.point_ids)}

    @cached_property
    def set_index(self):
        return {s: j for j, s in enumerate(self.set_ids)}

    @cached_property
    def set_measures(self):
        return tuple(self.measure_idx(m) for m in self.members)

    @cached_property
    def pointed_by(self):
        """``pointed_by[j]``: point indices whose pointing contains set ``j``."""
        out = [[] for _ in self.set_ids]
        for i, row in enumerate(self.pointing):
            for j in row:
                out[j].append(i)
        return tuple(tuple(o) for o in out)

    @cached_property
    def sets_containing(self):
        """``sets_containing[i]``: every set index whose members include point ``i``."""
        out = [[] for _ in self.point_ids]
        for j, mem in enumerate(self.members):
            for i in mem:
                out[i].append(j)
        return tuple(tuple(o) for o in out)

    @cached_property
    def masks(self):
        """Point-membership bitmask per set (bit ``i`` set iff point ``i`` is a member)."""
        out = []
        for mem in self.members:
            m = 0
            for i in mem:
                m |= 1 << i
            out.append(m)
        return tuple(out)

    @cached_property
    def uniform_weight(self):
        first = self.weights[0] if self.weights else None
        if all(w == first for w in self.weights):
            return first
        return None

    @cached_property
    def total_measure(self):
        return self.measure_idx(range(self.n_points))

    @property
    def is_containing(self):
        """True when every point is pointed to every set that contains it."""
        return all(set(row) == set(c) for row, c in zip(self.pointing, self.sets_containing))

    def zero(self):
        return zero(self.mode)

    def number(self, value):
        return parse_number(value, self.mode)

    def measure_idx(self, indices: Iterable[int]):
        total = self.zero()
        for i in indices:
            total += self.weights[i]
        return total

    def measure_mask(self, mask: int):
        if self.uniform_weight is not None:
            return self.uniform_weight * mask.bit_count()
        total = self.zero()
        i = 0
        while mask:
            if mask & 1:
                total += self.weights[i]
            mask >>= 1
            i += 1
        return total

    def to_dict(self):
        return {
            "points": [{"id": p, "w": to_json(w)} for p, w in zip(self.point_ids, self.weights)],
            "sets": [{"id": s, "members": [self.point_ids[i] for i in sorted(m)]}
                     for s, m in zip(self.set_ids, self.members)],
            "pointing": {p: [self.set_ids[j] for j in row]
                         for p, row in zip(self.point_ids, self.pointing)},
            "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, data: Mapping, tol=DEFAULT_TOL):
        try:
            mode = data.get("mode", EXACT)
            points = [(p["id"], p["w"]) for p in data["points"]]
            sets = [(s["id"], s["members"]) for s in data["sets"]]
            pointing = data.get("pointing", POINTING_CONTAINING)
        except (KeyError, TypeError) as exc:
            raise MalformedInput(f"malformed instance JSON: {exc}") from None
        return cls.build(points, sets, pointing, mode=mode, tol=data.get("tol", tol))


def measure_of(instance: Instance, point_ids: Iterable[str]):
    """Weighted measure of a set of point ids."""
    total = instance.zero()
    seen = set()
    for p in point_ids:
        if p in seen:
            continue
        seen.add(p)
        try:
            total += instance.weights[instance.point_index[p]]
        except KeyError:
            raise MalformedInput(f"unknown point id {p!r}") from None
    return total


def set_function(instance: Instance, values) -> tuple:
    """Coerce ``values`` to a tuple aligned with ``instance.set_ids``.

    Accepts a mapping ``set id -> value`` (must cover every set) or a sequence
    in set order.  Values must be finite and nonnegative.
    """
    if isinstance(values, SetFunction):
        values = values.values
    if isinstance(values, Mapping):
        extra = set(values) - set(instance.set_ids)
        if extra:
            raise MalformedInput(f"set function has unknown set id {sorted(extra)[0]!r}")
        try:
            seq = [values[s] for s in instance.set_ids]
        except KeyError as exc:
            raise MalformedInput(f"set function misses set {exc.args[0]!r}") from None
    else:
        seq = list(values)
        if len(seq) != instance.n_sets:
            raise MalformedInput(f"set function has {len(seq)} values for {instance.n_sets} sets")
    fast = MPQ_TYPE if instance.mode == EXACT else float
    out = []
    for v in seq:
        if type(v) is fast and v >= 0 and (fast is not float or v < math.inf):
            out.append(v)
            continue
        v = parse_number(v, instance.mode)
        if v < 0:
            raise MalformedInput(f"set function values must be nonnegative, got {v}")
        out.append(v)
    return tuple(out)


@dataclass(frozen=True)
class SetFunction:
    """Nonnegative set function, keyed by set id."""

    values: Mapping

    @classmethod
    def of(cls, instance: Instance, values) -> "SetFunction":
        return cls(dict(zip(instance.set_ids, set_function(instance, values))))

    def to_dict(self):
        return {k: to_json(v) for k, v in self.values.items()}


def subset_instance(instance: Instance, pointing: Sequence[Sequence[int]]) -> Instance:
    """Same points, weights and sets, different positional pointing (sets unused are dropped)."""
    used = sorted({j for row in pointing for j in row})
    remap = {j: k for k, j in enumerate(used)}
    inst = Instance(
        instance.point_ids, instance.weights,
        tuple(instance.set_ids[j] for j in used),
        tuple(instance.members[j] for j in used),
        tuple(tuple(remap[j] for j in row) for row in pointing),
        instance.mode, instance.tol)
    inst.validate()
    return inst


__all__ = ["Instance", "SetFunction", "measure_of", "set_function", "subset_instance",
           "POINTING_CONTAINING", "EXACT", "FLOAT"]
