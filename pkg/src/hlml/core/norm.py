"""The disjoint-sum norm of a set function.

``||F||`` is the largest total of ``F`` over a pairwise-disjoint subfamily,
i.e. a maximum-weight independent set in the intersection graph of the
family.  Three routes are offered:

* ``exact``: a laminar family is solved by a bottom-up forest recursion (no
  size limit); any other family by branch-and-bound, refused above ``cap``.
* ``greedy-lower``: a feasible disjoint subfamily, heaviest first.
* ``upper``: ``min(sum F, sum_x w(x) * max_{Q ni x} F(Q)/mu(Q))``, a feasible
  point of the packing LP dual.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import CapacityError, MalformedInput
from .instance import Instance, set_function

DEFAULT_CAP = 30
MODES = ("exact", "greedy-lower", "upper")


@dataclass(frozen=True)
class NormBounds:
    lower: object
    upper: object
    exact: bool
    method: str
    chosen: tuple = field(default=())   # set indices realising ``lower``

    @property
    def value(self):
        return self.lower


def laminar_witness(masks):
    """Return ``None`` if the masks form a laminar family, else an overlapping pair of indices.

    Works point by point: a family is laminar iff, for every point, the sets
    containing it are totally ordered by inclusion.  Consecutive sets in the
    size-sorted chain are enough to check.
    """
    by_point = {}
    for j, m in enumerate(masks):
        x = m
        while x:
            low = x & -x
            by_point.setdefault(low, []).append(j)
            x ^= low
    checked = set()
    sizes = [m.bit_count() for m in masks]
    for chain in by_point.values():
        chain.sort(key=lambda j: (-sizes[j], j))
        for big, small in zip(chain, chain[1:]):
            key = (big, small)
            if key in checked:
                continue
            checked.add(key)
            if masks[small] & masks[big] != masks[small]:
                return (big, small)
    return None


def laminar_forest(masks):
    """Containment forest of a laminar family.

    Returns ``(groups, parent, tops, children)``: ``groups[g]`` lists the set
    indices sharing one member set, groups ordered by decreasing size;
    ``parent[g]`` is the group of the nearest strict superset (``None`` for
    roots), ``tops`` the root groups and ``children[g]`` the groups below ``g``.
    """
    by_mask = {}
    for j, m in enumerate(masks):
        by_mask.setdefault(m, []).append(j)
    groups = sorted(by_mask.values(), key=lambda g: (-masks[g[0]].bit_count(), g[0]))
    # the supersets of a set are exactly the larger sets through any one of its points
    last_through = {}
    parent = []
    for g, js in enumerate(groups):
        m = masks[js[0]]
        parent.append(last_through.get(m & -m))
        x = m
        while x:
            b = x & -x
            last_through[b] = g
            x ^= b
    children = [[] for _ in groups]
    tops = []
    for g, p in enumerate(parent):
        (tops if p is None else children[p]).append(g)
    return groups, tuple(parent), tuple(tops), children


def _laminar_norm(forest, values, zero):
    groups, parent, tops, children = forest
    ng = len(groups)
    rep = [js[0] if len(js) == 1 else max(js, key=lambda j: (values[j], -j)) for js in groups]
    below = [zero] * ng
    best = [zero] * ng
    roots = zero
    for g in range(ng - 1, -1, -1):  # smallest first
        v = values[rep[g]]
        best[g] = v if v >= below[g] else below[g]
        p = parent[g]
        if p is None:
            roots += best[g]
        else:
            below[p] += best[g]
    # top-down recovery of one optimal subfamily
    chosen, stack = [], list(tops)
    while stack:
        g = stack.pop()
        if values[rep[g]] >= below[g]:
            if values[rep[g]] > 0:
                chosen.append(rep[g])
        else:
            stack.extend(children[g])
    return roots, tuple(sorted(chosen))


def _branch_and_bound(masks, values, zero):
    order = sorted((j for j in range(len(values)) if values[j] > 0), key=lambda j: (-values[j], j))
    suffix = [zero] * (len(order) + 1)
    for k in range(len(order) - 1, -1, -1):
        suffix[k] = suffix[k + 1] + values[order[k]]
    best = [zero, ()]

    def descend(k, used, total, chosen):
        if total > best[0]:
            best[0], best[1] = total, tuple(chosen)
        if k == len(order) or total + suffix[k] <= best[0]:
            return
        j = order[k]
        if not masks[j] & used:
            chosen.append(j)
            descend(k + 1, used | masks[j], total + values[j], chosen)
            chosen.pop()
        descend(k + 1, used, total, chosen)

    descend(0, 0, zero, [])
    return best[0], tuple(sorted(best[1]))


def greedy_packing(masks, values, zero, order=None):
    """Disjoint subfamily picked heaviest-first (or in ``order``); returns ``(total, chosen)``."""
    if order is None:
        order = sorted(range(len(values)), key=lambda j: (-values[j], j))
    used = 0
    total = zero
    chosen = []
    for j in order:
        if values[j] > 0 and not masks[j] & used:
            used |= masks[j]
            total += values[j]
            chosen.append(j)
    return total, tuple(sorted(chosen))


def dual_upper_bound(instance: Instance, values):
    """Feasible dual value ``sum_x w(x) max_{Q ni x} F(Q)/mu(Q)``, capped by ``sum F``."""
    mu = instance.set_measures
    dens = [v / m for v, m in zip(values, mu)]
    total = instance.zero()
    for i, sets in enumerate(instance.sets_containing):
        if sets:
            total += instance.weights[i] * max(dens[j] for j in sets)
    plain = sum(values, instance.zero())
    return min(total, plain)


def is_laminar(instance: Instance) -> bool:
    return _laminar_cached(instance) is None


def _forest_cached(instance):
    try:
        return instance.__dict__["_laminar_forest"]
    except KeyError:
        f = laminar_forest(instance.masks)
        instance.__dict__["_laminar_forest"] = f
        return f


def _laminar_cached(instance):
    try:
        return instance.__dict__["_laminar_witness"]
    except KeyError:
        w = laminar_witness(instance.masks)
        instance.__dict__["_laminar_witness"] = w
        return w


def norm_bounds(instance: Instance, F, cap: int = DEFAULT_CAP) -> NormBounds:
    """Best available bracket on the norm: exact when the family allows it."""
    return _norm_bounds(instance, set_function(instance, F), cap)


def _norm_bounds(instance: Instance, values, cap: int = DEFAULT_CAP) -> NormBounds:
    zero = instance.zero()
    if _laminar_cached(instance) is None:
        total, chosen = _laminar_norm(_forest_cached(instance), values, zero)
        return NormBounds(total, total, True, "laminar", chosen)
    if instance.n_sets <= cap:
        total, chosen = _branch_and_bound(instance.masks, values, zero)
        return NormBounds(total, total, True, "branch-and-bound", chosen)
    lower, chosen = greedy_packing(instance.masks, values, zero)
    return NormBounds(lower, dual_upper_bound(instance, values), False, "greedy/dual", chosen)


def family_norm(instance: Instance, F, mode: str = "exact", cap: int = DEFAULT_CAP):
    """The norm of ``F`` (``mode="exact"``) or a one-sided bound on it.

    ``exact`` raises :class:`CapacityError` when the family is not laminar and
    has more than ``cap`` sets.
    """
    values = set_function(instance, F)
    zero = instance.zero()
    if mode == "exact":
        if _laminar_cached(instance) is None:
            return _laminar_norm(_forest_cached(instance), values, zero)[0]
        if instance.n_sets > cap:
            raise CapacityError(instance.n_sets, cap)
        return _branch_and_bound(instance.masks, values, zero)[0]
    if mode == "greedy-lower":
        return greedy_packing(instance.masks, values, zero)[0]
    if mode == "upper":
        return dual_upper_bound(instance, values)
    raise MalformedInput(f"unknown norm mode {mode!r}; expected one of {MODES}")
