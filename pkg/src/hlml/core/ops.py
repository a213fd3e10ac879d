"""Constructions on instances: integral set functions, family unions, measure scaling."""
from __future__ import annotations

from typing import Mapping

from ..errors import MalformedInput
from .instance import Instance


def build_integral_setfunction(instance: Instance, f: Mapping) -> dict:
    """``F(Q) = sum_{x in Q} |f(x)| w(x)``, keyed by set id.

    Its norm never exceeds ``sum_x |f(x)| w(x)``.
    """
    try:
        dens = [abs(instance.number(f[p])) for p in instance.point_ids]
    except KeyError as exc:
        raise MalformedInput(f"f misses point {exc.args[0]!r}") from None
    contrib = [d * w for d, w in zip(dens, instance.weights)]
    zero = instance.zero()
    return {sid: sum((contrib[i] for i in mem), zero)
            for sid, mem in zip(instance.set_ids, instance.members)}


def integral_total(instance: Instance, f: Mapping):
    """``sum_x |f(x)| w(x)``: the L1 mass of ``f``."""
    return sum((abs(instance.number(f[p])) * w for p, w in zip(instance.point_ids, instance.weights)),
               instance.zero())


def family_union(a: Instance, b: Instance) -> Instance:
    """Pointwise union of two pointings over the same weighted ground set.

    Sets are matched by id; a shared id must have the same members in both.
    """
    if a.point_ids != b.point_ids or a.weights != b.weights or a.mode != b.mode:
        raise MalformedInput("family union needs identical points, weights and numeric mode")
    set_ids = list(a.set_ids)
    members = list(a.members)
    index = dict(a.set_index)
    for sid, mem in zip(b.set_ids, b.members):
        if sid in index:
            if members[index[sid]] != mem:
                raise MalformedInput(f"set id {sid!r} has different members in the two families")
            continue
        index[sid] = len(set_ids)
        set_ids.append(sid)
        members.append(mem)
    pointing = []
    for row_a, row_b in zip(a.pointing, b.pointing):
        row = list(row_a)
        for j in row_b:
            k = index[b.set_ids[j]]
            if k not in row:
                row.append(k)
        pointing.append(tuple(row))
    out = Instance(a.point_ids, a.weights, tuple(set_ids), tuple(members), tuple(pointing),
                   a.mode, a.tol)
    out.validate()
    return out


def scale_measure(instance: Instance, s) -> Instance:
    """Same family with every weight multiplied by ``s > 0``."""
    s = instance.number(s)
    if not s > 0:
        raise MalformedInput(f"scale must be positive, got {s}")
    return Instance(instance.point_ids, tuple(w * s for w in instance.weights), instance.set_ids,
                    instance.members, instance.pointing, instance.mode, instance.tol)
