"""Certified upper bounds on the maximal constant.

Two routes certify a constant for *every* set function on an instance:

* the hull route: if each hull ``Q~`` (union of the sets meeting ``Q`` with
  measure at most ``lam * mu(Q)``) has ``mu(Q~) <= c mu(Q)``, then ``c`` works;
* the dyadic route: a nested-or-disjoint family with monotone measure
  certifies ``c = 1``.

:func:`homogeneous_bound` is the closed-form constant for doubling quasimetric
spaces.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

from .._numeric import EXACT, le
from ..errors import MalformedInput
from .instance import Instance
from .norm import laminar_witness


def _hull_mask(instance: Instance, j: int, lam, order=None, sorted_mu=None):
    mu = instance.set_measures
    masks = instance.masks
    limit = lam * mu[j]
    if instance.mode != EXACT:
        limit = limit + instance.tol * max(1.0, abs(limit))
    if order is None:
        cands = range(instance.n_sets)
    else:
        cands = order[:bisect_right(sorted_mu, limit)]
    qm = masks[j]
    hull = qm
    for k in cands:
        if mu[k] <= limit and masks[k] & qm:
            hull |= masks[k]
    return hull


def _mask_ids(instance, mask):
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(instance.point_ids[i])
        mask >>= 1
        i += 1
    return frozenset(out)


def dilation_hull(instance: Instance, set_id: str, lam) -> frozenset:
    """Point ids of the union of all sets meeting ``set_id`` with measure <= ``lam * mu(set)``."""
    lam = instance.number(lam)
    if lam < 1:
        raise MalformedInput(f"lambda must be >= 1, got {lam}")
    try:
        j = instance.set_index[set_id]
    except KeyError:
        raise MalformedInput(f"unknown set id {set_id!r}") from None
    return _mask_ids(instance, _hull_mask(instance, j, lam))


def hl4_constant(instance: Instance, lam):
    """``max_Q mu(Q~)/mu(Q)``; a valid constant for every set function (``None`` on an empty family)."""
    lam = instance.number(lam)
    if not lam > 1:
        raise MalformedInput(f"lambda must be > 1, got {lam}")
    if instance.n_sets == 0:
        return None
    mu = instance.set_measures
    order = sorted(range(instance.n_sets), key=lambda k: mu[k])
    sorted_mu = [mu[k] for k in order]
    best = None
    for j in range(instance.n_sets):
        ratio = instance.measure_mask(_hull_mask(instance, j, lam, order, sorted_mu)) / mu[j]
        if best is None or ratio > best:
            best = ratio
    return best


@dataclass
class ConditionResult:
    passed: bool
    note: str = ""
    witness: object = None


@dataclass
class DyadicReport:
    conditions: dict = field(default_factory=dict)
    certified_c: object = None

    @property
    def passed(self):
        return all(r.passed for r in self.conditions.values())

    def to_dict(self):
        return {
            "conditions": {k: {"passed": r.passed, "note": r.note,
                               "witness": list(r.witness) if r.witness else None}
                           for k, r in self.conditions.items()},
            "certified_c": self.certified_c,
        }


def check_dyadic_conditions(instance: Instance) -> DyadicReport:
    """Evaluate the five nested-family conditions on a finite weighted instance.

    Measurability, countability and the no-accumulation condition hold for
    any finite weighted instance and are reported as such.  Nesting
    (pairwise nested-or-disjoint) and monotonicity of the measure along
    strict inclusions are checked.
    """
    rep = DyadicReport()
    rep.conditions["D1"] = ConditionResult(
        True, "vacuously true: every subset is measurable for a finite weighted measure")
    rep.conditions["D2"] = ConditionResult(True, f"finite family ({instance.n_sets} sets)")
    masks = instance.masks
    w = laminar_witness(masks)
    if w is None:
        rep.conditions["D3"] = ConditionResult(True, "every pair is nested or disjoint")
    else:
        a, b = w
        rep.conditions["D3"] = ConditionResult(
            False, "pair overlaps without nesting", (instance.set_ids[a], instance.set_ids[b]))
    # D4 along strict inclusions; for a laminar family these all show up in point chains
    mu = instance.set_measures
    d4 = ConditionResult(True, "measure is monotone along strict inclusions")
    for chain in instance.sets_containing:
        srt = sorted(chain, key=lambda j: -masks[j].bit_count())
        for big, small in zip(srt, srt[1:]):
            if masks[small] != masks[big] and masks[small] & masks[big] == masks[small]:
                if not le(mu[small], mu[big], instance.mode, instance.tol):
                    d4 = ConditionResult(False, "measure decreases along an inclusion",
                                         (instance.set_ids[small], instance.set_ids[big]))
                    break
        if not d4.passed:
            break
    rep.conditions["D4"] = d4
    rep.conditions["D5"] = ConditionResult(
        True, f"finitely many measure values ({len(set(mu))}); no accumulation point")
    if rep.passed:
        rep.certified_c = 1
    return rep


def _exactify(x):
    if isinstance(x, (int, Rational)) or type(x).__name__ == "mpq":
        return Fraction(int(x.numerator), int(x.denominator)) if not isinstance(x, int) else Fraction(x)
    return Fraction(x)  # binary value of the float


def homogeneous_bound(K, alpha, beta):
    """Smallest natural ``m`` with ``alpha**m >= 2K(4K^2+1)``, and the constant ``beta**m``.

    Comparisons are done in exact rational arithmetic on the given values
    (floats are taken at their binary value).  The bound is an int/Fraction
    when ``beta`` is rational, a float otherwise.
    """
    for name, val in (("K", K), ("alpha", alpha), ("beta", beta)):
        try:
            ok = math.isfinite(float(val))
        except (TypeError, ValueError):
            ok = False
        if not ok:
            raise MalformedInput(f"{name} must be a finite number, got {val!r}")
    if not K >= 1:
        raise MalformedInput(f"K must be >= 1, got {K}")
    if not alpha > 1 or not beta > 1:
        raise MalformedInput("alpha and beta must be > 1")
    Kq, aq = _exactify(K), _exactify(alpha)
    target = 2 * Kq * (4 * Kq * Kq + 1)
    m = max(1, math.floor(math.log(float(target)) / math.log(float(alpha))) - 1)
    while aq ** m >= target and m > 1:
        m -= 1
    while aq ** m < target:
        m += 1
    if isinstance(beta, float):
        bound = float(beta) ** m
    else:
        bound = _exactify(beta) ** m
        if bound.denominator == 1:
            bound = int(bound)
    return m, bound
