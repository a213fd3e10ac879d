"""Maximal function, the weak-type ratio and its verification.

For a finite instance the supremum over ``r > 0`` of ``r * mu{M F > r}`` is
attained in the limit ``r -> v`` from below at one of the finitely many
values ``v`` taken by ``M F``, where it equals ``v * mu{M F >= v}``.  All
checks below therefore run over these breakpoints only.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .._numeric import EXACT, le, mpq, to_json
from ..covering import select_disjoint_indices
from ..errors import CapacityError, MalformedInput
from .instance import Instance, set_function
from .norm import DEFAULT_CAP, NormBounds, _norm_bounds

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass(frozen=True)
class MaximalProfile:
    values: tuple          # M F at each point, in instance point order
    breakpoints: tuple     # distinct values, descending
    argmax: tuple          # a maximising set index per point (None where M F = 0 via no set)
    levels: tuple = field(default=(), repr=False)  # (v, mu{M F >= v}) per positive breakpoint

    def as_dict(self, instance: Instance):
        return dict(zip(instance.point_ids, self.values))


def _profile(instance: Instance, values) -> MaximalProfile:
    mu = instance.set_measures
    ratios = [v / m for v, m in zip(values, mu)]
    # reverse=True keeps equal ratios in index order
    order = sorted(range(instance.n_sets), key=ratios.__getitem__, reverse=True)
    n = instance.n_points
    out = [None] * n
    arg = [None] * n
    pointed_by = instance.pointed_by
    weights = instance.weights
    levels = []
    running = instance.zero()
    assigned = 0
    for j in order:
        r = ratios[j]
        fresh = [i for i in pointed_by[j] if out[i] is None]
        if not fresh:
            continue
        for i in fresh:
            out[i] = r
            arg[i] = j
            running += weights[i]
        assigned += len(fresh)
        if levels and levels[-1][0] == r:
            levels[-1] = (r, running)
        else:
            levels.append((r, running))
        if assigned == n:
            break
    breakpoints = tuple(v for v, _ in levels)
    positive = tuple((v, m) for v, m in levels if v > 0)
    return MaximalProfile(tuple(out), breakpoints, tuple(arg), positive)


def maximal_function(instance: Instance, F) -> MaximalProfile:
    """Per-point maximum of ``F(Q)/mu(Q)`` over the sets the point is pointed to."""
    return _profile(instance, set_function(instance, F))


def superlevel_measure(instance: Instance, profile: MaximalProfile, r, strict: bool = True):
    """``mu{M F > r}`` (or ``>= r`` with ``strict=False``)."""
    total = instance.zero()
    for i, v in enumerate(profile.values):
        if v > r or (not strict and v == r):
            total += instance.weights[i]
    return total


def hl_ratio(instance: Instance, F, cap: int = DEFAULT_CAP):
    """``max_v v * mu{M F >= v} / ||F||`` with the exact norm (0 when the norm is 0)."""
    values = set_function(instance, F)
    bounds = _norm_bounds(instance, values, cap)
    if not bounds.exact:
        raise CapacityError(instance.n_sets, cap)
    return _ratio(_profile(instance, values), bounds.lower, instance)


def _peak(profile: MaximalProfile, zero):
    best = zero
    for v, m in profile.levels:
        if v * m > best:
            best = v * m
    return best


def _ratio(profile, norm, instance):
    if norm == 0:
        return instance.zero()
    return _peak(profile, instance.zero()) / norm


@dataclass
class HLReport:
    """Outcome of an inequality check or of a lower-bound search."""

    c: object = None
    status: str = PASS
    norm: object = None
    norm_exact: bool = True
    norm_lower: object = None
    norm_upper: object = None
    ratio: object = None
    witness_v: object = None
    verdicts: list = field(default_factory=list)
    certified_c: object = None
    lower_bound: object = None
    strategy: str = ""
    best_F: Optional[tuple] = None
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self, instance: Optional[Instance] = None):
        out = {
            "c": to_json(self.c), "status": self.status, "norm": to_json(self.norm),
            "norm_exact": self.norm_exact, "norm_lower": to_json(self.norm_lower),
            "norm_upper": to_json(self.norm_upper), "ratio": to_json(self.ratio),
            "witness_v": to_json(self.witness_v), "certified_c": to_json(self.certified_c),
            "lower_bound": to_json(self.lower_bound), "strategy": self.strategy,
            "notes": list(self.notes),
            "verdicts": [{"v": to_json(v), "measure": to_json(m), "lhs": to_json(lhs),
                          "ok": ok} for v, m, lhs, ok in self.verdicts],
        }
        if self.best_F is not None and instance is not None:
            out["best_F"] = {s: to_json(v) for s, v in zip(instance.set_ids, self.best_F)}
        return out


Witness = Callable[[Instance, tuple, list], list]


def dilation_witness(instance: Instance, values, candidates):
    """Disjoint subfamily of ``candidates`` chosen by residual suprema of ``mu``."""
    masks = instance.masks
    return select_disjoint_indices(instance.set_measures,
                                   lambda a, b: masks[a] & masks[b] != 0, candidates)


def verify_hl_inequality(instance: Instance, F, c, witness: Optional[Witness] = None,
                         cap: int = DEFAULT_CAP) -> HLReport:
    """Check ``v * mu{M F >= v} <= c * ||F||`` at every breakpoint ``v``.

    When the norm is not computable exactly the check runs against a lower
    bound on it (so a pass is always genuine).  A breakpoint that fails
    against the lower bound but not against the upper bound is retried after
    enlarging the lower bound with a disjoint subfamily built from the sets
    realising ``M F >= v`` (residual-supremum selection by measure, plus the
    optional geometry-specific ``witness``).  Status is ``fail`` only when
    the exact (or upper) norm fails; otherwise ``inconclusive``.
    """
    c = instance.number(c)
    if c < 0:
        raise MalformedInput("c must be nonnegative")
    values = set_function(instance, F)
    profile = _profile(instance, values)
    bounds: NormBounds = _norm_bounds(instance, values, cap)
    lower, upper = bounds.lower, bounds.upper
    mode, tol = instance.mode, instance.tol
    masks = instance.masks
    report = HLReport(c=c, norm_exact=bounds.exact)
    undecided = False
    for v, m in profile.levels:
        lhs = v * m
        ok = le(lhs, c * lower, mode, tol)
        if not ok and not bounds.exact and le(lhs, c * upper, mode, tol):
            cands = sorted({profile.argmax[i] for i, x in enumerate(profile.values) if x >= v})
            families = [dilation_witness(instance, values, cands)]
            if witness is not None:
                families.append(list(witness(instance, values, cands)))
            for fam in families:
                used = 0
                for j in fam:
                    if masks[j] & used:
                        raise MalformedInput("witness family is not pairwise disjoint")
                    used |= masks[j]
                total = sum((values[j] for j in fam), instance.zero())
                if total > lower:
                    lower = total
            ok = le(lhs, c * lower, mode, tol)
            if not ok and le(lhs, c * upper, mode, tol):
                undecided = True
                report.verdicts.append((v, m, lhs, None))
                if report.witness_v is None:
                    report.witness_v = v
                continue
        report.verdicts.append((v, m, lhs, ok))
        if not ok and report.status == PASS:
            report.status = FAIL
            report.witness_v = v
    if report.status == PASS and undecided:
        report.status = INCONCLUSIVE
    report.norm_lower, report.norm_upper = lower, upper
    report.norm = lower if bounds.exact else None
    peak = _peak(profile, instance.zero())
    if bounds.exact:
        report.ratio = peak / lower if lower else instance.zero()
    else:
        report.ratio = peak / upper if upper else instance.zero()
        report.notes.append("norm bracketed; ratio is the lower end (peak / norm upper bound)")
    return report


# ------------------------------------------------------------------ search
def _ratio_lower(instance, values, cap):
    """A value that never exceeds the true ratio of ``values`` (exact when possible)."""
    bounds = _norm_bounds(instance, values, cap)
    prof = _profile(instance, values)
    return _ratio(prof, bounds.upper, instance), bounds.exact


def singleton_ratio(instance: Instance, j: int):
    """Ratio of ``F = mu(Q_j) * 1_{Q_j}``: ``mu{x : Q_j pointed by x} / mu(Q_j)``."""
    return instance.measure_idx(instance.pointed_by[j]) / instance.set_measures[j]


def _random_value(rng, mode, scale):
    if mode == EXACT:
        return mpq(rng.randint(0, 10**6), 10**6) * scale
    return rng.random() * float(scale)


def random_setfunction(instance: Instance, rng: random.Random, sparsity: float = 0.0):
    """Uniform random values on ``[0, mu(Q))`` per set; ``sparsity`` zeroes a fraction of them."""
    out = []
    for m in instance.set_measures:
        if sparsity and rng.random() < sparsity:
            out.append(instance.zero())
        else:
            out.append(_random_value(rng, instance.mode, m))
    return tuple(out)


def empirical_hl_lower_bound(instance: Instance, trials: int = 20, ascent_steps: int = 50,
                             seed: int = 0, cap: int = DEFAULT_CAP) -> HLReport:
    """Best ratio found by the singleton sweep, random trials and coordinate ascent.

    Every candidate ratio is computed against an upper bound on the norm (the
    exact norm when available), so the result is a genuine lower bound on the
    smallest admissible constant.
    """
    rng = random.Random(seed)
    zero = instance.zero()
    report = HLReport(strategy="singleton-sweep", lower_bound=zero)
    best_F = None
    for j in range(instance.n_sets):
        r = singleton_ratio(instance, j)
        if r > report.lower_bound:
            report.lower_bound = r
            best_F = tuple(instance.set_measures[j] if k == j else zero
                           for k in range(instance.n_sets))
    all_exact = True
    current, current_r = best_F, report.lower_bound
    for _ in range(trials):
        F = random_setfunction(instance, rng, sparsity=rng.choice((0.0, 0.5, 0.9)))
        r, exact = _ratio_lower(instance, F, cap)
        all_exact &= exact
        if r > report.lower_bound:
            report.lower_bound, best_F, report.strategy = r, F, "random"
    if best_F is not None:
        current, current_r = list(best_F), report.lower_bound
        for _ in range(ascent_steps):
            j = rng.randrange(instance.n_sets)
            trial = list(current)
            trial[j] = _random_value(rng, instance.mode, instance.set_measures[j] * 2)
            r, exact = _ratio_lower(instance, trial, cap)
            all_exact &= exact
            if r > current_r:
                current, current_r = trial, r
        if current_r > report.lower_bound:
            report.lower_bound, best_F, report.strategy = current_r, tuple(current), "coordinate-ascent"
    report.best_F = best_F
    report.ratio = report.lower_bound
    report.norm_exact = all_exact
    if not all_exact:
        report.notes.append("some candidates were scored against a norm upper bound")
    return report
