"""Calderon-Zygmund sets on the (ax+b)-group and their enlargement rectangles.

A set ``Z = Q x [t-r, t+r)`` has a cube ``Q`` of side ``L`` in ``R^n`` tied to
``(t, r)`` by

* ``e^2 e^t r <= L < e^8 e^t r``       when ``r < 1``
* ``e^t e^(2r) <= L < e^t e^(8r)``     when ``r >= 1``

and Lebesgue measure ``L^n * 2r``.  Every admissible ``Z'`` meeting ``Z``
with at most twice its measure fits in one rectangle ``Z*`` built from ``Z``
alone; :func:`cz_star` constructs it together with the four per-case
constant pairs that justify it, and :func:`cz_sample_partner` draws such
``Z'`` to test the constants.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import MalformedInput, SamplingError
from .euclid import Box

REL_TOL = 1e-9
SMALL, LARGE = "small-r", "large-r"
CASES = ("i", "ii", "iii", "iv")
CASE_BRANCHES = {"i": (SMALL, SMALL), "ii": (SMALL, LARGE), "iii": (LARGE, SMALL), "iv": (LARGE, LARGE)}


@dataclass(frozen=True)
class CZSet:
    corner: tuple
    L: float
    t: float
    r: float

    def __post_init__(self):
        object.__setattr__(self, "corner", tuple(float(x) for x in self.corner))
        if not self.L > 0 or not self.r > 0:
            raise MalformedInput("CZ set needs L > 0 and r > 0")
        if not self.corner:
            raise MalformedInput("CZ set needs a cube in dimension n >= 1")

    @property
    def n(self):
        return len(self.corner)

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(data["corner"]), float(data["L"]), float(data["t"]), float(data["r"]))

    def to_dict(self):
        return {"corner": list(self.corner), "L": self.L, "t": self.t, "r": self.r}


def side_range(t: float, r: float):
    """Admissible ``[lo, hi)`` for the side length given ``(t, r)``."""
    if r < 1:
        return math.exp(2 + t) * r, math.exp(8 + t) * r
    return math.exp(t + 2 * r), math.exp(t + 8 * r)


def cz_is_admissible(Z: CZSet, tol: float = REL_TOL):
    """``"small-r"``/``"large-r"`` when ``Z`` is admissible, ``None`` otherwise."""
    if not Z.L > 0 or not Z.r > 0:
        raise MalformedInput("CZ set needs L > 0 and r > 0")
    lo, hi = side_range(Z.t, Z.r)
    if Z.L >= lo * (1 - tol) and Z.L < hi * (1 + tol):
        return SMALL if Z.r < 1 else LARGE
    return None


def cz_measure(Z: CZSet) -> float:
    return Z.L ** Z.n * 2 * Z.r


def cz_hull_bound(n: int) -> float:
    """``4^(n+2) e^(24n)``: the enlargement factor, and the maximal-function constant it yields."""
    return 4.0 ** (n + 2) * math.exp(24 * n)


def case_constants(n: int) -> dict:
    """Per-case ``(radius factor, side factor)``."""
    lam1 = 2 ** (1 / (n + 1)) * math.exp(8 * n / (n + 1))
    return {
        "i": (lam1, math.exp(8) * lam1),
        "ii": (2 * math.exp(8 * n), 2 ** (1 / n)),
        "iii": (1.0, math.exp(8)),
        "iv": (9.0, 18 ** (1 / n)),
    }


@dataclass(frozen=True)
class CZStar:
    n: int
    lam: float
    eta: float
    cases: dict
    corner: tuple           # lower corner of the enlarged cube
    side: float             # (1 + 2 eta) L
    t_lo: float
    t_hi: float
    measure: float
    ratio: float            # measure(Z*) / measure(Z)
    bound: float = field(default=0.0)

    def to_dict(self):
        return {"n": self.n, "lambda": self.lam, "eta": self.eta,
                "cases": {k: {"radius": a, "side": b} for k, (a, b) in self.cases.items()},
                "corner": list(self.corner), "side": self.side, "t_lo": self.t_lo, "t_hi": self.t_hi,
                "measure": self.measure, "ratio": self.ratio, "bound": self.bound}


def cz_star(Z: CZSet) -> CZStar:
    """Enlarged rectangle ``Q* x [t-(1+2lam)r, t+(1+2lam)r]`` around an admissible ``Z``."""
    if cz_is_admissible(Z) is None:
        raise MalformedInput("cz_star needs an admissible CZ set")
    n = Z.n
    cases = case_constants(n)
    lam = max(a for a, _ in cases.values())
    eta = max(b for _, b in cases.values())
    side = (1 + 2 * eta) * Z.L
    corner = tuple(c + Z.L / 2 - side / 2 for c in Z.corner)
    half = (1 + 2 * lam) * Z.r
    measure = side ** n * 2 * half
    return CZStar(n, lam, eta, cases, corner, side, Z.t - half, Z.t + half,
                  measure, (1 + 2 * eta) ** n * (1 + 2 * lam), cz_hull_bound(n))


def meets(Z: CZSet, W: CZSet) -> bool:
    """Half-open cubes meet and the closed time intervals meet."""
    cubes = all(a < b + W.L and b < a + Z.L for a, b in zip(Z.corner, W.corner))
    return cubes and abs(Z.t - W.t) <= Z.r + W.r


def is_partner(Z: CZSet, W: CZSet, tol: float = REL_TOL) -> bool:
    """``W`` admissible, meets ``Z`` and has at most twice its measure."""
    return (cz_is_admissible(W, tol) is not None and meets(Z, W)
            and cz_measure(W) <= 2 * cz_measure(Z) * (1 + tol))


def inside_star(star: CZStar, W: CZSet, tol: float = REL_TOL) -> bool:
    scale = max(1.0, abs(star.side))
    for c, w in zip(star.corner, W.corner):
        if w < c - tol * scale or w + W.L > c + star.side + tol * scale:
            return False
    tscale = max(1.0, abs(star.t_lo), abs(star.t_hi))
    return W.t - W.r >= star.t_lo - tol * tscale and W.t + W.r <= star.t_hi + tol * tscale


def case_of(Z: CZSet, W: CZSet) -> str:
    return {(True, True): "i", (True, False): "ii", (False, True): "iii", (False, False): "iv"}[
        (Z.r < 1, W.r < 1)]


def check_partner(Z: CZSet, W: CZSet, tol: float = REL_TOL) -> dict:
    """Which of the guarantees hold for a partner ``W`` of ``Z``."""
    star = cz_star(Z)
    case = case_of(Z, W)
    a, b = star.cases[case]
    return {
        "case": case,
        "radius_case": W.r <= a * Z.r * (1 + tol),
        "side_case": W.L <= b * Z.L * (1 + tol),
        "radius_all": W.r <= star.lam * Z.r * (1 + tol),
        "side_all": W.L <= star.eta * Z.L * (1 + tol),
        "inside_star": inside_star(star, W, tol),
        "measure_bound": star.measure <= star.bound * cz_measure(Z) * (1 + tol),
    }


def _pick(rng, lo, hi, edge_prob):
    u = rng.random()
    if u < edge_prob / 2:
        return lo
    if u < edge_prob:
        return hi
    return rng.uniform(lo, hi)


def _log_pick(rng, lo, hi, edge_prob):
    u = rng.random()
    if u < edge_prob / 2:
        return lo
    if u < edge_prob:
        return hi * (1 - 1e-12)
    return math.exp(rng.uniform(math.log(lo), math.log(hi)))


def random_cz(n: int, branch: str, rng: random.Random) -> CZSet:
    """Random admissible set in the requested branch."""
    t = rng.uniform(-2, 2)
    r = rng.uniform(0.05, 1) if branch == SMALL else rng.uniform(1, 3)
    if branch == SMALL and r >= 1:
        r = 0.999
    lo, hi = side_range(t, r)
    L = _log_pick(rng, lo, hi, 0.2)
    corner = tuple(rng.uniform(-1, 1) * L for _ in range(n))
    return CZSet(corner, L, t, r)


def cz_sample_partner(Z: CZSet, case: str, seed=None, budget: int = 100_000,
                      edge_prob: float = 0.2) -> CZSet:
    """Draw an admissible ``W`` meeting ``Z`` with ``m(W) <= 2 m(Z)`` in the given case.

    Proposals put the time center anywhere the closed intervals meet, the
    side anywhere in its admissible range capped by the measure condition,
    and the cube anywhere it meets ``Q``; a fraction ``edge_prob`` of each
    draw is pushed to the boundary of its range.
    """
    if case not in CASES:
        raise MalformedInput(f"unknown case {case!r}")
    zb, wb = CASE_BRANCHES[case]
    branch = cz_is_admissible(Z)
    if branch is None:
        raise MalformedInput("cz_sample_partner needs an admissible Z")
    if branch != zb:
        raise MalformedInput(f"case {case} needs Z in the {zb} branch")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    n = Z.n
    mz = cz_measure(Z)
    for _ in range(budget):
        if wb == SMALL:
            r2 = rng.uniform(1e-3, 1)
            if r2 >= 1:
                continue
        else:
            r2 = rng.uniform(1, max(2.0, 10 * Z.r))
        t2 = _pick(rng, Z.t - Z.r - r2, Z.t + Z.r + r2, edge_prob)
        lo, hi = side_range(t2, r2)
        cap = (2 * mz / (2 * r2)) ** (1 / n)
        hi = min(hi, cap)
        if not lo < hi:
            continue
        L2 = _log_pick(rng, lo, hi, edge_prob)
        corner = tuple(_pick(rng, c - L2 * (1 - 1e-12), c + Z.L * (1 - 1e-12), edge_prob)
                       for c in Z.corner)
        W = CZSet(corner, L2, t2, r2)
        if is_partner(Z, W) and case_of(Z, W) == case:
            return W
    raise SamplingError(f"no case-{case} partner found in {budget} draws")


def cz_box(Z: CZSet) -> Box:
    """``Z`` as a half-open box in ``R^(n+1)`` (cube coordinates, then time)."""
    return Box(tuple(Z.corner) + (Z.t - Z.r,), tuple(c + Z.L for c in Z.corner) + (Z.t + Z.r,))
