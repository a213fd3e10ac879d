import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hlml.core import (Instance, build_integral_setfunction, check_dyadic_conditions, dilation_hull,
                       empirical_hl_lower_bound, family_norm, family_union, hl4_constant, hl_ratio,
                       homogeneous_bound, integral_total, is_laminar, maximal_function, measure_of,
                       norm_bounds, scale_measure, set_function, superlevel_measure,
                       verify_hl_inequality)
from hlml.core.instance import SetFunction, subset_instance
from hlml.core.maximal import FAIL, PASS, singleton_ratio
from hlml.errors import CapacityError, MalformedInput
from hlml.euclid import dyadic_instance

from oracles import (brute_hull, brute_maximal, brute_norm, brute_ratio, random_instance,
                     random_values)

seeds = st.integers(0, 2**32 - 1)


@pytest.fixture
def two_point():
    return Instance.build([("a", 1), ("b", 1)], [("Q1", ["a"]), ("Q2", ["a", "b"])],
                          {"a": ["Q1", "Q2"], "b": ["Q2"]})


def one_set_spike(instance, sid):
    return {s: (instance.set_measures[j] if s == sid else 0) for j, s in enumerate(instance.set_ids)}


# ------------------------------------------------------------ instance
def test_measure_of_examples():
    inst = Instance.build([("a", 1), ("b", 3)], [("Q", ["a", "b"])])
    assert measure_of(inst, []) == 0
    assert measure_of(inst, ["a"]) == 1
    assert measure_of(inst, ["a", "b"]) == 4
    with pytest.raises(MalformedInput):
        measure_of(inst, ["zz"])


@pytest.mark.parametrize("points,sets,pointing", [
    ([("a", 0)], [("Q", ["a"])], "containing"),                       # zero weight
    ([("a", -1)], [("Q", ["a"])], "containing"),
    ([("a", 1)], [("Q", [])], "containing"),                          # empty set
    ([("a", 1)], [("Q", ["b"])], "containing"),                       # unknown point
    ([("a", 1), ("b", 1)], [("Q", ["a"])], {"a": ["Q"], "b": ["Q"]}),  # b not in Q
    ([("a", 1)], [("Q", ["a"]), ("R", ["a"])], {"a": ["Q"]}),          # R never pointed
    ([("a", 1)], [("Q", ["a"])], {"a": []}),                           # empty pointing
    ([("a", 1), ("a", 2)], [("Q", ["a"])], "containing"),             # duplicate id
])
def test_build_rejects_malformed(points, sets, pointing):
    with pytest.raises(MalformedInput):
        Instance.build(points, sets, pointing)


def test_rational_strings_and_json_roundtrip(two_point):
    inst = Instance.build([("a", "1/3"), ("b", 2)], [("Q", ["a", "b"])])
    assert inst.set_measures[0] == Fraction(7, 3)
    back = Instance.from_dict(inst.to_dict())
    assert back.to_dict() == inst.to_dict()
    assert Instance.from_dict(two_point.to_dict()).to_dict() == two_point.to_dict()


def test_set_function_validation(two_point):
    assert set_function(two_point, {"Q1": 2, "Q2": "3/2"}) == (2, Fraction(3, 2))
    with pytest.raises(MalformedInput):
        set_function(two_point, {"Q1": 1})
    with pytest.raises(MalformedInput):
        set_function(two_point, {"Q1": 1, "Q2": -1})
    with pytest.raises(MalformedInput):
        set_function(two_point, {"Q1": 1, "Q2": 1, "Q9": 0})
    with pytest.raises(MalformedInput):
        set_function(two_point, [1])
    assert SetFunction.of(two_point, [1, 2]).to_dict() == {"Q1": 1, "Q2": 2}


def test_float_mode_rejects_nonfinite():
    inst = Instance.build([("a", 1.0)], [("Q", ["a"])], mode="float")
    with pytest.raises(MalformedInput):
        set_function(inst, [float("nan")])
    with pytest.raises(MalformedInput):
        set_function(inst, [float("inf")])


# ------------------------------------------------------------ maximal function
def test_maximal_function_examples(two_point):
    prof = maximal_function(two_point, {"Q1": 2, "Q2": 3})
    assert prof.as_dict(two_point) == {"a": 2, "b": Fraction(3, 2)}
    assert prof.breakpoints == (2, Fraction(3, 2))
    zero = maximal_function(two_point, {"Q1": 0, "Q2": 0})
    assert set(zero.values) == {0}


def test_maximal_function_of_spike_is_indicator():
    inst = random_instance(random.Random(4), n_points=6, n_sets=5, containing=True)
    for sid, mem in zip(inst.set_ids, inst.members):
        prof = maximal_function(inst, one_set_spike(inst, sid))
        assert {i for i, v in enumerate(prof.values) if v == 1} == set(mem)
        assert all(v == 0 for i, v in enumerate(prof.values) if i not in mem)


def test_superlevel_measure(two_point):
    prof = maximal_function(two_point, {"Q1": 2, "Q2": 3})
    assert superlevel_measure(two_point, prof, Fraction(3, 2)) == 1
    assert superlevel_measure(two_point, prof, Fraction(3, 2), strict=False) == 2
    assert superlevel_measure(two_point, prof, 0) == 2


# ------------------------------------------------------------ norm
def test_norm_examples():
    one = Instance.build([("a", 1)], [("Q", ["a"])])
    assert family_norm(one, [5]) == 5
    inst = Instance.build([("a", 1), ("b", 1)],
                          [("Q1", ["a"]), ("Q2", ["b"]), ("Q3", ["a", "b"])])
    assert family_norm(inst, [3, 4, 6]) == 7
    assert family_norm(inst, [0, 0, 0]) == 0


def test_norm_cap_error_names_cap():
    rng = random.Random(1)
    # a non-laminar family of 12 sets
    while True:
        inst = random_instance(rng, n_points=6, n_sets=12, containing=True)
        if not is_laminar(inst):
            break
    with pytest.raises(CapacityError, match="at most 5"):
        family_norm(inst, [1] * 12, cap=5)
    assert family_norm(inst, [1] * 12, "greedy-lower", cap=5) >= 1
    with pytest.raises(MalformedInput):
        family_norm(inst, [1] * 12, "bogus")


def test_laminar_norm_has_no_cap():
    inst = dyadic_instance(1, 0, 6)
    assert inst.n_sets == 127
    values = [0] * inst.n_sets
    values[0] = 5
    assert family_norm(inst, values, cap=1) == 5


@given(seeds)
def test_norm_matches_enumeration(seed):
    rng = random.Random(seed)
    inst = random_instance(rng)
    F = random_values(inst, rng)
    exact = family_norm(inst, F)
    assert exact == brute_norm(list(inst.members), F)
    assert max(F) <= exact <= sum(F)
    lo = family_norm(inst, F, "greedy-lower")
    hi = family_norm(inst, F, "upper")
    assert lo <= exact <= hi


@given(seeds)
def test_bounds_bracket_when_over_cap(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, n_sets=rng.randint(4, 10))
    F = random_values(inst, rng)
    b = norm_bounds(inst, F, cap=2)
    true = brute_norm(list(inst.members), F)
    assert b.lower <= true <= b.upper
    if b.exact:
        assert b.lower == true
    # the chosen witness is a disjoint subfamily realising the lower bound
    used = set()
    for j in b.chosen:
        assert not used & inst.members[j]
        used |= inst.members[j]
    assert sum((F[j] for j in b.chosen), 0) == b.lower


# ------------------------------------------------------------ ratio and verification
def test_ratio_examples(two_point):
    assert hl_ratio(two_point, {"Q1": 2, "Q2": 3}) == 1
    assert hl_ratio(two_point, {"Q1": 0, "Q2": 0}) == 0
    spike = one_set_spike(two_point, "Q2")
    assert hl_ratio(two_point, spike) == 1
    inst = Instance.build([("a", 1), ("b", 2)], [("Q", ["a", "b"]), ("R", ["b"])])
    assert hl_ratio(inst, one_set_spike(inst, "Q")) == 1


def test_verify_examples():
    inst = Instance.build([("a", 1), ("b", 2)], [("Q", ["a", "b"]), ("R", ["b"])])
    F = one_set_spike(inst, "Q")
    ok = verify_hl_inequality(inst, F, 1)
    assert ok.status == PASS
    assert any(v == 1 and lhs == 3 for v, _, lhs, _ in ok.verdicts)
    bad = verify_hl_inequality(inst, F, Fraction(1, 2))
    assert bad.status == FAIL and bad.witness_v == 1
    with pytest.raises(MalformedInput):
        verify_hl_inequality(inst, F, -1)


@given(seeds)
def test_ratio_matches_definition(seed):
    rng = random.Random(seed)
    inst = random_instance(rng)
    F = random_values(inst, rng)
    prof = maximal_function(inst, F)
    assert list(prof.values) == brute_maximal(inst, F)
    assert list(prof.breakpoints) == sorted(set(prof.values), reverse=True)
    r = hl_ratio(inst, F)
    assert r == brute_ratio(inst, F)
    if r > 0:
        assert verify_hl_inequality(inst, F, r).passed
        assert verify_hl_inequality(inst, F, r * Fraction(999, 1000)).status == FAIL


@given(seeds)
def test_verify_is_sound_without_exact_norm(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, n_sets=rng.randint(3, 10))
    F = random_values(inst, rng)
    true = brute_ratio(inst, F)
    for c in (true, true * Fraction(3, 2), true / 2, Fraction(1)):
        rep = verify_hl_inequality(inst, F, c, cap=1)
        if rep.status == PASS:
            assert true <= c
        if rep.status == FAIL:
            assert true > c


@given(seeds)
def test_pointing_monotonicity(seed):
    rng = random.Random(seed)
    small = random_instance(rng, containing=False)
    big = Instance.build(list(zip(small.point_ids, small.weights)),
                         [(s, [small.point_ids[i] for i in m]) for s, m in zip(small.set_ids, small.members)],
                         "containing")
    F = random_values(small, rng)
    a = maximal_function(small, F).values
    b = maximal_function(big, F).values
    assert all(x <= y for x, y in zip(a, b))
    assert hl_ratio(small, F) <= hl_ratio(big, F)


# ------------------------------------------------------------ lower-bound search
@given(seeds)
def test_singleton_sweep_reaches_one_on_containing(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, containing=True)
    rep = empirical_hl_lower_bound(inst, trials=3, ascent_steps=5, seed=seed)
    assert rep.lower_bound >= 1
    assert all(singleton_ratio(inst, j) == 1 for j in range(inst.n_sets))


@given(seeds)
def test_search_result_is_a_true_ratio(seed):
    rng = random.Random(seed)
    inst = random_instance(rng)
    rep = empirical_hl_lower_bound(inst, trials=4, ascent_steps=6, seed=seed)
    if rep.best_F is not None:
        assert brute_ratio(inst, rep.best_F) >= rep.lower_bound
    assert rep.lower_bound <= hl4_constant(inst, 2)


def test_search_is_seeded():
    inst = random_instance(random.Random(9), n_points=7, n_sets=9)
    a = empirical_hl_lower_bound(inst, trials=10, ascent_steps=20, seed=3)
    b = empirical_hl_lower_bound(inst, trials=10, ascent_steps=20, seed=3)
    assert a.to_dict(inst) == b.to_dict(inst)


def test_dyadic_lower_bound_is_one():
    inst = dyadic_instance(1, 0, 4)
    rep = empirical_hl_lower_bound(inst, trials=20, ascent_steps=30)
    assert rep.lower_bound == 1 and rep.norm_exact


# ------------------------------------------------------------ certificates
def test_dilation_hull_examples(two_point):
    one = Instance.build([("a", 1)], [("Q", ["a"])])
    assert dilation_hull(one, "Q", 7) == {"a"}
    assert dilation_hull(two_point, "Q1", 2) == {"a", "b"}
    dy = dyadic_instance(1, -1, 1)  # window [0, 2), scales -1..1
    assert dilation_hull(dy, "D0[0]", Fraction(3, 2)) == {"c0", "c1"}
    with pytest.raises(MalformedInput):
        dilation_hull(two_point, "nope", 2)
    with pytest.raises(MalformedInput):
        dilation_hull(two_point, "Q1", Fraction(1, 2))


def test_hl4_examples(two_point):
    disjoint = Instance.build([("a", 1), ("b", 2)], [("A", ["a"]), ("B", ["b"])])
    assert hl4_constant(disjoint, 5) == 1
    assert hl4_constant(two_point, 2) == 2
    assert hl4_constant(dyadic_instance(1, -1, 1), Fraction(3, 2)) == 1
    with pytest.raises(MalformedInput):
        hl4_constant(two_point, 1)


@given(seeds)
def test_hull_matches_brute_force(seed):
    rng = random.Random(seed)
    inst = random_instance(rng)
    lam = Fraction(rng.randint(11, 40), 10)
    for j, sid in enumerate(inst.set_ids):
        got = dilation_hull(inst, sid, lam)
        want = {inst.point_ids[i] for i in brute_hull(inst, j, lam)}
        assert got == want
        assert got >= {inst.point_ids[i] for i in inst.members[j]}


@given(seeds)
def test_hull_constant_is_sound(seed):
    rng = random.Random(seed)
    inst = random_instance(rng)
    c = hl4_constant(inst, 2)
    for _ in range(10):
        F = random_values(inst, rng)
        assert verify_hl_inequality(inst, F, c).passed
        assert brute_ratio(inst, F) <= c


def test_dyadic_condition_examples():
    rep = check_dyadic_conditions(dyadic_instance(2, 0, 2))
    assert rep.passed and rep.certified_c == 1
    assert set(rep.conditions) == {"D1", "D2", "D3", "D4", "D5"}
    cross = Instance.build([("a", 1), ("b", 1), ("c", 1)], [("X", ["a", "b"]), ("Y", ["b", "c"])])
    rep = check_dyadic_conditions(cross)
    assert not rep.conditions["D3"].passed
    assert set(rep.conditions["D3"].witness) == {"X", "Y"}
    assert rep.certified_c is None
    single = Instance.build([("a", 1)], [("Q", ["a"])])
    assert check_dyadic_conditions(single).passed
    # nested but the inner set is heavier than the outer one cannot happen with positive
    # weights; D4 is still evaluated and reported
    assert check_dyadic_conditions(single).to_dict()["conditions"]["D4"]["passed"]


@given(seeds)
def test_dyadic_route_is_sound(seed):
    rng = random.Random(seed)
    inst = random_instance(rng)
    if check_dyadic_conditions(inst).passed:
        for _ in range(5):
            F = random_values(inst, rng)
            assert verify_hl_inequality(inst, F, 1).passed
            assert brute_ratio(inst, F) <= 1


def test_homogeneous_bound_examples():
    for n in range(1, 5):
        assert homogeneous_bound(1, 2, 2 ** n) == (4, 2 ** (4 * n))
    assert homogeneous_bound(1, 2, 2) == (4, 16)
    assert homogeneous_bound(2, 2, 3) == (7, 2187)
    for bad in [(float("inf"), 2, 2), (1, float("nan"), 2), (0.5, 2, 2), (1, 1, 2), (1, 2, 1)]:
        with pytest.raises(MalformedInput):
            homogeneous_bound(*bad)


@given(st.fractions(1, 20), st.fractions(Fraction(101, 100), 10), st.fractions(Fraction(101, 100), 10))
def test_homogeneous_bound_minimal(K, alpha, beta):
    m, bound = homogeneous_bound(K, alpha, beta)
    target = 2 * K * (4 * K * K + 1)
    assert alpha ** m >= target
    assert m == 1 or alpha ** (m - 1) < target
    assert bound == beta ** m


# ------------------------------------------------------------ operations
def test_integral_setfunction_examples(two_point):
    assert build_integral_setfunction(two_point, {"a": 0, "b": 0}) == {"Q1": 0, "Q2": 0}
    assert build_integral_setfunction(two_point, {"a": 1, "b": 0}) == {"Q1": 1, "Q2": 1}
    assert build_integral_setfunction(two_point, {"a": 2, "b": 1}) == {"Q1": 2, "Q2": 3}
    with pytest.raises(MalformedInput):
        build_integral_setfunction(two_point, {"a": 1})


@given(seeds)
def test_integral_norm_below_l1(seed):
    rng = random.Random(seed)
    inst = random_instance(rng)
    f = {p: Fraction(rng.randint(-5, 5), 3) for p in inst.point_ids}
    F = build_integral_setfunction(inst, f)
    assert family_norm(inst, F) <= integral_total(inst, f)


def test_union_examples(two_point):
    F = {"Q1": 2, "Q2": 3}
    same = family_union(two_point, two_point)
    assert maximal_function(same, F).values == maximal_function(two_point, F).values
    pts = [("a", 1), ("b", 1)]
    sets = [("Q1", ["a"]), ("Q2", ["a", "b"])]
    A = Instance.build(pts, sets, {"a": ["Q1"], "b": ["Q2"]})
    B = Instance.build(pts, sets[1:], {"a": ["Q2"], "b": ["Q2"]})
    U = family_union(A, B)
    assert maximal_function(U, F).as_dict(U)["a"] == max(Fraction(2), Fraction(3, 2))
    other = Instance.build([("a", 1), ("b", 2)], sets)
    with pytest.raises(MalformedInput):
        family_union(A, other)
    clash = Instance.build(pts, [("Q1", ["b"]), ("Q2", ["a", "b"])])
    with pytest.raises(MalformedInput):
        family_union(A, clash)


def _superlevel_ids(inst, prof, v):
    return {p for p, x in zip(inst.point_ids, prof.values) if x >= v}


@given(seeds)
def test_union_is_pointwise_max(seed):
    rng = random.Random(seed)
    A = random_instance(rng, containing=False)
    pts = list(zip(A.point_ids, A.weights))
    sets = [(s, [A.point_ids[i] for i in m]) for s, m in zip(A.set_ids, A.members)]
    # second pointing: a fresh singleton per point
    sets_b = [(f"S{p}", [p]) for p, _ in pts]
    B = Instance.build(pts, sets_b, {p: [f"S{p}"] for p, _ in pts})
    vals = random_values(A, rng)
    extra = {f"S{p}": Fraction(rng.randint(0, 9)) for p, _ in pts}
    U = family_union(A, B)
    FA = dict(zip(A.set_ids, vals))
    FB = {**FA, **extra}
    FU = {s: FB[s] for s in U.set_ids}
    pa, pb, pu = (maximal_function(A, FA), maximal_function(B, {s: FB[s] for s in B.set_ids}),
                  maximal_function(U, FU))
    assert all(u == max(a, b) for a, b, u in zip(pa.values, pb.values, pu.values))
    for v in set(pu.values):
        assert _superlevel_ids(U, pu, v) == _superlevel_ids(A, pa, v) | _superlevel_ids(B, pb, v)


def test_scaling_examples(two_point):
    F = {"Q1": 2, "Q2": 3}
    assert scale_measure(two_point, 1).to_dict() == two_point.to_dict()
    assert maximal_function(scale_measure(two_point, 2), F).as_dict(two_point) == \
        {"a": 1, "b": Fraction(3, 4)}
    assert maximal_function(scale_measure(two_point, Fraction(1, 2)), F).as_dict(two_point) == \
        {"a": 4, "b": 3}
    with pytest.raises(MalformedInput):
        scale_measure(two_point, 0)


@given(seeds, st.fractions(Fraction(1, 10), 10))
def test_scaling_identity(seed, s):
    rng = random.Random(seed)
    inst = random_instance(rng)
    F = random_values(inst, rng)
    scaled = scale_measure(inst, s)
    a = maximal_function(inst, F).values
    b = maximal_function(scaled, F).values
    assert all(y == x / s for x, y in zip(a, b))
    c = hl_ratio(inst, F)
    if verify_hl_inequality(inst, F, c).passed:
        assert verify_hl_inequality(scaled, F, c).passed  # ratio is scale invariant
        r = Fraction(rng.randint(0, 30), 7)
        pa, pb = maximal_function(inst, F), maximal_function(scaled, F)
        assert {i for i, v in enumerate(pb.values) if v > r} == \
            {i for i, v in enumerate(pa.values) if v > s * r}


def test_subset_instance_drops_unused_sets(two_point):
    sub = subset_instance(two_point, [(0,), (1,)])
    assert sub.set_ids == ("Q1", "Q2")
    with pytest.raises(MalformedInput):
        subset_instance(two_point, [(1,), (0,)])  # b is not in Q1
