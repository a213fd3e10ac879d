import csv
import json
from fractions import Fraction

import pytest

from hlml.errors import ConfigurationError, MalformedInput
from hlml.harness import (CUBE_CONSTANT_3D, ExperimentSpec, MassDistribution, aggregate_reports,
                          build_instance, interval_region_length, mass_density_region,
                          particle_count_region, run_experiment)


def _spec(geometry, **kw):
    base = {"geometry": geometry, "strategies": {"random": 4, "search": {"trials": 2, "ascent_steps": 3}}}
    base.update(kw)
    return base


def test_dyadic_run_passes():
    res = run_experiment(_spec("dyadic", params={"n": 1}, c=1))
    assert res.passed and res.c == 1
    assert Fraction(res.search["lower_bound"]) == 1


def test_tree_run_passes():
    res = run_experiment(_spec("tree", params={"q": 2, "depth": 6}, c=4))
    assert res.passed and res.c == 4


def test_grid_cubes_run_passes():
    res = run_experiment(_spec("grid-cubes", params={"n": 1}, c=16,
                               strategies={"random": 3, "integral": 3, "search": False}))
    assert res.passed and res.c == 16 and res.summary["checked"] == 6


def test_grid_balls_and_cz_runs():
    assert run_experiment(_spec("grid-balls", params={"n": 1, "h": "1/16"})).passed
    assert run_experiment(_spec("cz", params={"n": 1, "count": 6})).passed


def test_custom_json_uses_hull_constant():
    inst = {"mode": "exact", "points": [{"id": "a", "w": "1"}, {"id": "b", "w": "1"}],
            "sets": [{"id": "A", "members": ["a"]}, {"id": "B", "members": ["a", "b"]}]}
    res = run_experiment(_spec("custom-json", params={"instance": inst}))
    assert res.spec.provenance == "hull" and res.passed


def test_provenance_mismatch_rejected():
    with pytest.raises(ConfigurationError):
        run_experiment(_spec("grid-cubes", params={"n": 1}, c=4))
    with pytest.raises(ConfigurationError):
        ExperimentSpec("dyadic", provenance="trapezoid")
    with pytest.raises(ConfigurationError):
        ExperimentSpec.from_dict({"geometry": "dyadic", "colour": 1})
    with pytest.raises(ConfigurationError):
        ExperimentSpec("sphere")


def test_generator_errors_carry_context():
    with pytest.raises(MalformedInput, match="tree generator"):
        run_experiment(_spec("tree", params={"q": 1}))


def test_runs_are_reproducible():
    spec = _spec("tree", params={"q": 3, "depth": 4}, seed=11)
    a, b = run_experiment(spec), run_experiment(spec)
    assert a.to_dict() == b.to_dict()


def test_reports_and_aggregate(tmp_path):
    run_experiment(_spec("dyadic", params={"n": 1}), tmp_path / "d")
    run_experiment(_spec("tree", params={"q": 2, "depth": 5}), tmp_path / "t")
    data = json.loads((tmp_path / "d" / "result.json").read_text())
    assert data["status"] == "pass" and len(data["rows"]) == 4
    with open(tmp_path / "t" / "verdicts.csv") as fh:
        assert len(list(csv.DictReader(fh))) == 4
    assert (tmp_path / "t" / "profile.csv").exists()
    rows = aggregate_reports(tmp_path)
    assert [r["run"] for r in rows] == ["d", "t"]
    assert (tmp_path / "summary.csv").exists()


def test_build_instance_tree_family():
    inst, c, witness = build_instance(ExperimentSpec("tree", {"q": 2, "depth": 3}), None)
    assert c == 4 and witness is not None and inst.n_points == 15


# ---------------------------------------------------------- mass density
def test_single_particle_volume():
    est = mass_density_region(MassDistribution([(0.0, 0.0, 0.0)], [2.5], 0.5), 0.05)
    assert est.volume == pytest.approx(8, rel=0.05)
    assert est.volume <= est.bound == 2 * CUBE_CONSTANT_3D


def test_alpha_near_one_keeps_volume():
    est = mass_density_region(MassDistribution([(0.3, 0.1, 0.7)], [1.0], 0.999), 0.05)
    assert est.volume == pytest.approx(8, rel=0.05)


def test_far_particles_give_empty_region():
    est = mass_density_region(MassDistribution([(0, 0, 0), (3, 0, 0)], [0.5, 0.5], 0.6), 0.1)
    assert est.volume == 0


def test_colinear_particles_match_interval_oracle():
    xs = [Fraction(0), Fraction(2, 5), Fraction(4, 5)]
    length = interval_region_length(xs, [1, 1, 1], Fraction(18, 10))
    assert length == 2
    pos = [(float(x), 0.0, 0.0) for x in xs]
    est = particle_count_region(pos, 0.6, 0.05)
    # the two transverse axes each contribute a length-2 factor
    assert est.volume == pytest.approx(float(length) * 4, rel=0.05)


def test_interval_oracle_single_point():
    assert interval_region_length([0], [1], Fraction(1, 2)) == 2
    assert interval_region_length([0], [1], 1) == 0


@pytest.mark.parametrize("alpha", [1.0, 1.5, 0.0])
def test_alpha_outside_unit_interval_rejected(alpha):
    with pytest.raises(MalformedInput):
        MassDistribution([(0, 0, 0)], [1.0], alpha)


def test_empty_particles_rejected():
    with pytest.raises(MalformedInput):
        MassDistribution([], [], 0.5)
    with pytest.raises(MalformedInput):
        particle_count_region([], 0.5)


def test_halving_resolution_is_stable():
    d = MassDistribution([(0.2, 0.4, 0.6)], [1.0], 0.5)
    a = mass_density_region(d, 0.1).volume
    b = mass_density_region(d, 0.05).volume
    assert abs(a - b) < 0.05 * b


def test_side_scaling_and_json():
    d = MassDistribution.from_dict({"particles": [{"x": [0, 0, 0], "m": 3}]}, alpha=0.5, side=0.5)
    est = mass_density_region(d, 0.025)
    assert est.volume == pytest.approx(1, rel=0.05)
    assert est.bound == pytest.approx(2 * CUBE_CONSTANT_3D * 0.125)
