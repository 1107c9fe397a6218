import math

import numpy as np
import pytest

import dpmap


def test_partition_canonical():
    p = dpmap.Partition([5, 5, 2, 5])
    assert p.labels == [0, 0, 1, 0]
    assert p.num_blocks == 2
    assert p == dpmap.Partition([1, 1, 0, 1])


def test_crp_prior_normalizes():
    total = sum(math.exp(dpmap.crp_log_prior(p, 1.7)) for p in dpmap.enumerate_partitions(5))
    assert total == pytest.approx(1.0, abs=1e-12)
    assert dpmap.bell_number(5) == 52


def test_single_point_score():
    params = dpmap.ModelParams(alpha=1.0, sigma=1.0, between=1.0)
    assert dpmap.log_score([0], [0.0], params) == pytest.approx(-0.5 * math.log(2.0), abs=1e-12)


def test_map_methods_agree_in_one_dimension():
    params = dpmap.ModelParams(alpha=1.0, sigma=0.25, between=4.0)
    _, _, x = dpmap.sample_model(8, params, seed=3)
    exact = dpmap.map_exhaustive(x, params)
    dp = dpmap.map_interval_dp(x, params)
    assert dp.log_score == pytest.approx(exact.log_score, abs=1e-9)
    assert dpmap.is_weakly_convex(dp.partition, x)


def test_chain_runs():
    params = dpmap.ModelParams()
    x = np.array([-3.0, -2.9, 3.0, 3.1])
    res = dpmap.run_chain(x, params, iterations=200, seed=7)
    assert res.retained == 200
    assert res.best_log_score >= dpmap.log_score(dpmap.Partition.single_block(4), x, params)


def test_delta_disc_halves():
    law = dpmap.Distribution.uniform_disc(1.0)
    est = dpmap.delta(dpmap.SpacePartition.sectors(2), law, 1.0)
    assert est["value"] == pytest.approx(8 / (9 * math.pi**2) - math.log(2), abs=5 * est["se"] + 1e-12)


def test_delta_equal_width():
    r = 10.0
    k = dpmap.optimal_equal_width_count(r)
    assert dpmap.delta_equal_width(k, r) >= dpmap.delta_equal_width(k + 1, r)
    assert dpmap.delta_equal_width(k, r) >= dpmap.delta_equal_width(max(1, k - 1), r)


def test_hulls_and_metrics():
    a = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    assert dpmap.hull_intersection_type(a, a + [1.0, 1.0]) == "single_point"
    assert dpmap.hull_intersection_type(a, a + [0.5, 0.0]) == "overlap"
    assert dpmap.hull_intersection_type(a, a + [3.0, 0.0]) == "disjoint"
    assert dpmap.hausdorff_distance(a, a + [0.5, 0.0]) == pytest.approx(0.5)


def test_errors_are_typed():
    with pytest.raises(dpmap.ConfigError):
        dpmap.ModelParams(alpha=-1.0)
    with pytest.raises(dpmap.UnsupportedDimension):
        dpmap.map_interval_dp(np.zeros((3, 2)), dpmap.ModelParams(dim=2))
    assert issubclass(dpmap.DegenerateRegion, dpmap.NumericalError)
    assert issubclass(dpmap.NumericalError, dpmap.Error)


def test_experiment_roundtrip(tmp_path):
    records, summary = dpmap.run_experiment("segment", sizes=[20], seeds=[1, 2], out=tmp_path, jobs=1)
    assert len(records) == 2
    assert "n_star" in summary
    loaded = dpmap.load_records(tmp_path)
    assert len(loaded) == 2
