import numpy as np
import pytest

from losmap.geometry import Point2
from losmap.sensing import (
    DetectionList,
    ObjectState,
    StateEstimate,
    fuse_detections,
    fuse_estimates,
    initialize_ncav_estimate,
)


def _est(mean, cov):
    return StateEstimate(ObjectState.from_vector(np.asarray(mean, float)),
                         np.asarray(cov, float))


def _random_spd(rng, scale=1.0):
    m = rng.normal(size=(4, 4))
    return scale * (m @ m.T + 4.0 * np.eye(4))


def test_fuse_identical_pair_halves_covariance():
    cov = 2.0 * np.eye(4)
    e = _est([1, 2, 3, 4], cov)
    fused = fuse_estimates([e, e])
    assert np.allclose(fused.covariance, np.eye(4))
    assert np.allclose(fused.mean.as_vector(), [1, 2, 3, 4])


def test_fuse_single_identity():
    e = _est([0, 0, 1, 1], np.eye(4))
    assert fuse_estimates([e]) is e


def test_fuse_scalar_toy():
    # x-position means 0 and 10 with variances 1 and 4: the precision-weighted
    # combination gives variance (1 + 1/4)^-1 = 0.8 and mean 0.8 * 10/4 = 2
    e1 = _est([0, 0, 0, 0], np.diag([1.0, 1, 1, 1]))
    e2 = _est([10, 0, 0, 0], np.diag([4.0, 1, 1, 1]))
    fused = fuse_estimates([e1, e2])
    assert fused.mean.x == pytest.approx(2.0, abs=1e-12)
    assert fused.covariance[0, 0] == pytest.approx(0.8, abs=1e-12)


def test_fuse_permutation_invariant():
    rng = np.random.default_rng(5)
    ests = [_est(rng.normal(size=4), _random_spd(rng)) for _ in range(4)]
    f1 = fuse_estimates(ests)
    f2 = fuse_estimates(ests[::-1])
    assert np.allclose(f1.mean.as_vector(), f2.mean.as_vector(), atol=1e-10)
    assert np.allclose(f1.covariance, f2.covariance, atol=1e-10)


def test_fuse_n_identical_scales_by_n():
    rng = np.random.default_rng(6)
    cov = _random_spd(rng)
    e = _est([1, -1, 2, 0], cov)
    for n in (2, 3, 5):
        fused = fuse_estimates([e] * n)
        assert np.allclose(fused.covariance, cov / n, atol=1e-10)


def test_fused_covariance_loewner_dominated():
    rng = np.random.default_rng(8)
    for _ in range(20):
        ests = [_est(rng.normal(size=4), _random_spd(rng, rng.uniform(0.5, 2)))
                for _ in range(3)]
        fused = fuse_estimates(ests)
        for e in ests:
            gap = e.covariance - fused.covariance
            assert np.linalg.eigvalsh(gap).min() >= -1e-10
        assert np.trace(fused.covariance) <= min(np.trace(e.covariance)
                                                 for e in ests) + 1e-10


def test_fuse_singular_reports_index():
    good = _est([0, 0, 0, 0], np.eye(4))
    bad = _est([0, 0, 0, 0], np.diag([1.0, 0.0, 1.0, 1.0]))
    with pytest.raises(ValueError, match="estimate 1"):
        fuse_estimates([good, bad])


def test_initialize_ncav_estimate():
    est = initialize_ncav_estimate(Point2(3, 4), (10.0, 0.0), 1.0)
    assert est.covariance[0, 0] == pytest.approx(1.0)
    assert est.covariance[1, 1] == pytest.approx(1.0)
    assert est.mean.as_vector() == pytest.approx([3, 4, 10, 0])

    est = initialize_ncav_estimate(Point2(0, 0), (10.0, 0.0), 0.5)
    assert est.mean.vx == 10.0 and est.mean.vy == 0.0

    with pytest.raises(ValueError):
        initialize_ncav_estimate(Point2(0, 0), (0, 0), 0.0)


def test_two_observers_halve_position_variance():
    a = initialize_ncav_estimate(Point2(0, 0), (0, 0), 1.0)
    b = initialize_ncav_estimate(Point2(0, 0), (0, 0), 1.0)
    fused = fuse_estimates([a, b])
    assert fused.covariance[0, 0] == pytest.approx(0.5, abs=1e-12)
    assert fused.position_sigma() == pytest.approx(np.sqrt(0.5), abs=1e-12)


def test_detection_list_rejects_duplicates():
    e = initialize_ncav_estimate(Point2(0, 0), (0, 0), 1.0)
    with pytest.raises(ValueError):
        DetectionList(observer_id=1, objects=((7, e), (7, e)))


class _Veh:
    def __init__(self, vid, is_cav, state):
        self.id = vid
        self.is_cav = is_cav
        self.state = state


def test_simulate_and_fuse_detections():
    from losmap.sensing import simulate_detections

    rng = np.random.default_rng(42)
    vehicles = [
        _Veh(0, True, ObjectState(0, 0, 10, 0)),
        _Veh(1, True, ObjectState(50, 0, -10, 0)),
        _Veh(2, False, ObjectState(25, 3, 12, 0)),
    ]
    dets = simulate_detections(vehicles, 1.0, 0.5, rng)
    assert len(dets) == 2
    assert all(len(d.objects) == 1 for d in dets)
    fused = fuse_detections(dets)
    assert set(fused) == {2}
    # two observers at sigma=1 -> fused sigma^2 = 0.5
    assert fused[2].covariance[0, 0] == pytest.approx(0.5, abs=1e-12)
    # means stay near truth, noise is zero-mean over many draws
    errs = []
    for seed in range(200):
        d = simulate_detections(vehicles, 1.0, 0.5, np.random.default_rng(seed))
        errs.append(fuse_detections(d)[2].mean.x - 25.0)
    assert abs(np.mean(errs)) < 0.2
