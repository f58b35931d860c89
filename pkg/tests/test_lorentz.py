import math

import numpy as np
import pytest

from geoattn import diffcheck, lorentz

SINH_1 = 1.1752011936438014
COSH_1 = 1.5430806348152437
SINH_2 = 3.6268604078470188
SINH2_OVER_SINH1 = 3.0861612696304876
CLIP_FLOOR_C1 = 4.4721359549995794e-08       # arcosh(1 + 1e-15)


def _rand_point(rng, n, c, rmax=5.0):
    u = rng.normal(size=n)
    u *= rng.uniform(0, rmax) / np.linalg.norm(u)
    return lorentz.exp_origin(u, c)


def test_check_curvature():
    assert lorentz.check_curvature(1.0) == 1.0
    with pytest.raises(ValueError, match="curvature"):
        lorentz.check_curvature(1e-4)
    with pytest.raises(ValueError, match="curvature"):
        lorentz.check_curvature(float("nan"))


def test_origin_is_on_manifold():
    for c in (1e-3, 0.5, 1.0, 10.0):
        o = lorentz.origin(4, c)
        assert lorentz.hyperboloid_residual(o, c) < 1e-15
        assert o.time == 1.0 / math.sqrt(c)


def test_lorentz_inner_against_origin():
    x = lorentz.LorentzPoint(np.array([SINH_1]), COSH_1)
    o = lorentz.origin(1, 1.0)
    assert abs(lorentz.lorentz_inner(x, o) + COSH_1) < 1e-12
    with pytest.raises(ValueError, match="dimension mismatch"):
        lorentz.lorentz_inner(x, lorentz.origin(2, 1.0))


def test_exp_origin_unit_tangent():
    p = lorentz.exp_origin(np.array([1.0, 0.0, 0.0]), 1.0)
    assert abs(p.space[0] - SINH_1) < 1e-12
    assert abs(p.space[1]) == 0.0 and abs(p.space[2]) == 0.0
    assert abs(p.time - COSH_1) < 1e-12


def test_exp_origin_membership_sweep():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(500):
        c = rng.uniform(1e-3, 10.0)
        p = _rand_point(rng, 3, c, rmax=20.0)
        worst = max(worst, lorentz.hyperboloid_residual(p, c))
    assert worst < 1e-9


def test_log_origin_example():
    x = lorentz.LorentzPoint(np.array([SINH_2]), math.cosh(2.0))
    enc = lorentz.log_origin(x, 1.0).enc
    assert abs(enc[0] - 2.0) < 1e-9


def test_exp_log_roundtrip_sweep():
    rng = np.random.default_rng(1)
    worst = 0.0
    for c in (0.5, 1.0, 2.0):
        for _ in range(1000 // 3):
            u = rng.normal(size=4)
            u *= rng.uniform(0, 10.0) / np.linalg.norm(u)
            back = lorentz.log_origin(lorentz.exp_origin(u, c), c).vector
            worst = max(worst, float(np.abs(back - u).max()))
    assert worst < 1e-9


def test_radial_isometry():
    rng = np.random.default_rng(2)
    for c in (0.5, 1.0, 2.0):
        o = lorentz.origin(3, c)
        for _ in range(100):
            u = rng.normal(size=3)
            u *= rng.uniform(0.1, 10.0) / np.linalg.norm(u)
            d = lorentz.geodesic_distance(o, lorentz.exp_origin(u, c), c)
            assert abs(d - np.linalg.norm(u)) < 1e-9


def test_tangent_scale():
    t = lorentz.TangentAtOrigin(np.array([1.0, 2.0]), scale=0.5)
    assert np.allclose(t.vector, [0.5, 1.0])
    p1 = lorentz.exp_origin(t, 1.0)
    p2 = lorentz.exp_origin(np.array([0.5, 1.0]), 1.0)
    assert np.abs(p1.space - p2.space).max() < 1e-15
    with pytest.raises(ValueError, match="scale"):
        lorentz.TangentAtOrigin(np.array([1.0]), scale=0.0)


def test_self_distance_clip_floor():
    # at the origin beta = 1 exactly, so the distance is the clip floor as
    # float64 computes it: acosh(fl(1 + 1e-15)) with fl(1 + 1e-15) a few
    # ulps above the ideal, hence 4.71e-8 instead of 4.47e-8
    o = lorentz.origin(2, 1.0)
    d0 = lorentz.geodesic_distance(o, o, 1.0)
    assert d0 == math.acosh(1.0 + 1e-15)
    assert abs(d0 - CLIP_FLOOR_C1) < 1e-6
    # generic points pick up rounding in beta of order eps * time^2,
    # comparable to the 1e-15 clip itself; only the scale is pinned
    p = lorentz.exp_origin(np.array([0.3, -0.4]), 1.0)
    d = lorentz.geodesic_distance(p, p, 1.0)
    assert math.isfinite(d)
    assert abs(d - CLIP_FLOOR_C1) < 1e-6


def test_distance_symmetry_and_triangle():
    rng = np.random.default_rng(3)
    c = 1.0
    for _ in range(1000):
        x, y, z = (_rand_point(rng, 3, c) for _ in range(3))
        dxy = lorentz.geodesic_distance(x, y, c)
        assert dxy == lorentz.geodesic_distance(y, x, c)
        dyz = lorentz.geodesic_distance(y, z, c)
        dxz = lorentz.geodesic_distance(x, z, c)
        assert dxz <= dxy + dyz + 1e-9


def test_curvature_scaling():
    # d_c(exp_c(u), exp_c(w)) = d_1(exp_1(sqrt(c) u), exp_1(sqrt(c) w)) / sqrt(c)
    rng = np.random.default_rng(4)
    for c in (0.5, 2.0, 5.0):
        a = math.sqrt(c)
        for _ in range(50):
            u, w = rng.normal(size=(2, 3))
            d_c = lorentz.geodesic_distance(
                lorentz.exp_origin(u, c), lorentz.exp_origin(w, c), c)
            d_1 = lorentz.geodesic_distance(
                lorentz.exp_origin(a * u, 1.0), lorentz.exp_origin(a * w, 1.0), 1.0)
            assert abs(d_c - d_1 / a) < 1e-9


def test_pairwise_matches_scalar_loop():
    rng = np.random.default_rng(5)
    c = 1.0
    xs = [_rand_point(rng, 3, c) for _ in range(64)]
    d = lorentz.pairwise_distances(xs, xs, c)
    for i in range(0, 64, 7):
        for j in range(0, 64, 7):
            assert abs(d[i, j] - lorentz.geodesic_distance(xs[i], xs[j], c)) < 1e-12


def test_pairwise_singleton_clip_floor():
    p = lorentz.exp_origin(np.array([1.0, 1.0]), 1.0)
    d = lorentz.pairwise_distances([p], [p], 1.0)
    assert d.shape == (1, 1)
    assert abs(d[0, 0] - CLIP_FLOOR_C1) < 1e-6


def test_pairwise_dimension_check():
    p2 = lorentz.origin(2, 1.0)
    p3 = lorentz.origin(3, 1.0)
    with pytest.raises(ValueError, match="dimensions"):
        lorentz.pairwise_distances([p2], [p3], 1.0)


def test_volume_growth():
    ratio = lorentz.volume_growth(2.0, 2, 1.0) / lorentz.volume_growth(1.0, 2, 1.0)
    assert abs(ratio - SINH2_OVER_SINH1) < 1e-12
    with pytest.raises(ValueError, match="nonnegative"):
        lorentz.volume_growth(-1.0, 2, 1.0)


def test_lift_rows_matches_exp_origin():
    rng = np.random.default_rng(6)
    m = rng.normal(size=(10, 4))
    space, time = lorentz.lift_rows(m, 2.0, scale=0.3)
    for i in range(10):
        p = lorentz.exp_origin(0.3 * m[i], 2.0)
        assert np.abs(space[i] - p.space).max() < 1e-12
        assert abs(time[i] - p.time) < 1e-12


def test_distance_gradient_matches_finite_differences():
    rng = np.random.default_rng(7)
    c = 1.3
    for _ in range(20):
        u, w = rng.normal(size=(2, 4))
        analytic = lorentz.distance_gradient(u, w, c)
        fd = diffcheck.finite_diff_gradient(
            lambda x: lorentz.geodesic_distance(
                lorentz.exp_origin(x, c), lorentz.exp_origin(w, c), c), u)
        rel = np.abs(analytic - fd).max() / np.abs(fd).max()
        assert rel < 1e-5


def test_distance_gradient_coincident_raises():
    u = np.array([0.5, 0.5])
    with pytest.raises(ValueError, match="coincident"):
        lorentz.distance_gradient(u, u.copy(), 1.0)


def test_off_manifold_rejected():
    bad = lorentz.LorentzPoint(np.array([1.0, 0.0]), 1.0)  # residual = 1
    with pytest.raises(ValueError, match="off the hyperboloid"):
        lorentz.geodesic_distance(bad, lorentz.origin(2, 1.0), 1.0)
    with pytest.raises(ValueError, match="off the hyperboloid"):
        lorentz.log_origin(bad, 1.0)


def test_points_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(8)
    c = 0.7
    pts = [_rand_point(rng, 3, c) for _ in range(5)]
    path = tmp_path / "pts.csv"
    lorentz.save_points_csv(pts, c, path)
    back, c_back = lorentz.load_points_csv(path)
    assert c_back == c
    for p, q in zip(pts, back):
        assert np.abs(p.space - q.space).max() < 1e-15
        assert p.time == q.time


def test_points_csv_mixed_curvature(tmp_path):
    path = tmp_path / "mixed.csv"
    path.write_text("1,1,0\n2,0.70710678118654752,0\n")
    with pytest.raises(ValueError, match="mixed curvatures"):
        lorentz.load_points_csv(path)
