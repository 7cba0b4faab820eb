"""Geometry kernels against scipy rotations and brute-force sampled
distance oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from armplan.geometry import (
    IDENTITY_QUAT,
    compose_transforms,
    point_aabb_dist,
    quat_angle,
    quat_conjugate,
    quat_from_axis_angle,
    quat_mul,
    quat_normalize,
    quat_rotate,
    seg_aabb_dist,
    seg_point_dist,
    seg_seg_dist,
    transform_point,
    vec_dist,
)


def random_unit_quat(rng) -> tuple:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return tuple(q)


unit_vec = st.tuples(*[st.floats(-10, 10) for _ in range(3)])


class TestQuaternions:
    def test_identity_rotates_nothing(self):
        assert quat_rotate(IDENTITY_QUAT, (1.0, 2.0, 3.0)) == (1.0, 2.0, 3.0)

    def test_rotate_matches_scipy(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            q = random_unit_quat(rng)
            v = tuple(rng.uniform(-5, 5, size=3))
            got = quat_rotate(q, v)
            want = Rotation.from_quat(q).apply(v)
            assert np.allclose(got, want, atol=1e-12)

    def test_mul_matches_scipy_composition(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            a = random_unit_quat(rng)
            b = random_unit_quat(rng)
            got = quat_mul(a, b)
            want = (Rotation.from_quat(a) * Rotation.from_quat(b)).as_quat()
            # Unit quaternions are a double cover: q and -q are the same rotation.
            assert np.allclose(got, want, atol=1e-12) or np.allclose(
                np.negative(got), want, atol=1e-12
            )

    def test_mul_applies_right_factor_first(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            a = random_unit_quat(rng)
            b = random_unit_quat(rng)
            v = tuple(rng.uniform(-2, 2, size=3))
            assert np.allclose(
                quat_rotate(quat_mul(a, b), v), quat_rotate(a, quat_rotate(b, v)), atol=1e-12
            )

    def test_conjugate_inverts(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            q = random_unit_quat(rng)
            v = tuple(rng.uniform(-2, 2, size=3))
            back = quat_rotate(quat_conjugate(q), quat_rotate(q, v))
            assert np.allclose(back, v, atol=1e-12)

    def test_from_axis_angle_matches_scipy(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            angle = rng.uniform(-2 * np.pi, 2 * np.pi)
            got = quat_from_axis_angle(tuple(axis), angle)
            want = Rotation.from_rotvec(axis * angle).as_quat()
            assert np.allclose(got, want, atol=1e-12) or np.allclose(
                np.negative(got), want, atol=1e-12
            )

    def test_quat_angle_recovers_rotation_magnitude(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            angle = rng.uniform(0, np.pi)
            q = quat_from_axis_angle(tuple(axis), angle)
            assert quat_angle(IDENTITY_QUAT, q) == pytest.approx(angle, abs=1e-9)

    def test_quat_angle_ignores_double_cover(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            q = random_unit_quat(rng)
            neg = tuple(-c for c in q)
            assert quat_angle(q, neg) == pytest.approx(0.0, abs=1e-9)

    def test_normalize_zero_raises(self):
        with pytest.raises(ValueError):
            quat_normalize((0.0, 0.0, 0.0, 0.0))

    @given(unit_vec)
    @settings(max_examples=100)
    def test_rotation_preserves_norm(self, v):
        q = quat_from_axis_angle((0.0, 0.6, 0.8), 1.234)
        rotated = quat_rotate(q, v)
        assert math.isclose(
            np.linalg.norm(rotated), np.linalg.norm(v), rel_tol=1e-12, abs_tol=1e-12
        )


class TestTransforms:
    def test_compose_matches_sequential_application(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            p1, p2 = rng.uniform(-3, 3, size=(2, 3))
            q1 = random_unit_quat(rng)
            q2 = random_unit_quat(rng)
            v = tuple(rng.uniform(-2, 2, size=3))
            p, q = compose_transforms(tuple(p1), q1, tuple(p2), q2)
            via_composed = transform_point(p, q, v)
            via_seq = transform_point(tuple(p1), q1, transform_point(tuple(p2), q2, v))
            assert np.allclose(via_composed, via_seq, atol=1e-12)


def _sampled_seg_seg(p1, q1, p2, q2, n=801):
    """Brute-force oracle: dense parameter sweep over both segments."""
    t = np.linspace(0.0, 1.0, n)
    a = np.asarray(p1) + t[:, None] * (np.asarray(q1) - np.asarray(p1))
    b = np.asarray(p2) + t[:, None] * (np.asarray(q2) - np.asarray(p2))
    d = a[:, None, :] - b[None, :, :]
    return float(np.sqrt((d * d).sum(axis=2)).min())


class TestSegmentDistances:
    def test_point_distance_closed_form(self):
        assert seg_point_dist((0, 0, 0), (1, 0, 0), (0.5, 2.0, 0)) == pytest.approx(2.0)
        assert seg_point_dist((0, 0, 0), (1, 0, 0), (-3.0, 4.0, 0)) == pytest.approx(5.0)
        assert seg_point_dist((0, 0, 0), (0, 0, 0), (1, 1, 1)) == pytest.approx(math.sqrt(3))

    def test_seg_seg_known_cases(self):
        # Crossing perpendicular segments separated in z.
        assert seg_seg_dist((-1, 0, 0), (1, 0, 0), (0, -1, 1), (0, 1, 1)) == pytest.approx(1.0)
        # Parallel unit-separated segments.
        assert seg_seg_dist((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)) == pytest.approx(1.0)
        # Collinear with a gap.
        assert seg_seg_dist((0, 0, 0), (1, 0, 0), (3, 0, 0), (5, 0, 0)) == pytest.approx(2.0)
        # Intersecting.
        assert seg_seg_dist((-1, -1, 0), (1, 1, 0), (-1, 1, 0), (1, -1, 0)) == pytest.approx(0.0)

    def test_seg_seg_matches_sampling_oracle(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            pts = rng.uniform(-2, 2, size=(4, 3))
            exact = seg_seg_dist(*(tuple(p) for p in pts))
            appro = _sampled_seg_seg(*pts)
            # Sampling overestimates by at most the sweep step of each segment.
            step = (np.linalg.norm(pts[1] - pts[0]) + np.linalg.norm(pts[3] - pts[2])) / 800
            assert exact <= appro + 1e-12
            assert appro - exact <= step

    def test_seg_seg_degenerate_segments(self):
        assert seg_seg_dist((1, 2, 3), (1, 2, 3), (1, 2, 4), (1, 2, 4)) == pytest.approx(1.0)
        assert seg_seg_dist((0, 0, 0), (0, 0, 0), (-1, 1, 0), (1, 1, 0)) == pytest.approx(1.0)

    def test_seg_seg_symmetry(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            a, b, c, d = (tuple(p) for p in rng.uniform(-2, 2, size=(4, 3)))
            assert seg_seg_dist(a, b, c, d) == pytest.approx(seg_seg_dist(c, d, a, b), abs=1e-12)


class TestBoxDistances:
    def test_point_aabb_closed_form(self):
        half = (1.0, 2.0, 3.0)
        assert point_aabb_dist((0.5, 0, 0), half) == 0.0
        assert point_aabb_dist((3.0, 0, 0), half) == pytest.approx(2.0)
        assert point_aabb_dist((2.0, 3.0, 0), half) == pytest.approx(math.sqrt(2.0))
        assert point_aabb_dist((-2.0, -3.0, -4.0), half) == pytest.approx(math.sqrt(3.0))

    def test_seg_aabb_endpoint_cases(self):
        half = (1.0, 1.0, 1.0)
        assert seg_aabb_dist((2.0, 0, 0), (3.0, 0, 0), half) == pytest.approx(1.0)
        assert seg_aabb_dist((0, 0, 0), (5, 5, 5), half) == 0.0
        # Diagonal segment grazing the corner exactly.
        assert seg_aabb_dist((2, 0, 0), (0, 2, 0), half) == pytest.approx(0.0, abs=1e-12)
        # Diagonal segment clearing the corner: closest at (1.25, 1.25, 0).
        assert seg_aabb_dist((2.5, 0, 0), (0, 2.5, 0), half) == pytest.approx(
            0.25 * math.sqrt(2), abs=1e-12
        )

    def test_seg_aabb_matches_sampling_oracle(self):
        rng = np.random.default_rng(10)
        for _ in range(150):
            a, b = rng.uniform(-3, 3, size=(2, 3))
            half = tuple(rng.uniform(0.2, 1.5, size=3))
            exact = seg_aabb_dist(tuple(a), tuple(b), half)
            t = np.linspace(0, 1, 4001)
            pts = a + t[:, None] * (b - a)
            appro = min(point_aabb_dist(tuple(p), half) for p in pts)
            assert exact <= appro + 1e-12
            assert appro - exact <= np.linalg.norm(b - a) / 4000


def test_vec_dist():
    assert vec_dist((1, 2, 3), (4, 6, 3)) == pytest.approx(5.0)
