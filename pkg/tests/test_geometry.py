import itertools

import numpy as np
import pytest

from ellipsoidrep.geometry import (
    anchor_world,
    as_points,
    circumsphere_frame,
    pca_frame,
    rotation_to_rotvec,
    rotvec_to_rotation,
    sphere_anchor,
    to_local,
    unit_anchor_grid,
)

from oracles import analytic_sym3_eig


def box_corners(hx, hy, hz):
    return np.array(list(itertools.product((-hx, hx), (-hy, hy), (-hz, hz))))


class TestPcaFrame:
    def test_axis_aligned_box_recovery(self):
        frame = pca_frame(box_corners(1.0, 0.5, 0.25))
        assert np.allclose(frame.radii, [1.0, 0.5, 0.25], atol=1e-12)
        # identity up to per-axis sign; the sign rule makes it exact here
        assert np.allclose(frame.rotation, np.eye(3), atol=1e-12)
        assert np.allclose(frame.center, 0.0, atol=1e-12)

    def test_shifted_box_center(self):
        shift = np.array([3.0, -2.0, 0.5])
        frame = pca_frame(box_corners(1.0, 0.5, 0.25) + shift)
        assert np.allclose(frame.center, shift, atol=1e-12)
        assert np.allclose(frame.radii, [1.0, 0.5, 0.25], atol=1e-12)

    def test_rotation_is_proper_and_radii_sorted(self, cloud_suite):
        for name, pts in cloud_suite:
            frame = pca_frame(pts)
            r = frame.rotation
            assert np.allclose(r @ r.T, np.eye(3), atol=1e-12), name
            assert np.linalg.det(r) > 0.0, name
            assert frame.radii[0] >= frame.radii[1] >= frame.radii[2], name
            assert frame.radii[2] >= 1e-9, name

    def test_third_axis_is_cross_of_first_two(self, cloud_suite):
        for name, pts in cloud_suite:
            r = pca_frame(pts).rotation
            assert np.allclose(r[2], np.cross(r[0], r[1]), atol=1e-12), name

    def test_sign_rule_on_leading_axes(self, cloud_suite):
        # rows 0 and 1 keep their largest-magnitude component positive
        # (row 2 may be negated by the determinant fix)
        for name, pts in cloud_suite:
            r = pca_frame(pts).rotation
            for row in r[:2]:
                assert row[int(np.argmax(np.abs(row)))] > 0.0, name

    def test_members_inside_unit_ball_coords(self, cloud_suite):
        for name, pts in cloud_suite:
            frame = pca_frame(pts)
            local = to_local(frame, pts)
            assert np.abs(local).max() <= 1.0 + 1e-9, name

    def test_matches_analytic_eigensolver(self, cloud_suite):
        for name, pts in cloud_suite:
            centered = pts - pts.mean(axis=0)
            cov = centered.T @ centered / len(pts)
            vals, vecs = analytic_sym3_eig(cov)
            if vals[0] - vals[1] < 1e-6 or vals[1] - vals[2] < 1e-6:
                continue  # eigenvectors only well-defined when distinct
            frame_axes = pca_frame(pts).rotation
            # compare up to sign and extent reordering: every analytic
            # eigenvector must appear among the frame axes
            dots = np.abs(frame_axes @ vecs.T)
            for j in range(3):
                assert dots[:, j].max() > 1.0 - 1e-6, (name, j)

    def test_degenerate_rank_gets_floored_radii(self):
        rng = np.random.default_rng(0)
        line = np.zeros((50, 3))
        line[:, 0] = rng.uniform(-1.0, 1.0, 50)
        frame = pca_frame(line)
        assert frame.radii[0] > 0.5
        assert frame.radii[1] == pytest.approx(1e-6 * frame.radii[0])
        assert frame.radii[2] == pytest.approx(1e-6 * frame.radii[0])

    def test_single_point(self):
        frame = pca_frame([[1.0, 2.0, 3.0]])
        assert np.allclose(frame.center, [1.0, 2.0, 3.0])
        assert np.all(frame.radii == 1e-9)

    def test_input_validation(self):
        with pytest.raises(ValueError, match="empty"):
            pca_frame(np.empty((0, 3)))
        with pytest.raises(ValueError, match="non-finite"):
            pca_frame([[0.0, 0.0, np.nan]])
        with pytest.raises(ValueError, match="shape"):
            as_points(np.zeros((4, 2)))


class TestCircumsphereFrame:
    def test_basic(self):
        pts = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.5, 0.0]])
        frame = circumsphere_frame(pts)
        assert np.array_equal(frame.rotation, np.eye(3))
        assert np.allclose(frame.center, [0.0, 0.25, 0.0])
        r = np.sqrt(1.0 + 0.25 ** 2)
        assert np.allclose(frame.radii, r)

    def test_all_points_inside(self, cloud_suite):
        for name, pts in cloud_suite:
            frame = circumsphere_frame(pts)
            d = np.linalg.norm(pts - frame.center, axis=1)
            assert d.max() <= frame.radii[0] * (1.0 + 1e-12), name


class TestRotvec:
    def test_identity(self):
        assert np.array_equal(rotation_to_rotvec(np.eye(3)), np.zeros(3))
        assert np.array_equal(rotvec_to_rotation(np.zeros(3)), np.eye(3))

    def test_quarter_turn_about_z(self):
        r = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        assert np.allclose(rotation_to_rotvec(r), [0.0, 0.0, np.pi / 2], atol=1e-12)
        assert np.allclose(rotvec_to_rotation([0.0, 0.0, np.pi / 2]), r, atol=1e-12)

    def test_half_turn(self):
        r = rotvec_to_rotation([np.pi, 0.0, 0.0])
        assert np.allclose(r, np.diag([1.0, -1.0, -1.0]), atol=1e-12)
        back = rotation_to_rotvec(r)
        assert np.allclose(np.abs(back), [np.pi, 0.0, 0.0], atol=1e-9)

    def test_round_trip_random(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            v = axis * rng.uniform(0.0, np.pi)
            back = rotation_to_rotvec(rotvec_to_rotation(v))
            assert np.allclose(back, v, atol=1e-6)

    def test_norm_stays_within_pi(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            w, x, y, z = q
            r = np.array([
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ])
            v = rotation_to_rotvec(r)
            assert np.linalg.norm(v) <= np.pi + 1e-9
            assert np.allclose(rotvec_to_rotation(v), r, atol=1e-9)

    def test_bad_shapes(self):
        with pytest.raises(ValueError):
            rotation_to_rotvec(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            rotvec_to_rotation([0.0, 0.0])


class TestSphereAnchor:
    def test_frozen_centered_value(self):
        # frozen from the closed-form expression before implementation
        got = sphere_anchor(3, 5, 16, "centered")
        want = np.array([0.17205430345459161, 0.86497539454747285,
                         0.47139673682599781])
        assert np.allclose(got, want, atol=1e-15)

    def test_paper_mode_pole(self):
        assert np.allclose(sphere_anchor(0, 0, 8, "paper"), [0.0, 0.0, 1.0],
                           atol=1e-15)

    def test_unit_norm(self):
        for mode in ("paper", "centered"):
            grid = unit_anchor_grid(9, mode)
            norms = np.linalg.norm(grid, axis=2)
            assert np.allclose(norms, 1.0, atol=1e-6)

    def test_grid_matches_scalar(self):
        for mode in ("paper", "centered"):
            grid = unit_anchor_grid(5, mode)
            for v in range(5):
                for u in range(5):
                    assert np.array_equal(grid[v, u], sphere_anchor(u, v, 5, mode))

    def test_centered_anchors_distinct(self):
        grid = unit_anchor_grid(8, "centered").reshape(-1, 3)
        assert len(np.unique(grid.round(12), axis=0)) == 64

    def test_validation(self):
        with pytest.raises(ValueError, match="anchor mode"):
            sphere_anchor(0, 0, 4, "wrong")
        with pytest.raises(ValueError, match="out of range"):
            sphere_anchor(4, 0, 4)
        with pytest.raises(ValueError, match="out of range"):
            sphere_anchor(0, -1, 4)


class TestAnchorWorld:
    def test_frozen_rotated_case(self):
        from ellipsoidrep.geometry import EllipsoidFrame
        c, s = np.cos(np.pi / 2), np.sin(np.pi / 2)
        frame = EllipsoidFrame(
            rotation=np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]),
            radii=np.array([2.0, 1.0, 1.0]),
            center=np.zeros(3))
        got = anchor_world(frame, np.array([1.0, 0.0, 0.0]))
        want = np.array([1.2246467991473532e-16, -2.0, 0.0])
        assert np.allclose(got, want, atol=1e-15)

    def test_inverse_of_to_local(self, cloud_suite):
        rng = np.random.default_rng(3)
        for name, pts in cloud_suite[:6]:
            frame = pca_frame(pts)
            units = rng.normal(size=(40, 3))
            world = anchor_world(frame, units)
            assert np.allclose(to_local(frame, world), units, atol=1e-9), name

    def test_anchor_lands_on_surface(self):
        pts = np.random.default_rng(5).normal(size=(200, 3)) * [2.0, 1.0, 0.5]
        frame = pca_frame(pts)
        units = unit_anchor_grid(6, "centered").reshape(-1, 3)
        world = anchor_world(frame, units)
        assert np.allclose(np.linalg.norm(to_local(frame, world), axis=1), 1.0,
                           atol=1e-9)
