import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fresnelris.geometry import (
    SPEED_OF_LIGHT,
    ConicSection,
    FresnelMap,
    GeometryError,
    PlaneFrame,
    RisGeometry,
    build_fresnel_map,
    element_positions,
    excess_path,
    far_field_excess_path,
    far_field_zone_boundary,
    fraunhofer_distance,
    zone_boundary_conic,
)

TX = np.array([0.0, 12.0, 0.0])
RX = np.array([5.0, 0.0, 0.0])
LAM28 = SPEED_OF_LIGHT / 28e9

coords = st.floats(-50, 50, allow_nan=False)
points = st.tuples(coords, coords, coords).map(np.array)


def random_frame(rng, center):
    a = rng.standard_normal(3)
    b = rng.standard_normal(3)
    return PlaneFrame.from_axes(center, a, b)


class TestPlaneFrame:
    def test_bisector_is_orthonormal(self):
        f = PlaneFrame.bisector((0, 0, 0), TX, RX)
        for vec in (f.u_axis, f.v_axis, f.normal):
            assert abs(np.linalg.norm(vec) - 1) < 1e-12
        assert abs(f.u_axis @ f.v_axis) < 1e-12
        assert abs(f.u_axis @ f.normal) < 1e-12
        np.testing.assert_allclose(f.normal, np.cross(f.u_axis, f.v_axis), atol=1e-15)

    def test_bisector_normal_faces_both_terminals(self):
        f = PlaneFrame.bisector((0, 0, 0), TX, RX)
        np.testing.assert_allclose(f.normal, np.array([1, 1, 0]) / math.sqrt(2), atol=1e-15)
        # u is the global x axis projected onto the plane
        np.testing.assert_allclose(f.u_axis, np.array([1, -1, 0]) / math.sqrt(2), atol=1e-15)

    def test_rejects_non_orthogonal_axes(self):
        with pytest.raises(GeometryError):
            PlaneFrame((0, 0, 0), (1, 0, 0), (1, 0, 0))

    def test_rejects_non_finite(self):
        with pytest.raises(GeometryError):
            PlaneFrame((0, np.nan, 0), (1, 0, 0), (0, 1, 0))


class TestElementPositions:
    def test_single_element_is_center(self):
        f = PlaneFrame((1.0, 2.0, 3.0), (1, 0, 0), (0, 1, 0))
        np.testing.assert_array_equal(element_positions(RisGeometry(f, 1, 1, 0.37)), [[1.0, 2.0, 3.0]])

    def test_pair_is_symmetric(self):
        f = PlaneFrame((1.0, 2.0, 3.0), (0, 0, 1), (1, 0, 0))
        pos = element_positions(RisGeometry(f, 2, 1, 0.5))
        np.testing.assert_allclose(pos, [[1, 2, 2.75], [1, 2, 3.25]], atol=0)

    def test_default_extent(self):
        f = PlaneFrame.bisector((0, 0, 0), TX, RX)
        geom = RisGeometry(f, 80, 80, LAM28 / 2)
        uv = f.to_plane(element_positions(geom))
        # 79 half-wavelengths at 28 GHz, by hand: 79 * 0.0107068735 / 2
        assert uv[:, 0].max() - uv[:, 0].min() == pytest.approx(0.42292150325, rel=1e-12)
        assert uv[:, 1].max() - uv[:, 1].min() == pytest.approx(0.42292150325, rel=1e-12)

    def test_row_major_formula(self):
        f = PlaneFrame.bisector((0.3, -1, 2), TX, RX)
        geom = RisGeometry(f, 3, 4, 0.01)
        pos = element_positions(geom)
        assert pos.shape == (12, 3)
        for i in range(3):
            for j in range(4):
                expected = f.center + (i - 1) * 0.01 * f.u_axis + (j - 1.5) * 0.01 * f.v_axis
                np.testing.assert_array_equal(pos[i * 4 + j], expected)

    @pytest.mark.parametrize("nx, ny, spacing", [(0, 1, 1.0), (1, 1, 0.0), (2, 2, -1.0)])
    def test_invalid(self, nx, ny, spacing):
        with pytest.raises(ValueError):
            RisGeometry(PlaneFrame((0, 0, 0), (1, 0, 0), (0, 1, 0)), nx, ny, spacing)


class TestExcessPath:
    def test_midpoint_is_zero(self):
        assert excess_path(TX, RX, (TX + RX) / 2) == 0.0

    def test_pythagorean(self):
        assert excess_path(TX, RX, (0, 0, 0)) == 4.0

    def test_equidistant(self):
        tx, rx = np.array([-3.0, 0, 0]), np.array([3.0, 0, 0])
        q = np.array([0.0, 4.0, 0.0])  # 5 m from each
        assert excess_path(tx, rx, q) == pytest.approx(2 * 5 - 6)

    def test_degenerate_foci(self):
        with pytest.raises(GeometryError):
            excess_path(TX, TX + 1e-12, RX)

    def test_nonnegative_bulk(self, rng):
        tx = rng.uniform(-100, 100, (100_000, 3))
        rx = rng.uniform(-100, 100, (100_000, 3))
        q = rng.uniform(-100, 100, (100_000, 3))
        delta = (np.linalg.norm(q - tx, axis=1) + np.linalg.norm(rx - q, axis=1)
                 - np.linalg.norm(rx - tx, axis=1))
        assert delta.min() >= -1e-12
        assert all(excess_path(tx[k], rx[k], q[k]) >= 0 for k in range(0, 100_000, 997))

    @given(points, points, points)
    def test_nonnegative(self, tx, rx, q):
        if np.linalg.norm(tx - rx) < 1e-6:
            return
        assert excess_path(tx, rx, q) >= 0

    @given(points, points, st.floats(0, 1))
    def test_zero_on_segment(self, tx, rx, t):
        if np.linalg.norm(tx - rx) < 1e-3:
            return
        q = tx + t * (rx - tx)
        assert excess_path(tx, rx, q) < 1e-12 * max(1.0, np.linalg.norm(tx - rx)) * 100


class TestFresnelMap:
    @pytest.mark.parametrize("delta, zone, residual", [
        (0.0, 1, 0.0),
        (0.6, 2, 0.1),
        (0.5, 2, 0.0),
        (0.4999, 1, 0.4999),
    ])
    def test_bucketing(self, delta, zone, residual):
        lam = 1.0
        fmap = FresnelMap.from_excess([delta * lam], lam, 1.0)
        assert fmap.zone[0] == zone
        assert fmap.residual[0] == pytest.approx(residual * lam, abs=1e-15)

    @given(st.floats(0, 1e3, allow_nan=False), st.floats(1e-3, 1.0))
    def test_partition(self, delta, lam):
        fmap = FresnelMap.from_excess([delta], lam, 1.0)
        m, r = fmap.zone[0], fmap.residual[0]
        assert m >= 1
        assert 0 <= r < lam / 2
        assert abs((m - 1) * lam / 2 + r - delta) <= 1e-12 * max(1.0, delta)

    def test_rejects_negative(self):
        with pytest.raises(GeometryError):
            FresnelMap.from_excess([-1e-3], 0.01, 1.0)

    def test_map_invariants(self, scenario, geometry, lam):
        fmap = build_fresnel_map(scenario.tx_true, scenario.rx_true, geometry, lam)
        assert len(fmap) == 6400
        assert fmap.los_distance == 13.0
        assert np.all(fmap.excess >= 0)
        np.testing.assert_array_equal(fmap.zone, np.floor(2 * fmap.excess / lam).astype(int) + 1)
        assert np.all((fmap.residual >= 0) & (fmap.residual < lam / 2))

    @pytest.mark.parametrize("k", [0.25, 0.5, 2.0, 8.0])
    def test_scale_invariance(self, k, rng):
        frame = random_frame(rng, rng.uniform(-1, 1, 3))
        geom = RisGeometry(frame, 12, 9, 0.004)
        tx, rx = rng.uniform(-5, 5, 3), rng.uniform(-5, 5, 3)
        base = build_fresnel_map(tx, rx, geom, 0.01)
        scaled_geom = RisGeometry(PlaneFrame(frame.center * k, frame.u_axis, frame.v_axis), 12, 9, 0.004 * k)
        scaled = build_fresnel_map(tx * k, rx * k, scaled_geom, 0.01 * k)
        np.testing.assert_array_equal(scaled.zone, base.zone)
        np.testing.assert_allclose(scaled.excess, base.excess * k, rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(scaled.residual, base.residual * k, rtol=1e-9, atol=1e-15)


class TestConic:
    def test_empty_when_plane_far_away(self):
        frame = PlaneFrame((0, 0, 1e3), (1, 0, 0), (0, 1, 0))
        c = zone_boundary_conic((-1, 0, 0), (1, 0, 0), frame, 3, 0.01)
        assert c.classification == "empty"

    def test_circle_through_center(self):
        frame = PlaneFrame((0, 0, 0), (0, 1, 0), (0, 0, 1))
        c = zone_boundary_conic((-1, 0, 0), (1, 0, 0), frame, 5, 0.01)
        assert c.B == 0
        assert c.A == pytest.approx(c.C, rel=1e-15)
        assert c.classification == "ellipse"
        # semi-minor axis b = sqrt(a^2 - f^2) with 2a = 2 + 5*0.01/2
        a = (2 + 0.025) / 2
        b = math.sqrt(a * a - 1)
        uv = c.sample(16)
        np.testing.assert_allclose(np.hypot(uv[:, 0], uv[:, 1]), b, rtol=1e-12)

    def test_oblique_residual(self, rng):
        tx, rx = np.array([0.0, 12.0, 0.0]), np.array([5.0, 0.0, 0.0])
        lam = 0.0107
        frame = random_frame(rng, (tx + rx) / 2 + 0.01)
        for m in (1, 7, 20):
            c = zone_boundary_conic(tx, rx, frame, m, lam)
            assert c.classification == "ellipse"
            p = frame.from_plane(c.sample(64))
            err = np.abs(excess_path(tx, rx, p) - m * lam / 2)
            assert err.max() < 1e-9 * 13

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 20))
    def test_residual_random_scenes(self, seed, m):
        rng = np.random.default_rng(seed)
        tx, rx = rng.uniform(-20, 20, 3), rng.uniform(-20, 20, 3)
        los = np.linalg.norm(tx - rx)
        if los < 0.5:
            return
        lam = rng.uniform(1e-3, 0.1)
        frame = random_frame(rng, tx + rng.uniform(0.05, 0.95) * (rx - tx))
        c = zone_boundary_conic(tx, rx, frame, m, lam)
        assert c.classification == "ellipse"
        p = frame.from_plane(c.sample(64))
        assert np.abs(excess_path(tx, rx, p) - m * lam / 2).max() < 1e-9 * los

    def test_classification_point(self):
        c = ConicSection(1.0, 0.0, 1.0, 0.0, 0.0, 0.0)
        assert c.classification == "point"
        assert ConicSection(1.0, 0.0, 1.0, 0.0, 0.0, -1.0).classification == "ellipse"
        assert ConicSection(1.0, 0.0, 1.0, 0.0, 0.0, 1.0).classification == "empty"
        assert ConicSection(0.0, 0.0, 0.0, 1.0, 2.0, 3.0).classification == "degenerate"

    def test_invalid_zone(self):
        frame = PlaneFrame((0, 0, 0), (1, 0, 0), (0, 1, 0))
        with pytest.raises(ValueError):
            zone_boundary_conic(TX, RX, frame, 0, 0.01)

    def test_far_field_boundary_is_a_line(self):
        frame = PlaneFrame.from_axes((0, 0, 0), (1, 0, 0), (0, 0, 1))
        c = far_field_zone_boundary(TX, RX, frame, 750, LAM28)
        assert (c.A, c.B, c.C) == (0.0, 0.0, 0.0)
        assert c.discriminant >= 0
        assert c.classification == "degenerate"


class TestFarField:
    def test_zero_at_center(self):
        frame = PlaneFrame.bisector((0, 0, 0), TX, RX)
        assert far_field_excess_path(TX, RX, frame, frame.center) == 0.0

    def test_linear(self, rng):
        frame = PlaneFrame.from_axes((0.1, 0.2, 0.0), (1, 0.3, 0), (0, 0.2, 1))
        w = frame.from_plane(rng.uniform(-0.2, 0.2, 2)) - frame.center
        one = far_field_excess_path(TX, RX, frame, frame.center + w)
        two = far_field_excess_path(TX, RX, frame, frame.center + 2 * w)
        assert two == pytest.approx(2 * one, rel=1e-12, abs=1e-15)

    def test_off_plane(self):
        frame = PlaneFrame.bisector((0, 0, 0), TX, RX)
        with pytest.raises(GeometryError):
            far_field_excess_path(TX, RX, frame, frame.center + 1e-6 * frame.normal)

    def _max_relative_error(self, scale):
        frame = PlaneFrame.from_axes((0, 0, 0), (1, -0.3, 0.1), (0.2, 0.1, 1))
        geom = RisGeometry(frame, 80, 80, LAM28 / 2)
        tx, rx = TX / 13 * scale, RX / 5 * scale * 0.7
        q = element_positions(geom)
        exact = excess_path(tx, rx, q) - excess_path(tx, rx, frame.center)
        approx = far_field_excess_path(tx, rx, frame, q)
        return np.max(np.abs(exact - approx) / np.maximum(np.abs(approx), LAM28))

    def test_agrees_far_away(self):
        assert self._max_relative_error(1e6) < 1e-3

    def test_converges_monotonically(self):
        errs = [self._max_relative_error(s) for s in (1e2, 1e3, 1e4, 1e5)]
        assert all(b < a for a, b in zip(errs, errs[1:]))


class TestFraunhofer:
    def test_zero_aperture(self):
        assert fraunhofer_distance(0.0, 0.01) == 0.0

    def test_square_metre_at_30ghz(self):
        lam = SPEED_OF_LIGHT / 30e9
        # 2 * 2 / 0.00999308193
        assert fraunhofer_distance(math.sqrt(2), lam) == pytest.approx(400.2770, rel=1e-6)

    def test_default_ris_is_near_field(self, geometry, lam):
        assert geometry.diagonal == pytest.approx(0.5981, abs=1e-4)
        d_f = fraunhofer_distance(geometry.diagonal, lam)
        assert d_f == pytest.approx(66.82, abs=0.01)
        assert d_f > 12 and d_f > 5
