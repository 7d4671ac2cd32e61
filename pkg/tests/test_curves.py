import math

import numpy as np
import pytest
import shapely
from hypothesis import given, settings
from hypothesis import strategies as st

from convexify.curves import (
    Curve,
    catalog,
    curve_length,
    evaluate,
    inscribe,
    make_circle,
    make_ellipse,
    make_polyline,
    make_spiral,
    make_teeth,
    resample,
)
from convexify.geometry import (
    Polygon,
    edge_lengths,
    is_convex,
    is_simple,
    perimeter,
    signed_area,
)

from helpers import star_polygons


class TestCircle:
    def test_inscribed_square(self):
        p = inscribe(make_circle(radius=2.0), 4)
        assert np.allclose(p.vertices, [(2, 0), (0, 2), (-2, 0), (0, -2)], atol=1e-12)

    def test_inscribed_perimeter_formula(self):
        # perimeter of the inscribed n-gon is 2 n sin(pi/n) times the radius
        for n in (4, 16, 96, 257):
            p = inscribe(make_circle(), n)
            assert perimeter(p) == pytest.approx(2.0 * n * math.sin(math.pi / n), rel=1e-13)

    def test_inscribed_96gon_value(self):
        assert perimeter(inscribe(make_circle(), 96)) == pytest.approx(
            6.282063901781019, abs=1e-12
        )

    def test_length_exact(self):
        assert curve_length(make_circle(3.0)) == pytest.approx(6.0 * math.pi)

    def test_center_offset(self):
        p = inscribe(make_circle(1.0, center=(5.0, -2.0)), 12)
        assert np.allclose(p.vertices.mean(axis=0), [5.0, -2.0], atol=1e-12)

    def test_rejects_bad_radius(self):
        with pytest.raises(ValueError):
            make_circle(0.0)


class TestEllipse:
    def test_degenerates_to_circle(self):
        e = inscribe(make_ellipse(2.0, 2.0), 32)
        c = inscribe(make_circle(2.0), 32)
        assert np.allclose(e.vertices, c.vertices)

    def test_evaluate_axes(self):
        e = make_ellipse(3.0, 1.0)
        assert np.allclose(evaluate(e, 0.0), [3.0, 0.0])
        assert np.allclose(evaluate(e, math.pi / 2.0), [0.0, 1.0])

    def test_length_against_circle(self):
        assert curve_length(make_ellipse(2.0, 2.0)) == pytest.approx(
            4.0 * math.pi, rel=1e-9
        )

    def test_inscribed_convex(self):
        assert is_convex(inscribe(make_ellipse(1.5, 0.8), 64))


class TestPolylineCurve:
    def test_inscribe_reproduces_vertices(self):
        square = [(0, 0), (2, 0), (2, 2), (0, 2)]
        p = inscribe(make_polyline(square), 4)
        assert np.allclose(p.vertices, square, atol=1e-15)

    def test_evaluate_midedge(self):
        c = make_polyline([(0, 0), (2, 0), (2, 2), (0, 2)])
        # parameter is uniform per edge: halfway into the first quarter
        assert np.allclose(evaluate(c, math.pi / 4.0), [1.0, 0.0])

    def test_length_is_perimeter(self):
        c = make_polyline([(0, 0), (3, 0), (3, 4)])
        assert curve_length(c) == pytest.approx(12.0)


class TestTeeth:
    def test_right_edge_endpoints(self):
        b = make_teeth(2).backbone
        x_max = b[:, 0].max()
        assert x_max == pytest.approx(1.0 / math.pi, abs=1e-15)
        ys = np.sort(b[np.isclose(b[:, 0], x_max), 1])
        assert ys[0] == pytest.approx(-0.04321391826377226, abs=1e-15)
        assert ys[-1] == pytest.approx(+0.04321391826377226, abs=1e-15)

    @pytest.mark.parametrize(
        "k,x_min,gap",
        [
            (1, 0.15915494309189535, 3.7348854634159786e-3),
            (2, 0.10610329539459689, 1.6139903514060926e-4),
            (3, 0.07957747154594767, 6.974684712417995e-6),
        ],
    )
    def test_truncation_and_gap(self, k, x_min, gap):
        assert 1.0 / ((k + 1) * math.pi) == pytest.approx(x_min, rel=1e-14)
        assert 2.0 * math.exp(-(k + 1) * math.pi) == pytest.approx(gap, rel=1e-12)
        b = make_teeth(k).backbone
        # branch values at the truncation differ by exactly the gap
        at_min = b[np.isclose(b[:, 0], x_min, atol=1e-12), 1]
        assert np.ptp(at_min) == pytest.approx(gap, rel=1e-9)

    def test_backbone_simple_and_ccw(self):
        for k in (1, 2, 3):
            b = make_teeth(k).backbone
            assert shapely.Polygon(b).is_valid
            assert signed_area(Polygon(b)) > 0.0

    def test_left_box_reaches_detour(self):
        b = make_teeth(2, left_x=-0.05).backbone
        assert b[:, 0].min() == pytest.approx(-0.05)

    def test_rejects_bad_params(self):
        with pytest.raises(ValueError):
            make_teeth(0)
        with pytest.raises(ValueError):
            make_teeth(2, left_x=0.1)


class TestSpiral:
    def test_outer_endpoints(self):
        b = make_spiral(1).backbone
        r_out = 1.0 / math.pi**2
        assert np.allclose(b[0], [r_out, 0.0], atol=1e-12)
        d = np.hypot(*(b - [-r_out, 0.0]).T)
        assert d.min() < 1e-12

    def test_inner_endpoints_and_origin(self):
        b = make_spiral(1).backbone
        r_in = 1.0 / (9.0 * math.pi**2)
        assert np.min(np.hypot(*(b - [r_in, 0.0]).T)) < 1e-12
        assert np.min(np.hypot(*(b - [-r_in, 0.0]).T)) < 1e-12
        assert np.min(np.hypot(b[:, 0], b[:, 1])) == 0.0

    def test_arm_crosses_axis_at_quarter(self):
        # the outward arm passes through (1/(4 pi^2), 0) at its half turn
        b = make_spiral(1).backbone
        ring = shapely.LinearRing([tuple(v) for v in b])
        # chord sagitta at the backbone sampling density is ~2e-8
        assert ring.distance(shapely.Point(1.0 / (4.0 * math.pi**2), 0.0)) < 1e-7

    def test_backbone_simple_and_ccw(self):
        for t in (1, 2):
            b = make_spiral(t).backbone
            assert shapely.Polygon(b).is_valid
            assert signed_area(Polygon(b)) > 0.0

    def test_floor_below_figure(self):
        b = make_spiral(1).backbone
        assert b[:, 1].min() == pytest.approx(-0.15)

    def test_rejects_bad_params(self):
        with pytest.raises(ValueError):
            make_spiral(0)
        with pytest.raises(ValueError):
            make_spiral(1, floor_y=0.0)


class TestEvaluate:
    def test_scalar_and_batch_shapes(self):
        c = make_circle()
        assert evaluate(c, 0.0).shape == (2,)
        assert evaluate(c, np.linspace(0, 6, 17)).shape == (17, 2)

    def test_wraps_parameter(self):
        c = make_teeth(1)
        assert np.allclose(evaluate(c, 0.5), evaluate(c, 0.5 + 2.0 * math.pi))

    def test_arclength_proportional_spacing(self):
        # equal parameter steps cover equal arc length, so chord steps are
        # bounded above by the arc step and only corner cutting shortens them
        c = make_spiral(1)
        s = np.linspace(0.0, 2.0 * math.pi, 400, endpoint=False)
        pts = evaluate(c, s)
        steps = np.hypot(*(np.diff(pts, axis=0)).T)
        arc_step = curve_length(c) / 400.0
        assert steps.max() <= arc_step + 1e-12
        # sharp corners cut chords short; anything above a quarter step is sane
        assert steps.min() >= 0.25 * arc_step


class TestResample:
    def test_square_midpoints(self):
        p = Polygon([(0, 0), (2, 0), (2, 2), (0, 2)])
        r = resample(p, 8)
        assert np.allclose(r.vertices[::2], p.vertices)
        assert np.allclose(r.vertices[1], [1.0, 0.0])

    def test_equal_edges_reproduced_exactly(self):
        p = Polygon([(0, 0), (2, 0), (2, 2), (0, 2)])
        assert np.allclose(resample(p, 4).vertices, p.vertices, atol=1e-15)

    def test_perimeter_never_grows(self):
        p = Polygon([(0, 0), (3, 0), (3, 4)])
        for n in (3, 7, 50):
            assert perimeter(resample(p, n)) <= perimeter(p) + 1e-12

    @settings(max_examples=40, deadline=None)
    @given(star_polygons(), st.integers(min_value=20, max_value=120))
    def test_resampled_points_on_boundary(self, p, n):
        r = resample(p, n)
        boundary = shapely.LinearRing([tuple(v) for v in p.vertices])
        for v in r.vertices:
            assert boundary.distance(shapely.Point(v)) < 1e-9

    @settings(max_examples=30, deadline=None)
    @given(star_polygons())
    def test_resample_nearly_uniform_edges(self, p):
        r = resample(p, 64)
        lens = edge_lengths(r)
        assert lens.max() <= perimeter(p) / 64.0 + 1e-9


def test_catalog_contents():
    cat = catalog()
    assert set(cat) == {"circle", "ellipse", "teeth", "spiral"}
    for c in cat.values():
        assert isinstance(c, Curve)


def test_inscribe_rejects_tiny_n():
    with pytest.raises(ValueError):
        inscribe(make_circle(), 2)


def test_backbone_read_only():
    b = make_teeth(1).backbone
    with pytest.raises(ValueError):
        b[0, 0] = 1.0
