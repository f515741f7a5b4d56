"""Geodesy: Mercator conversion, haversine, bounding-box mapping."""
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adflow.errors import DegenerateBBox, LatitudeOutOfRange
from adflow.geo import (
    EH,
    ER,
    BBox,
    LatLon,
    MercatorXY,
    from_web_mercator,
    haversine_distance,
    map_to_local,
    to_web_mercator,
)


def test_forward_known_points():
    origin = to_web_mercator(LatLon(0, 0))
    assert origin.x == 0.0 and origin.y == 0.0
    edge = to_web_mercator(LatLon(0, 180))
    assert edge.x == pytest.approx(20037508.3428, abs=1e-3)
    assert edge.y == pytest.approx(0.0, abs=1e-9)


def test_forward_45_degrees_against_closed_form():
    # independent evaluation of the projection formula with the EH constant
    expected = math.log(math.tan(math.radians(45.0) / 2 + math.pi / 4)) \
        * (EH / math.pi)
    got = to_web_mercator(LatLon(45, 0)).y
    assert got == pytest.approx(expected, abs=1e-9)
    assert got == pytest.approx(5621521.49, abs=0.01)


def test_latitude_limit():
    to_web_mercator(LatLon(85.0, 0))
    with pytest.raises(LatitudeOutOfRange):
        to_web_mercator(LatLon(85.06, 0))
    with pytest.raises(LatitudeOutOfRange):
        to_web_mercator(LatLon(-89.0, 0))


def test_inverse_known_points():
    assert from_web_mercator(MercatorXY(0, 0)) == LatLon(0, 0)
    assert from_web_mercator(MercatorXY(EH, 0)).lon == pytest.approx(180.0)
    back = from_web_mercator(to_web_mercator(LatLon(45, 0)))
    assert back.lat == pytest.approx(45.0, abs=1e-9)
    assert back.lon == pytest.approx(0.0, abs=1e-9)


@settings(max_examples=300, deadline=None)
@given(lat=st.floats(-85, 85), lon=st.floats(-180, 180))
def test_roundtrip_property(lat, lon):
    back = from_web_mercator(to_web_mercator(LatLon(lat, lon)))
    assert back.lat == pytest.approx(lat, abs=1e-9)
    assert back.lon == pytest.approx(lon, abs=1e-9)


def test_forward_monotone():
    rng = random.Random(11)
    for _ in range(200):
        lat1, lat2 = sorted((rng.uniform(-85, 85), rng.uniform(-85, 85)))
        lon = rng.uniform(-180, 180)
        if lat1 != lat2:
            assert to_web_mercator(LatLon(lat1, lon)).y < \
                to_web_mercator(LatLon(lat2, lon)).y
        lon1, lon2 = sorted((rng.uniform(-180, 180), rng.uniform(-180, 180)))
        lat = rng.uniform(-85, 85)
        if lon1 != lon2:
            assert to_web_mercator(LatLon(lat, lon1)).x < \
                to_web_mercator(LatLon(lat, lon2)).x


def test_haversine_closed_forms():
    assert haversine_distance(LatLon(12, 34), LatLon(12, 34)) == 0.0
    quarter = haversine_distance(LatLon(0, 0), LatLon(0, 90))
    assert quarter == pytest.approx(ER * math.pi / 2, rel=1e-12)
    antipodal = haversine_distance(LatLon(90, 0), LatLon(-90, 0))
    assert antipodal == pytest.approx(ER * math.pi, rel=1e-12)


def test_haversine_symmetry_and_triangle_inequality():
    rng = random.Random(123)
    for _ in range(500):
        a = LatLon(rng.uniform(-90, 90), rng.uniform(-180, 180))
        b = LatLon(rng.uniform(-90, 90), rng.uniform(-180, 180))
        c = LatLon(rng.uniform(-90, 90), rng.uniform(-180, 180))
        ab = haversine_distance(a, b)
        assert ab == haversine_distance(b, a)
        assert ab >= 0.0
        assert ab <= haversine_distance(a, c) + haversine_distance(c, b) + 1e-6


def test_map_to_local_corners_and_midpoint():
    bbox = BBox(sw=LatLon(50.0, 4.0), ne=LatLon(50.5, 4.8))
    at_sw = map_to_local(bbox, bbox.sw)
    assert (at_sw.u, at_sw.v) == (0.0, 0.0)
    assert at_sw.east_m == 0.0 and at_sw.north_m == 0.0
    at_ne = map_to_local(bbox, bbox.ne)
    assert at_ne.u == pytest.approx(1.0) and at_ne.v == pytest.approx(1.0)

    sw_m, ne_m = to_web_mercator(bbox.sw), to_web_mercator(bbox.ne)
    mid = from_web_mercator(MercatorXY((sw_m.x + ne_m.x) / 2,
                                       (sw_m.y + ne_m.y) / 2))
    at_mid = map_to_local(bbox, mid)
    assert at_mid.u == pytest.approx(0.5, abs=1e-12)
    assert at_mid.v == pytest.approx(0.5, abs=1e-12)


def test_map_to_local_offsets_signed():
    bbox = BBox(sw=LatLon(50.0, 4.0), ne=LatLon(50.5, 4.8))
    below = map_to_local(bbox, LatLon(49.9, 3.9))
    assert below.u < 0 and below.v < 0
    assert below.east_m < 0 and below.north_m < 0


def test_degenerate_bbox():
    with pytest.raises(DegenerateBBox):
        map_to_local(BBox(sw=LatLon(50, 4), ne=LatLon(50, 5)), LatLon(50, 4.5))
    with pytest.raises(DegenerateBBox):
        map_to_local(BBox(sw=LatLon(50, 4), ne=LatLon(51, 4)), LatLon(50.5, 4))


def test_latlon_validation():
    with pytest.raises(ValueError):
        LatLon(91, 0)
    with pytest.raises(ValueError):
        LatLon(0, 181)
