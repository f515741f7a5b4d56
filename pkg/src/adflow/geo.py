"""Geodesic helpers: Web Mercator conversion, haversine, bbox mapping."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateBBox, LatitudeOutOfRange

# half of the equatorial circumference (pi * WGS-84 semi-major axis), meters
EH = 20037508.342789244
# spherical Earth radius used by the haversine distance, meters
ER = 6371000.0

# |lat| beyond this has no finite Mercator projection
MAX_MERCATOR_LAT = 85.05113


@dataclass(frozen=True)
class LatLon:
    lat: float
    lon: float

    def __post_init__(self):
        if not (abs(self.lat) <= 90.0):
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not (abs(self.lon) <= 180.0):
            raise ValueError(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class MercatorXY:
    x: float
    y: float


def to_web_mercator(p: LatLon) -> MercatorXY:
    """EPSG:4326 -> EPSG:3857."""
    if abs(p.lat) > MAX_MERCATOR_LAT:
        raise LatitudeOutOfRange(
            f"latitude {p.lat} not projectable (limit {MAX_MERCATOR_LAT})")
    x = p.lon * EH / 180.0
    # ln(tan((90 + lat) * pi/360)) * (180/pi) * EH/180, written as
    # atanh(sin(lat)) which is the same function but exact at the equator
    y = math.atanh(math.sin(math.radians(p.lat))) * EH / math.pi
    return MercatorXY(x, y)


def from_web_mercator(p: MercatorXY) -> LatLon:
    """EPSG:3857 -> EPSG:4326."""
    lon = p.x * 180.0 / EH
    lat = math.atan(math.exp(p.y * math.pi / EH)) * 360.0 / math.pi - 90.0
    return LatLon(lat, lon)


def haversine_distance(a: LatLon, b: LatLon) -> float:
    """Great-circle distance in meters on a spherical Earth."""
    lat1 = math.radians(a.lat)
    lat2 = math.radians(b.lat)
    dlat = math.radians(b.lat - a.lat)
    dlon = math.radians(b.lon - a.lon)
    alpha = (math.sin(dlat / 2.0) ** 2
             + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2)
    alpha = min(1.0, max(0.0, alpha))
    return ER * 2.0 * math.atan2(math.sqrt(alpha), math.sqrt(1.0 - alpha))


@dataclass(frozen=True)
class BBox:
    sw: LatLon
    ne: LatLon


@dataclass(frozen=True)
class LocalPosition:
    u: float        # 0 at the west edge, 1 at the east edge
    v: float        # 0 at the south edge, 1 at the north edge
    east_m: float   # haversine meters from sw along the sw parallel
    north_m: float  # haversine meters from sw along the sw meridian


def map_to_local(bbox: BBox, p: LatLon) -> LocalPosition:
    """Place ``p`` inside a bounding box.

    (u, v) interpolate linearly in Mercator space and land in [0, 1]^2 for
    points inside the box; the meter offsets run along a constant-latitude
    and a constant-longitude leg from the south-west corner.
    """
    sw = to_web_mercator(bbox.sw)
    ne = to_web_mercator(bbox.ne)
    if not (ne.x > sw.x and ne.y > sw.y):
        raise DegenerateBBox("bounding box has no extent")
    m = to_web_mercator(p)
    u = (m.x - sw.x) / (ne.x - sw.x)
    v = (m.y - sw.y) / (ne.y - sw.y)
    east = haversine_distance(bbox.sw, LatLon(bbox.sw.lat, p.lon))
    north = haversine_distance(bbox.sw, LatLon(p.lat, bbox.sw.lon))
    if p.lon < bbox.sw.lon:
        east = -east
    if p.lat < bbox.sw.lat:
        north = -north
    return LocalPosition(u, v, east, north)
