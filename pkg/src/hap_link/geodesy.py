# geodesy.py
# Coordinate systems on the WGS84 ellipsoid: geographic, geocentric,
# pseudo-Mercator projected and topocentric (local east/north/up).
#
# The vectorised kernels take numpy arrays (or floats) in radians/metres and
# are what the mission loop calls. The scalar operations wrap them for the
# pydantic coordinate types.
#
# Projection convention: x is driven by longitude, y by latitude (EPSG:3857
# orientation, y growing southward from the top of the map).

import math

import numpy as np
from numpy.typing import ArrayLike

from hap_link.models import Ellipsoid, GeocentricCoord, GeographicCoord, ProjectedCoord

WGS84 = Ellipsoid()

# Mercator is singular at the poles.
POLE_MARGIN = 1e-6


# ---------------------------------------------------------------------------
# Exceptions
# ---------------------------------------------------------------------------


class PoleSingularityError(ValueError):
    """Raised when a latitude is too close to a pole to be projected."""


class CoincidentPointsError(ValueError):
    """Raised when a direction is requested between two identical points."""


# ---------------------------------------------------------------------------
# Vectorised kernels
# ---------------------------------------------------------------------------


def project(
    lat: ArrayLike, lon: ArrayLike, ell: Ellipsoid = WGS84
) -> tuple[np.ndarray, np.ndarray]:
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    if np.any(np.abs(lat) >= math.pi / 2 - POLE_MARGIN):
        raise PoleSingularityError("latitude within 1e-6 rad of a pole cannot be projected")
    x = (2.0**ell.projection_alpha / (2.0 * math.pi)) * (lon + math.pi)
    y = (2.0**ell.projection_beta / (2.0 * math.pi)) * (
        math.pi - np.log(np.tan(math.pi / 4 + lat / 2))
    )
    return x, y


def unproject(x: ArrayLike, y: ArrayLike, ell: Ellipsoid = WGS84) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lon = x * (2.0 * math.pi) / 2.0**ell.projection_alpha - math.pi
    psi = math.pi - y * (2.0 * math.pi) / 2.0**ell.projection_beta
    lat = 2.0 * np.arctan(np.exp(psi)) - math.pi / 2
    return lat, lon


def geodetic_to_ecef(
    lat: ArrayLike, lon: ArrayLike, alt: ArrayLike, ell: Ellipsoid = WGS84
) -> np.ndarray:
    """Geocentric Cartesian points, shape (..., 3)."""
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    alt = np.asarray(alt, dtype=float)
    e2 = ell.eccentricity_squared
    sin_lat = np.sin(lat)
    r = ell.semi_major_axis / np.sqrt(1.0 - e2 * sin_lat**2)
    horizontal = (r + alt) * np.cos(lat)
    return np.stack(
        (
            horizontal * np.cos(lon),
            horizontal * np.sin(lon),
            ((1.0 - e2) * r + alt) * sin_lat,
        ),
        axis=-1,
    )


def local_up(lat: ArrayLike, lon: ArrayLike) -> np.ndarray:
    """Unit ellipsoidal normal."""
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    return np.stack(
        (np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)), axis=-1
    )


def local_north(lat: ArrayLike, lon: ArrayLike) -> np.ndarray:
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    return np.stack(
        (-np.sin(lat) * np.cos(lon), -np.sin(lat) * np.sin(lon), np.cos(lat)), axis=-1
    )


def local_east(lon: ArrayLike) -> np.ndarray:
    lon = np.asarray(lon, dtype=float)
    return np.stack((-np.sin(lon), np.cos(lon), np.zeros_like(lon)), axis=-1)


def elevation_deg(observer: np.ndarray, up: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Angle of the line of sight above the plane normal to `up`, degrees."""
    los = np.asarray(target, dtype=float) - np.asarray(observer, dtype=float)
    distance = np.linalg.norm(los, axis=-1)
    if np.any(distance == 0.0):
        raise CoincidentPointsError("observer and target coincide")
    sine = np.einsum("...i,...i->...", up, los) / distance
    return np.degrees(np.arcsin(np.clip(sine, -1.0, 1.0)))


def great_circle(
    lat1: ArrayLike, lon1: ArrayLike, lat2: ArrayLike, lon2: ArrayLike, radius: float
) -> np.ndarray:
    """Haversine distance on a sphere."""
    lat1, lon1, lat2, lon2 = (np.asarray(v, dtype=float) for v in (lat1, lon1, lat2, lon2))
    h = (
        np.sin((lat2 - lat1) / 2) ** 2
        + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
    )
    return 2.0 * radius * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


# ---------------------------------------------------------------------------
# Scalar operations
# ---------------------------------------------------------------------------


def to_projected(g: GeographicCoord, ell: Ellipsoid = WGS84) -> ProjectedCoord:
    x, y = project(g.latitude, g.longitude, ell)
    return ProjectedCoord(x=float(x), y=float(y), z=g.altitude)


def from_projected(p: ProjectedCoord, ell: Ellipsoid = WGS84) -> GeographicCoord:
    lat, lon = unproject(p.x, p.y, ell)
    return GeographicCoord(latitude=float(lat), longitude=float(lon), altitude=p.z)


def to_geocentric(g: GeographicCoord, ell: Ellipsoid = WGS84) -> GeocentricCoord:
    x, y, z = geodetic_to_ecef(g.latitude, g.longitude, g.altitude, ell)
    return GeocentricCoord(x=float(x), y=float(y), z=float(z))


def _ecef(g: GeographicCoord, ell: Ellipsoid) -> np.ndarray:
    return geodetic_to_ecef(g.latitude, g.longitude, g.altitude, ell)


def slant_distance(g_a: GeographicCoord, g_b: GeographicCoord, ell: Ellipsoid = WGS84) -> float:
    """Straight-line distance between the geocentric images, metres."""
    return float(np.linalg.norm(_ecef(g_a, ell) - _ecef(g_b, ell)))


def elevation_angle(
    observer: GeographicCoord, target: GeographicCoord, ell: Ellipsoid = WGS84
) -> float:
    """Elevation of `target` above the observer's local horizontal, degrees."""
    up = local_up(observer.latitude, observer.longitude)
    return float(elevation_deg(_ecef(observer, ell), up, _ecef(target, ell)))


def ground_distance(g_a: GeographicCoord, g_b: GeographicCoord, ell: Ellipsoid = WGS84) -> float:
    """Great-circle distance on a sphere of radius a; altitudes are ignored."""
    return float(
        great_circle(g_a.latitude, g_a.longitude, g_b.latitude, g_b.longitude, ell.semi_major_axis)
    )
