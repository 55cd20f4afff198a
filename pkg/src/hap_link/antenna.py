# antenna.py
# Circular-aperture (reflector) gain pattern and fixed boresight geometry.
#
#   G(θ) = G_max + 10·log10(4·|J1(k·a·sinθ) / (k·a·sinθ)|²),  k = 2πf/c, a = D/2
#
# Nulls and the back hemisphere (θ > 90°) are clamped to G_max − floor.
# Boresights are fixed relative to the local vertical: inclination 0 points
# at the zenith, 180 at the nadir, and anything in between tilts toward the
# configured azimuth (clockwise from north).

import math

import numpy as np
from numpy.typing import ArrayLike
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.special import j1, jn_zeros

from hap_link.geodesy import WGS84, CoincidentPointsError, geodetic_to_ecef
from hap_link.geodesy import local_east, local_north, local_up
from hap_link.models import AntennaConfig, GeographicCoord

FIRST_J1_ZERO = float(jn_zeros(1, 1)[0])


# ---------------------------------------------------------------------------
# Exceptions
# ---------------------------------------------------------------------------


class AngleOutOfRangeError(ValueError):
    """Raised when an off-boresight angle falls outside [0, 180] degrees."""


# ---------------------------------------------------------------------------
# Pattern
# ---------------------------------------------------------------------------


def bessel_j1(x: ArrayLike) -> np.ndarray | float:
    return j1(x)


def wave_aperture_product(cfg: AntennaConfig) -> float:
    """k·a for the configured carrier and aperture."""
    k = 2.0 * math.pi * cfg.carrier_frequency_ghz * 1e9 / SPEED_OF_LIGHT
    return k * cfg.aperture_diameter_m / 2.0


def aperture_gain(cfg: AntennaConfig, off_boresight_deg: ArrayLike) -> np.ndarray | float:
    """Gain in dBi towards `off_boresight_deg` (scalar or array)."""
    theta = np.asarray(off_boresight_deg, dtype=float)
    if np.any(~np.isfinite(theta) | (theta < 0.0) | (theta > 180.0)):
        raise AngleOutOfRangeError("off-boresight angle must lie in [0, 180] degrees")

    u = wave_aperture_product(cfg) * np.sin(np.radians(theta))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(u == 0.0, 0.5, j1(u) / np.where(u == 0.0, 1.0, u))
        relative = 10.0 * np.log10(4.0 * ratio**2)

    floor = cfg.max_gain_dbi - cfg.gain_floor_db
    gain = np.where(theta > 90.0, floor, np.maximum(cfg.max_gain_dbi + relative, floor))
    gain = np.where(theta == 0.0, cfg.max_gain_dbi, gain)
    return float(gain) if gain.ndim == 0 else gain


def first_null_deg(cfg: AntennaConfig) -> float:
    """Off-boresight angle of the first pattern null; 90 when the beam has none."""
    sine = FIRST_J1_ZERO / wave_aperture_product(cfg)
    return 90.0 if sine >= 1.0 else math.degrees(math.asin(sine))


# ---------------------------------------------------------------------------
# Boresight geometry
# ---------------------------------------------------------------------------


def boresight_vector(
    lat: ArrayLike, lon: ArrayLike, inclination_deg: float, azimuth_deg: float = 0.0
) -> np.ndarray:
    inc = math.radians(inclination_deg)
    az = math.radians(azimuth_deg)
    horizontal = math.cos(az) * local_north(lat, lon) + math.sin(az) * local_east(lon)
    return math.cos(inc) * local_up(lat, lon) + math.sin(inc) * horizontal


def off_boresight_deg(
    node_ecef: np.ndarray, boresight: np.ndarray, target_ecef: np.ndarray
) -> np.ndarray:
    los = np.asarray(target_ecef, dtype=float) - np.asarray(node_ecef, dtype=float)
    distance = np.linalg.norm(los, axis=-1)
    if np.any(distance == 0.0):
        raise CoincidentPointsError("antenna node and target coincide")
    cosine = np.einsum("...i,...i->...", boresight, los) / distance
    return np.degrees(np.arccos(np.clip(cosine, -1.0, 1.0)))


def off_boresight_angle(
    node_pos: GeographicCoord, cfg: AntennaConfig, target_pos: GeographicCoord
) -> float:
    """Angle between the node's boresight and its line of sight to the target."""
    node = geodetic_to_ecef(node_pos.latitude, node_pos.longitude, node_pos.altitude, WGS84)
    target = geodetic_to_ecef(
        target_pos.latitude, target_pos.longitude, target_pos.altitude, WGS84
    )
    boresight = boresight_vector(
        node_pos.latitude,
        node_pos.longitude,
        cfg.boresight_inclination_deg,
        cfg.boresight_azimuth_deg,
    )
    return float(off_boresight_deg(node, boresight, target))
