# atmosphere.py
# Gaseous zenith attenuation from the approximate ITU-R P.676 procedure
# (dry air plus water vapour, each as specific attenuation times an
# equivalent height). The packaged zenith_attenuation.csv is this model's
# grid for the reference atmosphere.
#
# Valid for 1-120 GHz here: the dry-air expressions are piecewise with a
# log-domain interpolation across the 60 GHz oxygen complex.

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field

MAX_FREQUENCY_GHZ = 120.0


class AtmosphereConditions(BaseModel):
    """Surface conditions of the reference atmosphere (annual mean, sea level)."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    pressure_hpa: float = Field(1013.25, gt=0)
    temperature_k: float = Field(288.15, gt=0)
    water_vapour_density: float = Field(7.5, ge=0, description="g/m^3.")

    @property
    def rp(self) -> float:
        return self.pressure_hpa / 1013.0

    @property
    def rt(self) -> float:
        return 288.0 / self.temperature_k


REFERENCE_ATMOSPHERE = AtmosphereConditions()


def _frequencies(f_ghz: ArrayLike) -> np.ndarray:
    f = np.asarray(f_ghz, dtype=float)
    if np.any(~np.isfinite(f) | (f <= 0.0) | (f > MAX_FREQUENCY_GHZ)):
        raise ValueError(f"frequency must lie in (0, {MAX_FREQUENCY_GHZ:g}] GHz")
    return f


def _scalar_or_array(values: np.ndarray) -> np.ndarray | float:
    return float(values) if values.ndim == 0 else values


# ---------------------------------------------------------------------------
# Dry air
# ---------------------------------------------------------------------------


def _xi(rp: float, rt: float) -> tuple[float, ...]:
    coeffs = (
        (0.0717, -1.8132, 0.0156, -1.6515),
        (0.5146, -4.6368, -0.1921, -5.7416),
        (0.3414, -6.5851, 0.2130, -8.5854),
        (-0.0112, 0.0092, -0.1033, -0.0009),
        (0.2705, -2.7192, -0.3016, -4.1033),
        (0.2445, -5.9191, 0.0422, -8.0719),
        (-0.1833, 6.5589, -0.2402, 6.131),
    )
    return tuple(
        rp**a * rt**b * np.exp(c * (1.0 - rp) + d * (1.0 - rt)) for a, b, c, d in coeffs
    )


def _oxygen_anchors(rp: float, rt: float) -> dict[float, float]:
    """Specific attenuation at the 54..66 GHz anchor frequencies, dB/km."""
    return {
        54.0: 2.136 * rp**1.4975 * rt**-1.5852 * np.exp(-2.5196 * (1.0 - rt)),
        57.0: 9.984 * rp**0.9313 * rt**2.6732 * np.exp(0.8563 * (1.0 - rt)),
        60.0: 15.42 * rp**0.8595 * rt**3.6178 * np.exp(1.1521 * (1.0 - rt)),
        63.0: 10.63 * rp**0.9298 * rt**2.3284 * np.exp(0.6287 * (1.0 - rt)),
        66.0: 1.944 * rp**1.6657 * rt**-3.3714 * np.exp(-4.1643 * (1.0 - rt)),
    }


def oxygen_specific_attenuation(
    f_ghz: ArrayLike, conditions: AtmosphereConditions = REFERENCE_ATMOSPHERE
) -> np.ndarray | float:
    requested = _frequencies(f_ghz)
    f = np.atleast_1d(requested)
    rp, rt = conditions.rp, conditions.rt
    xi1, xi2, xi3, xi4, xi5, xi6, xi7 = _xi(rp, rt)
    out = np.empty_like(f)

    low = f <= 54.0
    fl = f[low]
    out[low] = (
        7.2 * rt**2.8 / (fl**2 + 0.34 * rp**2 * rt**1.6)
        + 0.62 * xi3 / ((54.0 - fl) ** (1.16 * xi1) + 0.83 * xi2)
    ) * fl**2 * rp**2 * 1e-3

    mid = (f > 54.0) & (f <= 66.0)
    fm = f[mid]
    anchors = _oxygen_anchors(rp, rt)
    n = np.where(fm <= 60.0, 0.0, -15.0)
    log_sum = np.zeros_like(fm)
    for node, value in anchors.items():
        basis = np.ones_like(fm)
        denom = 1.0
        for other in anchors:
            if other != node:
                basis *= fm - other
                denom *= node - other
        log_sum += node ** (-n) * np.log(value) * basis / denom
    out[mid] = np.exp(log_sum * fm**n)

    high = f > 66.0
    fh = f[high]
    out[high] = (
        3.02e-4 * rt**3.5
        + 0.283 * rt**3.8 / ((fh - 118.75) ** 2 + 2.91 * rp**2 * rt**1.6)
        + 0.502 * xi6 * (1.0 - 0.0163 * xi7 * (fh - 66.0))
        / ((fh - 66.0) ** (1.4346 * xi4) + 1.15 * xi5)
    ) * fh**2 * rp**2 * 1e-3
    return _scalar_or_array(out.reshape(requested.shape))


def oxygen_equivalent_height(
    f_ghz: ArrayLike, conditions: AtmosphereConditions = REFERENCE_ATMOSPHERE
) -> np.ndarray | float:
    """Equivalent dry-air height, km."""
    f = _frequencies(f_ghz)
    rp = conditions.rp
    t1 = (4.64 / (1.0 + 0.066 * rp**-2.3)) * np.exp(
        -(((f - 59.7) / (2.87 + 12.4 * np.exp(-7.9 * rp))) ** 2)
    )
    t2 = 0.14 * np.exp(2.12 * rp) / ((f - 118.75) ** 2 + 0.031 * np.exp(2.2 * rp))
    t3 = (
        (0.0114 / (1.0 + 0.14 * rp**-2.6))
        * f
        * (-0.0247 + 1e-4 * f + 1.61e-6 * f**2)
        / (1.0 - 0.0169 * f + 4.1e-5 * f**2 + 3.2e-7 * f**3)
    )
    return _scalar_or_array((6.1 / (1.0 + 0.17 * rp**-1.1)) * (1.0 + t1 + t2 + t3))


# ---------------------------------------------------------------------------
# Water vapour
# ---------------------------------------------------------------------------

# (line GHz, strength, temperature exponent, width factor or None, skewed)
_WATER_LINES = (
    (22.235, 3.98, 2.23, 9.42, True),
    (183.31, 11.96, 0.7, 11.14, False),
    (321.226, 0.081, 6.44, 6.29, False),
    (325.153, 3.66, 1.6, 9.22, False),
    (380.0, 25.37, 1.09, None, False),
    (448.0, 17.4, 1.46, None, False),
    (557.0, 844.6, 0.17, None, True),
    (752.0, 290.0, 0.41, None, True),
)


def water_vapour_specific_attenuation(
    f_ghz: ArrayLike, conditions: AtmosphereConditions = REFERENCE_ATMOSPHERE
) -> np.ndarray | float:
    f = _frequencies(f_ghz)
    rp, rt, rho = conditions.rp, conditions.rt, conditions.water_vapour_density
    n1 = 0.955 * rp * rt**0.68 + 0.006 * rho
    n2 = 0.735 * rp * rt**0.5 + 0.0353 * rt**4 * rho

    total = np.zeros_like(f)
    for line, strength, exponent, width, skewed in _WATER_LINES:
        broadening = width * n1**2 if width is not None else 0.0
        term = strength * n1 * np.exp(exponent * (1.0 - rt)) / ((f - line) ** 2 + broadening)
        if skewed:
            term *= 1.0 + ((f - line) / (f + line)) ** 2
        total += term
    total += (
        83328.0 * n2 * np.exp(0.99 * (1.0 - rt)) / (f - 1780.0) ** 2
        * (1.0 + ((f - 1780.0) / (f + 1780.0)) ** 2)
    )
    return _scalar_or_array(total * f**2 * rt**2.5 * rho * 1e-4)


def water_vapour_equivalent_height(
    f_ghz: ArrayLike, conditions: AtmosphereConditions = REFERENCE_ATMOSPHERE
) -> np.ndarray | float:
    """Equivalent water-vapour height, km."""
    f = _frequencies(f_ghz)
    cw = 1.013 / (1.0 + np.exp(-8.1 * (conditions.rp - 0.57)))
    return _scalar_or_array(
        1.66
        * (
            1.0
            + 1.39 * cw / ((f - 22.235) ** 2 + 2.56 * cw)
            + 3.37 * cw / ((f - 183.31) ** 2 + 4.69 * cw)
            + 1.58 * cw / ((f - 325.1) ** 2 + 2.89 * cw)
        )
    )


# ---------------------------------------------------------------------------
# Zenith path
# ---------------------------------------------------------------------------


def zenith_attenuation(
    f_ghz: ArrayLike, conditions: AtmosphereConditions = REFERENCE_ATMOSPHERE
) -> np.ndarray | float:
    """Total gaseous attenuation along a vertical path through the atmosphere, dB."""
    f = _frequencies(f_ghz)
    dry = oxygen_specific_attenuation(f, conditions) * oxygen_equivalent_height(f, conditions)
    wet = water_vapour_specific_attenuation(f, conditions) * water_vapour_equivalent_height(
        f, conditions
    )
    return _scalar_or_array(np.asarray(dry + wet))


def zenith_attenuation_grid(
    start: float = 1.0,
    stop: float = 100.0,
    step: float = 1.0,
    conditions: AtmosphereConditions = REFERENCE_ATMOSPHERE,
) -> tuple[np.ndarray, np.ndarray]:
    count = int(round((stop - start) / step)) + 1
    frequencies = start + step * np.arange(count)
    return frequencies, np.atleast_1d(zenith_attenuation(frequencies, conditions))
