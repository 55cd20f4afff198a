# trajectory.py
# HAP mission path from points of interest.
#
# The curve is a Bézier of degree Λ = Σl_i − 1 evaluated in pseudo-Mercator
# space, where PoI i stands in for l_i consecutive control points. A higher
# interest level therefore pulls the curve toward that PoI.
#
# The Bézier parameter is not arc length, so timing goes through an
# ArcLengthTable: cumulative geocentric chord length over a dense uniform
# parameter grid, inverted by linear interpolation.

import math
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict
from scipy.special import gammaln, xlog1py, xlogy

from hap_link.geodesy import WGS84, geodetic_to_ecef, project, unproject
from hap_link.models import ProjectedCoord, TimedTrajectory, TrajectoryPlan

# Above this degree the binomials leave exact float range; switch to log space.
EXACT_BINOMIAL_MAX_DEGREE = 60

# Basis-matrix entries evaluated per block; rows per block shrink as the degree grows.
EVAL_BLOCK_ENTRIES = 2**22


# ---------------------------------------------------------------------------
# Exceptions
# ---------------------------------------------------------------------------


class EmptyPlanError(ValueError):
    """Raised when a trajectory is requested from a plan with no PoIs."""


class DegenerateCurveError(ValueError):
    """Raised when time stepping is requested along a zero-length curve."""


# ---------------------------------------------------------------------------
# Bernstein weights
# ---------------------------------------------------------------------------


def _bernstein_basis(degree: int, t: np.ndarray) -> np.ndarray:
    m = np.arange(degree + 1)
    tt = t[:, None]
    if degree <= EXACT_BINOMIAL_MAX_DEGREE:
        coeff = np.array([math.comb(degree, k) for k in m], dtype=float)
        return coeff * tt**m * (1.0 - tt) ** (degree - m)
    log_coeff = gammaln(degree + 1) - gammaln(m + 1) - gammaln(degree - m + 1)
    return np.exp(log_coeff + xlogy(m, tt) + xlog1py(degree - m, -tt))


def bernstein_weights(levels: Sequence[int], t: ArrayLike) -> np.ndarray:
    """Per-PoI blending weights, shape (len(t), len(levels)); rows sum to 1.

    Weight i is Σ_{j<l_i} C(Λ, L_i+j) (1−t)^(Λ−L_i−j) t^(L_i+j) with
    L_i = l_0 + … + l_{i−1}.
    """
    if len(levels) == 0:
        raise EmptyPlanError("at least one point of interest is required")
    levels = np.asarray(levels, dtype=int)
    if np.any(levels < 1):
        raise ValueError("interest levels must be >= 1")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any((t < 0.0) | (t > 1.0)):
        raise ValueError("curve parameter must lie in [0, 1]")
    degree = int(levels.sum()) - 1
    offsets = np.concatenate(([0], np.cumsum(levels)[:-1]))
    return np.add.reduceat(_bernstein_basis(degree, t), offsets, axis=1)


# ---------------------------------------------------------------------------
# Curve evaluation
# ---------------------------------------------------------------------------


def _control_points(plan: TrajectoryPlan) -> np.ndarray:
    if not plan.pois:
        raise EmptyPlanError("at least one point of interest is required")
    lat = np.array([p.position.latitude for p in plan.pois])
    lon = np.array([p.position.longitude for p in plan.pois])
    alt = np.array([p.position.altitude for p in plan.pois])
    x, y = project(lat, lon)
    return np.column_stack((x, y, alt))


def _levels(plan: TrajectoryPlan) -> list[int]:
    return [p.interest_level for p in plan.pois]


def eval_block_rows(degree: int) -> int:
    """Parameter values per block for a curve of the given degree."""
    return max(1, EVAL_BLOCK_ENTRIES // (degree + 1))


def curve_points(plan: TrajectoryPlan, t: ArrayLike) -> np.ndarray:
    """Projected (x, y, z) rows for every parameter value in `t`."""
    control = _control_points(plan)
    levels = _levels(plan)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    rows = eval_block_rows(sum(levels) - 1)
    out = np.empty((t.size, 3))
    for start in range(0, t.size, rows):
        block = t[start : start + rows]
        out[start : start + block.size] = bernstein_weights(levels, block) @ control
    return out


def bezier_curve(plan: TrajectoryPlan, t: float) -> ProjectedCoord:
    x, y, z = curve_points(plan, t)[0]
    return ProjectedCoord(x=float(x), y=float(y), z=float(z))


def sample_uniform_parameter(plan: TrajectoryPlan) -> list[ProjectedCoord]:
    """K+1 curve points at t = k/K."""
    t = np.arange(plan.sample_count + 1) / plan.sample_count
    return [
        ProjectedCoord(x=float(x), y=float(y), z=float(z)) for x, y, z in curve_points(plan, t)
    ]


def curve_geodetic(plan: TrajectoryPlan, t: ArrayLike) -> tuple[np.ndarray, ...]:
    """(lat, lon, alt) along the curve, radians / metres."""
    pts = curve_points(plan, t)
    lat, lon = unproject(pts[:, 0], pts[:, 1])
    return lat, lon, pts[:, 2]


# ---------------------------------------------------------------------------
# Arc length
# ---------------------------------------------------------------------------


class ArcLengthTable(BaseModel):
    """Cumulative chord length against curve parameter. Immutable once built."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    parameters: np.ndarray
    cumulative: np.ndarray

    @classmethod
    def build(cls, plan: TrajectoryPlan, knots: int | None = None) -> "ArcLengthTable":
        knots = knots or plan.arc_knots
        t = np.linspace(0.0, 1.0, knots + 1)
        if np.ptp(_control_points(plan), axis=0).max() == 0.0:
            # all PoIs coincide: a hover, not a curve
            chords = np.zeros(knots)
        else:
            lat, lon, alt = curve_geodetic(plan, t)
            ecef = geodetic_to_ecef(lat, lon, alt, WGS84)
            chords = np.linalg.norm(np.diff(ecef, axis=0), axis=1)
        cumulative = np.concatenate(([0.0], np.cumsum(chords)))
        cumulative.setflags(write=False)
        t.setflags(write=False)
        return cls(parameters=t, cumulative=cumulative)

    @property
    def total_length(self) -> float:
        return float(self.cumulative[-1])

    def parameter_at(self, s: ArrayLike) -> np.ndarray:
        """Curve parameter reached after arc length `s` metres."""
        return np.interp(s, self.cumulative, self.parameters)


def mission_duration(plan: TrajectoryPlan, table: ArcLengthTable | None = None) -> float:
    table = table or ArcLengthTable.build(plan)
    return table.total_length / plan.speed


def step_count(duration: float, time_step: float) -> int:
    """Samples needed to cover [0, duration] inclusive at `time_step`."""
    return math.floor(duration / time_step + 1e-9) + 1


def constant_speed_timeline(
    plan: TrajectoryPlan, time_step: float, table: ArcLengthTable | None = None
) -> TimedTrajectory:
    if time_step <= 0:
        raise ValueError(f"time step must be positive, got {time_step}")
    table = table or ArcLengthTable.build(plan)
    if table.total_length == 0.0:
        raise DegenerateCurveError("curve has zero length; nothing to traverse")
    duration = table.total_length / plan.speed
    times = np.arange(step_count(duration, time_step)) * time_step
    s = np.minimum(times * plan.speed, table.total_length)
    lat, lon, alt = curve_geodetic(plan, table.parameter_at(s))
    return TimedTrajectory(
        times=times, latitude=lat, longitude=lon, altitude=alt, total_duration=duration
    )
