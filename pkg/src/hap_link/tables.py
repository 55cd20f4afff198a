# tables.py
# Environment-indexed loss tables (TR 38.811 transcriptions) and where they
# come from.
#
# Resolution order per table:
#   1. a path named in the scenario (tablePaths)
#   2. <NTNSIM_TABLE_DIR>/<name>.csv, when the variable is set (.env honoured)
#   3. the packaged copy under hap_link/data
# The packaged zenith-attenuation table is atmosphere.zenith_attenuation_grid()
# for the reference atmosphere, written at 1 GHz steps.
#
# Elevation-indexed rows are stored as length-9 arrays over the buckets
# 10, 20, ..., 90 degrees; NaN marks a bucket the source file did not provide.

import os
from importlib.resources import files
from pathlib import Path

import numpy as np
import pandas as pd
from dotenv import load_dotenv
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, model_validator

from hap_link.models import Band, Environment, TablePaths

TABLE_DIR_ENV = "NTNSIM_TABLE_DIR"
BUCKETS = np.arange(10, 100, 10)

TABLE_COLUMNS: dict[str, tuple[str, ...]] = {
    "shadow_fading": ("env", "band", "los", "elev_bucket", "sigma_db"),
    "clutter_loss": ("env", "band", "elev_bucket", "clutter_db"),
    "zenith_attenuation": ("frequency_ghz", "zenith_db"),
    "tropospheric_scintillation": ("elev_bucket", "scint_db"),
    "los_probability": ("env", "elev_bucket", "p_los"),
}


# ---------------------------------------------------------------------------
# Exceptions
# ---------------------------------------------------------------------------


class MissingTableEntryError(LookupError):
    """Raised when a lookup needs a table row or bucket that was never loaded."""


class FrequencyOutOfTableError(ValueError):
    """Raised when a carrier frequency lies outside the zenith-attenuation grid."""


class TableFileError(ValueError):
    """Raised when a table file is missing, unreadable or violates its schema."""


# ---------------------------------------------------------------------------
# Buckets
# ---------------------------------------------------------------------------


def elevation_bucket(elevation_deg: ArrayLike) -> np.ndarray | int:
    """Nearest 10-degree bucket in 10..90; halfway values round up."""
    e = np.asarray(elevation_deg, dtype=float)
    bucket = np.clip(np.floor(e / 10.0 + 0.5) * 10.0, 10.0, 90.0).astype(int)
    return int(bucket) if bucket.ndim == 0 else bucket


def _bucket_index(elevation_deg: ArrayLike) -> np.ndarray:
    return np.asarray(elevation_bucket(elevation_deg)) // 10 - 1


# ---------------------------------------------------------------------------
# LossTables
# ---------------------------------------------------------------------------

ShadowKey = tuple[Environment, Band, bool]
ClutterKey = tuple[Environment, Band]


class LossTables(BaseModel):
    """Immutable lookup tables; safe to share between worker threads."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    shadow_sigma: dict[ShadowKey, np.ndarray]
    clutter_loss: dict[ClutterKey, np.ndarray]
    zenith_frequencies: np.ndarray
    zenith_attenuation: np.ndarray
    tropospheric_scintillation: np.ndarray
    los_probability: dict[Environment, np.ndarray]

    @model_validator(mode="after")
    def _check_ranges(self) -> "LossTables":
        for name, rows in (
            ("shadow sigma", self.shadow_sigma.values()),
            ("clutter loss", self.clutter_loss.values()),
            ("tropospheric scintillation", [self.tropospheric_scintillation]),
        ):
            for row in rows:
                if np.any(row[~np.isnan(row)] < 0):
                    raise ValueError(f"{name} values must be >= 0")

        for env, row in self.los_probability.items():
            known = row[~np.isnan(row)]
            if np.any((known < 0) | (known > 1)):
                raise ValueError(f"LOS probability for {env} must lie in [0, 1]")
            if np.any(np.diff(known) < 0):
                raise ValueError(f"LOS probability for {env} must not decrease with elevation")

        f, a = self.zenith_frequencies, self.zenith_attenuation
        if f.ndim != 1 or f.shape != a.shape or f.size < 2 or np.any(np.diff(f) <= 0):
            raise ValueError("zenith grid must be strictly increasing and match its values")
        if f[0] > 1.0 or f[-1] < 100.0:
            raise ValueError("zenith grid must cover 1-100 GHz")
        if np.any(a <= 0):
            raise ValueError("zenith attenuation must be strictly positive")
        window = (f > 55.0) & (f < 65.0)
        floor = max(self._zenith(50.0), self._zenith(70.0)) + 10.0
        if not np.any(window) or a[window].max() < floor:
            raise ValueError("zenith grid lacks the oxygen absorption peak between 55 and 65 GHz")
        return self

    # -- lookups -------------------------------------------------------------

    def _zenith(self, fc_ghz: ArrayLike) -> np.ndarray:
        return np.exp(np.interp(fc_ghz, self.zenith_frequencies, np.log(self.zenith_attenuation)))

    def zenith(self, fc_ghz: ArrayLike) -> np.ndarray | float:
        """Zenith attenuation in dB, interpolated linearly in log(dB) over frequency."""
        fc = np.asarray(fc_ghz, dtype=float)
        lo, hi = self.zenith_frequencies[0], self.zenith_frequencies[-1]
        if np.any((fc < lo) | (fc > hi)):
            raise FrequencyOutOfTableError(
                f"carrier frequency outside zenith table range [{lo:g}, {hi:g}] GHz"
            )
        value = self._zenith(fc)
        return float(value) if value.ndim == 0 else value

    @staticmethod
    def _pick(row: np.ndarray | None, index: np.ndarray, what: str) -> np.ndarray:
        if row is None:
            raise MissingTableEntryError(f"no {what} table row")
        values = row[index]
        if np.any(np.isnan(values)):
            missing = sorted({int(b) for b in (index[np.isnan(values)] + 1) * 10})
            raise MissingTableEntryError(f"{what} has no entry for elevation bucket(s) {missing}")
        return values

    def sigma(
        self, env: Environment, band: Band, los: ArrayLike, elevation_deg: ArrayLike
    ) -> np.ndarray:
        idx = np.atleast_1d(_bucket_index(elevation_deg))
        los = np.broadcast_to(np.asarray(los, dtype=bool), idx.shape)
        out = np.zeros(idx.shape)
        for flag in (True, False):
            mask = los == flag
            if np.any(mask):
                label = f"shadow sigma ({env}, {band}, {'LOS' if flag else 'NLOS'})"
                out[mask] = self._pick(self.shadow_sigma.get((env, band, flag)), idx[mask], label)
        return out

    def clutter(self, env: Environment, band: Band, elevation_deg: ArrayLike) -> np.ndarray:
        idx = np.atleast_1d(_bucket_index(elevation_deg))
        return self._pick(self.clutter_loss.get((env, band)), idx, f"clutter loss ({env}, {band})")

    def p_los(self, env: Environment, elevation_deg: ArrayLike) -> np.ndarray:
        idx = np.atleast_1d(_bucket_index(elevation_deg))
        return self._pick(self.los_probability.get(env), idx, f"LOS probability ({env})")

    def scintillation(self, elevation_deg: ArrayLike) -> np.ndarray:
        idx = np.atleast_1d(_bucket_index(elevation_deg))
        return self._pick(self.tropospheric_scintillation, idx, "tropospheric scintillation")


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def packaged_table_dir() -> Path:
    return Path(str(files("hap_link") / "data"))


def table_dir_override() -> Path | None:
    load_dotenv()
    value = os.environ.get(TABLE_DIR_ENV)
    if not value:
        return None
    directory = Path(value).expanduser()
    if not directory.is_dir():
        raise TableFileError(f"{TABLE_DIR_ENV}={value} is not a directory")
    return directory


def _read(path: Path, name: str) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise TableFileError(f"cannot read {name} table {path}: {exc}") from exc
    missing = [c for c in TABLE_COLUMNS[name] if c not in frame.columns]
    if missing:
        raise TableFileError(f"{name} table {path} lacks column(s) {missing}")
    if "elev_bucket" in frame.columns and not frame["elev_bucket"].isin(BUCKETS).all():
        raise TableFileError(f"{name} table {path}: elev_bucket must be one of 10, 20, ..., 90")
    return frame


def _bucket_rows(frame: pd.DataFrame, keys: list[str], value: str) -> dict:
    rows = {}
    for key, group in (frame.groupby(keys) if keys else [((), frame)]):
        row = np.full(BUCKETS.size, np.nan)
        row[group["elev_bucket"].to_numpy(dtype=int) // 10 - 1] = group[value].to_numpy(float)
        rows[key] = row
    return rows


def _enum(cls, value, name: str):
    try:
        return cls(str(value))
    except ValueError as exc:
        raise TableFileError(f"{name} table: unknown {cls.__name__.lower()} {value!r}") from exc


def _source(name: str, explicit: Path | None, override_dir: Path | None) -> Path | None:
    if explicit is not None:
        if not explicit.is_file():
            raise TableFileError(f"{name} table {explicit} does not exist")
        return explicit
    if override_dir is not None and (override_dir / f"{name}.csv").is_file():
        return override_dir / f"{name}.csv"
    packaged = packaged_table_dir() / f"{name}.csv"
    return packaged if packaged.is_file() else None


def load_tables(paths: TablePaths | None = None) -> LossTables:
    paths = paths or TablePaths()
    override_dir = table_dir_override()

    def frame(name: str) -> pd.DataFrame:
        source = _source(name, getattr(paths, name), override_dir)
        if source is None:
            raise TableFileError(f"no {name} table found")
        return _read(source, name)

    shadow = frame("shadow_fading")
    shadow_rows = _bucket_rows(shadow, ["env", "band", "los"], "sigma_db")
    shadow_sigma = {}
    for (env, band, flag), row in shadow_rows.items():
        key = (_enum(Environment, env, "shadow_fading"), _enum(Band, band, "shadow_fading"))
        shadow_sigma[(*key, bool(flag))] = row

    clutter = frame("clutter_loss")
    clutter_loss = {
        (_enum(Environment, env, "clutter_loss"), _enum(Band, band, "clutter_loss")): row
        for (env, band), row in _bucket_rows(clutter, ["env", "band"], "clutter_db").items()
    }

    los = frame("los_probability")
    los_probability = {
        _enum(Environment, env[0] if isinstance(env, tuple) else env, "los_probability"): row
        for env, row in _bucket_rows(los, ["env"], "p_los").items()
    }

    tropo = frame("tropospheric_scintillation")
    tropospheric = _bucket_rows(tropo, [], "scint_db")[()]

    zenith = frame("zenith_attenuation").sort_values("frequency_ghz")
    frequencies = zenith["frequency_ghz"].to_numpy(float)
    attenuation = zenith["zenith_db"].to_numpy(float)

    try:
        return LossTables(
            shadow_sigma=shadow_sigma,
            clutter_loss=clutter_loss,
            zenith_frequencies=frequencies,
            zenith_attenuation=attenuation,
            tropospheric_scintillation=tropospheric,
            los_probability=los_probability,
        )
    except ValueError as exc:
        raise TableFileError(f"loss tables rejected: {exc}") from exc


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def tables_to_frames(tables: LossTables) -> dict[str, pd.DataFrame]:
    def expand(rows: dict, keys: list[str], value: str) -> pd.DataFrame:
        records = []
        for key, row in rows.items():
            key = key if isinstance(key, tuple) else (key,)
            labels = [k.value if hasattr(k, "value") else int(k) for k in key]
            for bucket, v in zip(BUCKETS, row, strict=True):
                if not np.isnan(v):
                    records.append((*labels, int(bucket), float(v)))
        return pd.DataFrame.from_records(records, columns=[*keys, "elev_bucket", value])

    return {
        "shadow_fading": expand(tables.shadow_sigma, ["env", "band", "los"], "sigma_db"),
        "clutter_loss": expand(tables.clutter_loss, ["env", "band"], "clutter_db"),
        "zenith_attenuation": pd.DataFrame(
            {"frequency_ghz": tables.zenith_frequencies, "zenith_db": tables.zenith_attenuation}
        ),
        "tropospheric_scintillation": expand(
            {(): tables.tropospheric_scintillation}, [], "scint_db"
        ),
        "los_probability": expand(tables.los_probability, ["env"], "p_los"),
    }


def write_tables(tables: LossTables, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, frame in tables_to_frames(tables).items():
        path = out_dir / f"{name}.csv"
        frame.to_csv(path, index=False)
        written.append(path)
    return written
