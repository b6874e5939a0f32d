"""Taxi-trip CSV ingestion, source/destination box filtering, the interchange
CSV format, and a labeled synthetic-data generator."""

from __future__ import annotations

import configparser
import csv
import json
import logging
import math
import re
from dataclasses import asdict, dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from .core import DEFAULT_SEED, Dataset, DetectionError, make_rng

log = logging.getLogger(__name__)

PathLike = Union[str, Path]


class SchemaError(DetectionError, ValueError):
    pass


class SpecError(DetectionError, ValueError):
    pass


@dataclass(frozen=True)
class ColumnMap:
    """Source column names; the defaults follow the 2016 yellow-taxi schema.

    Columns mapped to ``None`` are not read.
    """

    pickup_lon: Optional[str] = "pickup_longitude"
    pickup_lat: Optional[str] = "pickup_latitude"
    dropoff_lon: Optional[str] = "dropoff_longitude"
    dropoff_lat: Optional[str] = "dropoff_latitude"
    trip_distance: Optional[str] = "trip_distance"
    fare_amount: Optional[str] = "fare_amount"
    passenger_count: Optional[str] = "passenger_count"
    pickup_time: Optional[str] = "tpep_pickup_datetime"
    dropoff_time: Optional[str] = "tpep_dropoff_datetime"

    REQUIRED = ("pickup_lon", "pickup_lat", "dropoff_lon", "dropoff_lat",
                "trip_distance", "fare_amount")


_TIME_FIELDS = ("pickup_time", "dropoff_time")


@dataclass(frozen=True)
class TripRecord:
    pickup_lon: float
    pickup_lat: float
    dropoff_lon: float
    dropoff_lat: float
    trip_distance: float
    fare_amount: float
    passenger_count: Optional[int] = None
    pickup_time: Optional[np.datetime64] = None
    dropoff_time: Optional[np.datetime64] = None


@dataclass(frozen=True, eq=False)
class TripTable:
    """Column-wise sequence of trip records.

    ``row`` is the 0-based data-row position in the source file; ``dropped``
    counts rows rejected during parsing.
    """

    columns: dict
    row: np.ndarray
    dropped: int = 0

    def __len__(self) -> int:
        return len(self.row)

    def __getitem__(self, i: int) -> TripRecord:
        vals = {}
        for name, col in self.columns.items():
            v = col[i]
            if name == "passenger_count":
                v = int(v)
            elif name not in _TIME_FIELDS:
                v = float(v)
            vals[name] = v
        return TripRecord(**vals)

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def take(self, mask) -> "TripTable":
        return TripTable({k: v[mask] for k, v in self.columns.items()}, self.row[mask], self.dropped)


def load_csv(path: PathLike, columns: ColumnMap = ColumnMap(),
             chunksize: int = 1_000_000) -> TripTable:
    """Read a taxi-trip CSV, dropping rows whose mapped fields do not parse.

    Raises ``FileNotFoundError`` for a missing file and :class:`SchemaError`
    when a mapped column is absent from the header.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    mapping = {f.name: getattr(columns, f.name) for f in fields(columns)
               if getattr(columns, f.name) is not None}
    for req in ColumnMap.REQUIRED:
        if req not in mapping:
            raise SchemaError(f"required field {req!r} is not mapped")
    header = pd.read_csv(path, nrows=0, skipinitialspace=True).columns
    header = [h.strip() for h in header]
    missing = [src for src in mapping.values() if src not in header]
    if missing:
        raise SchemaError(f"columns missing from {path.name}: {', '.join(missing)}")

    parts: dict[str, list] = {name: [] for name in mapping}
    rows, dropped, offset = [], 0, 0
    reader = pd.read_csv(path, usecols=list(mapping.values()), dtype=str,
                         chunksize=chunksize, skipinitialspace=True)
    for chunk in reader:
        chunk.columns = [c.strip() for c in chunk.columns]
        good = np.ones(len(chunk), dtype=bool)
        parsed = {}
        for name, src in mapping.items():
            if name in _TIME_FIELDS:
                col = pd.to_datetime(chunk[src], errors="coerce").to_numpy()
                good &= ~pd.isna(col)
            else:
                col = pd.to_numeric(chunk[src], errors="coerce").to_numpy(dtype=np.float64)
                good &= np.isfinite(col)
            parsed[name] = col
        for name, col in parsed.items():
            col = col[good]
            if name == "passenger_count":
                col = col.astype(np.int64)
            parts[name].append(col)
        rows.append(offset + np.flatnonzero(good))
        dropped += int((~good).sum())
        offset += len(chunk)

    cols = {name: (np.concatenate(p) if p else np.empty(0)) for name, p in parts.items()}
    row = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    if dropped:
        log.info("dropped %d malformed rows of %d from %s", dropped, offset, path)
    return TripTable(cols, row.astype(np.int64), dropped)


@dataclass(frozen=True)
class GeoBox:
    min_lon: float
    max_lon: float
    min_lat: float
    max_lat: float

    def __post_init__(self):
        if not (self.min_lon < self.max_lon and self.min_lat < self.max_lat):
            raise ValueError(f"degenerate box {self}")

    def contains(self, lon, lat) -> np.ndarray:
        lon, lat = np.asarray(lon), np.asarray(lat)
        return ((lon >= self.min_lon) & (lon <= self.max_lon)
                & (lat >= self.min_lat) & (lat <= self.max_lat))


def load_boxes(path: Optional[PathLike] = None) -> tuple[GeoBox, GeoBox]:
    """Source and destination boxes from JSON; defaults to the shipped SOHO/JFK pair."""
    if path is None:
        text = resources.files("msdkmeans.data").joinpath("boxes.json").read_text()
    else:
        text = Path(path).read_text()
    raw = json.loads(text)
    return GeoBox(**raw["source"]["box"]), GeoBox(**raw["dest"]["box"])


def select_pair(records: TripTable, source: GeoBox, dest: GeoBox) -> TripTable:
    c = records.columns
    keep = (source.contains(c["pickup_lon"], c["pickup_lat"])
            & dest.contains(c["dropoff_lon"], c["dropoff_lat"]))
    return records.take(keep)


def filter_pair(records: TripTable, source: GeoBox, dest: GeoBox) -> Dataset:
    """Fares of trips picked up in ``source`` and dropped off in ``dest``.

    The result is univariate (fare); source-row numbers go to ``provenance``
    and trip distance rides along in ``aux``.
    """
    sel = select_pair(records, source, dest)
    return Dataset(
        np.asarray(sel.columns["fare_amount"], dtype=np.float64).reshape(-1, 1),
        np.arange(len(sel)),
        provenance=sel.row,
        aux={"trip_distance": np.asarray(sel.columns["trip_distance"], dtype=np.float64)},
    )


# -- interchange CSV ---------------------------------------------------------

def write_dataset(data: Dataset, path: PathLike) -> None:
    """Write ``index,feature_0[,feature_1,...][,label]`` with round-trip float text."""
    header = ["index"] + [f"feature_{j}" for j in range(data.dimension)]
    if data.labels is not None:
        header.append("label")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for pos in range(data.n):
            row = [str(int(data.index[pos]))] + [repr(float(v)) for v in data.points[pos]]
            if data.labels is not None:
                row.append("1" if data.labels[pos] else "0")
            w.writerow(row)


def read_dataset(path: PathLike) -> Dataset:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    df = pd.read_csv(path, float_precision="round_trip")
    cols = list(df.columns)
    feats = [c for c in cols if c.startswith("feature_")]
    expected = ["index"] + [f"feature_{j}" for j in range(len(feats))]
    if cols[: len(expected)] != expected or not feats or cols[len(expected):] not in ([], ["label"]):
        raise SchemaError(f"{path.name}: header must be index,feature_0[,...][,label], got {cols}")
    labels = None
    if "label" in cols:
        lab = df["label"].to_numpy()
        if not np.isin(lab, [0, 1]).all():
            raise SchemaError(f"{path.name}: labels must be 0 or 1")
        labels = lab.astype(bool)
    return Dataset(df[feats].to_numpy(dtype=np.float64), df["index"].to_numpy(dtype=np.int64),
                   labels)


# -- synthetic data ----------------------------------------------------------

@dataclass(frozen=True)
class SynthSpec:
    """Labeled synthetic data: Gaussian normal modes plus injected outliers.

    Global outliers sit ``global_offset`` (plus a half-normal jitter of one
    sigma) above the upper edge of the mode layout, in every dimension. Local
    outliers sit ``local_offset`` (plus uniform jitter of +/-0.1 sigma) above
    their mode center. Modes are spaced ``mode_spacing`` apart along the
    diagonal, centred on ``normal_mean``.
    """

    n_normal: int = 10_000
    normal_mean: tuple = (50.0,)
    normal_sigma: tuple = (5.0,)
    n_global: int = 0
    global_offset: float = 40.0
    n_local: int = 0
    local_offset: float = 12.0
    n_clusters: int = 1
    mode_spacing: float = 0.0
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        mean = tuple(float(v) for v in np.atleast_1d(self.normal_mean))
        sigma = tuple(float(v) for v in np.atleast_1d(self.normal_sigma))
        object.__setattr__(self, "normal_mean", mean)
        object.__setattr__(self, "normal_sigma", sigma)
        if len(mean) != len(sigma) or not mean:
            raise SpecError("normal_mean and normal_sigma must have the same nonzero length")
        if not all(math.isfinite(v) for v in mean + sigma) or min(sigma) < 0:
            raise SpecError("normal_mean must be finite and normal_sigma nonnegative")
        if self.n_normal < 1 or self.n_global < 0 or self.n_local < 0:
            raise SpecError("n_normal must be >= 1 and outlier counts >= 0")
        if self.n_clusters < 1 or self.n_clusters > self.n_normal:
            raise SpecError("n_clusters must be between 1 and n_normal")
        if not (self.global_offset > 0 and self.local_offset > 0) or self.mode_spacing < 0:
            raise SpecError("offsets must be positive and mode_spacing nonnegative")
        if self.global_offset < 4 * max(sigma):
            raise SpecError("global_offset must be at least 4 sigma")
        if not 0 <= int(self.seed) < 2**64:
            raise SpecError("seed must be a 64-bit unsigned integer")

    @property
    def dimension(self) -> int:
        return len(self.normal_mean)

    @property
    def total(self) -> int:
        return self.n_normal + self.n_global + self.n_local

    def centers(self) -> np.ndarray:
        steps = np.arange(self.n_clusters) - (self.n_clusters - 1) / 2
        return np.asarray(self.normal_mean)[None, :] + steps[:, None] * self.mode_spacing


def generate(spec: SynthSpec) -> Dataset:
    """Deterministic labeled sample; rows are shuffled so classes interleave."""
    rng = make_rng(spec.seed)
    d = spec.dimension
    sigma = np.asarray(spec.normal_sigma)
    centers = spec.centers()

    sizes = np.full(spec.n_clusters, spec.n_normal // spec.n_clusters)
    sizes[: spec.n_normal % spec.n_clusters] += 1
    normals = np.concatenate([
        c + sigma * rng.standard_normal((m, d)) for c, m in zip(centers, sizes)
    ])

    top = centers[-1]
    globals_ = top + spec.global_offset + np.abs(rng.standard_normal((spec.n_global, d))) * sigma

    modes = np.arange(spec.n_local) % spec.n_clusters
    jitter = rng.uniform(-0.1, 0.1, size=(spec.n_local, d)) * sigma
    locals_ = centers[modes] + spec.local_offset + jitter

    points = np.concatenate([normals, globals_, locals_])
    labels = np.concatenate([np.zeros(spec.n_normal, bool), np.ones(spec.n_global + spec.n_local, bool)])
    order = rng.permutation(spec.total)
    return Dataset.from_values(points[order], labels=labels[order])


def _parse_value(name: str, raw: str):
    raw = raw.strip()
    if name in ("normal_mean", "normal_sigma"):
        return tuple(float(v) for v in raw.split(",") if v.strip())
    if name.startswith("n_") or name == "seed":
        return int(raw)
    return float(raw)


def parse_synth_spec(text: str) -> SynthSpec:
    """Parse ``key = value`` lines whose keys are :class:`SynthSpec` field names."""
    cp = configparser.ConfigParser()
    if not re.search(r"^\s*\[", text, re.MULTILINE):
        text = "[synth]\n" + text
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise SpecError(str(e)) from e
    section = cp[cp.sections()[0]] if cp.sections() else {}
    known = {f.name for f in fields(SynthSpec)}
    kwargs = {}
    for key, raw in section.items():
        if key not in known:
            raise SpecError(f"unknown synth key {key!r}")
        try:
            kwargs[key] = _parse_value(key, raw)
        except ValueError as e:
            raise SpecError(f"bad value for {key}: {raw!r}") from e
    return SynthSpec(**kwargs)


def load_synth_spec(path: PathLike) -> SynthSpec:
    return parse_synth_spec(Path(path).read_text())


def shipped_spec(name: str = "default") -> SynthSpec:
    """One of the specs packaged under ``msdkmeans/data`` (``default`` or ``recovery``)."""
    text = resources.files("msdkmeans.data").joinpath(f"synth_{name}.cfg").read_text()
    return parse_synth_spec(text)


def format_synth_spec(spec: SynthSpec) -> str:
    lines = []
    for key, value in asdict(spec).items():
        if isinstance(value, tuple):
            value = ", ".join(repr(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
