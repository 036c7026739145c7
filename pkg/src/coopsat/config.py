"""Scenario configuration: schema, validation, YAML loading, profiles.

A scenario file is a YAML mapping; every field has a default, so a
minimal config is a handful of lines.  Validation collects every
problem with its field path before failing.  The built-in ``desk`` and
``full`` profiles cover a quick laptop run (20 users, 10 epochs) and
the full-size experiment (80 users, 24 epochs).
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

import yaml

from .channel import ArrayConfig, AttenuationConfig, RfConfig, SmallScaleConfig
from .geometry import ConstellationConfig, GroundUser
from .scheduling import SchemeMode

CITY_DATASET = "cities_cn"


class ConfigError(ValueError):
    """Validation failure carrying one message per offending field."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(
            f"  {e}" for e in self.errors))


@dataclass(frozen=True)
class EpochGrid:
    start_s: float = 0.0
    step_s: float = 1200.0
    count: int = 10

    def times(self) -> list[float]:
        return [self.start_s + k * self.step_s for k in range(self.count)]


@dataclass(frozen=True)
class ScenarioConfig:
    constellation: ConstellationConfig = field(default_factory=ConstellationConfig)
    gus: tuple[GroundUser, ...] = ()
    rf: RfConfig = field(default_factory=RfConfig)
    array: ArrayConfig = field(default_factory=ArrayConfig)
    small_scale: SmallScaleConfig = field(default_factory=SmallScaleConfig)
    attenuation: AttenuationConfig = field(default_factory=AttenuationConfig)
    schemes: tuple[SchemeMode, ...] = (SchemeMode.AU, SchemeMode.SHU, SchemeMode.JHU)
    epochs: EpochGrid = field(default_factory=EpochGrid)
    seed: int = 1
    min_elevation_deg: float = 10.0
    density_threshold_km: float = 400.0
    codewords: int = 4
    beta: float | None = None  # None selects the large-system optimum
    tracked_labels: tuple[str, ...] = ()

    @classmethod
    def desk_scale(cls, seed: int = 1) -> "ScenarioConfig":
        """Laptop-sized profile: the first 20 bundled cities (a contended
        eastern cluster), 10 epochs."""
        return cls(gus=bundled_cities(20), seed=seed,
                   epochs=EpochGrid(count=10),
                   tracked_labels=("Beijing", "Shanghai", "Wuhan"))

    @classmethod
    def full_scale(cls, seed: int = 1) -> "ScenarioConfig":
        """Full-size profile: all 80 bundled cities, 24 epochs."""
        return cls(gus=bundled_cities(), seed=seed,
                   epochs=EpochGrid(count=24),
                   tracked_labels=("Beijing", "Shanghai", "Wuhan", "Kashi", "Nansha"))


def bundled_cities(count: int | None = None) -> tuple[GroundUser, ...]:
    """Ground users from the bundled city list (optionally the first
    ``count`` entries)."""
    text = resources.files("coopsat.data").joinpath(f"{CITY_DATASET}.csv").read_text()
    rows = list(csv.DictReader(text.splitlines()))
    if count is not None:
        if not 1 <= count <= len(rows):
            raise ValueError(f"count must be in [1, {len(rows)}]")
        rows = rows[:count]
    return tuple(GroundUser(user_id=i, latitude_deg=float(r["latitude_deg"]),
                            longitude_deg=float(r["longitude_deg"]),
                            label=r["label"])
                 for i, r in enumerate(rows))


def _build_section(cls, data: dict, path: str, errors: list[str]):
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            errors.append(f"{path}.{key}: unknown field")
    kwargs = {k: v for k, v in data.items() if k in known}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        errors.append(f"{path}: {exc}")
        return cls()


def _parse_gus(data, errors: list[str]) -> tuple[GroundUser, ...]:
    if isinstance(data, dict) and "inline" not in data:
        dataset = data.get("dataset", CITY_DATASET)
        if dataset != CITY_DATASET:
            errors.append(f"gus.dataset: unknown dataset {dataset!r}")
            return ()
        count = data.get("count")
        try:
            return bundled_cities(count)
        except (TypeError, ValueError) as exc:
            errors.append(f"gus.count: {exc}")
            return ()
    entries = data["inline"] if isinstance(data, dict) else data
    if not isinstance(entries, list):
        errors.append("gus: expected a list or a dataset reference")
        return ()
    out = []
    for i, row in enumerate(entries):
        try:
            out.append(GroundUser(
                user_id=i,
                latitude_deg=float(row["lat"]),
                longitude_deg=float(row["lon"]),
                altitude_km=float(row.get("alt_km", 0.0)),
                label=str(row.get("label", f"gu{i}")),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            errors.append(f"gus[{i}]: {exc}")
    return tuple(out)


def from_dict(data: dict) -> ScenarioConfig:
    """Build and validate a scenario from a plain mapping."""
    if not isinstance(data, dict):
        raise ConfigError(["top level: expected a mapping"])
    errors: list[str] = []
    known_top = {"constellation", "gus", "rf", "array", "channel", "schemes",
                 "epochs", "seed", "min_elevation_deg", "density_threshold_km",
                 "codewords", "beta", "tracked_labels"}
    for key in data:
        if key not in known_top:
            errors.append(f"{key}: unknown field")

    constellation = _build_section(ConstellationConfig,
                                   data.get("constellation", {}),
                                   "constellation", errors)
    rf = _build_section(RfConfig, data.get("rf", {}), "rf", errors)
    array = _build_section(ArrayConfig, data.get("array", {}), "array", errors)

    channel_data = dict(data.get("channel", {}))
    atten_keys = {f.name for f in fields(AttenuationConfig)}
    atten_data = {k: channel_data.pop(k) for k in list(channel_data)
                  if k in atten_keys}
    small_scale = _build_section(SmallScaleConfig, channel_data, "channel", errors)
    attenuation = _build_section(AttenuationConfig, atten_data, "channel", errors)

    gus = _parse_gus(data.get("gus", {"dataset": CITY_DATASET, "count": 20}), errors)
    if not gus and not any(e.startswith("gus") for e in errors):
        errors.append("gus: at least one ground user is required")

    schemes: list[SchemeMode] = []
    raw_schemes = data.get("schemes", ["au", "shu", "jhu"])
    if not isinstance(raw_schemes, (list, tuple)) or not raw_schemes:
        errors.append("schemes: expected a non-empty list")
    else:
        for s in raw_schemes:
            try:
                schemes.append(SchemeMode.parse(s))
            except ValueError as exc:
                errors.append(f"schemes: {exc}")

    epochs = _build_section(EpochGrid, data.get("epochs", {}), "epochs", errors)
    if epochs.count < 1:
        errors.append("epochs.count: must be >= 1")
    if epochs.step_s <= 0.0:
        errors.append("epochs.step_s: must be > 0")
    if epochs.start_s < 0.0:
        errors.append("epochs.start_s: must be >= 0")

    def _number(key, default, low=None, high=None, low_open=False):
        value = data.get(key, default)
        try:
            value = float(value)
        except (TypeError, ValueError):
            errors.append(f"{key}: must be a number")
            return default
        if low is not None and (value <= low if low_open else value < low):
            errors.append(f"{key}: must be {'>' if low_open else '>='} {low}")
        if high is not None and value >= high:
            errors.append(f"{key}: must be < {high}")
        return value

    seed = data.get("seed", 1)
    if not isinstance(seed, int) or seed < 0:
        errors.append("seed: must be a non-negative integer")
        seed = 1
    min_el = _number("min_elevation_deg", 10.0, low=0.0, high=90.0)
    threshold = _number("density_threshold_km", 400.0, low=0.0, low_open=True)
    codewords = data.get("codewords", 4)
    if not isinstance(codewords, int) or codewords < 1:
        errors.append("codewords: must be a positive integer")
    elif codewords > array.n_elements:
        errors.append(f"codewords: must be <= array elements ({array.n_elements})")
    beta = data.get("beta")
    if beta is not None:
        beta = _number("beta", None, low=0.0)
    tracked = tuple(str(x) for x in data.get("tracked_labels", ()))

    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(
        constellation=constellation, gus=gus, rf=rf, array=array,
        small_scale=small_scale, attenuation=attenuation,
        schemes=tuple(dict.fromkeys(schemes)), epochs=epochs, seed=seed,
        min_elevation_deg=float(min_el), density_threshold_km=float(threshold),
        codewords=codewords, beta=None if beta is None else float(beta),
        tracked_labels=tracked,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    """Load and validate a YAML scenario file."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError([f"{path}: YAML parse error: {exc}"])
    if raw is None:
        raw = {}
    return from_dict(raw)


def to_dict(config: ScenarioConfig) -> dict:
    """Plain-data form of a scenario (canonical for hashing)."""
    return {
        "constellation": asdict(config.constellation),
        "gus": [{"label": g.label, "lat": g.latitude_deg, "lon": g.longitude_deg,
                 "alt_km": g.altitude_km} for g in config.gus],
        "rf": asdict(config.rf),
        "array": asdict(config.array),
        "channel": {**asdict(config.small_scale), **asdict(config.attenuation)},
        "schemes": [s.value for s in config.schemes],
        "epochs": asdict(config.epochs),
        "seed": config.seed,
        "min_elevation_deg": config.min_elevation_deg,
        "density_threshold_km": config.density_threshold_km,
        "codewords": config.codewords,
        "beta": config.beta,
        "tracked_labels": list(config.tracked_labels),
    }


def config_digest(config: ScenarioConfig) -> str:
    """Stable hash of the full scenario, for provenance stamps."""
    canonical = json.dumps(to_dict(config), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()
