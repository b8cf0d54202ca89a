"""Configurable sensor-reading generator.

Sensors live on workplaces and emit one measurement kind each on a fixed
grid: instant k of a sensor is ``phase_ms + floor(1000 * k / rate_hz)``.
Values follow a sine base signal plus Gaussian noise. Reading order (and the
noise draw order) is (date, sensor_id), which makes output independent of how
a time range is split into generation windows.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, replace
from importlib import resources

from .schema import SensorKind, SensorReading

MAX_RATE_HZ = 10_000.0

KIND_FIELDS = {
    SensorKind.TEMPERATURE: ("temperature_value", "temperature_unit"),
    SensorKind.NOISE: ("noise_value", "noise_unit"),
    SensorKind.VIBRATION: ("vibration_value", "vibration_unit"),
}

_SENSOR_FIELDS = {
    "sensor_id",
    "workplace_id",
    "kind",
    "rate_hz",
    "base",
    "amplitude",
    "period_s",
    "noise_sigma",
    "phase_ms",
}


class SensorConfigError(ValueError):
    """Carries the complete list of violations; nothing was applied."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class SensorConfig:
    sensor_id: int
    workplace_id: int
    kind: SensorKind
    rate_hz: float
    base: float
    amplitude: float
    period_s: float
    noise_sigma: float
    phase_ms: int

    def to_doc(self) -> dict:
        return {
            "sensor_id": self.sensor_id,
            "workplace_id": self.workplace_id,
            "kind": self.kind.value,
            "rate_hz": self.rate_hz,
            "base": self.base,
            "amplitude": self.amplitude,
            "period_s": self.period_s,
            "noise_sigma": self.noise_sigma,
            "phase_ms": self.phase_ms,
        }


@dataclass(frozen=True)
class SensorConfigSet:
    sensors: tuple[SensorConfig, ...]
    revision: int = 1

    def to_doc(self) -> dict:
        return {"sensors": [s.to_doc() for s in self.sensors], "revision": self.revision}


def _number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def parse_config(text: str, workplace_ids) -> SensorConfigSet:
    """Parse and fully validate a sensor configuration document.

    Either returns a validated set or raises SensorConfigError carrying every
    violation found; a bad document never applies partially.
    """
    errors: list[str] = []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SensorConfigError([f"malformed JSON: {exc}"]) from None

    if not isinstance(doc, dict):
        raise SensorConfigError(["document must be a JSON object"])
    # "revision" is tolerated so a GET response can be edited and PUT back.
    unknown = set(doc) - {"sensors", "revision"}
    if unknown:
        errors.append(f"unknown fields: {', '.join(sorted(unknown))}")
    sensors_doc = doc.get("sensors")
    if not isinstance(sensors_doc, list):
        errors.append("field 'sensors' must be a list")
        raise SensorConfigError(errors)

    workplace_ids = set(workplace_ids)
    sensors: list[SensorConfig] = []
    seen_ids: set[int] = set()
    for i, entry in enumerate(sensors_doc):
        where = f"sensors[{i}]"
        if not isinstance(entry, dict):
            errors.append(f"{where}: must be an object")
            continue
        unknown = set(entry) - _SENSOR_FIELDS
        if unknown:
            errors.append(f"{where}: unknown fields: {', '.join(sorted(unknown))}")
        missing = _SENSOR_FIELDS - set(entry)
        if missing:
            errors.append(f"{where}: missing fields: {', '.join(sorted(missing))}")
            continue
        ok = True

        def bad(msg):
            nonlocal ok
            errors.append(f"{where}: {msg}")
            ok = False

        sensor_id = entry["sensor_id"]
        if not isinstance(sensor_id, int) or sensor_id < 1:
            bad(f"sensor_id must be a positive integer, got {sensor_id!r}")
        elif sensor_id in seen_ids:
            bad(f"duplicate sensor_id {sensor_id}")
        else:
            seen_ids.add(sensor_id)
        workplace_id = entry["workplace_id"]
        if not isinstance(workplace_id, int) or workplace_id not in workplace_ids:
            bad(f"unknown workplace {workplace_id!r}")
        kind_name = entry["kind"]
        try:
            kind = SensorKind(kind_name)
        except ValueError:
            bad(f"kind must be one of temperature/noise/vibration, got {kind_name!r}")
        rate = entry["rate_hz"]
        if not _number(rate) or not 0 < rate <= MAX_RATE_HZ:
            bad(f"rate out of range (0, {MAX_RATE_HZ:g}]: {rate!r}")
        if not _number(entry["base"]):
            bad("base must be a number")
        if not _number(entry["amplitude"]) or entry["amplitude"] < 0:
            bad("amplitude must be a non-negative number")
        if not _number(entry["period_s"]) or entry["period_s"] <= 0:
            bad("period_s must be a positive number")
        if not _number(entry["noise_sigma"]) or entry["noise_sigma"] < 0:
            bad("noise_sigma must be a non-negative number")
        if not isinstance(entry["phase_ms"], int) or entry["phase_ms"] < 0:
            bad("phase_ms must be a non-negative integer")
        if ok:
            sensors.append(
                SensorConfig(
                    sensor_id=sensor_id,
                    workplace_id=workplace_id,
                    kind=kind,
                    rate_hz=float(rate),
                    base=float(entry["base"]),
                    amplitude=float(entry["amplitude"]),
                    period_s=float(entry["period_s"]),
                    noise_sigma=float(entry["noise_sigma"]),
                    phase_ms=entry["phase_ms"],
                )
            )

    if errors:
        raise SensorConfigError(errors)
    return SensorConfigSet(sensors=tuple(sensors), revision=1)


def default_config_text() -> str:
    return resources.files("plantpulse.data").joinpath("default_sensors.json").read_text(
        encoding="utf-8"
    )


def apply_config(current: SensorConfigSet, next_set: SensorConfigSet) -> SensorConfigSet:
    """Replace the whole set atomically; the revision counts applied changes."""
    return replace(next_set, revision=current.revision + 1)


def value_at(config: SensorConfig, t: int, rng: random.Random) -> float:
    """Signal value at virtual time t: sine base plus Gaussian noise."""
    angle = 2.0 * math.pi * (t - config.phase_ms) / (1000.0 * config.period_s)
    return config.base + config.amplitude * math.sin(angle) + rng.gauss(0.0, config.noise_sigma)


def _instant(config: SensorConfig, k: int) -> int:
    return config.phase_ms + math.floor(1000.0 * k / config.rate_hz)


def _instants_between(config: SensorConfig, t0: int, t1: int):
    """Emission instants of one sensor in [t0, t1), as (instant, k) pairs."""
    if t1 <= config.phase_ms:
        return
    k = 0
    if t0 > config.phase_ms:
        k = max(0, int((t0 - config.phase_ms) * config.rate_hz / 1000.0) - 2)
        while _instant(config, k) < t0:
            k += 1
    t = _instant(config, k)
    while t < t1:
        if t >= t0:
            yield t, k
        k += 1
        t = _instant(config, k)


def generate_readings(
    config_set: SensorConfigSet, t0: int, t1: int, rng: random.Random, first_id: int
) -> list[SensorReading]:
    """All readings of the set in [t0, t1), ordered by (date, sensor_id).

    Noise is drawn in that exact order from ``rng``, so concatenating two
    adjacent windows reproduces the single-window output bit for bit.
    """
    if t0 >= t1:
        raise ValueError(f"empty window [{t0}, {t1})")
    pending: list[tuple[int, int, SensorConfig]] = []
    for config in config_set.sensors:
        for t, _ in _instants_between(config, t0, t1):
            pending.append((t, config.sensor_id, config))
    pending.sort(key=lambda item: (item[0], item[1]))

    readings = []
    row_id = first_id
    for t, _, config in pending:
        value_field, unit_field = KIND_FIELDS[config.kind]
        readings.append(
            SensorReading(
                id=row_id,
                workplace_id=config.workplace_id,
                sensor_id=config.sensor_id,
                date=t,
                **{value_field: value_at(config, t, rng), unit_field: config.kind.unit},
            )
        )
        row_id += 1
    return readings


class SensorStream:
    """Stateful generator: owns the rng, the row-id cursor, and the config.

    A replacement set is staged and swapped in at the next window boundary,
    so already-emitted readings are never affected.
    """

    def __init__(self, config_set: SensorConfigSet, seed: int):
        self.config_set = config_set
        self.rng = random.Random(seed)
        self.next_id = 1
        self._pending: SensorConfigSet | None = None

    @property
    def revision(self) -> int:
        return (self._pending or self.config_set).revision

    def stage_config(self, next_set: SensorConfigSet) -> int:
        """Schedule a validated set for the next window; returns its revision."""
        staged = apply_config(self._pending or self.config_set, next_set)
        self._pending = staged
        return staged.revision

    def current_doc(self) -> dict:
        return (self._pending or self.config_set).to_doc()

    def readings_between(self, t0: int, t1: int) -> list[SensorReading]:
        if self._pending is not None:
            self.config_set = self._pending
            self._pending = None
        readings = generate_readings(self.config_set, t0, t1, self.rng, self.next_id)
        self.next_id += len(readings)
        return readings
