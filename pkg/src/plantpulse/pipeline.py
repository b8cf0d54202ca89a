"""The single ingestion pipeline: factory events and sensor readings flow
into the store as atomic batches on a shared virtual clock.

One pipeline per process. In realtime mode a ticker thread advances virtual
time from wall time (scaled); in stepped mode the caller advances explicitly,
which is what makes headless runs reproducible. Control operations (start,
stop, config staging) serialize with batch generation on one lock.
"""

from __future__ import annotations

import logging
import threading
import time

from . import schema
from .factory import FactorySim, MasterData
from .sensors import SensorConfigSet, SensorStream, parse_config, default_config_text
from .store import CapacityError, ColumnStore, DEFAULT_MAX_ROWS

log = logging.getLogger(__name__)

TICK_INTERVAL_S = 0.1

# keeps the two generator rngs decoupled while still seed-derived
_SENSOR_SEED_SALT = 0xA5A5_5A5A_1234_5678


class Pipeline:
    def __init__(
        self,
        seed: int = 42,
        master: MasterData | None = None,
        arrival_mean_ms: int = 1000,
        sensor_config: SensorConfigSet | None = None,
        clock_mode: str = "realtime",
        scale: float = 1.0,
        max_rows: int = DEFAULT_MAX_ROWS,
        store: ColumnStore | None = None,
    ):
        if clock_mode not in ("realtime", "stepped"):
            raise ValueError(f"unknown clock mode {clock_mode!r}")
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.seed = seed
        self.clock_mode = clock_mode
        self.scale = scale
        self.store = store if store is not None else ColumnStore.with_catalog(
            max_total_rows=max_rows
        )
        self.sim = FactorySim(seed, master, arrival_mean_ms)
        self.workplace_ids = {w.id for w in self.sim.master.workplaces}
        if sensor_config is None:
            sensor_config = parse_config(default_config_text(), self.workplace_ids)
        self.sensors = SensorStream(sensor_config, seed ^ _SENSOR_SEED_SALT)
        self.virtual_now = 0
        self.running = False
        self._lock = threading.RLock()
        self._ticker: threading.Thread | None = None
        self._shutdown = threading.Event()
        self._last_wall: float | None = None
        self._capacity_hit = False
        self.store.apply_batch(self.sim.master_batch())

    # -- control -------------------------------------------------------------

    def start(self) -> bool:
        with self._lock:
            self.running = True
            self.sim.start()
            self._last_wall = time.monotonic()
        return True

    def stop(self) -> bool:
        with self._lock:
            self.running = False
            self.sim.stop()
        return False

    def stage_sensor_config(self, text: str) -> int:
        """Validate and stage a new sensor document; raises SensorConfigError
        with the full violation list and applies nothing on failure."""
        parsed = parse_config(text, self.workplace_ids)
        with self._lock:
            return self.sensors.stage_config(parsed)

    def sensor_config_doc(self) -> dict:
        with self._lock:
            return self.sensors.current_doc()

    # -- advancing -----------------------------------------------------------

    def step(self, virtual_ms: int):
        """Advance the stepped clock explicitly (no-op while stopped)."""
        if virtual_ms <= 0:
            raise ValueError("step must be positive")
        with self._lock:
            if not self.running:
                return
            self._advance(self.virtual_now + virtual_ms)

    def tick(self):
        """Advance by scaled wall time; the realtime ticker calls this."""
        with self._lock:
            now = time.monotonic()
            if not self.running or self._last_wall is None:
                self._last_wall = now
                return
            dt_ms = (now - self._last_wall) * 1000.0 * self.scale
            self._last_wall = now
            if dt_ms >= 1:
                self._advance(self.virtual_now + int(dt_ms))

    def _advance(self, target: int):
        batch = self.sim.advance_to(target)
        readings = (
            self.sensors.readings_between(self.virtual_now, target)
            if target > self.virtual_now
            else []
        )
        appends = []
        for table in schema.TABLE_ORDER:
            if table == "SENSOR_DATA":
                if readings:
                    appends.append((table, readings))
            elif table in batch.rows:
                appends.append((table, batch.rows[table]))
        try:
            if appends or batch.updates:
                self.store.apply_batch(appends, batch.updates)
        except CapacityError:
            if not self._capacity_hit:
                self._capacity_hit = True
                log.warning("store row cap reached; stopping data generation")
            self.running = False
            self.sim.stop()
            return
        self.virtual_now = target

    # -- ticker thread ---------------------------------------------------------

    def start_ticker(self):
        if self.clock_mode != "realtime":
            raise RuntimeError("ticker runs only in realtime mode")
        if self._ticker is not None:
            return
        self._shutdown.clear()

        def loop():
            while not self._shutdown.wait(TICK_INTERVAL_S):
                self.tick()

        self._ticker = threading.Thread(target=loop, name="pipeline-ticker", daemon=True)
        self._ticker.start()

    def stop_ticker(self):
        self._shutdown.set()
        if self._ticker is not None:
            self._ticker.join(timeout=5)
            self._ticker = None

    # -- observability -----------------------------------------------------------

    def metrics_frame(self) -> dict:
        return {
            "wall_time": time.time(),
            "sim_time": self.virtual_now,
            "business_rows_per_s": self.store.ingest_rate("business"),
            "sensor_rows_per_s": self.store.ingest_rate("sensor"),
            "business_rows_total": self.store.total_rows("business"),
            "sensor_rows_total": self.store.total_rows("sensor"),
        }

    def status(self) -> dict:
        return {
            "running": self.running,
            "seed": self.seed,
            "clock": self.clock_mode,
            "scale": self.scale,
            "sim_time": self.virtual_now,
        }
