import io

from plantpulse.integrity import verify_integrity
from plantpulse.pipeline import Pipeline
from plantpulse.query import run_sql


def stepped_pipeline(**kwargs) -> Pipeline:
    return Pipeline(clock_mode="stepped", **kwargs)


def run_for(pipeline: Pipeline, virtual_ms: int, step_ms: int = 100):
    done = 0
    while done < virtual_ms:
        step = min(step_ms, virtual_ms - done)
        pipeline.step(step)
        done += step


def export_all(pipeline: Pipeline) -> dict[str, str]:
    snap = pipeline.store.snapshot()
    out = {}
    for table in pipeline.store.table_names():
        buf = io.StringIO()
        pipeline.store.export_csv(snap, table, buf)
        out[table] = buf.getvalue()
    return out


class TestSteppedDeterminism:
    def test_same_seed_byte_identical_exports(self):
        a, b = stepped_pipeline(seed=42), stepped_pipeline(seed=42)
        for p in (a, b):
            p.start()
            run_for(p, 60_000)
        assert export_all(a) == export_all(b)

    def test_different_seeds_differ(self):
        a, b = stepped_pipeline(seed=1), stepped_pipeline(seed=2)
        for p in (a, b):
            p.start()
            run_for(p, 60_000)
        assert export_all(a) != export_all(b)


class TestIntegrity:
    def test_generated_data_is_invariant_clean(self):
        p = stepped_pipeline(seed=7)
        p.start()
        run_for(p, 120_000)
        assert verify_integrity(p.store.snapshot()) == []

    def test_master_data_counts(self):
        p = stepped_pipeline()
        snap = p.store.snapshot()
        assert run_sql("SELECT COUNT(*) FROM SUPPLIER", snap).rows == [(3,)]
        assert run_sql("SELECT COUNT(*) FROM WORKPLACE", snap).rows == [(4,)]

    def test_sensor_rows_follow_configured_rates(self):
        p = stepped_pipeline(seed=3)
        p.start()
        run_for(p, 60_000)
        count = p.store.snapshot().row_count("SENSOR_DATA")
        # default config: 4 sensors at 10 Hz + 2 at 5 Hz = 50 rows/s
        assert count == 50 * 60


class TestControl:
    def test_not_running_by_default(self):
        p = stepped_pipeline()
        assert p.status()["running"] is False
        p.step(1000)
        assert p.store.snapshot().row_count("SENSOR_DATA") == 0

    def test_stop_freezes_totals(self):
        p = stepped_pipeline(seed=5)
        p.start()
        run_for(p, 30_000)
        p.stop()
        before = p.metrics_frame()
        p.step(10_000)
        after = p.metrics_frame()
        assert before["business_rows_total"] == after["business_rows_total"]
        assert before["sensor_rows_total"] == after["sensor_rows_total"]

    def test_resume_continues_cleanly(self):
        p = stepped_pipeline(seed=5)
        p.start()
        run_for(p, 30_000)
        p.stop()
        p.start()
        run_for(p, 30_000)
        assert verify_integrity(p.store.snapshot()) == []

    def test_config_staging_visible_and_effective(self):
        import json

        p = stepped_pipeline(seed=5)
        doc = p.sensor_config_doc()
        assert doc["revision"] == 1
        single = {"sensors": [dict(doc["sensors"][0], rate_hz=20.0)]}
        revision = p.stage_sensor_config(json.dumps(single))
        assert revision == 2
        assert p.sensor_config_doc()["revision"] == 2
        p.start()
        run_for(p, 10_000)
        assert p.store.snapshot().row_count("SENSOR_DATA") == 200

    def test_capacity_stops_generation(self):
        p = stepped_pipeline(seed=1, max_rows=500)
        p.start()
        run_for(p, 20_000)
        assert p.status()["running"] is False
        assert p.store.total_rows() <= 500


class TestMetricsFrame:
    def test_fresh_frame_zeroes(self):
        p = stepped_pipeline()
        frame = p.metrics_frame()
        assert frame["sensor_rows_total"] == 0
        assert frame["sensor_rows_per_s"] == 0.0
        assert frame["business_rows_total"] == 13  # master data rows
        assert frame["sim_time"] == 0

    def test_totals_grow_monotonically(self):
        p = stepped_pipeline(seed=2)
        p.start()
        last_business, last_sensor = 0, 0
        for _ in range(20):
            p.step(1000)
            frame = p.metrics_frame()
            assert frame["business_rows_total"] >= last_business
            assert frame["sensor_rows_total"] >= last_sensor
            last_business = frame["business_rows_total"]
            last_sensor = frame["sensor_rows_total"]
