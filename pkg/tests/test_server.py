import json
import threading
import time

import pytest
import requests

from plantpulse.pipeline import Pipeline
from plantpulse.server import AppServer


@pytest.fixture()
def server():
    app = AppServer(Pipeline(seed=42), port=0)
    app.start()
    yield app
    app.stop()


@pytest.fixture()
def base(server):
    return f"http://127.0.0.1:{server.port}"


class TestSimControl:
    def test_status_starts_stopped(self, base):
        status = requests.get(f"{base}/api/sim/status").json()
        assert status["running"] is False

    def test_start_and_stop_echo_state(self, base):
        assert requests.post(f"{base}/api/sim/start").json() == {"running": True}
        assert requests.get(f"{base}/api/sim/status").json()["running"] is True
        assert requests.post(f"{base}/api/sim/stop").json() == {"running": False}

    def test_start_is_idempotent(self, base):
        requests.post(f"{base}/api/sim/start")
        assert requests.post(f"{base}/api/sim/start").json() == {"running": True}

    def test_stopped_totals_do_not_grow(self, base):
        requests.post(f"{base}/api/sim/start")
        time.sleep(0.5)
        requests.post(f"{base}/api/sim/stop")
        time.sleep(0.3)  # let in-flight ticks settle
        first = requests.get(f"{base}/api/metrics").json()
        time.sleep(1.0)
        second = requests.get(f"{base}/api/metrics").json()
        assert first["business_rows_total"] == second["business_rows_total"]
        assert first["sensor_rows_total"] == second["sensor_rows_total"]


class TestMetrics:
    def test_fresh_server_zero_rates(self, base):
        frame = requests.get(f"{base}/api/metrics").json()
        assert frame["sensor_rows_total"] == 0
        assert frame["sensor_rows_per_s"] == 0.0
        assert frame["business_rows_per_s"] == 0.0

    def test_stream_emits_metric_events(self, base):
        with requests.get(f"{base}/api/metrics/stream", stream=True, timeout=10) as r:
            assert r.headers["Content-Type"].startswith("text/event-stream")
            events = []
            for line in r.iter_lines():
                if line.startswith(b"data: "):
                    events.append(json.loads(line[6:]))
                    if len(events) == 3:
                        break
        assert all("sensor_rows_per_s" in e for e in events)
        assert all("wall_time" in e for e in events)

    def test_two_stream_clients_get_similar_frame_counts(self, base):
        counts = [0, 0]

        def consume(slot):
            deadline = time.monotonic() + 4.0
            with requests.get(f"{base}/api/metrics/stream", stream=True, timeout=10) as r:
                for line in r.iter_lines():
                    if line.startswith(b"data: "):
                        counts[slot] += 1
                    if time.monotonic() > deadline:
                        break

        threads = [threading.Thread(target=consume, args=(i,)) for i in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert abs(counts[0] - counts[1]) <= 1
        assert counts[0] >= 2


class TestSensorConfig:
    def test_get_default_document(self, base):
        doc = requests.get(f"{base}/api/sensors/config").json()
        assert doc["revision"] == 1
        assert len(doc["sensors"]) == 6

    def test_put_round_trip(self, base):
        doc = requests.get(f"{base}/api/sensors/config").json()
        doc["sensors"][0]["rate_hz"] = doc["sensors"][0]["rate_hz"] * 2
        response = requests.put(f"{base}/api/sensors/config", json={"sensors": doc["sensors"]})
        assert response.status_code == 200
        assert response.json()["revision"] == 2
        fetched = requests.get(f"{base}/api/sensors/config").json()
        assert fetched["sensors"][0]["rate_hz"] == doc["sensors"][0]["rate_hz"]
        assert fetched["revision"] == 2

    def test_put_unknown_workplace_rejected_atomically(self, base):
        before = requests.get(f"{base}/api/sensors/config").json()
        bad = {"sensors": [dict(before["sensors"][0], workplace_id=99)]}
        response = requests.put(f"{base}/api/sensors/config", json=bad)
        assert response.status_code == 400
        assert any("unknown workplace 99" in e for e in response.json()["errors"])
        after = requests.get(f"{base}/api/sensors/config").json()
        assert after == before


class TestQueryEndpoint:
    def test_count_supplier_default_master_data(self, base):
        response = requests.post(f"{base}/api/query", json={"sql": "SELECT COUNT(*) FROM SUPPLIER"})
        assert response.status_code == 200
        payload = response.json()
        assert payload["rows"] == [[3]]
        assert payload["columns"] == [{"name": "COUNT(*)", "type": "int64"}]
        assert payload["elapsed_ms"] >= 0

    def test_malformed_sql_maps_to_400_with_offset(self, base):
        response = requests.post(f"{base}/api/query", json={"sql": "SELEC * FROM X"})
        assert response.status_code == 400
        assert response.json()["offset"] == 0

    def test_semantic_error_maps_to_400(self, base):
        response = requests.post(f"{base}/api/query", json={"sql": "SELECT NOPE FROM SUPPLIER"})
        assert response.status_code == 400
        assert "NOPE" in response.json()["error"]

    def test_missing_body_maps_to_400(self, base):
        response = requests.post(f"{base}/api/query", data=b"not json")
        assert response.status_code == 400

    def test_resource_guard_maps_to_422(self):
        app = AppServer(Pipeline(seed=1), port=0, max_intermediate=5)
        app.start()
        try:
            base = f"http://127.0.0.1:{app.port}"
            sql = "SELECT S.ID FROM SUPPLIER S JOIN WORKPLACE W ON W.ID >= S.ID"
            response = requests.post(f"{base}/api/query", json={"sql": sql})
            assert response.status_code == 422
            assert "guard" in response.json()["error"]
        finally:
            app.stop()

    def test_predefined_query_during_ingestion(self, base):
        requests.post(f"{base}/api/sim/start")
        entries = requests.get(f"{base}/api/query/predefined").json()
        time.sleep(1.0)
        response = requests.post(f"{base}/api/query", json={"sql": entries[0]["sql"]})
        assert response.status_code == 200
        assert len(response.json()["rows"]) <= 10


class TestCatalogEndpoints:
    def test_predefined_list(self, base):
        entries = requests.get(f"{base}/api/query/predefined").json()
        assert len(entries) == 2
        assert {e["name"] for e in entries} == {
            "recent-products-cutting",
            "vibration-by-supplier",
        }
        for entry in entries:
            response = requests.post(f"{base}/api/query", json={"sql": entry["sql"]})
            assert response.status_code == 200

    def test_tables_catalog(self, base):
        tables = requests.get(f"{base}/api/tables").json()
        assert len(tables) == 12
        sensor = next(t for t in tables if t["name"] == "SENSOR_DATA")
        assert [c["name"] for c in sensor["columns"]] == [
            "ID", "WORKPLACE_ID", "SENSOR_ID", "DATE",
            "TEMPERATURE_VALUE", "TEMPERATURE_UNIT",
            "NOISE_VALUE", "NOISE_UNIT",
            "VIBRATION_VALUE", "VIBRATION_UNIT",
        ]

    def test_cors_headers_present(self, base):
        response = requests.get(f"{base}/api/metrics")
        assert response.headers["Access-Control-Allow-Origin"] == "*"
        preflight = requests.options(f"{base}/api/query")
        assert preflight.status_code == 204
        assert "POST" in preflight.headers["Access-Control-Allow-Methods"]

    def test_unknown_path_404(self, base):
        assert requests.get(f"{base}/api/nope").status_code == 404
        assert requests.post(f"{base}/api/nope").status_code == 404
