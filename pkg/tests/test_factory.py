import pytest

from plantpulse.factory import (
    EmittedBatch,
    FactorySim,
    MasterData,
    RoutingStep,
    default_master_data,
)


def drain(sim: FactorySim, until_ms: int, step_ms: int = 1000) -> list[str]:
    """Advance in fixed steps, serializing rows per table plus the update stream.

    Output is grouped by table at the end so that it is comparable across
    different step sizes (batch boundaries regroup rows, but each table's
    row sequence and the update sequence must be identical).
    """
    per_table: dict[str, list[str]] = {}
    updates: list[str] = []
    t = sim.now
    while t < until_ms:
        t = min(t + step_ms, until_ms)
        batch = sim.advance_to(t)
        for table, rows in batch.rows.items():
            per_table.setdefault(table, []).extend(repr(row) for row in rows)
        updates.extend(repr(u) for u in batch.updates)
    out = []
    for table in sorted(per_table):
        out.extend(f"{table}|{line}" for line in per_table[table])
    out.extend(f"UPDATE|{line}" for line in updates)
    return out


def collect_rows(lines, table):
    prefix = table + "|"
    return [l for l in lines if l.startswith(prefix)]


class TestDeterminism:
    def test_same_seed_identical_output(self):
        a = FactorySim(seed=42)
        b = FactorySim(seed=42)
        a.start(), b.start()
        assert drain(a, 60_000) == drain(b, 60_000)

    def test_different_seeds_diverge(self):
        a = FactorySim(seed=7)
        b = FactorySim(seed=8)
        a.start(), b.start()
        assert drain(a, 60_000) != drain(b, 60_000)

    def test_step_size_does_not_change_output(self):
        a = FactorySim(seed=42)
        b = FactorySim(seed=42)
        a.start(), b.start()
        assert drain(a, 60_000, step_ms=100) == drain(b, 60_000, step_ms=7_000)


class TestPreconditions:
    def test_empty_products_rejected(self):
        master = default_master_data()
        master.products = []
        with pytest.raises(ValueError):
            FactorySim(seed=1, master=master)

    def test_routing_must_reference_known_workplace(self):
        master = default_master_data()
        master.routings[1] = [RoutingStep(workplace_id=99)]
        with pytest.raises(ValueError):
            FactorySim(seed=1, master=master)

    def test_advance_into_past_rejected(self):
        sim = FactorySim(seed=1)
        sim.start()
        sim.advance_to(5_000)
        with pytest.raises(ValueError):
            sim.advance_to(4_999)


class TestGeneration:
    def test_no_due_events_empty_batch(self):
        sim = FactorySim(seed=1)
        sim.start()
        batch = sim.advance_to(sim.now)
        assert batch.is_empty()

    def test_position_intervals_are_ordered_per_head(self):
        sim = FactorySim(seed=42)
        sim.start()
        positions = {}
        left_at = {}
        t = 0
        while t < 3_600_000:
            t += 10_000
            batch = sim.advance_to(t)
            for row in batch.rows.get("PRODUCTION_ORDER_POSITION", []):
                positions.setdefault(row.head_id, []).append(row)
            for table, row_id, col, value in batch.updates:
                if table == "PRODUCTION_ORDER_POSITION" and col == "LEFT_AT":
                    left_at[row_id] = value
        assert len(positions) > 100
        for head_id, rows in positions.items():
            rows.sort(key=lambda r: r.seq_no)
            for earlier, later in zip(rows, rows[1:]):
                assert earlier.id in left_at
                assert later.entered_at >= left_at[earlier.id]

    def test_zero_jitter_duration_is_exact(self):
        master = default_master_data()
        routing = [RoutingStep(1, 5000, 0.0)]
        master.routings = {1: routing, 2: routing}
        sim = FactorySim(seed=3, master=master)
        sim.start()
        entered = {}
        durations = []
        t = 0
        while t < 600_000:
            t += 1_000
            batch = sim.advance_to(t)
            for row in batch.rows.get("PRODUCTION_ORDER_POSITION", []):
                entered[row.id] = row.entered_at
            for table, row_id, col, value in batch.updates:
                if table == "PRODUCTION_ORDER_POSITION" and col == "LEFT_AT":
                    durations.append(value - entered[row_id])
        assert durations and all(d == 5000 for d in durations)

    def test_liveness_at_desk_scale(self):
        sim = FactorySim(seed=42, arrival_mean_ms=1000)
        sim.start()
        lines = drain(sim, 600_000)
        business_rows = [l for l in lines if not l.startswith("UPDATE|")]
        assert len(business_rows) >= 500

    def test_conservation_of_finished_orders(self):
        sim = FactorySim(seed=11)
        sim.start()
        heads = set()
        finished = set()
        positions = {}
        left = set()
        t = 0
        while t < 1_200_000:
            t += 5_000
            batch = sim.advance_to(t)
            for row in batch.rows.get("PRODUCTION_ORDER_HEAD", []):
                heads.add(row.id)
            for row in batch.rows.get("PRODUCTION_ORDER_POSITION", []):
                positions.setdefault(row.head_id, []).append(row.id)
            for table, row_id, col, value in batch.updates:
                if table == "PRODUCTION_ORDER_HEAD" and col == "FINISHED_AT":
                    finished.add(row_id)
                if table == "PRODUCTION_ORDER_POSITION" and col == "LEFT_AT":
                    left.add(row_id)
        fully_left = {
            h for h, pos in positions.items()
            if len(pos) == 2 and all(p in left for p in pos)
        }
        assert finished == fully_left

    def test_sales_item_product_matches_production_order(self):
        sim = FactorySim(seed=5)
        sim.start()
        head_product = {}
        item_product = {}
        links = {}
        t = 0
        while t < 300_000:
            t += 5_000
            batch = sim.advance_to(t)
            for row in batch.rows.get("PRODUCTION_ORDER_HEAD", []):
                head_product[row.id] = row.product_id
            for row in batch.rows.get("SALES_ORDER_ITEM", []):
                item_product[row.id] = row.product_id
            for table, row_id, col, value in batch.updates:
                if table == "PRODUCTION_ORDER_HEAD" and col == "SALES_ORDER_ITEM_ID":
                    links[row_id] = value
        assert links
        for head_id, item_id in links.items():
            assert head_product[head_id] == item_product[item_id]


class TestStartStop:
    def test_stopped_engine_emits_nothing(self):
        sim = FactorySim(seed=1)
        sim.start()
        sim.advance_to(10_000)
        sim.stop()
        batch = sim.advance_to(20_000)
        assert batch.is_empty()

    def test_double_start_is_idempotent(self):
        sim = FactorySim(seed=1)
        assert sim.start() is True
        assert sim.start() is True
        assert sim.stop() is False
        assert sim.stop() is False

    def test_resume_has_no_duplicate_ids(self):
        sim = FactorySim(seed=9)
        sim.start()
        lines = drain(sim, 120_000)
        sim.stop()
        sim.advance_to(sim.now + 60_000)
        sim.start()
        lines += drain(sim, sim.now + 120_000)
        seen = {}
        for line in lines:
            if line.startswith("UPDATE|"):
                continue
            table = line.split("|", 1)[0]
            row_repr = line.split("|", 1)[1]
            row_id = int(row_repr.split("id=")[1].split(",")[0].rstrip(")"))
            key = (table, row_id)
            assert key not in seen, f"duplicate {key}"
            seen[key] = True
        assert seen
